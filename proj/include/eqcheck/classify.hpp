#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eqcheck/curvature.hpp"
#include "eqcheck/error.hpp"
#include "eqcheck/manifold.hpp"
#include "eqcheck/parallel.hpp"
#include "eqcheck/tensor.hpp"

namespace eqcheck {

/// Generator vectors U, V, T and their 1-forms A, B, D at one point.
struct TripleAt {
    Vector u, v, t;
    Vector a, b, d;
    bool forms_declared = false;
};

/// Resolves the spec's generator triple at the frame's point. Forms come from the spec
/// when declared, otherwise they are the lowered fields.
inline TripleAt triple_at(const ManifoldSpec& spec, const PointFrame& f) {
    if (!spec.generators) throw PreconditionError("'" + spec.name + "' declares no generator triple");
    const auto& gen = *spec.generators;
    TripleAt t;
    t.u = eval_components(find_vector_field(spec, gen.u), f.point);
    t.v = eval_components(find_vector_field(spec, gen.v), f.point);
    t.t = eval_components(find_vector_field(spec, gen.t), f.point);
    if (gen.forms) {
        t.a = eval_components(find_one_form(spec, (*gen.forms)[0]), f.point);
        t.b = eval_components(find_one_form(spec, (*gen.forms)[1]), f.point);
        t.d = eval_components(find_one_form(spec, (*gen.forms)[2]), f.point);
        t.forms_declared = true;
    } else {
        t.a = lower(f.g, t.u);
        t.b = lower(f.g, t.v);
        t.d = lower(f.g, t.t);
    }
    return t;
}

/// Max of the six Gram residuals of (U, V, T) under g.
inline double gram_residual(const Matrix& g, const TripleAt& t) {
    return std::max({std::abs(bilinear(g, t.u, t.u) - 1.0), std::abs(bilinear(g, t.v, t.v) - 1.0),
                     std::abs(bilinear(g, t.t, t.t) - 1.0), std::abs(bilinear(g, t.u, t.v)),
                     std::abs(bilinear(g, t.u, t.t)), std::abs(bilinear(g, t.v, t.t))});
}

enum class CoefficientSource { Extracted, Declared };

struct EqCoefficients {
    double a = 0.0, b = 0.0, c = 0.0;
    CoefficientSource source = CoefficientSource::Extracted;
    double a_cross = 0.0;             // Ric(T,T)
    double a_spread = 0.0;            // |a - Ric(T,T)|
    double mixed_residual = 0.0;      // max(|Ric(U,V)|, |Ric(U,T)|)
};

inline constexpr double kHardOrthonormality = 1e-6;

/// a = Ric(V,V), b = Ric(U,U) - a, c = Ric(T,V), read off the Ricci tensor the frame uses.
inline EqCoefficients extract_coefficients(const PointFrame& f, const TripleAt& t,
                                           double hard_threshold = kHardOrthonormality) {
    const double gram = gram_residual(f.g, t);
    if (gram > hard_threshold)
        throw PreconditionError("generator triple is not orthonormal at " + detail::point_text(f.point) +
                                " (Gram residual " + format_double(gram) + ")");
    const Matrix& ric = f.ricci();
    EqCoefficients k;
    k.a = bilinear(ric, t.v, t.v);
    k.b = bilinear(ric, t.u, t.u) - k.a;
    k.c = bilinear(ric, t.t, t.v);
    k.a_cross = bilinear(ric, t.t, t.t);
    k.a_spread = std::abs(k.a - k.a_cross);
    k.mixed_residual = std::max(std::abs(bilinear(ric, t.u, t.v)), std::abs(bilinear(ric, t.u, t.t)));
    return k;
}

/// Coefficients from the spec's declared scalar expressions a, b, c.
inline EqCoefficients declared_coefficients(const ManifoldSpec& spec, std::span<const double> point) {
    auto get = [&](const char* name) {
        auto it = spec.scalars.find(name);
        if (it == spec.scalars.end()) throw PreconditionError(std::string("scalar '") + name + "' is not declared");
        return eval_value(it->second, point);
    };
    EqCoefficients k;
    k.a = get("a");
    k.b = get("b");
    k.c = get("c");
    k.source = CoefficientSource::Declared;
    return k;
}

inline bool has_declared_coefficients(const ManifoldSpec& spec) {
    return spec.scalars.contains("a") && spec.scalars.contains("b") && spec.scalars.contains("c");
}

struct MatrixResidual {
    Matrix residual;
    double max_abs = 0.0;
};

/// Ric - a g - b A⊗A - c (B⊗D + D⊗B).
inline MatrixResidual decomposition_residual(const PointFrame& f, const TripleAt& t, const EqCoefficients& k) {
    const int n = f.n;
    const Matrix& ric = f.ricci();
    MatrixResidual out{Matrix(n), 0.0};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const auto si = static_cast<std::size_t>(i), sj = static_cast<std::size_t>(j);
            const double v = ric(i, j) - k.a * f.g(i, j) - k.b * t.a[si] * t.a[sj] -
                             k.c * (t.b[si] * t.d[sj] + t.d[si] * t.b[sj]);
            out.residual(i, j) = v;
            out.max_abs = std::max(out.max_abs, std::abs(v));
        }
    return out;
}

/// Max-abs of the residual restricted to the listed (i, j) components.
inline double restricted_max(const Matrix& residual, std::span<const std::pair<int, int>> components) {
    double m = 0.0;
    for (auto [i, j] : components) m = std::max(m, std::abs(residual(i, j)));
    return m;
}

inline double einstein_residual(const PointFrame& f) {
    const Matrix& ric = f.ricci();
    const double r = f.scalar_curvature();
    double m = 0.0;
    for (int i = 0; i < f.n; ++i)
        for (int j = 0; j < f.n; ++j) m = std::max(m, std::abs(ric(i, j) - r / f.n * f.g(i, j)));
    return m;
}

enum class Family { Einstein, QuasiEinstein, MixedQuasiEinstein, ExtendedQuasiEinstein, PseudoQuasiEinstein, None };

inline std::string_view family_name(Family f) {
    switch (f) {
    case Family::Einstein: return "einstein";
    case Family::QuasiEinstein: return "quasi-einstein";
    case Family::MixedQuasiEinstein: return "mixed-quasi-einstein";
    case Family::ExtendedQuasiEinstein: return "extended-quasi-einstein";
    case Family::PseudoQuasiEinstein: return "pseudo-quasi-einstein";
    case Family::None: return "none";
    }
    return "none";
}

struct Classification {
    Family label = Family::None;
    EqCoefficients coefficients;
    double einstein_residual = 0.0;
    double decomposition_residual = 0.0;
    /// E := Ric - a g - b A⊗A; pseudo quasi-Einstein asks for tr E = 0 and E(·,U) = 0.
    double pseudo_trace = 0.0;
    double pseudo_u = 0.0;
};

inline Classification family_classification(const PointFrame& f, const TripleAt& t, double tol) {
    Classification c;
    c.einstein_residual = einstein_residual(f);
    c.coefficients = extract_coefficients(f, t);
    const auto& k = c.coefficients;
    c.decomposition_residual = decomposition_residual(f, t, k).max_abs;

    const int n = f.n;
    Matrix e(n);
    const Matrix& ric = f.ricci();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            e(i, j) = ric(i, j) - k.a * f.g(i, j) - k.b * t.a[static_cast<std::size_t>(i)] * t.a[static_cast<std::size_t>(j)];
    c.pseudo_trace = std::abs(trace_with(f.ginv, e));
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += e(i, j) * t.u[static_cast<std::size_t>(j)];
        c.pseudo_u = std::max(c.pseudo_u, std::abs(s));
    }

    const bool b0 = std::abs(k.b) <= tol, c0 = std::abs(k.c) <= tol;
    if (c.einstein_residual < tol)
        c.label = Family::Einstein;
    else if (c.decomposition_residual < tol && c0 && !b0)
        c.label = Family::QuasiEinstein;
    else if (c.decomposition_residual < tol && b0 && !c0)
        c.label = Family::MixedQuasiEinstein;
    else if (c.decomposition_residual < tol && !b0 && !c0)
        c.label = Family::ExtendedQuasiEinstein;
    else if (c.pseudo_trace < tol && c.pseudo_u < tol)
        c.label = Family::PseudoQuasiEinstein;
    return c;
}

struct ScalarIdentities {
    double r = 0.0;
    double r_expected = 0.0;       // n a + b
    double r_residual = 0.0;
    double l2 = 0.0;               // sum Ric(Q e_i, e_i), orthonormal e_i
    double l2_trace = 0.0;         // tr(Q^2), frame-free cross-check
    double l2_expected = 0.0;      // (n-1)a^2 + (a+b)^2 + 2c^2
    double l2_residual = 0.0;
    bool bound_checked = false;    // |a| above tolerance
    bool bound_holds = true;       // 2c^2 < l^2
};

/// Orthonormal basis (columns) of the tangent space by Gram-Schmidt on the coordinate basis.
inline std::vector<Vector> orthonormal_basis(const Matrix& g) {
    const int n = g.dim();
    std::vector<Vector> basis;
    for (int k = 0; k < n; ++k) {
        Vector e(static_cast<std::size_t>(n), 0.0);
        e[static_cast<std::size_t>(k)] = 1.0;
        for (const auto& q : basis) {
            const double p = bilinear(g, e, q);
            for (int i = 0; i < n; ++i) e[static_cast<std::size_t>(i)] -= p * q[static_cast<std::size_t>(i)];
        }
        const double norm = std::sqrt(bilinear(g, e, e));
        if (!(norm > 0.0)) throw NumericError("metric is degenerate in Gram-Schmidt");
        for (auto& x : e) x /= norm;
        basis.push_back(std::move(e));
    }
    return basis;
}

inline ScalarIdentities scalar_identities(const PointFrame& f, const EqCoefficients& k, double tol) {
    const int n = f.n;
    ScalarIdentities s;
    s.r = f.scalar_curvature();
    s.r_expected = n * k.a + k.b;
    s.r_residual = std::abs(s.r - s.r_expected);

    const Matrix ric2 = f.ricci_squared();
    for (const auto& e : orthonormal_basis(f.g)) s.l2 += bilinear(ric2, e, e);
    const Matrix q = f.ricci_operator();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s.l2_trace += q(i, j) * q(j, i);

    s.l2_expected = (n - 1) * k.a * k.a + (k.a + k.b) * (k.a + k.b) + 2.0 * k.c * k.c;
    s.l2_residual = std::abs(s.l2 - s.l2_expected);
    s.bound_checked = std::abs(k.a) > tol;
    if (s.bound_checked) s.bound_holds = 2.0 * k.c * k.c < s.l2;
    return s;
}

struct ExistenceConstruction {
    double a1 = 0.0, a2 = 0.0;
    Vector omega, omega1, omega2;
    double a = 0.0, b = 0.0, c = 0.0;
    double decomposition_residual = 0.0;
    double hypothesis_residual = 0.0;
    std::size_t tuples_checked = 0;
};

/// LHS - RHS of the existence hypothesis on vectors (X, Y, Z, W).
inline double existence_hypothesis(const Matrix& g, const Matrix& ric, const Matrix& ric2, double a1, double a2,
                                   std::span<const double> x, std::span<const double> y, std::span<const double> z,
                                   std::span<const double> w) {
    const double lhs = bilinear(ric, x, w) * bilinear(g, y, z) + bilinear(ric, y, z) * bilinear(g, x, w);
    const double rhs = a1 * (bilinear(g, x, w) * bilinear(g, y, z) + bilinear(g, y, w) * bilinear(g, x, z)) +
                       a2 * (bilinear(ric, x, z) * bilinear(ric2, y, w) + bilinear(ric, y, w) * bilinear(ric2, x, z));
    return lhs - rhs;
}

/// Builds a, b, c and the 1-forms of the existence construction from U, and measures both
/// the resulting decomposition and the hypothesis relation itself.
inline ExistenceConstruction existence_relation(const PointFrame& f, std::span<const double> u, double a1, double a2,
                                                std::uint64_t seed = 0) {
    if (a1 == 0.0 || a2 == 0.0) throw PreconditionError("a1 and a2 must be non-zero");
    const int n = f.n;
    const double guu = bilinear(f.g, u, u);
    if (std::abs(guu) <= 1e-14) throw PreconditionError("U is null at " + detail::point_text(f.point));

    const Matrix& ric = f.ricci();
    const Matrix ric2 = f.ricci_squared();
    ExistenceConstruction x;
    x.a1 = a1;
    x.a2 = a2;
    x.omega = lower(f.g, u);
    x.omega1 = lower(ric, u);
    x.omega2 = lower(ric2, u);
    x.a = a1 - bilinear(ric, u, u) / guu;
    x.b = a1 / guu;
    x.c = a2 / guu;

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const auto si = static_cast<std::size_t>(i), sj = static_cast<std::size_t>(j);
            const double v = ric(i, j) - x.a * f.g(i, j) - x.b * x.omega[si] * x.omega[sj] -
                             x.c * (x.omega1[si] * x.omega2[sj] + x.omega2[si] * x.omega1[sj]);
            x.decomposition_residual = std::max(x.decomposition_residual, std::abs(v));
        }

    auto basis = [n](int k) {
        Vector e(static_cast<std::size_t>(n), 0.0);
        e[static_cast<std::size_t>(k)] = 1.0;
        return e;
    };
    if (n <= 4) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) {
                        const double r = existence_hypothesis(f.g, ric, ric2, a1, a2, basis(i), basis(j), basis(k), basis(l));
                        x.hypothesis_residual = std::max(x.hypothesis_residual, std::abs(r));
                        ++x.tuples_checked;
                    }
    } else {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal;
        auto draw = [&] {
            Vector v(static_cast<std::size_t>(n));
            for (auto& c : v) c = normal(rng);
            return v;
        };
        for (int s = 0; s < 200; ++s) {
            const Vector p = draw(), q = draw(), r = draw(), w = draw();
            x.hypothesis_residual =
                std::max(x.hypothesis_residual, std::abs(existence_hypothesis(f.g, ric, ric2, a1, a2, p, q, r, w)));
            ++x.tuples_checked;
        }
    }
    return x;
}

struct PointCurvature {
    double mean_k = 0.0;
    double min_k = 0.0, max_k = 0.0;
    double isotropy_spread = 0.0;
    double einstein_residual = 0.0;  // computed Ricci
};

struct ConstantCurvatureReport {
    std::vector<PointCurvature> points;
    double max_isotropy_spread = 0.0;
    double cross_point_spread = 0.0;
    /// Three-dimensional charts only: Einstein at every point must imply isotropy.
    bool corollary_applicable = false;
    bool corollary_holds = true;
};

/// Sectional curvatures of `planes` random planes at one point, seeded per point.
inline PointCurvature sample_sectional(const PointFrame& f, int planes, std::uint64_t seed) {
    const int n = f.n;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    auto draw = [&] {
        Vector v(static_cast<std::size_t>(n));
        for (auto& c : v) c = normal(rng);
        return v;
    };
    PointCurvature pc;
    double sum = 0.0;
    for (int p = 0; p < planes; ++p) {
        double k = 0.0;
        int attempt = 0;
        for (;; ++attempt) {
            if (attempt == 16) throw NumericError("could not draw a non-degenerate plane");
            const Vector x = draw(), y = draw();
            try {
                k = sectional_curvature(f, x, y);
                break;
            } catch (const NumericError&) {
            }
        }
        if (p == 0) pc.min_k = pc.max_k = k;
        pc.min_k = std::min(pc.min_k, k);
        pc.max_k = std::max(pc.max_k, k);
        sum += k;
    }
    pc.mean_k = sum / planes;
    pc.isotropy_spread = pc.max_k - pc.min_k;
    return pc;
}

inline ConstantCurvatureReport constant_curvature_check(const ManifoldSpec& spec, std::span<const Vector> points,
                                                        int planes, std::uint64_t seed, double tol) {
    if (points.size() < 2) throw PreconditionError("constant-curvature check needs at least 2 sample points");
    if (planes < 10) throw PreconditionError("constant-curvature check needs at least 10 planes per point");
    if (spec.dimension < 2) throw PreconditionError("sectional curvature needs dimension >= 2");

    ConstantCurvatureReport rep;
    rep.points = parallel_map(points.size(), [&](std::size_t i) {
        const PointFrame f = build_frame(spec, points[i]);
        PointCurvature pc = sample_sectional(f, planes, point_seed(seed, i));
        pc.einstein_residual = einstein_residual(f);
        return pc;
    });
    double lo = rep.points.front().mean_k, hi = lo;
    bool all_einstein = true;
    for (const auto& p : rep.points) {
        rep.max_isotropy_spread = std::max(rep.max_isotropy_spread, p.isotropy_spread);
        lo = std::min(lo, p.mean_k);
        hi = std::max(hi, p.mean_k);
        all_einstein = all_einstein && p.einstein_residual < tol;
    }
    rep.cross_point_spread = hi - lo;
    rep.corollary_applicable = spec.dimension == 3;
    if (rep.corollary_applicable && all_einstein) rep.corollary_holds = rep.max_isotropy_spread < tol;
    return rep;
}

} // namespace eqcheck
