#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eqcheck/error.hpp"
#include "eqcheck/expr.hpp"
#include "eqcheck/jet.hpp"
#include "eqcheck/manifold.hpp"
#include "eqcheck/tensor.hpp"

namespace eqcheck {

/// Which Ricci tensor downstream checks read from a frame.
enum class RicciSource { Computed, Declared };

struct FrameOptions {
    RicciSource ricci = RicciSource::Computed;
    /// Keep first derivatives of R_ijkl (n^5 doubles) for the second Bianchi identity.
    bool riemann_gradient = false;
};

/// Every curvature object at one point.
///
/// Conventions (all indices 0-based):
///   dg(k,i,j)      = d_k g_ij
///   gamma(k,i,j)   = Gamma^k_ij
///   dgamma(l,k,i,j)= d_l Gamma^k_ij
///   riemann(i,j,k,l) = R(d_i, d_j, d_k, d_l) = g(R(d_i,d_j)d_k, d_l),
///       R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z
///   ricci(j,k)     = g^il R_ijkl   (+g on the unit 2-sphere)
///   nabla_ricci(k,i,j) = (nabla_k Ric)_ij
struct PointFrame {
    int n = 0;
    Vector point;
    Matrix g, ginv;
    Tensor3 dg;
    Tensor3 gamma;
    Tensor4 dgamma;
    Tensor4 riemann;
    Matrix ricci_computed;
    double scalar_computed = 0.0;
    Tensor3 nabla_ricci_computed;
    std::optional<Matrix> ricci_declared;
    std::optional<double> scalar_declared;
    std::optional<Tensor3> nabla_ricci_declared;
    std::optional<Tensor5> riemann_gradient;  // (m,i,j,k,l) = d_m R_ijkl
    RicciSource source = RicciSource::Computed;

    const Matrix& ricci() const { return source == RicciSource::Declared ? *ricci_declared : ricci_computed; }
    double scalar_curvature() const { return source == RicciSource::Declared ? *scalar_declared : scalar_computed; }
    const Tensor3& nabla_ricci() const {
        return source == RicciSource::Declared ? *nabla_ricci_declared : nabla_ricci_computed;
    }

    /// Q^i_j with Ric(X,Y) = g(QX,Y).
    Matrix ricci_operator() const { return matmul(ginv, ricci()); }
    /// Ric^2(X,Y) = Ric(QX,Y) = (Ric g^-1 Ric)
    Matrix ricci_squared() const { return matmul(ricci(), matmul(ginv, ricci())); }
};

/// Ric_jk = g^il R_ijkl. The frame's Ricci values come from this function.
inline Matrix contract_ricci(const Matrix& ginv, const Tensor4& riemann) {
    const int n = ginv.dim();
    Matrix ric(n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                for (int l = 0; l < n; ++l) s += ginv(i, l) * riemann(i, j, k, l);
            ric(j, k) = s;
        }
    return ric;
}

inline double trace_with(const Matrix& ginv, const Matrix& t) {
    double s = 0.0;
    for (int i = 0; i < ginv.dim(); ++i)
        for (int j = 0; j < ginv.dim(); ++j) s += ginv(i, j) * t(i, j);
    return s;
}

/// (nabla_k T)_ij for a symmetric (0,2) tensor given its values and partials dT(k,i,j).
inline Tensor3 covariant_derivative_02(const Tensor3& gamma, const Matrix& t, const Tensor3& dt) {
    const int n = t.dim();
    Tensor3 out(n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double v = dt(k, i, j);
                for (int m = 0; m < n; ++m) v -= gamma(m, k, i) * t(m, j) + gamma(m, k, j) * t(i, m);
                out(k, i, j) = v;
            }
    return out;
}

namespace detail {

using JetMatrix = Tensor<2, Jet3>;

inline JetMatrix jet_matmul(const JetMatrix& a, const JetMatrix& b) {
    const int n = a.dim();
    JetMatrix c(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Jet3 s = a(i, 0) * b(0, j);
            for (int k = 1; k < n; ++k) s += a(i, k) * b(k, j);
            c(i, j) = std::move(s);
        }
    return c;
}

/// Jets of g^-1 from jets of g: with H = g(p)^-1 and E = H (g - g(p)),
/// g^-1 = H - E H + E^2 H - E^3 H, exact through third order.
inline JetMatrix inverse_jets(const JetMatrix& gj, const Matrix& h) {
    const int n = gj.dim();
    const int dim = gj(0, 0).dim();
    const int order = gj(0, 0).order();
    JetMatrix hj(n), e(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) hj(i, j) = Jet3::constant(dim, order, h(i, j));
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            Jet3 s(dim, order);
            for (int j = 0; j < n; ++j) {
                Jet3 delta = gj(j, k);
                delta.set_value(0.0);
                s += h(i, j) * delta;
            }
            e(i, k) = std::move(s);
        }
    // Horner: H - E(H - E(H - E H))
    JetMatrix acc = hj;
    for (int step = 0; step < order; ++step) {
        JetMatrix prod = jet_matmul(e, acc);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) acc(i, j) = hj(i, j) - prod(i, j);
    }
    return acc;
}

inline Tensor<2, Jet3> eval_matrix_jets(const Tensor<2, ScalarExpr>& m, std::span<const double> point, int order) {
    const int n = m.dim();
    Tensor<2, Jet3> out(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            out(i, j) = eval_jet(m(i, j), point, order);
            if (j != i) out(j, i) = out(i, j);
        }
    return out;
}

} // namespace detail

inline PointFrame build_frame(const ManifoldSpec& spec, std::span<const double> point, FrameOptions opt = {}) {
    const int n = spec.dimension;
    if (static_cast<int>(point.size()) != n)
        throw PreconditionError("point has dimension " + std::to_string(point.size()) + ", chart has " + std::to_string(n));
    if (opt.ricci == RicciSource::Declared && !spec.declared_ricci)
        throw PreconditionError("declared-ricci mode requested but '" + spec.name + "' declares no Ricci tensor");

    PointFrame f;
    f.n = n;
    f.point.assign(point.begin(), point.end());
    f.source = opt.ricci;

    const auto gj = detail::eval_matrix_jets(spec.metric, point, 3);
    f.g = Matrix(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) f.g(i, j) = gj(i, j).value();
    f.ginv = invert(f.g).inverse;
    const auto ginvj = detail::inverse_jets(gj, f.ginv);

    // d_k g_ij as order-2 jets
    Tensor<3, Jet3> dgj(n);
    f.dg = Tensor3(n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                dgj(k, i, j) = gj(i, j).partial(k);
                f.dg(k, i, j) = dgj(k, i, j).value();
            }

    // Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij), order-2 jets
    Tensor<3, Jet3> gj3(n);
    f.gamma = Tensor3(n);
    f.dgamma = Tensor4(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            std::vector<Jet3> first;  // Gamma_{l,ij}
            first.reserve(static_cast<std::size_t>(n));
            for (int l = 0; l < n; ++l) first.push_back(0.5 * (dgj(i, j, l) + dgj(j, i, l) - dgj(l, i, j)));
            for (int k = 0; k < n; ++k) {
                Jet3 s = ginvj(k, 0).truncated(2) * first[0];
                for (int l = 1; l < n; ++l) s += ginvj(k, l).truncated(2) * first[static_cast<std::size_t>(l)];
                gj3(k, i, j) = s;
                gj3(k, j, i) = s;
            }
        }
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                f.gamma(k, i, j) = gj3(k, i, j).value();
                for (int l = 0; l < n; ++l) f.dgamma(l, k, i, j) = gj3(k, i, j).d(l);
            }

    // R^l_kij = d_i Gamma^l_jk - d_j Gamma^l_ik + Gamma^l_im Gamma^m_jk - Gamma^l_jm Gamma^m_ik
    // so that R(d_i,d_j)d_k = R^l_kij d_l.  Order-1 jets.
    Tensor<4, Jet3> rmix(n, Jet3(n, 1));
    for (int l = 0; l < n; ++l)
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    Jet3 s = gj3(l, j, k).partial(i) - gj3(l, i, k).partial(j);
                    for (int m = 0; m < n; ++m)
                        s += gj3(l, i, m).truncated(1) * gj3(m, j, k).truncated(1) -
                             gj3(l, j, m).truncated(1) * gj3(m, i, k).truncated(1);
                    rmix(l, k, i, j) = s;
                    rmix(l, k, j, i) = -s;
                }

    // R_ijkl = g_lm R^m_kij
    Tensor<4, Jet3> rj(n, Jet3(n, 1));
    f.riemann = Tensor4(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    Jet3 s = gj(l, 0).truncated(1) * rmix(0, k, i, j);
                    for (int m = 1; m < n; ++m) s += gj(l, m).truncated(1) * rmix(m, k, i, j);
                    f.riemann(i, j, k, l) = s.value();
                    rj(i, j, k, l) = std::move(s);
                }
        }

    f.ricci_computed = contract_ricci(f.ginv, f.riemann);
    f.scalar_computed = trace_with(f.ginv, f.ricci_computed);

    // d_m Ric_jk = d_m (g^il R_ijkl)
    Tensor3 dric(n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            Jet3 s(n, 1);
            for (int i = 0; i < n; ++i)
                for (int l = 0; l < n; ++l) s += ginvj(i, l).truncated(1) * rj(i, j, k, l);
            for (int m = 0; m < n; ++m) dric(m, j, k) = s.d(m);
        }
    f.nabla_ricci_computed = covariant_derivative_02(f.gamma, f.ricci_computed, dric);

    if (opt.riemann_gradient) {
        Tensor5 dr(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l)
                        for (int m = 0; m < n; ++m) dr(m, i, j, k, l) = rj(i, j, k, l).d(m);
        f.riemann_gradient = std::move(dr);
    }

    if (spec.declared_ricci) {
        const auto rd = detail::eval_matrix_jets(*spec.declared_ricci, point, 1);
        Matrix ric(n);
        Tensor3 d(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                ric(i, j) = rd(i, j).value();
                for (int m = 0; m < n; ++m) d(m, i, j) = rd(i, j).d(m);
            }
        f.scalar_declared = trace_with(f.ginv, ric);
        f.nabla_ricci_declared = covariant_derivative_02(f.gamma, ric, d);
        f.ricci_declared = std::move(ric);
    }
    return f;
}

/// (nabla_m R)_ijkl; requires a frame built with riemann_gradient.
inline Tensor5 covariant_derivative_riemann(const PointFrame& f) {
    if (!f.riemann_gradient) throw PreconditionError("frame was built without the Riemann gradient");
    const int n = f.n;
    const auto& dr = *f.riemann_gradient;
    const auto& r = f.riemann;
    const auto& G = f.gamma;
    Tensor5 out(n);
    for (int m = 0; m < n; ++m)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) {
                        double v = dr(m, i, j, k, l);
                        for (int p = 0; p < n; ++p)
                            v -= G(p, m, i) * r(p, j, k, l) + G(p, m, j) * r(i, p, k, l) + G(p, m, k) * r(i, j, p, l) +
                                 G(p, m, l) * r(i, j, k, p);
                        out(m, i, j, k, l) = v;
                    }
    return out;
}

/// Cyclic sum over (m,i,j) of (nabla_m R)_ijkl, max-abs.
inline double second_bianchi_residual(const PointFrame& f) {
    const auto nr = covariant_derivative_riemann(f);
    const int n = f.n;
    double worst = 0.0;
    for (int m = 0; m < n; ++m)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l)
                        worst = std::max(worst, std::abs(nr(m, i, j, k, l) + nr(i, j, m, k, l) + nr(j, m, i, k, l)));
    return worst;
}

/// Internal-consistency residuals of a frame, all max-abs.
struct FrameInvariants {
    double inverse = 0.0;            // |g g^-1 - I|
    double antisymmetry = 0.0;       // R_ijkl + R_jikl and R_ijkl + R_ijlk
    double pair_symmetry = 0.0;      // R_ijkl - R_klij
    double first_bianchi = 0.0;      // R_ijkl + R_jkil + R_kijl
    double ricci_symmetry = 0.0;     // Ric_ij - Ric_ji
    double metric_compatibility = 0.0;  // (nabla_k g)_ij
};

inline FrameInvariants frame_invariants(const PointFrame& f) {
    const int n = f.n;
    FrameInvariants inv;
    const Matrix prod = matmul(f.g, f.ginv);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) inv.inverse = std::max(inv.inverse, std::abs(prod(i, j) - (i == j ? 1.0 : 0.0)));
    const auto& r = f.riemann;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    inv.antisymmetry = std::max({inv.antisymmetry, std::abs(r(i, j, k, l) + r(j, i, k, l)),
                                                 std::abs(r(i, j, k, l) + r(i, j, l, k))});
                    inv.pair_symmetry = std::max(inv.pair_symmetry, std::abs(r(i, j, k, l) - r(k, l, i, j)));
                    inv.first_bianchi =
                        std::max(inv.first_bianchi, std::abs(r(i, j, k, l) + r(j, k, i, l) + r(k, i, j, l)));
                }
    const auto& ric = f.ricci_computed;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) inv.ricci_symmetry = std::max(inv.ricci_symmetry, std::abs(ric(i, j) - ric(j, i)));
    const Tensor3 ng = covariant_derivative_02(f.gamma, f.g, f.dg);
    inv.metric_compatibility = max_abs(ng);
    return inv;
}

/// Contravariant field components and their partials: jacobian(i,j) = d_j X^i.
struct VectorFieldAt {
    Vector values;
    Matrix jacobian;
};

/// Covariant components and partials: jacobian(i,j) = d_i A_j.
struct CovectorAt {
    Vector values;
    Matrix jacobian;
};

inline VectorFieldAt evaluate_components(const std::vector<ScalarExpr>& comps, std::span<const double> point) {
    const int n = static_cast<int>(comps.size());
    VectorFieldAt out{Vector(static_cast<std::size_t>(n)), Matrix(n)};
    for (int i = 0; i < n; ++i) {
        const Jet3 j = eval_jet(comps[static_cast<std::size_t>(i)], point, 1);
        out.values[static_cast<std::size_t>(i)] = j.value();
        for (int k = 0; k < n; ++k) out.jacobian(i, k) = j.d(k);
    }
    return out;
}

inline VectorFieldAt evaluate_vector_field(const ManifoldSpec& spec, const std::string& name, std::span<const double> point) {
    return evaluate_components(find_vector_field(spec, name), point);
}

inline CovectorAt evaluate_one_form(const ManifoldSpec& spec, const std::string& name, std::span<const double> point) {
    const auto v = evaluate_components(find_one_form(spec, name), point);
    return {v.values, transpose(v.jacobian)};
}

/// X_j = g_jm X^m with d_i X_j = d_i g_jm X^m + g_jm d_i X^m.
inline CovectorAt lower_field(const PointFrame& f, const VectorFieldAt& x) {
    const int n = f.n;
    CovectorAt out{lower(f.g, x.values), Matrix(n)};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int m = 0; m < n; ++m) s += f.dg(i, j, m) * x.values[static_cast<std::size_t>(m)] + f.g(j, m) * x.jacobian(m, i);
            out.jacobian(i, j) = s;
        }
    return out;
}

/// (nabla X)(i,j) = nabla_j X^i = d_j X^i + Gamma^i_jm X^m
inline Matrix covariant_derivative(const PointFrame& f, const VectorFieldAt& x) {
    const int n = f.n;
    Matrix out(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = x.jacobian(i, j);
            for (int m = 0; m < n; ++m) s += f.gamma(i, j, m) * x.values[static_cast<std::size_t>(m)];
            out(i, j) = s;
        }
    return out;
}

/// (L_X g)_ij = nabla_i X_j + nabla_j X_i
inline Matrix lie_metric(const PointFrame& f, const VectorFieldAt& x) {
    const int n = f.n;
    const Matrix nx = covariant_derivative(f, x);
    Matrix out(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int m = 0; m < n; ++m) s += f.g(j, m) * nx(m, i) + f.g(i, m) * nx(m, j);
            out(i, j) = s;
        }
    return out;
}

inline Matrix lie_metric(const ManifoldSpec& spec, const std::string& field, std::span<const double> point) {
    const auto x = evaluate_vector_field(spec, field, point);
    return lie_metric(build_frame(spec, point), x);
}

inline double divergence(const PointFrame& f, const VectorFieldAt& x) {
    const Matrix nx = covariant_derivative(f, x);
    double s = 0.0;
    for (int i = 0; i < f.n; ++i) s += nx(i, i);
    return s;
}

inline double divergence(const ManifoldSpec& spec, const std::string& field, std::span<const double> point) {
    const auto x = evaluate_vector_field(spec, field, point);
    return divergence(build_frame(spec, point), x);
}

inline Tensor3 covariant_derivative_ricci(const ManifoldSpec& spec, std::span<const double> point,
                                          RicciSource source = RicciSource::Computed) {
    return build_frame(spec, point, {source, false}).nabla_ricci();
}

/// (h ∧ k)_ijkl = h_ik k_jl + h_jl k_ik - h_il k_jk - h_jk k_il
inline Tensor4 kulkarni_nomizu(const Matrix& h, const Matrix& k) {
    const int n = h.dim();
    Tensor4 out(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    out(i, j, a, b) = h(i, a) * k(j, b) + h(j, b) * k(i, a) - h(i, b) * k(j, a) - h(j, a) * k(i, b);
    return out;
}

/// R(X,Y,Y,X) / (g(X,X) g(Y,Y) - g(X,Y)^2); +1 on the unit sphere.
inline double sectional_curvature(const PointFrame& f, std::span<const double> x, std::span<const double> y) {
    const int n = f.n;
    const double gxx = bilinear(f.g, x, x), gyy = bilinear(f.g, y, y), gxy = bilinear(f.g, x, y);
    const double gram = gxx * gyy - gxy * gxy;
    if (!(gram > 1e-12 * std::max(gxx * gyy, 1e-300))) throw NumericError("degenerate plane");
    // Same plane, spanned by a g-orthonormal pair: avoids cancellation for nearly parallel inputs.
    Vector e1(x.begin(), x.end()), e2(y.begin(), y.end());
    for (int i = 0; i < n; ++i) e2[static_cast<std::size_t>(i)] -= gxy / gxx * e1[static_cast<std::size_t>(i)];
    const double s1 = std::sqrt(gxx), s2 = std::sqrt(bilinear(f.g, e2, e2));
    for (auto& c : e1) c /= s1;
    for (auto& c : e2) c /= s2;
    double num = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    num += e1[static_cast<std::size_t>(i)] * e2[static_cast<std::size_t>(j)] * e2[static_cast<std::size_t>(k)] *
                           e1[static_cast<std::size_t>(l)] * f.riemann(i, j, k, l);
    return num;
}

} // namespace eqcheck
