#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "eqcheck/classify.hpp"
#include "eqcheck/curvature.hpp"
#include "eqcheck/error.hpp"
#include "eqcheck/fieldprops.hpp"
#include "eqcheck/manifold.hpp"
#include "eqcheck/tensor.hpp"

namespace eqcheck {

struct SolitonParams {
    double c1 = 0.0, c2 = 0.0, lambda = 0.0;
    std::string field;
    std::optional<double> mu;
};

/// L_X g + 2 c1 X♭⊗X♭ - 2 c2 Ric - 2 lambda g.
inline MatrixResidual grs_residual(const PointFrame& f, const VectorFieldAt& x, const SolitonParams& p) {
    const int n = f.n;
    const Matrix l = lie_metric(f, x);
    const Vector xl = lower(f.g, x.values);
    const Matrix& ric = f.ricci();
    MatrixResidual out{Matrix(n), 0.0};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double v = l(i, j) + 2.0 * p.c1 * xl[static_cast<std::size_t>(i)] * xl[static_cast<std::size_t>(j)] -
                             2.0 * p.c2 * ric(i, j) - 2.0 * p.lambda * f.g(i, j);
            out.residual(i, j) = v;
            out.max_abs = std::max(out.max_abs, std::abs(v));
        }
    return out;
}

inline MatrixResidual grs_residual(const ManifoldSpec& spec, const SolitonParams& p, std::span<const double> point) {
    return grs_residual(build_frame(spec, point), evaluate_vector_field(spec, p.field, point), p);
}

struct LambdaFormulas {
    double lambda_u = 0.0;  // c1 - c2 (a + b)
    double lambda_v = 0.0;  // c1 - a c2
};

inline LambdaFormulas grs_lambda_formulas(const EqCoefficients& k, const SolitonParams& p) {
    return {p.c1 - p.c2 * (k.a + k.b), p.c1 - k.a * p.c2};
}

/// (nabla_X X)^i = X^j d_j X^i + Gamma^i_jm X^j X^m.
inline Vector geodesic_vector(const PointFrame& f, const VectorFieldAt& x) {
    const Matrix nx = covariant_derivative(f, x);
    Vector out(static_cast<std::size_t>(f.n), 0.0);
    for (int i = 0; i < f.n; ++i)
        for (int j = 0; j < f.n; ++j) out[static_cast<std::size_t>(i)] += nx(i, j) * x.values[static_cast<std::size_t>(j)];
    return out;
}

inline double geodesic_residual(const PointFrame& f, const VectorFieldAt& x) { return max_abs(geodesic_vector(f, x)); }

inline double geodesic_residual(const ManifoldSpec& spec, const std::string& field, std::span<const double> point) {
    return geodesic_residual(build_frame(spec, point), evaluate_vector_field(spec, field, point));
}

struct GrsTrace {
    double divergence = 0.0;
    double norm2 = 0.0;              // g(X,X)
    double scalar = 0.0;             // r
    double lambda_trace = 0.0;       // (div X + c1 g(X,X) - c2 r) / n
    double lambda_printed = 0.0;     // div X / n + c1 - 2 c2
    std::optional<double> divergence_printed;  // n (2r - a) c2, needs a
    double residual_trace = 0.0;     // g^ij residual_ij
    double identity_gap = 0.0;       // residual_trace - 2n (lambda_trace - lambda)
};

inline GrsTrace grs_trace_identity(const PointFrame& f, const VectorFieldAt& x, const SolitonParams& p,
                                   std::optional<double> a = std::nullopt) {
    const int n = f.n;
    GrsTrace t;
    t.divergence = divergence(f, x);
    t.norm2 = bilinear(f.g, x.values, x.values);
    t.scalar = f.scalar_curvature();
    t.lambda_trace = (t.divergence + p.c1 * t.norm2 - p.c2 * t.scalar) / n;
    t.lambda_printed = t.divergence / n + p.c1 - 2.0 * p.c2;
    if (a) t.divergence_printed = n * (2.0 * t.scalar - *a) * p.c2;
    t.residual_trace = trace_with(f.ginv, grs_residual(f, x, p).residual);
    t.identity_gap = t.residual_trace - 2.0 * n * (t.lambda_trace - p.lambda);
    return t;
}

struct ProportionalFit {
    FitResult fit;  // parameters = {mu}
    bool proper = false;
};

/// mu = <m, q> / <q, q> over all components; residual = |m - mu q|.
inline ProportionalFit fit_proportional(const Matrix& m, const Matrix& q, double tol) {
    double mq = 0.0, qq = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
        mq += m.flat()[k] * q.flat()[k];
        qq += q.flat()[k] * q.flat()[k];
    }
    if (std::sqrt(qq) <= tol) throw PreconditionError("degenerate Ricci operator: every parallel field fits any mu");
    ProportionalFit out;
    const double mu = mq / qq;
    out.fit.parameters = {mu};
    out.fit.method = FitMethod::LeastSquares;
    for (std::size_t k = 0; k < q.size(); ++k)
        out.fit.residual = std::max(out.fit.residual, std::abs(m.flat()[k] - mu * q.flat()[k]));
    out.proper = std::abs(mu) > tol;
    return out;
}

/// nabla phi = mu Q, compared as (1,1) tensors.
inline ProportionalFit phi_ric_fit(const PointFrame& f, const VectorFieldAt& phi, double tol) {
    return fit_proportional(covariant_derivative(f, phi), f.ricci_operator(), tol);
}

enum class SteadyBranch { QuasiEinstein, Steady, Inconsistent };

inline std::string_view steady_branch_name(SteadyBranch b) {
    switch (b) {
    case SteadyBranch::QuasiEinstein: return "quasi-einstein branch";
    case SteadyBranch::Steady: return "steady branch";
    case SteadyBranch::Inconsistent: return "inconsistent";
    }
    return "inconsistent";
}

struct SteadyDetection {
    SteadyBranch branch = SteadyBranch::Inconsistent;
    std::string violated;
    double r1 = 0.0;  // (a+b)(mu-c2) - lambda
    double r2 = 0.0;  // a(mu-c2) - (lambda - c1)
    double r3 = 0.0;  // c(mu-c2)
};

inline SteadyDetection steady_soliton_detect(const EqCoefficients& k, const SolitonParams& p, double mu, double tol) {
    SteadyDetection d;
    const double s = mu - p.c2;
    d.r1 = (k.a + k.b) * s - p.lambda;
    d.r2 = k.a * s - (p.lambda - p.c1);
    d.r3 = k.c * s;
    if (std::abs(k.c) < tol) {
        d.branch = SteadyBranch::QuasiEinstein;
    } else if (std::abs(s) < tol) {
        if (std::abs(p.lambda) >= tol) {
            d.violated = "(a+b)(mu-c2) = lambda";
        } else if (std::abs(p.c1) >= tol) {
            d.violated = "a(mu-c2) = lambda - c1";
        }
        d.branch = d.violated.empty() ? SteadyBranch::Steady : SteadyBranch::Inconsistent;
    } else {
        d.branch = SteadyBranch::Inconsistent;
        d.violated = "c(mu-c2) = 0";
    }
    return d;
}

struct Tensor4Residual {
    Tensor4 residual;
    double max_abs = 0.0;
};

/// 2R - (L_V g)∧g + lambda g∧g with the standard Kulkarni-Nomizu product. This is the index
/// pattern of the expanded soliton equation, under which a constant-curvature K space with
/// V = 0 is a soliton for lambda = K.
inline Tensor4Residual riemann_soliton_residual(const PointFrame& f, const VectorFieldAt& v, double lambda) {
    const Tensor4 lg = kulkarni_nomizu(lie_metric(f, v), f.g);
    const Tensor4 gg = kulkarni_nomizu(f.g, f.g);
    Tensor4Residual out{Tensor4(f.n), 0.0};
    for (std::size_t k = 0; k < gg.size(); ++k) {
        const double x = 2.0 * f.riemann.flat()[k] - lg.flat()[k] + lambda * gg.flat()[k];
        out.residual.flat()[k] = x;
        out.max_abs = std::max(out.max_abs, std::abs(x));
    }
    return out;
}

/// Least-squares lambda for the full Riemann soliton equation.
inline FitResult riemann_soliton_lambda_fit(const PointFrame& f, const VectorFieldAt& v) {
    const Tensor4 lg = kulkarni_nomizu(lie_metric(f, v), f.g);
    const Tensor4 gg = kulkarni_nomizu(f.g, f.g);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < gg.size(); ++k) {
        num -= (2.0 * f.riemann.flat()[k] - lg.flat()[k]) * gg.flat()[k];
        den += gg.flat()[k] * gg.flat()[k];
    }
    if (den == 0.0) throw PreconditionError("g∧g vanishes; lambda is undetermined");
    const double lambda = num / den;
    return {{lambda}, riemann_soliton_residual(f, v, lambda).max_abs, FitMethod::LeastSquares};
}

struct ContractedSoliton {
    MatrixResidual printed;     // L + 2/(n-2) Ric - 2/(n-2) [(n-1) lambda - div V] g
    Matrix full_contraction;    // g^il (residual)_ijkl
    double contraction_gap = 0.0;  // |full_contraction - (n-2) printed|
};

inline ContractedSoliton riemann_soliton_contracted_residual(const PointFrame& f, const VectorFieldAt& v, double lambda) {
    const int n = f.n;
    if (n == 2) throw PreconditionError("contracted Riemann soliton equation: coefficient 2/(n-2) is singular for n = 2");
    const Matrix l = lie_metric(f, v);
    const double div = divergence(f, v);
    const Matrix& ric = f.ricci();
    const double s = 2.0 / (n - 2);
    ContractedSoliton out{{Matrix(n), 0.0}, Matrix(n), 0.0};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x = l(i, j) + s * ric(i, j) - s * ((n - 1) * lambda - div) * f.g(i, j);
            out.printed.residual(i, j) = x;
            out.printed.max_abs = std::max(out.printed.max_abs, std::abs(x));
        }
    const auto full = riemann_soliton_residual(f, v, lambda).residual;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            double c = 0.0;
            for (int i = 0; i < n; ++i)
                for (int m = 0; m < n; ++m) c += f.ginv(i, m) * full(i, j, k, m);
            out.full_contraction(j, k) = c;
            out.contraction_gap = std::max(out.contraction_gap, std::abs(c - (n - 2) * out.printed.residual(j, k)));
        }
    return out;
}

/// (nabla_k L_X g)_ij from second-order jets of the metric and the field.
inline Tensor3 nabla_lie_metric(const ManifoldSpec& spec, const std::string& field, const PointFrame& f) {
    const int n = f.n;
    const auto gj = detail::eval_matrix_jets(spec.metric, f.point, 2);
    const auto& comps = find_vector_field(spec, field);
    std::vector<Jet3> xj;
    for (const auto& c : comps) xj.push_back(eval_jet(c, f.point, 2));

    // L_ij = X^m d_m g_ij + g_mj d_i X^m + g_im d_j X^m, as order-1 jets
    Matrix l(n);
    Tensor3 dl(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Jet3 s(n, 1);
            for (int m = 0; m < n; ++m) {
                const auto& x = xj[static_cast<std::size_t>(m)];
                s += x.truncated(1) * gj(i, j).partial(m) + gj(m, j).truncated(1) * x.partial(i) +
                     gj(i, m).truncated(1) * x.partial(j);
            }
            l(i, j) = s.value();
            for (int k = 0; k < n; ++k) dl(k, i, j) = s.d(k);
        }
    return covariant_derivative_02(f.gamma, l, dl);
}

struct RiemannSolitonMu {
    FitResult fit;                 // parameters = {mu}, from nabla L = 2 mu nabla Ric
    double mu_contraction = 0.0;   // -1/(n-2)
    double mu_printed = 0.0;       // -1/(1-2n)
};

inline RiemannSolitonMu riemann_soliton_mu_fit(const ManifoldSpec& spec, const std::string& field, const PointFrame& f,
                                               double tol) {
    const int n = f.n;
    if (n == 2) throw PreconditionError("mu from the contracted equation is undefined for n = 2");
    const Tensor3 nl = nabla_lie_metric(spec, field, f);
    const Tensor3& nr = f.nabla_ricci();
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < nr.size(); ++k) {
        num += nl.flat()[k] * nr.flat()[k];
        den += nr.flat()[k] * nr.flat()[k];
    }
    if (std::sqrt(den) <= tol) throw PreconditionError("nabla Ric vanishes; mu is undetermined");
    RiemannSolitonMu out;
    const double mu = num / (2.0 * den);
    out.fit.parameters = {mu};
    for (std::size_t k = 0; k < nr.size(); ++k)
        out.fit.residual = std::max(out.fit.residual, std::abs(nl.flat()[k] - 2.0 * mu * nr.flat()[k]));
    out.mu_contraction = -1.0 / (n - 2);
    out.mu_printed = -1.0 / (1.0 - 2.0 * n);
    return out;
}

} // namespace eqcheck
