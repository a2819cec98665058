#pragma once

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eqcheck/classify.hpp"
#include "eqcheck/curvature.hpp"
#include "eqcheck/error.hpp"
#include "eqcheck/manifold.hpp"
#include "eqcheck/tensor.hpp"

namespace eqcheck {

enum class FitMethod { ExactSlot, LeastSquares };

inline std::string_view fit_method_name(FitMethod m) {
    return m == FitMethod::ExactSlot ? "exact-slot" : "least-squares";
}

/// Fitted parameters and the max-abs of the defining equation after substituting them.
struct FitResult {
    std::vector<double> parameters;
    double residual = 0.0;
    FitMethod method = FitMethod::LeastSquares;
};

inline double killing_residual(const PointFrame& f, const VectorFieldAt& x) { return max_abs(lie_metric(f, x)); }

inline double killing_residual(const ManifoldSpec& spec, const std::string& field, std::span<const double> point) {
    return killing_residual(build_frame(spec, point), evaluate_vector_field(spec, field, point));
}

inline double parallel_residual(const PointFrame& f, const VectorFieldAt& x) {
    return max_abs(covariant_derivative(f, x));
}

inline double parallel_residual(const ManifoldSpec& spec, const std::string& field, std::span<const double> point) {
    return parallel_residual(build_frame(spec, point), evaluate_vector_field(spec, field, point));
}

struct ConcurrentFit {
    FitResult fit;  // parameters = {alpha}
    bool concurrent = false;
    bool parallel = false;
    double alpha() const { return fit.parameters.front(); }
};

/// alpha = tr(nabla X)/n; residual = |nabla X - alpha I|.
inline ConcurrentFit concurrent_fit(const PointFrame& f, const VectorFieldAt& x, double tol) {
    const Matrix nx = covariant_derivative(f, x);
    double tr = 0.0;
    for (int i = 0; i < f.n; ++i) tr += nx(i, i);
    const double alpha = tr / f.n;
    double res = 0.0;
    for (int i = 0; i < f.n; ++i)
        for (int j = 0; j < f.n; ++j) res = std::max(res, std::abs(nx(i, j) - (i == j ? alpha : 0.0)));
    ConcurrentFit c{{{alpha}, res, FitMethod::LeastSquares}};
    c.concurrent = res < tol && std::abs(alpha) > tol;
    c.parallel = res < tol && std::abs(alpha) <= tol;
    return c;
}

inline ConcurrentFit concurrent_fit(const ManifoldSpec& spec, const std::string& field, std::span<const double> point,
                                    double tol) {
    return concurrent_fit(build_frame(spec, point), evaluate_vector_field(spec, field, point), tol);
}

/// Cyclic sum of nabla Ric over its three slots.
inline double cyclic_parallel_residual(const PointFrame& f) {
    const auto& d = f.nabla_ricci();
    double m = 0.0;
    for (int i = 0; i < f.n; ++i)
        for (int j = 0; j < f.n; ++j)
            for (int k = 0; k < f.n; ++k) m = std::max(m, std::abs(d(i, j, k) + d(j, k, i) + d(k, i, j)));
    return m;
}

inline double codazzi_residual(const PointFrame& f) {
    const auto& d = f.nabla_ricci();
    double m = 0.0;
    for (int i = 0; i < f.n; ++i)
        for (int j = 0; j < f.n; ++j)
            for (int k = 0; k < f.n; ++k) m = std::max(m, std::abs(d(i, j, k) - d(j, i, k)));
    return m;
}

/// |dA|, (dA)_ij = d_i A_j - d_j A_i.
inline double one_form_closedness(const CovectorAt& a) {
    const int n = a.jacobian.dim();
    double m = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m = std::max(m, std::abs(a.jacobian(i, j) - a.jacobian(j, i)));
    return m;
}

/// Resolves `name` as a 1-form, or else as a vector field lowered with the metric.
inline double one_form_closedness(const ManifoldSpec& spec, const std::string& name, std::span<const double> point) {
    if (spec.one_forms.contains(name)) return one_form_closedness(evaluate_one_form(spec, name, point));
    if (spec.vector_fields.contains(name))
        return one_form_closedness(lower_field(build_frame(spec, point), evaluate_vector_field(spec, name, point)));
    throw PreconditionError("unknown 1-form or vector field '" + name + "'");
}

/// F_k = <nabla_k Ric, Ric> / <Ric, Ric>; parameters = F.
inline FitResult ricci_recurrence_fit(const PointFrame& f, double tol) {
    const Matrix& ric = f.ricci();
    const auto& d = f.nabla_ricci();
    const int n = f.n;
    double rr = 0.0;
    for (double v : ric.flat()) rr += v * v;
    if (std::sqrt(rr) <= tol) throw PreconditionError("recurrence undefined: Ricci tensor vanishes at " + detail::point_text(f.point));
    FitResult fit;
    fit.method = FitMethod::LeastSquares;
    for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) s += d(k, i, j) * ric(i, j);
        fit.parameters.push_back(s / rr);
    }
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                fit.residual = std::max(fit.residual, std::abs(d(k, i, j) - fit.parameters[static_cast<std::size_t>(k)] * ric(i, j)));
    return fit;
}

/// Ric(R(e_i,e_j)e_k, e_l) + Ric(e_k, R(e_i,e_j)e_l), with R(e_i,e_j)e_k = g^ml R_ijkl e_m.
inline double ricci_semisymmetry_residual(const PointFrame& f) {
    const int n = f.n;
    const Matrix& ric = f.ricci();
    // mixed(m,k,i,j) = R^m_kij
    Tensor4 mixed(n);
    for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double s = 0.0;
                    for (int l = 0; l < n; ++l) s += f.ginv(m, l) * f.riemann(i, j, k, l);
                    mixed(m, k, i, j) = s;
                }
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double s = 0.0;
                    for (int m = 0; m < n; ++m) s += mixed(m, k, i, j) * ric(m, l) + mixed(m, l, i, j) * ric(k, m);
                    worst = std::max(worst, std::abs(s));
                }
    return worst;
}

/// max over (i,j) of |R(e_i, e_j, V, T)|.
inline double curvature_orthogonality(const PointFrame& f, std::span<const double> v, std::span<const double> t) {
    const int n = f.n;
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    s += f.riemann(i, j, a, b) * v[static_cast<std::size_t>(a)] * t[static_cast<std::size_t>(b)];
            worst = std::max(worst, std::abs(s));
        }
    return worst;
}

/// The two factors exposed by parallel generators: a + b and |(a - c)(B - D)|.
struct ParallelChain {
    double a_plus_b = 0.0;
    double a_minus_c_times_b_minus_d = 0.0;
};

inline ParallelChain parallel_chain(const EqCoefficients& k, const TripleAt& t) {
    ParallelChain p;
    p.a_plus_b = k.a + k.b;
    for (std::size_t i = 0; i < t.b.size(); ++i)
        p.a_minus_c_times_b_minus_d = std::max(p.a_minus_c_times_b_minus_d, std::abs((k.a - k.c) * (t.b[i] - t.d[i])));
    return p;
}

struct MixedGeneralizedInputs {
    double alpha = 0.0, beta = 0.0, gamma = 0.0;
    double a_spread = 0.0, b_spread = 0.0;
};

struct MixedGeneralizedReduction {
    std::array<double, 4> coefficients{};          // a1..a4 from the substitution
    std::array<double, 4> printed_coefficients{};  // a2, a3 and the a4 correction without the factor b
    double residual = 0.0;
    double printed_residual = 0.0;
};

inline double mixed_generalized_residual(const PointFrame& f, const TripleAt& t, const std::array<double, 4>& k) {
    const int n = f.n;
    const Matrix& ric = f.ricci();
    double m = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const auto si = static_cast<std::size_t>(i), sj = static_cast<std::size_t>(j);
            const double v = ric(i, j) - k[0] * f.g(i, j) - k[1] * t.b[si] * t.b[sj] - k[2] * t.d[si] * t.d[sj] -
                             k[3] * (t.b[si] * t.d[sj] + t.d[si] * t.b[sj]);
            m = std::max(m, std::abs(v));
        }
    return m;
}

/// Substitutes A = -(c beta / b alpha) D - (c gamma / b alpha) B into the decomposition.
/// Every failed precondition is named in one error.
inline MixedGeneralizedReduction mixed_generalized_reduction(const PointFrame& f, const TripleAt& t,
                                                             const EqCoefficients& k,
                                                             const MixedGeneralizedInputs& in, double tol) {
    std::vector<std::string> failed;
    if (std::abs(in.alpha) <= tol) failed.push_back("alpha = " + format_double(in.alpha) + " is not non-zero");
    if (std::abs(in.beta) <= tol) failed.push_back("beta = " + format_double(in.beta) + " is not non-zero");
    if (std::abs(in.gamma) <= tol) failed.push_back("gamma = " + format_double(in.gamma) + " is not non-zero");
    if (in.a_spread >= tol) failed.push_back("a is not constant (spread " + format_double(in.a_spread) + ")");
    if (in.b_spread >= tol) failed.push_back("b is not constant (spread " + format_double(in.b_spread) + ")");
    if (std::abs(k.b * in.alpha) <= tol) failed.push_back("b*alpha vanishes");
    if (!failed.empty()) {
        std::string msg = "mixed generalized reduction preconditions failed: ";
        for (std::size_t i = 0; i < failed.size(); ++i) msg += (i ? "; " : "") + failed[i];
        throw PreconditionError(msg);
    }

    const double ba = k.b * in.alpha;
    const double pb = k.c * in.beta / ba;   // coefficient of D in A (negated)
    const double pg = k.c * in.gamma / ba;  // coefficient of B in A (negated)
    MixedGeneralizedReduction r;
    r.coefficients = {k.a, k.b * pg * pg, k.b * pb * pb, k.c + k.b * pb * pg};
    r.printed_coefficients = {k.a, pg * pg, pb * pb, k.c + pb * pg};
    r.residual = mixed_generalized_residual(f, t, r.coefficients);
    r.printed_residual = mixed_generalized_residual(f, t, r.printed_coefficients);
    return r;
}

} // namespace eqcheck
