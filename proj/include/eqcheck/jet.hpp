#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <vector>

namespace eqcheck {

/// Truncated multivariate Taylor expansion of a scalar at a point: value, gradient,
/// Hessian and third derivatives over `dim` variables, valid up to `order` (0..3).
///
/// Higher derivative blocks are stored densely but every write goes through the
/// sorted-index loop and is mirrored to all permutations, so the Hessian and third
/// derivative tensors are exactly symmetric.
class Jet3 {
public:
    Jet3() = default;
    Jet3(int dim, int order) : dim_(dim), order_(order) { allocate(); }

    static Jet3 constant(int dim, int order, double value) {
        Jet3 j(dim, order);
        j.value_ = value;
        return j;
    }

    /// The coordinate function x^index evaluated at `value`.
    static Jet3 variable(int dim, int order, int index, double value) {
        Jet3 j(dim, order);
        j.value_ = value;
        if (order >= 1) j.d1_[index] = 1.0;
        return j;
    }

    int dim() const noexcept { return dim_; }
    int order() const noexcept { return order_; }

    double value() const noexcept { return value_; }
    double d(int i) const { return order_ >= 1 ? d1_[i] : 0.0; }
    double d(int i, int j) const { return order_ >= 2 ? d2_[i * dim_ + j] : 0.0; }
    double d(int i, int j, int k) const {
        return order_ >= 3 ? d3_[(i * dim_ + j) * dim_ + k] : 0.0;
    }

    const std::vector<double>& gradient() const noexcept { return d1_; }

    void set_value(double v) noexcept { value_ = v; }
    void set_d(int i, double v) { d1_[i] = v; }
    void set_d(int i, int j, double v) {
        d2_[i * dim_ + j] = v;
        d2_[j * dim_ + i] = v;
    }
    void set_d(int i, int j, int k, double v) {
        const int n = dim_;
        auto at = [&](int a, int b, int c) -> double& { return d3_[(a * n + b) * n + c]; };
        at(i, j, k) = v;
        at(i, k, j) = v;
        at(j, i, k) = v;
        at(j, k, i) = v;
        at(k, i, j) = v;
        at(k, j, i) = v;
    }

    /// Drops derivatives above `order`.
    Jet3 truncated(int order) const {
        Jet3 out(dim_, std::min(order, order_));
        out.value_ = value_;
        if (out.order_ >= 1) out.d1_ = d1_;
        if (out.order_ >= 2) out.d2_ = d2_;
        if (out.order_ >= 3) out.d3_ = d3_;
        return out;
    }

    /// Jet of the partial derivative along `i`; one order lower.
    Jet3 partial(int i) const {
        assert(order_ >= 1);
        Jet3 out(dim_, order_ - 1);
        out.value_ = d1_[i];
        const int n = dim_;
        if (out.order_ >= 1)
            for (int j = 0; j < n; ++j) out.d1_[j] = d2_[i * n + j];
        if (out.order_ >= 2)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) out.d2_[j * n + k] = d3_[(i * n + j) * n + k];
        return out;
    }

    /// h(u) given h and its first three derivatives evaluated at u.value().
    Jet3 compose(double h0, double h1, double h2, double h3) const {
        Jet3 out(dim_, order_);
        out.value_ = h0;
        const int n = dim_;
        if (order_ >= 1)
            for (int i = 0; i < n; ++i) out.d1_[i] = h1 * d1_[i];
        if (order_ >= 2)
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j)
                    out.set_d(i, j, h2 * d1_[i] * d1_[j] + h1 * d(i, j));
        if (order_ >= 3)
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j)
                    for (int k = j; k < n; ++k) {
                        const double v = h3 * d1_[i] * d1_[j] * d1_[k] +
                                         h2 * (d(i, j) * d1_[k] + d(i, k) * d1_[j] + d(j, k) * d1_[i]) +
                                         h1 * d(i, j, k);
                        out.set_d(i, j, k, v);
                    }
        return out;
    }

    Jet3 operator-() const {
        Jet3 out = *this;
        out.scale(-1.0);
        return out;
    }

    Jet3& operator+=(const Jet3& o) { return accumulate(o, 1.0); }
    Jet3& operator-=(const Jet3& o) { return accumulate(o, -1.0); }
    Jet3& operator*=(double s) {
        scale(s);
        return *this;
    }

    friend Jet3 operator+(Jet3 a, const Jet3& b) { return a += b; }
    friend Jet3 operator-(Jet3 a, const Jet3& b) { return a -= b; }
    friend Jet3 operator*(double s, Jet3 a) { return a *= s; }
    friend Jet3 operator*(Jet3 a, double s) { return a *= s; }

    /// Leibniz product, truncated to the lower of the two orders.
    friend Jet3 operator*(const Jet3& a, const Jet3& b) {
        assert(a.dim_ == b.dim_);
        const int n = a.dim_;
        Jet3 out(n, std::min(a.order_, b.order_));
        const double a0 = a.value_, b0 = b.value_;
        out.value_ = a0 * b0;
        if (out.order_ >= 1)
            for (int i = 0; i < n; ++i) out.d1_[i] = a.d1_[i] * b0 + a0 * b.d1_[i];
        if (out.order_ >= 2)
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j)
                    out.set_d(i, j, a.d(i, j) * b0 + a.d1_[i] * b.d1_[j] + a.d1_[j] * b.d1_[i] +
                                        a0 * b.d(i, j));
        if (out.order_ >= 3)
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j)
                    for (int k = j; k < n; ++k) {
                        const double v = a.d(i, j, k) * b0 + a.d(i, j) * b.d1_[k] + a.d(i, k) * b.d1_[j] +
                                         a.d(j, k) * b.d1_[i] + a.d1_[i] * b.d(j, k) +
                                         a.d1_[j] * b.d(i, k) + a.d1_[k] * b.d(i, j) + a0 * b.d(i, j, k);
                        out.set_d(i, j, k, v);
                    }
        return out;
    }

    /// 1/u. Caller guarantees value() != 0.
    Jet3 reciprocal() const {
        const double u = value_;
        const double r = 1.0 / u;
        return compose(r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r);
    }

    friend bool operator==(const Jet3&, const Jet3&) = default;

private:
    void allocate() {
        const std::size_t n = static_cast<std::size_t>(dim_);
        d1_.assign(order_ >= 1 ? n : 0, 0.0);
        d2_.assign(order_ >= 2 ? n * n : 0, 0.0);
        d3_.assign(order_ >= 3 ? n * n * n : 0, 0.0);
    }

    Jet3& accumulate(const Jet3& o, double sign) {
        assert(dim_ == o.dim_);
        if (o.order_ < order_) *this = truncated(o.order_);
        value_ += sign * o.value_;
        for (std::size_t k = 0; k < d1_.size(); ++k) d1_[k] += sign * o.d1_[k];
        for (std::size_t k = 0; k < d2_.size(); ++k) d2_[k] += sign * o.d2_[k];
        for (std::size_t k = 0; k < d3_.size(); ++k) d3_[k] += sign * o.d3_[k];
        return *this;
    }

    void scale(double s) {
        value_ *= s;
        for (auto& v : d1_) v *= s;
        for (auto& v : d2_) v *= s;
        for (auto& v : d3_) v *= s;
    }

    int dim_ = 0;
    int order_ = 0;
    double value_ = 0.0;
    std::vector<double> d1_, d2_, d3_;
};

} // namespace eqcheck
