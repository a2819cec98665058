#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "eqcheck/error.hpp"

namespace eqcheck {

/// Largest chart dimension the engine accepts.
inline constexpr int kMaxDimension = 8;

/// Dense rank-R array over a runtime dimension n, all indices running over 0..n-1.
/// Row-major: the last index varies fastest.
template <std::size_t Rank, class T = double>
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(int n, const T& fill = T{}) : n_(n), data_(size_for(n), fill) {}

    int dim() const noexcept { return n_; }
    std::size_t size() const noexcept { return data_.size(); }

    template <class... I>
    T& operator()(I... idx) {
        static_assert(sizeof...(I) == Rank);
        return data_[offset(idx...)];
    }
    template <class... I>
    const T& operator()(I... idx) const {
        static_assert(sizeof...(I) == Rank);
        return data_[offset(idx...)];
    }

    std::span<T> flat() noexcept { return data_; }
    std::span<const T> flat() const noexcept { return data_; }

    Tensor& operator+=(const Tensor& o) {
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }
    Tensor& operator-=(const Tensor& o) {
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }
    Tensor& operator*=(double s) {
        for (auto& v : data_) v *= s;
        return *this;
    }
    friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
    friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
    friend Tensor operator*(double s, Tensor a) { return a *= s; }

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    static std::size_t size_for(int n) {
        std::size_t s = 1;
        for (std::size_t r = 0; r < Rank; ++r) s *= static_cast<std::size_t>(n);
        return s;
    }
    template <class... I>
    std::size_t offset(I... idx) const {
        std::size_t off = 0;
        ((off = off * static_cast<std::size_t>(n_) + static_cast<std::size_t>(idx)), ...);
        return off;
    }

    int n_ = 0;
    std::vector<T> data_;
};

using Vector = std::vector<double>;
using Matrix = Tensor<2>;
using Tensor3 = Tensor<3>;
using Tensor4 = Tensor<4>;
using Tensor5 = Tensor<5>;

template <std::size_t Rank>
double max_abs(const Tensor<Rank>& t) {
    double m = 0.0;
    for (double v : t.flat()) m = std::max(m, std::abs(v));
    return m;
}

inline double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline Matrix identity_matrix(int n) {
    Matrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    const int n = a.dim();
    Matrix c(n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.dim());
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j) t(j, i) = a(i, j);
    return t;
}

/// g(x, y) = x^i g_ij y^j
inline double bilinear(const Matrix& g, std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (int i = 0; i < g.dim(); ++i)
        for (int j = 0; j < g.dim(); ++j) s += x[i] * g(i, j) * y[j];
    return s;
}

/// x_i = g_ij x^j
inline Vector lower(const Matrix& g, std::span<const double> x) {
    Vector out(g.dim(), 0.0);
    for (int i = 0; i < g.dim(); ++i)
        for (int j = 0; j < g.dim(); ++j) out[i] += g(i, j) * x[j];
    return out;
}

/// Frobenius inner product.
template <std::size_t Rank>
double frobenius(const Tensor<Rank>& a, const Tensor<Rank>& b) {
    double s = 0.0;
    auto fa = a.flat();
    auto fb = b.flat();
    for (std::size_t k = 0; k < fa.size(); ++k) s += fa[k] * fb[k];
    return s;
}

/// Result of Gauss-Jordan elimination with partial pivoting.
struct LuInverse {
    Matrix inverse;
    double determinant = 0.0;
};

/// Inverts a small dense matrix by Gauss-Jordan elimination with partial pivoting.
/// Throws NumericError if a pivot falls below `singular_tol * max|a|`.
inline LuInverse invert(const Matrix& a, double singular_tol = 1e-14) {
    const int n = a.dim();
    Matrix work = a;
    Matrix inv = identity_matrix(n);
    const double scale = std::max(max_abs(a), 1e-300);
    double det = 1.0;

    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(work(r, col)) > std::abs(work(pivot, col))) pivot = r;
        if (std::abs(work(pivot, col)) <= singular_tol * scale)
            throw NumericError("matrix is singular to working precision (column " +
                               std::to_string(col + 1) + ")");
        if (pivot != col) {
            for (int j = 0; j < n; ++j) {
                std::swap(work(col, j), work(pivot, j));
                std::swap(inv(col, j), inv(pivot, j));
            }
            det = -det;
        }
        const double p = work(col, col);
        det *= p;
        for (int j = 0; j < n; ++j) {
            work(col, j) /= p;
            inv(col, j) /= p;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = work(r, col);
            if (f == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                work(r, j) -= f * work(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }
    return {std::move(inv), det};
}

/// Determinant via partial-pivoted elimination (zero for singular input).
inline double determinant(const Matrix& a) {
    const int n = a.dim();
    Matrix w = a;
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(w(r, col)) > std::abs(w(pivot, col))) pivot = r;
        if (w(pivot, col) == 0.0) return 0.0;
        if (pivot != col) {
            for (int j = 0; j < n; ++j) std::swap(w(col, j), w(pivot, j));
            det = -det;
        }
        det *= w(col, col);
        for (int r = col + 1; r < n; ++r) {
            const double f = w(r, col) / w(col, col);
            for (int j = col; j < n; ++j) w(r, j) -= f * w(col, j);
        }
    }
    return det;
}

/// Leading principal minors det(a[0..k, 0..k]) for k = 1..n.
inline std::vector<double> leading_minors(const Matrix& a) {
    std::vector<double> out;
    for (int k = 1; k <= a.dim(); ++k) {
        Matrix sub(k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) sub(i, j) = a(i, j);
        out.push_back(determinant(sub));
    }
    return out;
}

} // namespace eqcheck
