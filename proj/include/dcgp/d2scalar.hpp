#pragma once

/**
 * @file d2scalar.hpp
 * @brief Second-order forward-mode differentiation scalar.
 *
 * A D2Scalar carries a value together with its gradient and (dense, symmetric)
 * Hessian with respect to a fixed number m of independent variables. In this
 * library the variables are the ephemeral constants of a CGP program, so one
 * evaluation of the program over D2Scalar yields y, dy/dc and d2y/dc2.
 *
 * Operations never throw on non-finite values: log of a non-positive number or
 * division by zero simply propagate inf/nan. The only error is mixing scalars
 * of different dimension.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dcgp {

class D2Scalar {
public:
    D2Scalar() = default;

    /// A constant: zero gradient and zero Hessian in m variables.
    static D2Scalar constant(double v, std::size_t m)
    {
        D2Scalar r;
        r.reset(m);
        r.value_ = v;
        return r;
    }

    /// The j-th independent variable evaluated at v.
    static D2Scalar seed(double v, std::size_t j, std::size_t m)
    {
        if (j >= m) {
            throw std::out_of_range("D2Scalar::seed: index " + std::to_string(j) + " out of range for m=" + std::to_string(m));
        }
        D2Scalar r = constant(v, m);
        r.grad_[j] = 1.0;
        return r;
    }

    [[nodiscard]] double value() const noexcept { return value_; }
    [[nodiscard]] std::size_t size() const noexcept { return m_; }
    [[nodiscard]] std::span<const double> grad() const noexcept { return grad_; }
    [[nodiscard]] double grad(std::size_t j) const { return grad_[j]; }
    [[nodiscard]] double hess(std::size_t j, std::size_t k) const { return hess_[j * m_ + k]; }
    /// Row-major m*m Hessian.
    [[nodiscard]] std::span<const double> hess() const noexcept { return hess_; }

    // In-place kernels used by the program evaluator. `out` may not alias the
    // operands. Storage of `out` is reused when its dimension already matches.
    friend void assign_constant(D2Scalar& out, double v, std::size_t m)
    {
        out.reset(m);
        out.value_ = v;
    }

    friend void add_into(D2Scalar& out, const D2Scalar& a, const D2Scalar& b)
    {
        check_same(a, b);
        out.resize(a.m_);
        out.value_ = a.value_ + b.value_;
        for (std::size_t j = 0; j < a.m_; ++j) { out.grad_[j] = a.grad_[j] + b.grad_[j]; }
        for (std::size_t i = 0; i < a.hess_.size(); ++i) { out.hess_[i] = a.hess_[i] + b.hess_[i]; }
    }

    friend void sub_into(D2Scalar& out, const D2Scalar& a, const D2Scalar& b)
    {
        check_same(a, b);
        out.resize(a.m_);
        out.value_ = a.value_ - b.value_;
        for (std::size_t j = 0; j < a.m_; ++j) { out.grad_[j] = a.grad_[j] - b.grad_[j]; }
        for (std::size_t i = 0; i < a.hess_.size(); ++i) { out.hess_[i] = a.hess_[i] - b.hess_[i]; }
    }

    // (ab)'' = a b'' + b a'' + a' b'^T + b' a'^T
    friend void mul_into(D2Scalar& out, const D2Scalar& a, const D2Scalar& b)
    {
        check_same(a, b);
        const std::size_t m = a.m_;
        out.resize(m);
        out.value_ = a.value_ * b.value_;
        for (std::size_t j = 0; j < m; ++j) { out.grad_[j] = a.value_ * b.grad_[j] + b.value_ * a.grad_[j]; }
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t k = 0; k <= j; ++k) {
                const double h = a.value_ * b.hess_[j * m + k] + b.value_ * a.hess_[j * m + k]
                    + (a.grad_[j] * b.grad_[k] + b.grad_[j] * a.grad_[k]);
                out.hess_[j * m + k] = h;
                out.hess_[k * m + j] = h;
            }
        }
    }

    // q = a / b, so a = q b and q'' = (a'' - q b'' - q' b'^T - b' q'^T) / b.
    friend void div_into(D2Scalar& out, const D2Scalar& a, const D2Scalar& b)
    {
        check_same(a, b);
        const std::size_t m = a.m_;
        out.resize(m);
        const double q = a.value_ / b.value_;
        out.value_ = q;
        for (std::size_t j = 0; j < m; ++j) { out.grad_[j] = (a.grad_[j] - q * b.grad_[j]) / b.value_; }
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t k = 0; k <= j; ++k) {
                const double h = (a.hess_[j * m + k] - q * b.hess_[j * m + k]
                                     - (out.grad_[j] * b.grad_[k] + b.grad_[j] * out.grad_[k]))
                    / b.value_;
                out.hess_[j * m + k] = h;
                out.hess_[k * m + j] = h;
            }
        }
    }

    friend void log_into(D2Scalar& out, const D2Scalar& a)
    {
        const std::size_t m = a.m_;
        out.resize(m);
        out.value_ = std::log(a.value_);
        const double inv = 1.0 / a.value_;
        const double inv2 = inv * inv;
        for (std::size_t j = 0; j < m; ++j) { out.grad_[j] = a.grad_[j] * inv; }
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t k = 0; k <= j; ++k) {
                const double h = a.hess_[j * m + k] * inv - a.grad_[j] * a.grad_[k] * inv2;
                out.hess_[j * m + k] = h;
                out.hess_[k * m + j] = h;
            }
        }
    }

    friend void sin_into(D2Scalar& out, const D2Scalar& a)
    {
        const std::size_t m = a.m_;
        out.resize(m);
        const double s = std::sin(a.value_);
        const double c = std::cos(a.value_);
        out.value_ = s;
        for (std::size_t j = 0; j < m; ++j) { out.grad_[j] = c * a.grad_[j]; }
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t k = 0; k <= j; ++k) {
                const double h = c * a.hess_[j * m + k] - s * a.grad_[j] * a.grad_[k];
                out.hess_[j * m + k] = h;
                out.hess_[k * m + j] = h;
            }
        }
    }

    friend D2Scalar operator+(const D2Scalar& a, const D2Scalar& b) { D2Scalar r; add_into(r, a, b); return r; }
    friend D2Scalar operator-(const D2Scalar& a, const D2Scalar& b) { D2Scalar r; sub_into(r, a, b); return r; }
    friend D2Scalar operator*(const D2Scalar& a, const D2Scalar& b) { D2Scalar r; mul_into(r, a, b); return r; }
    friend D2Scalar operator/(const D2Scalar& a, const D2Scalar& b) { D2Scalar r; div_into(r, a, b); return r; }
    friend D2Scalar log(const D2Scalar& a) { D2Scalar r; log_into(r, a); return r; }
    friend D2Scalar sin(const D2Scalar& a) { D2Scalar r; sin_into(r, a); return r; }

private:
    static void check_same(const D2Scalar& a, const D2Scalar& b)
    {
        if (a.m_ != b.m_) {
            throw std::invalid_argument("D2Scalar: dimension mismatch (" + std::to_string(a.m_) + " vs " + std::to_string(b.m_) + ")");
        }
    }

    void resize(std::size_t m)
    {
        if (m_ != m) {
            m_ = m;
            grad_.resize(m);
            hess_.resize(m * m);
        }
    }

    void reset(std::size_t m)
    {
        resize(m);
        std::fill(grad_.begin(), grad_.end(), 0.0);
        std::fill(hess_.begin(), hess_.end(), 0.0);
    }

    double value_ = 0.0;
    std::size_t m_ = 0;
    std::vector<double> grad_;
    std::vector<double> hess_;
};

inline D2Scalar d2_constant(double v, std::size_t m) { return D2Scalar::constant(v, m); }
inline D2Scalar d2_seed(double v, std::size_t j, std::size_t m) { return D2Scalar::seed(v, j, m); }

} // namespace dcgp
