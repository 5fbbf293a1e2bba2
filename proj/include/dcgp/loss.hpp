#pragma once

/**
 * @file loss.hpp
 * @brief Mean squared error of a CGP program with exact gradient and Hessian
 * over the ephemeral constants, and the one-step Newton update of the active
 * constants.
 */

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cgp.hpp"
#include "d2scalar.hpp"
#include "dataset.hpp"

namespace dcgp {

struct LossReport {
    double loss = 0.0;
    std::vector<double> grad;          // length m
    std::vector<double> hess;          // m x m, row-major
    std::vector<std::size_t> active;   // j with grad[j] != 0
    std::vector<double> active_grad;
    std::vector<double> active_hess;   // |active| x |active|, row-major
    bool finite = true;
};

namespace detail {

inline void check_dims(const CgpParams& params, const Dataset& data)
{
    if (data.n_features != params.n_features) {
        throw std::invalid_argument("loss: dataset has " + std::to_string(data.n_features) + " features, program expects "
            + std::to_string(params.n_features));
    }
}

} // namespace detail

/// (1/N) * sum_i (y_i - f(x_i))^2; non-finite when any prediction is.
inline double mse_loss(const Genotype& g, const CgpParams& params, const Dataset& data)
{
    detail::check_dims(params, data);
    Evaluator<double> eval(g, params);
    double sum = 0.0;
    for (std::size_t i = 0; i < data.n_rows; ++i) {
        const double r = data.targets[i] - eval(data.row(i));
        sum += r * r;
    }
    return sum / static_cast<double>(data.n_rows);
}

inline std::vector<double> predict(const Genotype& g, const CgpParams& params, const Dataset& data)
{
    detail::check_dims(params, data);
    Evaluator<double> eval(g, params);
    std::vector<double> out(data.n_rows);
    for (std::size_t i = 0; i < data.n_rows; ++i) { out[i] = eval(data.row(i)); }
    return out;
}

/**
 * Loss together with G = dl/dc and H = d2l/dc2:
 *
 *     G = (1/N) sum -2 r_i grad(y_i)
 *     H = (1/N) sum  2 (grad(y_i) grad(y_i)^T - r_i hess(y_i)),   r_i = y_i - f(x_i)
 *
 * Samples are accumulated in row order so results are reproducible.
 */
inline LossReport loss_with_derivatives(const Genotype& g, const CgpParams& params, const Dataset& data)
{
    detail::check_dims(params, data);
    const std::size_t m = params.n_constants;
    LossReport rep;
    rep.grad.assign(m, 0.0);
    rep.hess.assign(m * m, 0.0);

    Evaluator<D2Scalar> eval(g, params);
    if (!eval.uses_constants()) {
        // every gradient entry is exactly zero; skip the differential algebra
        rep.loss = mse_loss(g, params, data);
        rep.finite = std::isfinite(rep.loss);
        return rep;
    }

    const auto n = static_cast<double>(data.n_rows);
    double sum = 0.0;
    for (std::size_t i = 0; i < data.n_rows; ++i) {
        const D2Scalar& y = eval(data.row(i));
        const double r = data.targets[i] - y.value();
        sum += r * r;
        const auto gy = y.grad();
        const auto hy = y.hess();
        for (std::size_t j = 0; j < m; ++j) {
            rep.grad[j] -= 2.0 * r * gy[j];
            for (std::size_t k = 0; k <= j; ++k) { rep.hess[j * m + k] += 2.0 * (gy[j] * gy[k] - r * hy[j * m + k]); }
        }
    }
    rep.loss = sum / n;
    for (std::size_t j = 0; j < m; ++j) {
        rep.grad[j] /= n;
        for (std::size_t k = 0; k <= j; ++k) {
            rep.hess[j * m + k] /= n;
            rep.hess[k * m + j] = rep.hess[j * m + k];
        }
    }

    rep.finite = std::isfinite(rep.loss);
    if (!rep.finite) { return rep; }
    for (std::size_t j = 0; j < m; ++j) {
        if (rep.grad[j] != 0.0) { rep.active.push_back(j); }
    }
    const std::size_t a = rep.active.size();
    rep.active_grad.resize(a);
    rep.active_hess.resize(a * a);
    for (std::size_t p = 0; p < a; ++p) {
        rep.active_grad[p] = rep.grad[rep.active[p]];
        for (std::size_t q = 0; q < a; ++q) { rep.active_hess[p * a + q] = rep.hess[rep.active[p] * m + rep.active[q]]; }
    }
    return rep;
}

/**
 * One Newton step on the active constants: solve H~ d = G~ and return c - d.
 * The step is skipped (c returned unchanged) when the report is non-finite, no
 * constant is active, H~ is singular, or the result is not finite.
 */
inline std::vector<double> newton_step(const std::vector<double>& c, const LossReport& report)
{
    const std::size_t a = report.active.size();
    if (!report.finite || a == 0) { return c; }
    const auto n = static_cast<Eigen::Index>(a);
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> h(report.active_hess.data(), n, n);
    const Eigen::Map<const Eigen::VectorXd> gvec(report.active_grad.data(), n);
    if (!h.allFinite() || !gvec.allFinite()) { return c; }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(h);
    if (!lu.isInvertible()) { return c; }
    const Eigen::VectorXd delta = lu.solve(gvec);
    if (!delta.allFinite()) { return c; }

    std::vector<double> out = c;
    for (std::size_t p = 0; p < a; ++p) {
        out[report.active[p]] -= delta(static_cast<Eigen::Index>(p));
        if (!std::isfinite(out[report.active[p]])) { return c; }
    }
    return out;
}

} // namespace dcgp
