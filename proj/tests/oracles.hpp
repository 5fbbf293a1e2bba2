#pragma once

// Independent reference implementations used by the tests. Nothing here calls
// into the library code paths it is used to check.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcgp/cgp.hpp"
#include "dcgp/dataset.hpp"
#include "dcgp/momes.hpp"

namespace oracle {

using dcgp::CgpParams;
using dcgp::Genotype;
using dcgp::KernelId;

// --------------------------------------------------------------------------
// finite differences

// Relative steps per derivative order. Second differences carry eps*f/h^2
// roundoff, so 1e-4 is roundoff-bound for losses in the thousands; first
// differences at 1e-3 are truncation-bound on steep expressions.
inline double fd_step(double c, double rel = 1e-4) { return rel * std::max(1.0, std::fabs(c)); }
constexpr double fd_hessian_rel = 1e-3;

/// Central-difference gradient, Richardson-extrapolated over steps h and h/2.
inline std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f, const std::vector<double>& c)
{
    std::vector<double> g(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) {
        auto central = [&](double h) {
            auto p = c, q = c;
            p[j] += h;
            q[j] -= h;
            return (f(p) - f(q)) / (2 * h);
        };
        const double h = fd_step(c[j]);
        g[j] = (4 * central(h / 2) - central(h)) / 3;
    }
    return g;
}

/// Second differences (row-major m*m), Richardson-extrapolated over h and h/2.
inline std::vector<double> fd_hessian(const std::function<double(const std::vector<double>&)>& f, const std::vector<double>& c)
{
    const std::size_t m = c.size();
    std::vector<double> hess(m * m);
    const double f0 = f(c);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t k = 0; k <= j; ++k) {
            auto second = [&](double hj, double hk) {
                if (j == k) {
                    auto p = c, q = c;
                    p[j] += hj;
                    q[j] -= hj;
                    return (f(p) - 2 * f0 + f(q)) / (hj * hj);
                }
                auto pp = c, pm = c, mp = c, mm = c;
                pp[j] += hj; pp[k] += hk;
                pm[j] += hj; pm[k] -= hk;
                mp[j] -= hj; mp[k] += hk;
                mm[j] -= hj; mm[k] -= hk;
                return (f(pp) - f(pm) - f(mp) + f(mm)) / (4 * hj * hk);
            };
            const double hj = fd_step(c[j], fd_hessian_rel);
            const double hk = fd_step(c[k], fd_hessian_rel);
            const double v = (4 * second(hj / 2, hk / 2) - second(hj, hk)) / 3;
            hess[j * m + k] = v;
            hess[k * m + j] = v;
        }
    }
    return hess;
}

/// |a - b| / max(1, |a|, |b|)
inline double rel_err(double a, double b) { return std::fabs(a - b) / std::max({ 1.0, std::fabs(a), std::fabs(b) }); }

inline double max_rel_err(const std::vector<double>& a, const std::vector<double>& b)
{
    double e = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) { e = std::max(e, rel_err(a[i], b[i])); }
    return e;
}

// --------------------------------------------------------------------------
// straight-line CGP interpreter and validity checker

struct Trace {
    double value = 0.0;
    double min_abs_divisor = INFINITY; // smallest |b| seen by an active div
    double min_log_arg = INFINITY;     // smallest argument seen by an active log
};

/// Recursive evaluation of the output gene, reading the gene vector directly.
inline Trace interpret(const Genotype& g, const CgpParams& p, const std::vector<double>& x)
{
    const std::size_t n_in = p.n_features + p.n_constants;
    Trace t;
    std::function<double(int)> node_value = [&](int addr) -> double {
        const auto a = static_cast<std::size_t>(addr);
        if (a < p.n_features) { return x[a]; }
        if (a < n_in) { return g.constants[a - p.n_features]; }
        const std::size_t i = a - n_in;
        const KernelId k = p.kernels[static_cast<std::size_t>(g.genes[3 * i])];
        const double u = node_value(g.genes[3 * i + 1]);
        switch (k) {
        case KernelId::add: return u + node_value(g.genes[3 * i + 2]);
        case KernelId::sub: return u - node_value(g.genes[3 * i + 2]);
        case KernelId::mul: return u * node_value(g.genes[3 * i + 2]);
        case KernelId::div: {
            const double v = node_value(g.genes[3 * i + 2]);
            t.min_abs_divisor = std::min(t.min_abs_divisor, std::fabs(v));
            return u / v;
        }
        case KernelId::log: t.min_log_arg = std::min(t.min_log_arg, u); return std::log(u);
        case KernelId::sin: return std::sin(u);
        }
        return NAN;
    };
    t.value = node_value(g.genes[3 * p.rows * p.columns]);
    return t;
}

/// Naive two-pass mean squared error.
inline double naive_mse(const Genotype& g, const CgpParams& p, const dcgp::Dataset& d)
{
    std::vector<double> residuals;
    for (std::size_t i = 0; i < d.n_rows; ++i) {
        std::vector<double> x(d.row(i).begin(), d.row(i).end());
        residuals.push_back(d.targets[i] - interpret(g, p, x).value);
    }
    double s = 0.0;
    for (double r : residuals) { s += r * r; }
    return s / static_cast<double>(residuals.size());
}

inline bool valid_genotype(const Genotype& g, const CgpParams& p)
{
    const std::size_t n_in = p.n_features + p.n_constants;
    const std::size_t n_nodes = p.rows * p.columns;
    if (g.genes.size() != 3 * n_nodes + 1 || g.constants.size() != p.n_constants) { return false; }
    for (std::size_t i = 0; i < n_nodes; ++i) {
        const int k = g.genes[3 * i];
        if (k < 0 || k >= static_cast<int>(p.kernels.size())) { return false; }
        const long q = static_cast<long>(i / p.rows);
        const long min_col = std::max(0L, q - static_cast<long>(p.levels_back));
        for (int s = 1; s <= 2; ++s) {
            const long addr = g.genes[3 * i + s];
            if (addr < 0) { return false; }
            if (addr < static_cast<long>(n_in)) { continue; }
            const long col = (addr - static_cast<long>(n_in)) / static_cast<long>(p.rows);
            if (col < min_col || col > q - 1) { return false; }
        }
    }
    const long out = g.genes.back();
    if (out < 0 || out >= static_cast<long>(n_in + n_nodes)) { return false; }
    for (double c : g.constants) {
        if (!std::isfinite(c)) { return false; }
    }
    return true;
}

/// Depth-first reachability over the explicit dependency graph.
inline std::vector<std::size_t> reachable_nodes(const Genotype& g, const CgpParams& p)
{
    const std::size_t n_in = p.n_features + p.n_constants;
    const std::size_t n_nodes = p.rows * p.columns;
    std::vector<std::vector<std::size_t>> deps(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        const KernelId k = p.kernels[static_cast<std::size_t>(g.genes[3 * i])];
        const int n_args = (k == KernelId::log || k == KernelId::sin) ? 1 : 2;
        for (int s = 0; s < n_args; ++s) {
            const auto addr = static_cast<std::size_t>(g.genes[3 * i + 1 + s]);
            if (addr >= n_in) { deps[i].push_back(addr - n_in); }
        }
    }
    std::vector<bool> seen(n_nodes, false);
    std::vector<std::size_t> stack;
    const auto out = static_cast<std::size_t>(g.genes.back());
    if (out >= n_in) { stack.push_back(out - n_in); }
    while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        if (seen[v]) { continue; }
        seen[v] = true;
        for (auto d : deps[v]) { stack.push_back(d); }
    }
    std::vector<std::size_t> out_nodes;
    for (std::size_t i = 0; i < n_nodes; ++i) {
        if (seen[i]) { out_nodes.push_back(i); }
    }
    return out_nodes;
}

// --------------------------------------------------------------------------
// Pareto sorting

inline bool dominates(double la, std::size_t ca, double lb, std::size_t cb)
{
    const bool fa = std::isfinite(la), fb = std::isfinite(lb);
    if (fa != fb) { return fa; }
    if (!fa) { return ca < cb; }
    return (la <= lb && ca <= cb) && (la < lb || ca < cb);
}

/// Fronts by repeated peeling with exhaustive pairwise checks.
inline std::vector<std::vector<std::size_t>> brute_force_fronts(const std::vector<dcgp::Individual>& pool)
{
    std::vector<std::size_t> remaining(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) { remaining[i] = i; }
    std::vector<std::vector<std::size_t>> fronts;
    while (!remaining.empty()) {
        std::vector<std::size_t> front, rest;
        for (auto i : remaining) {
            bool dominated = false;
            for (auto j : remaining) {
                if (j != i && dominates(pool[j].loss, pool[j].complexity, pool[i].loss, pool[i].complexity)) { dominated = true; }
            }
            (dominated ? rest : front).push_back(i);
        }
        fronts.push_back(front);
        remaining = rest;
    }
    return fronts;
}

// --------------------------------------------------------------------------
// infix parser / evaluator

class InfixEvaluator {
public:
    InfixEvaluator(std::string text, std::map<std::string, double> vars)
        : s_(std::move(text))
        , vars_(std::move(vars))
    {
    }

    double evaluate()
    {
        pos_ = 0;
        const double v = expr();
        skip();
        if (pos_ != s_.size()) { throw std::runtime_error("trailing input at " + std::to_string(pos_)); }
        return v;
    }

private:
    void skip()
    {
        while (pos_ < s_.size() && s_[pos_] == ' ') { ++pos_; }
    }

    void expect(char c)
    {
        skip();
        if (pos_ >= s_.size() || s_[pos_] != c) { throw std::runtime_error(std::string("expected '") + c + "' at " + std::to_string(pos_)); }
        ++pos_;
    }

    double expr()
    {
        skip();
        if (s_[pos_] == '(') {
            ++pos_;
            const double a = expr();
            skip();
            const char op = s_[pos_++];
            const double b = expr();
            expect(')');
            switch (op) {
            case '+': return a + b;
            case '-': return a - b;
            case '*': return a * b;
            case '/': return a / b;
            default: throw std::runtime_error("bad operator");
            }
        }
        if (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '-' || s_[pos_] == '.') {
            std::size_t used = 0;
            const double v = std::stod(s_.substr(pos_), &used);
            pos_ += used;
            return v;
        }
        std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) { ++pos_; }
        const std::string name = s_.substr(start, pos_ - start);
        if ((name == "log" || name == "sin") && pos_ < s_.size() && s_[pos_] == '(') {
            ++pos_;
            const double a = expr();
            expect(')');
            return name == "log" ? std::log(a) : std::sin(a);
        }
        auto it = vars_.find(name);
        if (it == vars_.end()) { throw std::runtime_error("unknown variable '" + name + "'"); }
        return it->second;
    }

    std::string s_;
    std::map<std::string, double> vars_;
    std::size_t pos_ = 0;
};

} // namespace oracle
