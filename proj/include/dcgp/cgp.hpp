#pragma once

/**
 * @file cgp.hpp
 * @brief Cartesian Genetic Programming chromosome: encoding, active-node
 * analysis, mutation, evaluation and infix decoding.
 *
 * Gene layout for a grid of rows x columns nodes (node index i = column * rows + row):
 *
 *     [k_0, a_0, b_0, k_1, a_1, b_1, ..., k_{N-1}, a_{N-1}, b_{N-1}, out]
 *
 * k is the kernel gene (index into the KernelSet), a and b are connection
 * genes. Addresses 0 .. n_in-1 are input terminals (features first, then the
 * ephemeral constants) and address n_in + i is node i. Unary kernels read only
 * `a`; `b` is kept so that every node has the same layout.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "d2scalar.hpp"
#include "kernels.hpp"

namespace dcgp {

using RandomSource = std::mt19937_64;

struct CgpParams {
    std::size_t n_features = 1;
    std::size_t n_constants = 0;
    std::size_t rows = 1;
    std::size_t columns = 1;
    std::size_t levels_back = 1;
    KernelSet kernels;

    void validate() const
    {
        if (n_features < 1) { throw std::invalid_argument("CgpParams: n_features must be >= 1"); }
        if (rows < 1 || columns < 1) { throw std::invalid_argument("CgpParams: rows and columns must be >= 1"); }
        if (levels_back < 1 || levels_back > columns) {
            throw std::invalid_argument("CgpParams: levels_back must lie in [1, columns]");
        }
        if (kernels.empty()) { throw std::invalid_argument("CgpParams: kernel set is empty"); }
    }

    [[nodiscard]] std::size_t n_inputs() const noexcept { return n_features + n_constants; }
    [[nodiscard]] std::size_t n_nodes() const noexcept { return rows * columns; }
    [[nodiscard]] std::size_t n_genes() const noexcept { return 3 * n_nodes() + 1; }
    [[nodiscard]] std::size_t output_gene() const noexcept { return 3 * n_nodes(); }

    /// Node addresses reachable by the connection genes of `node`, as the
    /// half-open node-index range [first, last); terminals are always legal too.
    [[nodiscard]] std::pair<std::size_t, std::size_t> connection_nodes(std::size_t node) const noexcept
    {
        const std::size_t col = node / rows;
        const std::size_t first_col = col > levels_back ? col - levels_back : 0;
        return { first_col * rows, col * rows };
    }

    /// Number of legal values of gene `pos`.
    [[nodiscard]] std::size_t gene_range(std::size_t pos) const noexcept
    {
        if (pos == output_gene()) { return n_inputs() + n_nodes(); }
        if (pos % 3 == 0) { return kernels.size(); }
        auto [first, last] = connection_nodes(pos / 3);
        return n_inputs() + (last - first);
    }

    /// Maps a rank in [0, gene_range(pos)) to the gene value it denotes.
    [[nodiscard]] int gene_value(std::size_t pos, std::size_t rank) const noexcept
    {
        if (pos == output_gene() || pos % 3 == 0 || rank < n_inputs()) { return static_cast<int>(rank); }
        auto [first, last] = connection_nodes(pos / 3);
        return static_cast<int>(n_inputs() + first + (rank - n_inputs()));
    }

    /// Inverse of gene_value; returns gene_range(pos) when `value` is illegal.
    [[nodiscard]] std::size_t gene_rank(std::size_t pos, int value) const noexcept
    {
        const std::size_t range = gene_range(pos);
        if (value < 0) { return range; }
        const auto v = static_cast<std::size_t>(value);
        if (pos == output_gene() || pos % 3 == 0 || v < n_inputs()) { return v < range ? v : range; }
        auto [first, last] = connection_nodes(pos / 3);
        const std::size_t node = v - n_inputs();
        if (node < first || node >= last) { return range; }
        return n_inputs() + (node - first);
    }

    friend bool operator==(const CgpParams&, const CgpParams&) = default;
};

struct Genotype {
    std::vector<int> genes;
    std::vector<double> constants;

    friend bool operator==(const Genotype&, const Genotype&) = default;
};

struct ConstantInit {
    double low = -1.0;
    double high = 1.0;
};

inline bool is_valid(const Genotype& g, const CgpParams& params)
{
    if (g.genes.size() != params.n_genes() || g.constants.size() != params.n_constants) { return false; }
    for (std::size_t pos = 0; pos < g.genes.size(); ++pos) {
        if (params.gene_rank(pos, g.genes[pos]) >= params.gene_range(pos)) { return false; }
    }
    return std::all_of(g.constants.begin(), g.constants.end(), [](double c) { return std::isfinite(c); });
}

inline Genotype random_genotype(const CgpParams& params, RandomSource& rng, ConstantInit init = {})
{
    params.validate();
    Genotype g;
    g.genes.resize(params.n_genes());
    for (std::size_t pos = 0; pos < g.genes.size(); ++pos) {
        std::uniform_int_distribution<std::size_t> pick(0, params.gene_range(pos) - 1);
        g.genes[pos] = params.gene_value(pos, pick(rng));
    }
    std::uniform_real_distribution<double> cdist(init.low, init.high);
    g.constants.resize(params.n_constants);
    for (auto& c : g.constants) { c = cdist(rng); }
    return g;
}

/// Nodes reachable backwards from the output gene, in ascending (evaluation) order.
inline std::vector<std::size_t> active_nodes(const Genotype& g, const CgpParams& params)
{
    const std::size_t n_in = params.n_inputs();
    const std::size_t n_nodes = params.n_nodes();
    std::vector<char> used(n_nodes, 0);
    const auto out = static_cast<std::size_t>(g.genes[params.output_gene()]);
    if (out >= n_in) { used[out - n_in] = 1; }
    // connections only point to lower node indices, so one reverse sweep suffices
    for (std::size_t i = n_nodes; i-- > 0;) {
        if (!used[i]) { continue; }
        const KernelId k = params.kernels[static_cast<std::size_t>(g.genes[3 * i])];
        const int n_args = arity(k);
        for (int a = 0; a < n_args; ++a) {
            const auto src = static_cast<std::size_t>(g.genes[3 * i + 1 + a]);
            if (src >= n_in) { used[src - n_in] = 1; }
        }
    }
    std::vector<std::size_t> result;
    for (std::size_t i = 0; i < n_nodes; ++i) {
        if (used[i]) { result.push_back(i); }
    }
    return result;
}

inline std::size_t complexity(const Genotype& g, const CgpParams& params) { return active_nodes(g, params).size(); }

/// Returns a copy of `g` with k distinct integer genes redrawn, k ~ U[1, max_mutations].
/// Constants are copied unchanged.
inline Genotype mutate(const Genotype& g, const CgpParams& params, std::size_t max_mutations, RandomSource& rng)
{
    if (max_mutations < 1) { throw std::invalid_argument("mutate: max_mutations must be >= 1"); }
    Genotype child = g;
    const std::size_t n_genes = g.genes.size();
    std::uniform_int_distribution<std::size_t> count_dist(1, std::min(max_mutations, n_genes));
    const std::size_t k = count_dist(rng);

    // partial Fisher-Yates for k distinct positions
    std::vector<std::size_t> positions(n_genes);
    for (std::size_t i = 0; i < n_genes; ++i) { positions[i] = i; }
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n_genes - 1);
        std::swap(positions[i], positions[pick(rng)]);
    }

    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t pos = positions[i];
        const std::size_t range = params.gene_range(pos);
        if (range < 2) { continue; }
        const std::size_t current = params.gene_rank(pos, child.genes[pos]);
        std::uniform_int_distribution<std::size_t> pick(0, range - 2);
        std::size_t r = pick(rng);
        if (r >= current) { ++r; }
        child.genes[pos] = params.gene_value(pos, r);
    }
    return child;
}

namespace detail {

inline void set_terminal(double& out, double v, std::size_t) noexcept { out = v; }
inline void set_terminal(D2Scalar& out, double v, std::size_t m) { assign_constant(out, v, m); }

inline void set_constant(double& out, double v, std::size_t, std::size_t) noexcept { out = v; }
inline void set_constant(D2Scalar& out, double v, std::size_t j, std::size_t m) { out = D2Scalar::seed(v, j, m); }

} // namespace detail

/**
 * Reusable evaluator for one genotype over a scalar algebra (double or D2Scalar).
 *
 * Active nodes and terminal storage are computed once; each call then only
 * evaluates the active nodes for the given feature vector. In D2Scalar mode the
 * constants are seeded as the differentiation variables.
 */
template <typename Scalar>
class Evaluator {
public:
    Evaluator(const Genotype& g, const CgpParams& params)
        : genotype_(&g)
        , params_(&params)
        , active_(active_nodes(g, params))
        , terminals_(params.n_inputs())
        , nodes_(params.n_nodes())
    {
        const std::size_t m = params.n_constants;
        for (std::size_t j = 0; j < m; ++j) {
            detail::set_constant(terminals_[params.n_features + j], g.constants[j], j, m);
        }
    }

    [[nodiscard]] const std::vector<std::size_t>& active() const noexcept { return active_; }

    /// True when some active node (or the output gene) reads an ephemeral constant.
    [[nodiscard]] bool uses_constants() const noexcept
    {
        const auto& genes = genotype_->genes;
        auto is_const = [&](int addr) {
            const auto a = static_cast<std::size_t>(addr);
            return a >= params_->n_features && a < params_->n_inputs();
        };
        if (is_const(genes[params_->output_gene()])) { return true; }
        for (auto i : active_) {
            const KernelId k = params_->kernels[static_cast<std::size_t>(genes[3 * i])];
            if (is_const(genes[3 * i + 1]) || (arity(k) == 2 && is_const(genes[3 * i + 2]))) { return true; }
        }
        return false;
    }

    const Scalar& operator()(std::span<const double> x)
    {
        const std::size_t n = params_->n_features;
        if (x.size() != n) {
            throw std::invalid_argument("evaluate: expected " + std::to_string(n) + " features, got " + std::to_string(x.size()));
        }
        const std::size_t m = params_->n_constants;
        for (std::size_t i = 0; i < n; ++i) { detail::set_terminal(terminals_[i], x[i], m); }

        const auto& genes = genotype_->genes;
        for (auto i : active_) {
            const KernelId k = params_->kernels[static_cast<std::size_t>(genes[3 * i])];
            const Scalar& a = ref(genes[3 * i + 1]);
            const Scalar& b = arity(k) == 2 ? ref(genes[3 * i + 2]) : a;
            apply_into(k, nodes_[i], a, b);
        }
        return ref(genes[params_->output_gene()]);
    }

private:
    const Scalar& ref(int addr) const
    {
        const auto a = static_cast<std::size_t>(addr);
        const std::size_t n_in = params_->n_inputs();
        return a < n_in ? terminals_[a] : nodes_[a - n_in];
    }

    const Genotype* genotype_;
    const CgpParams* params_;
    std::vector<std::size_t> active_;
    std::vector<Scalar> terminals_;
    std::vector<Scalar> nodes_;
};

template <typename Scalar = double>
Scalar evaluate(const Genotype& g, const CgpParams& params, std::span<const double> x)
{
    Evaluator<Scalar> ev(g, params);
    return ev(x);
}

/// Fixed-notation literal with `digits` significant digits (scientific for very
/// small or very large magnitudes), e.g. 226.7 -> "226.700".
inline std::string format_constant(double v, int digits = 6)
{
    digits = std::clamp(digits, 1, 17);
    char buf[400];
    const double mag = std::fabs(v);
    if (v == 0.0) {
        std::snprintf(buf, sizeof buf, "%.*f", digits - 1, 0.0);
    } else if (mag >= 1e-4 && mag < 1e6) {
        // decide the exponent after rounding so 999.9996 prints as 1000.00
        char probe[64];
        std::snprintf(probe, sizeof probe, "%.*e", digits - 1, v);
        const int exponent = std::atoi(std::strchr(probe, 'e') + 1);
        const int decimals = std::max(0, digits - 1 - exponent);
        std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    } else {
        std::snprintf(buf, sizeof buf, "%.*e", digits - 1, v);
    }
    return buf;
}

/**
 * Fully parenthesised infix form of the expressed program. Binary kernels
 * print as "(a op b)", unary ones as "log(a)" / "sin(a)". Features use
 * `names` (default x0, x1, ...) and constants are rendered as literals with
 * `digits` significant digits.
 */
inline std::string decode_infix(const Genotype& g, const CgpParams& params, const std::vector<std::string>& names = {}, int digits = 6)
{
    const std::size_t n = params.n_features;
    const std::size_t n_in = params.n_inputs();
    if (!names.empty() && names.size() != n) { throw std::invalid_argument("decode_infix: name table size mismatch"); }

    std::vector<std::string> terms(n_in);
    for (std::size_t i = 0; i < n; ++i) { terms[i] = names.empty() ? "x" + std::to_string(i) : names[i]; }
    for (std::size_t j = 0; j < params.n_constants; ++j) { terms[n + j] = format_constant(g.constants[j], digits); }

    std::vector<std::string> nodes(params.n_nodes());
    auto ref = [&](int addr) -> const std::string& {
        const auto a = static_cast<std::size_t>(addr);
        return a < n_in ? terms[a] : nodes[a - n_in];
    };
    for (auto i : active_nodes(g, params)) {
        const KernelId k = params.kernels[static_cast<std::size_t>(g.genes[3 * i])];
        const std::string sym(kernel_symbol(k));
        if (arity(k) == 1) {
            nodes[i] = sym + "(" + ref(g.genes[3 * i + 1]) + ")";
        } else {
            nodes[i] = "(" + ref(g.genes[3 * i + 1]) + " " + sym + " " + ref(g.genes[3 * i + 2]) + ")";
        }
    }
    return ref(g.genes[params.output_gene()]);
}

} // namespace dcgp
