#pragma once

/**
 * @file momes.hpp
 * @brief Multi-objective memetic evolutionary strategy over (loss, complexity).
 *
 * Each generation every parent produces one mutant; the mutant's active
 * constants get one Newton step, then it joins the candidate pool unless its
 * (loss, complexity) pair is already present. Survivors are chosen by
 * non-dominated sorting, the last admitted front being truncated by crowding
 * distance.
 */

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cgp.hpp"
#include "dataset.hpp"
#include "loss.hpp"

namespace dcgp {

struct Individual {
    Genotype genotype;
    double loss = std::numeric_limits<double>::infinity(); // +inf when non-finite
    std::size_t complexity = 0;
};

struct MomesConfig {
    std::size_t population_size = 40;
    std::size_t generations = 1000;
    std::size_t max_mutations = 4;
    CgpParams cgp;
    ConstantInit const_init;
    std::uint64_t seed = 0;

    void validate() const
    {
        if (population_size < 2) { throw std::invalid_argument("MomesConfig: population_size must be >= 2"); }
        if (generations < 1) { throw std::invalid_argument("MomesConfig: generations must be >= 1"); }
        if (max_mutations < 1) { throw std::invalid_argument("MomesConfig: max_mutations must be >= 1"); }
        cgp.validate();
    }
};

struct FrontMember {
    Genotype genotype;
    std::string infix;
    double loss = 0.0;
    std::size_t complexity = 0;
};

/// Non-dominated individuals ordered by increasing complexity (and so decreasing loss).
struct ParetoFront {
    std::vector<FrontMember> members;

    [[nodiscard]] bool empty() const noexcept { return members.empty(); }
    /// Lowest-loss member.
    [[nodiscard]] const FrontMember& extreme() const { return members.back(); }
};

struct LogEntry {
    std::size_t generation = 0;
    double best_loss = 0.0;
    std::size_t front_size = 0;
};

using RunLog = std::vector<LogEntry>;

struct RunResult {
    std::vector<Individual> population;
    ParetoFront front;
    RunLog log;
};

/// Called after initialisation (generation 0) and after every generation.
using GenerationObserver = std::function<void(std::size_t generation, const std::vector<Individual>& population)>;

// ---------------------------------------------------------------------------
// Selection

/// Any finite loss beats a non-finite one; two non-finite individuals compare
/// by complexity only.
inline bool dominates(const Individual& a, const Individual& b) noexcept
{
    const bool fa = std::isfinite(a.loss);
    const bool fb = std::isfinite(b.loss);
    if (fa && !fb) { return true; }
    if (!fa && fb) { return false; }
    if (!fa) { return a.complexity < b.complexity; }
    return a.loss <= b.loss && a.complexity <= b.complexity && (a.loss < b.loss || a.complexity < b.complexity);
}

inline bool same_fitness(const Individual& a, const Individual& b) noexcept
{
    return a.complexity == b.complexity && std::bit_cast<std::uint64_t>(a.loss) == std::bit_cast<std::uint64_t>(b.loss);
}

/// Fronts F1, F2, ... as index lists (ascending within each front).
inline std::vector<std::vector<std::size_t>> non_dominated_sort(std::span<const Individual> pool)
{
    const std::size_t n = pool.size();
    std::vector<std::vector<std::size_t>> dominated_by(n);
    std::vector<std::size_t> domination_count(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dominates(pool[i], pool[j])) {
                dominated_by[i].push_back(j);
                ++domination_count[j];
            } else if (dominates(pool[j], pool[i])) {
                dominated_by[j].push_back(i);
                ++domination_count[i];
            }
        }
    }
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i) {
        if (domination_count[i] == 0) { current.push_back(i); }
    }
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (auto i : current) {
            for (auto j : dominated_by[i]) {
                if (--domination_count[j] == 0) { next.push_back(j); }
            }
        }
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

/// Crowding distance over (loss, complexity); boundary members get +inf.
/// An objective whose range is zero or non-finite contributes nothing.
inline std::vector<double> crowding_distance(std::span<const Individual> front)
{
    const std::size_t n = front.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, 0.0);
    if (n <= 2) {
        std::fill(dist.begin(), dist.end(), inf);
        return dist;
    }
    auto accumulate = [&](auto objective) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t { 0 });
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return objective(front[a]) < objective(front[b]); });
        dist[order.front()] = inf;
        dist[order.back()] = inf;
        const double range = objective(front[order.back()]) - objective(front[order.front()]);
        if (!(range > 0.0) || !std::isfinite(range)) { return; }
        for (std::size_t p = 1; p + 1 < n; ++p) {
            dist[order[p]] += (objective(front[order[p + 1]]) - objective(front[order[p - 1]])) / range;
        }
    };
    accumulate([](const Individual& x) { return x.loss; });
    accumulate([](const Individual& x) { return static_cast<double>(x.complexity); });
    return dist;
}

namespace detail {

/// Indices (into `front`) of the k members kept by crowding truncation, ascending.
inline std::vector<std::size_t> crowding_keep(std::span<const Individual> front, std::size_t k)
{
    const auto dist = crowding_distance(front);
    std::vector<std::size_t> order(front.size());
    std::iota(order.begin(), order.end(), std::size_t { 0 });
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
        if (dist[a] != dist[b]) { return dist[a] > dist[b]; }
        if (front[a].complexity != front[b].complexity) { return front[a].complexity < front[b].complexity; }
        return front[a].loss < front[b].loss;
    });
    order.resize(std::min(k, order.size()));
    std::sort(order.begin(), order.end());
    return order;
}

} // namespace detail

/// Keeps the k members of `front` with the largest crowding distance (ties:
/// lower complexity, lower loss, earlier position), in their original order.
inline std::vector<Individual> crowding_truncate(std::span<const Individual> front, std::size_t k)
{
    std::vector<Individual> out;
    for (auto i : detail::crowding_keep(front, k)) { out.push_back(front[i]); }
    return out;
}

/// Whole fronts in rank order, the first front that does not fit being crowding-truncated.
inline std::vector<Individual> select_survivors(std::span<const Individual> pool, std::size_t count)
{
    std::vector<Individual> out;
    out.reserve(count);
    for (const auto& front : non_dominated_sort(pool)) {
        if (out.size() == count) { break; }
        if (out.size() + front.size() <= count) {
            for (auto i : front) { out.push_back(pool[i]); }
            continue;
        }
        std::vector<Individual> members;
        for (auto i : front) { members.push_back(pool[i]); }
        for (auto& ind : crowding_truncate(members, count - out.size())) { out.push_back(std::move(ind)); }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Evolution

/// One Newton step on the active constants of `g`, then evaluation of (loss, complexity).
inline Individual learn(Genotype g, const CgpParams& params, const Dataset& data)
{
    const LossReport rep = loss_with_derivatives(g, params, data);
    auto updated = newton_step(g.constants, rep);
    Individual ind;
    if (updated == g.constants) {
        ind.loss = rep.loss;
    } else {
        g.constants = std::move(updated);
        ind.loss = mse_loss(g, params, data);
    }
    if (!std::isfinite(ind.loss)) { ind.loss = std::numeric_limits<double>::infinity(); }
    ind.complexity = complexity(g, params);
    ind.genotype = std::move(g);
    return ind;
}

inline bool fitness_present(std::span<const Individual> pool, const Individual& x) noexcept
{
    return std::any_of(pool.begin(), pool.end(), [&](const Individual& p) { return same_fitness(p, x); });
}

/// Parents followed by every learned mutant whose fitness is not yet in the pool.
inline std::vector<Individual> make_candidate_pool(const std::vector<Individual>& parents, const Dataset& data, const MomesConfig& cfg, RandomSource& rng)
{
    std::vector<Individual> pool = parents;
    pool.reserve(2 * parents.size());
    for (const auto& parent : parents) {
        Individual child = learn(mutate(parent.genotype, cfg.cgp, cfg.max_mutations, rng), cfg.cgp, data);
        if (!fitness_present(pool, child)) { pool.push_back(std::move(child)); }
    }
    return pool;
}

inline std::vector<Individual> evolve_generation(const std::vector<Individual>& parents, const Dataset& data, const MomesConfig& cfg, RandomSource& rng)
{
    if (parents.size() != cfg.population_size) { throw std::invalid_argument("evolve_generation: parent count != population_size"); }
    return select_survivors(make_candidate_pool(parents, data, cfg, rng), cfg.population_size);
}

/// First front of `population`, sorted by complexity, with decoded expressions.
inline ParetoFront extract_front(const std::vector<Individual>& population, const CgpParams& params, const std::vector<std::string>& names = {})
{
    ParetoFront front;
    const auto fronts = non_dominated_sort(population);
    if (fronts.empty()) { return front; }
    std::vector<std::size_t> idx = fronts.front();
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return population[a].complexity < population[b].complexity; });
    for (auto i : idx) {
        const auto& ind = population[i];
        if (!front.members.empty() && front.members.back().complexity == ind.complexity) { continue; } // duplicate fitness
        front.members.push_back({ ind.genotype, decode_infix(ind.genotype, params, names), ind.loss, ind.complexity });
    }
    return front;
}

inline double best_loss(const std::vector<Individual>& population) noexcept
{
    double best = std::numeric_limits<double>::infinity();
    for (const auto& ind : population) { best = std::min(best, ind.loss); }
    return best;
}

/// Random initial population with pairwise distinct fitness. Each member gets one
/// Newton step. Falls back to accepting duplicates after 100*NP rejected draws.
inline std::vector<Individual> initial_population(const Dataset& data, const MomesConfig& cfg, RandomSource& rng)
{
    std::vector<Individual> pop;
    pop.reserve(cfg.population_size);
    std::size_t rejected = 0;
    while (pop.size() < cfg.population_size) {
        Individual ind = learn(random_genotype(cfg.cgp, rng, cfg.const_init), cfg.cgp, data);
        if (fitness_present(pop, ind) && rejected < 100 * cfg.population_size) {
            ++rejected;
            continue;
        }
        pop.push_back(std::move(ind));
    }
    return pop;
}

inline RunResult run(const Dataset& data, const MomesConfig& cfg, const GenerationObserver& observer = {})
{
    cfg.validate();
    if (data.n_features != cfg.cgp.n_features) { throw std::invalid_argument("run: dataset feature count does not match CGP parameters"); }
    RandomSource rng(cfg.seed);
    RunResult result;
    const std::size_t log_every = std::max<std::size_t>(1, cfg.generations / 1000);
    auto record = [&](std::size_t gen) {
        const auto fronts = non_dominated_sort(result.population);
        result.log.push_back({ gen, best_loss(result.population), fronts.empty() ? 0 : fronts.front().size() });
    };

    result.population = initial_population(data, cfg, rng);
    record(0);
    if (observer) { observer(0, result.population); }
    for (std::size_t gen = 1; gen <= cfg.generations; ++gen) {
        result.population = evolve_generation(result.population, data, cfg, rng);
        if (gen % log_every == 0 || gen == cfg.generations) { record(gen); }
        if (observer) { observer(gen, result.population); }
    }
    result.front = extract_front(result.population, cfg.cgp, data.feature_names);
    return result;
}

struct StartResult {
    std::uint64_t seed = 0;
    ParetoFront front;
    RunLog log;
};

struct MultiStartResult {
    std::vector<StartResult> runs; // ordered by seed
    std::size_t best = 0;          // run whose front extreme has the lowest training loss
};

/// Index of the run with the lowest-loss front extreme (first one on ties).
inline std::size_t best_extreme(const std::vector<StartResult>& runs)
{
    std::size_t best = 0;
    double best_loss_seen = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < runs.size(); ++i) {
        if (runs[i].front.empty()) { continue; }
        const double l = runs[i].front.extreme().loss;
        if (l < best_loss_seen) {
            best_loss_seen = l;
            best = i;
        }
    }
    return best;
}

/// Runs seeds cfg.seed, cfg.seed+1, ... on up to `parallelism` threads.
inline MultiStartResult multi_start(const Dataset& data, const MomesConfig& cfg, std::size_t n_starts, std::size_t parallelism = 1)
{
    if (n_starts < 1) { throw std::invalid_argument("multi_start: n_starts must be >= 1"); }
    cfg.validate();
    MultiStartResult out;
    out.runs.resize(n_starts);
    std::atomic<std::size_t> next { 0 };
    std::vector<std::exception_ptr> errors(n_starts);
    auto worker = [&] {
        for (std::size_t i = next++; i < n_starts; i = next++) {
            try {
                MomesConfig c = cfg;
                c.seed = cfg.seed + i;
                auto r = run(data, c);
                out.runs[i] = { c.seed, std::move(r.front), std::move(r.log) };
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = std::clamp<std::size_t>(parallelism, 1, n_starts);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> threads;
        for (std::size_t t = 0; t < n_threads; ++t) { threads.emplace_back(worker); }
    }
    for (auto& e : errors) {
        if (e) { std::rethrow_exception(e); }
    }
    out.best = best_extreme(out.runs);
    return out;
}

} // namespace dcgp
