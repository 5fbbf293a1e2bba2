#pragma once

/**
 * @file config.hpp
 * @brief Run configuration: a flat `key = value` file.
 *
 *     # comments start with '#'
 *     train           = mex1.csv          # relative paths resolve against the config file
 *     test            = mex2.csv          # optional
 *     features        = LVAH, SH:standardize, DECL:standardize, TX, FO, NS
 *     target          = P
 *     lower_bound     = age_lo            # optional, together with upper_bound
 *     upper_bound     = age_hi
 *     kernels         = add, sub, mul, div, log
 *     rows            = 2
 *     columns         = 20
 *     levels_back     = 20
 *     n_constants     = 5
 *     max_mutations   = 4
 *     generations     = 50000
 *     population_size = 40
 *     n_starts        = 200
 *     seed            = 0
 *     parallelism     = 8
 *     output_dir      = out
 *
 * Feature scaling is one of none (default), standardize, std_divide.
 */

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cgp.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "momes.hpp"

namespace dcgp {

struct RunConfig {
    std::string train;
    std::string test;
    std::vector<ColumnSpec> columns;
    std::vector<std::string> kernels { "add", "sub", "mul", "div", "log" };
    std::size_t rows = 2;
    std::size_t grid_columns = 20;
    std::size_t levels_back = 20;
    std::size_t n_constants = 5;
    std::size_t max_mutations = 4;
    std::size_t generations = 50000;
    std::size_t population_size = 40;
    std::size_t n_starts = 1;
    std::uint64_t seed = 0;
    std::size_t parallelism = 1;
    std::string output_dir = "dcgp_out";

    [[nodiscard]] std::vector<ColumnSpec> features() const
    {
        std::vector<ColumnSpec> out;
        for (const auto& c : columns) {
            if (c.role == ColumnRole::feature) { out.push_back(c); }
        }
        return out;
    }

    [[nodiscard]] MomesConfig momes(std::size_t n_features) const
    {
        MomesConfig m;
        m.population_size = population_size;
        m.generations = generations;
        m.max_mutations = max_mutations;
        m.seed = seed;
        m.cgp.n_features = n_features;
        m.cgp.n_constants = n_constants;
        m.cgp.rows = rows;
        m.cgp.columns = grid_columns;
        m.cgp.levels_back = levels_back;
        m.cgp.kernels = KernelSet::from_names(kernels);
        return m;
    }

    /// Canonical text of every setting that influences results (not parallelism or output_dir).
    [[nodiscard]] std::string canonical() const
    {
        std::ostringstream s;
        s << "train=" << train << "\ntest=" << test << "\n";
        for (const auto& c : columns) {
            s << "column=" << c.name << ':' << static_cast<int>(c.role) << ':' << scaling_name(c.scaling) << "\n";
        }
        s << "kernels=";
        for (const auto& k : kernels) { s << k << ','; }
        s << "\nrows=" << rows << "\ncolumns=" << grid_columns << "\nlevels_back=" << levels_back
          << "\nn_constants=" << n_constants << "\nmax_mutations=" << max_mutations << "\ngenerations=" << generations
          << "\npopulation_size=" << population_size << "\nn_starts=" << n_starts << "\nseed=" << seed << "\n";
        return s.str();
    }

    /// FNV-1a (64 bit) of canonical(), as 16 hex digits.
    [[nodiscard]] std::string digest() const
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char ch : canonical()) {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }

    /// Throws DataError naming the first referenced file that does not exist.
    void check_files() const
    {
        for (const auto* p : { &train, &test }) {
            if (!p->empty() && !std::filesystem::exists(*p)) { throw DataError("dataset file not found: '" + *p + "'"); }
        }
    }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& v)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(v);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) { out.push_back(item); }
    }
    return out;
}

inline std::uint64_t parse_count(const std::string& key, const std::string& v, bool allow_zero)
{
    std::uint64_t out {};
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc {} || ptr != v.data() + v.size() || (!allow_zero && out == 0)) {
        throw ConfigError("config: '" + key + "' must be a " + (allow_zero ? "non-negative" : "positive") + " integer, got '" + v + "'");
    }
    return out;
}

} // namespace detail

/// Parses config text; relative dataset paths are resolved against `base_dir`.
inline RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {})
{
    RunConfig cfg;
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) { line.erase(hash); }
        if (detail::trim(line).empty()) { continue; }
        const auto eq = line.find('=');
        if (eq == std::string::npos) { throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'"); }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (kv.count(key)) { throw ConfigError("config: duplicate key '" + key + "'"); }
        kv[key] = value;
    }

    auto take = [&](const std::string& key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) { return std::nullopt; }
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return (path.is_relative() && !base_dir.empty() ? base_dir / path : path).string();
    };

    auto train = take("train");
    if (!train) { throw ConfigError("config: missing required key 'train'"); }
    cfg.train = resolve(*train);
    if (auto v = take("test")) { cfg.test = resolve(*v); }

    auto features = take("features");
    if (!features) { throw ConfigError("config: missing required key 'features'"); }
    for (const auto& item : detail::split_list(*features)) {
        ColumnSpec spec;
        const auto colon = item.find(':');
        spec.name = detail::trim(item.substr(0, colon));
        if (colon != std::string::npos) {
            auto s = parse_scaling(detail::trim(item.substr(colon + 1)));
            if (!s) { throw ConfigError("config: unknown scaling in '" + item + "' (none, standardize, std_divide)"); }
            spec.scaling = *s;
        }
        cfg.columns.push_back(spec);
    }
    if (cfg.columns.empty()) { throw ConfigError("config: 'features' lists no columns"); }

    auto target = take("target");
    if (!target || target->empty()) { throw ConfigError("config: missing required key 'target'"); }
    cfg.columns.push_back({ *target, ColumnRole::target, ScalingKind::none });
    auto lo = take("lower_bound");
    auto hi = take("upper_bound");
    if (lo.has_value() != hi.has_value()) { throw ConfigError("config: lower_bound and upper_bound must be given together"); }
    if (lo) {
        cfg.columns.push_back({ *lo, ColumnRole::lower_bound, ScalingKind::none });
        cfg.columns.push_back({ *hi, ColumnRole::upper_bound, ScalingKind::none });
    }

    if (auto v = take("kernels")) {
        cfg.kernels = detail::split_list(*v);
        try {
            (void)KernelSet::from_names(cfg.kernels);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
        if (cfg.kernels.empty()) { throw ConfigError("config: 'kernels' is empty"); }
    }

    auto count = [&](const char* key, auto& field, bool allow_zero) {
        if (auto v = take(key)) { field = static_cast<std::decay_t<decltype(field)>>(detail::parse_count(key, *v, allow_zero)); }
    };
    count("rows", cfg.rows, false);
    count("columns", cfg.grid_columns, false);
    count("levels_back", cfg.levels_back, false);
    count("n_constants", cfg.n_constants, true);
    count("max_mutations", cfg.max_mutations, false);
    count("generations", cfg.generations, false);
    count("population_size", cfg.population_size, false);
    count("n_starts", cfg.n_starts, false);
    count("seed", cfg.seed, true);
    count("parallelism", cfg.parallelism, false);
    if (auto v = take("output_dir")) { cfg.output_dir = resolve(*v); }

    if (!kv.empty()) { throw ConfigError("config: unknown key '" + kv.begin()->first + "'"); }
    if (cfg.levels_back > cfg.grid_columns) { throw ConfigError("config: levels_back must not exceed columns"); }
    if (cfg.population_size < 2) { throw ConfigError("config: population_size must be >= 2"); }
    return cfg;
}

inline RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) { throw ConfigError("cannot open config file '" + path + "'"); }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::filesystem::path(path).parent_path());
}

} // namespace dcgp
