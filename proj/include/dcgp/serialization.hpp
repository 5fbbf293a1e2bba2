#pragma once

/**
 * @file serialization.hpp
 * @brief JSON forms of CGP parameters, genotypes and Pareto-front files.
 */

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cgp.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "momes.hpp"

namespace dcgp {

using nlohmann::json;

inline json to_json(const CgpParams& p)
{
    return json { { "n_features", p.n_features }, { "n_constants", p.n_constants }, { "rows", p.rows },
        { "columns", p.columns }, { "levels_back", p.levels_back }, { "kernels", p.kernels.names() } };
}

inline CgpParams params_from_json(const json& j)
{
    CgpParams p;
    p.n_features = j.at("n_features").get<std::size_t>();
    p.n_constants = j.at("n_constants").get<std::size_t>();
    p.rows = j.at("rows").get<std::size_t>();
    p.columns = j.at("columns").get<std::size_t>();
    p.levels_back = j.at("levels_back").get<std::size_t>();
    p.kernels = KernelSet::from_names(j.at("kernels").get<std::vector<std::string>>());
    p.validate();
    return p;
}

inline json to_json(const Genotype& g, const CgpParams& p)
{
    return json { { "params", to_json(p) }, { "genes", g.genes }, { "constants", g.constants } };
}

/// Reads {params, genes, constants}; throws DataError when the genotype is invalid for its params.
inline std::pair<Genotype, CgpParams> genotype_from_json(const json& j)
{
    CgpParams p = params_from_json(j.at("params"));
    Genotype g { j.at("genes").get<std::vector<int>>(), j.at("constants").get<std::vector<double>>() };
    if (!is_valid(g, p)) { throw DataError("genotype is not valid for its CGP parameters"); }
    return { std::move(g), std::move(p) };
}

namespace detail {

inline json loss_to_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
inline double loss_from_json(const json& j) { return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>(); }

} // namespace detail

/// Everything needed to re-evaluate a front on new data.
struct FrontFile {
    std::uint64_t seed = 0;
    std::string config_digest;
    CgpParams params;
    std::vector<std::string> features;
    std::string target;
    std::string lower_bound;
    std::string upper_bound;
    ScalingState scaling;
    ParetoFront front;
};

inline json to_json(const FrontFile& f)
{
    json scaling = json::array();
    for (std::size_t j = 0; j < f.scaling.size(); ++j) {
        scaling.push_back({ { "column", f.features.at(j) }, { "kind", std::string(scaling_name(f.scaling[j].kind)) },
            { "mean", f.scaling[j].mean }, { "std", f.scaling[j].std } });
    }
    json members = json::array();
    for (const auto& m : f.front.members) {
        members.push_back({ { "genes", m.genotype.genes }, { "constants", m.genotype.constants }, { "infix", m.infix },
            { "loss", detail::loss_to_json(m.loss) }, { "complexity", m.complexity } });
    }
    json j { { "seed", f.seed }, { "config_digest", f.config_digest }, { "cgp", to_json(f.params) },
        { "features", f.features }, { "target", f.target }, { "scaling", scaling }, { "members", members } };
    if (!f.lower_bound.empty()) {
        j["lower_bound"] = f.lower_bound;
        j["upper_bound"] = f.upper_bound;
    }
    return j;
}

inline FrontFile front_from_json(const json& j)
{
    FrontFile f;
    try {
        f.seed = j.at("seed").get<std::uint64_t>();
        f.config_digest = j.value("config_digest", "");
        f.params = params_from_json(j.at("cgp"));
        f.features = j.at("features").get<std::vector<std::string>>();
        f.target = j.at("target").get<std::string>();
        f.lower_bound = j.value("lower_bound", "");
        f.upper_bound = j.value("upper_bound", "");
        if (f.features.size() != f.params.n_features) { throw DataError("front file: feature list does not match n_features"); }
        const auto& sc = j.at("scaling");
        if (!sc.empty()) {
            if (sc.size() != f.features.size()) { throw DataError("front file: scaling entries do not match features"); }
            for (const auto& s : sc) {
                auto kind = parse_scaling(s.at("kind").get<std::string>());
                if (!kind) { throw DataError("front file: unknown scaling kind"); }
                f.scaling.push_back({ *kind, s.at("mean").get<double>(), s.at("std").get<double>() });
            }
        }
        for (const auto& m : j.at("members")) {
            Genotype g { m.at("genes").get<std::vector<int>>(), m.at("constants").get<std::vector<double>>() };
            if (!is_valid(g, f.params)) { throw DataError("front file: member genotype is invalid"); }
            f.front.members.push_back({ std::move(g), m.value("infix", ""), detail::loss_from_json(m.at("loss")),
                m.at("complexity").get<std::size_t>() });
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("front file: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("front file: ") + e.what());
    }
    return f;
}

inline void write_json(const std::string& path, const json& j)
{
    std::ofstream out(path);
    if (!out) { throw DataError("cannot write '" + path + "'"); }
    out << j.dump(2) << '\n';
}

inline json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) { throw DataError("cannot open '" + path + "'"); }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError("'" + path + "': " + e.what());
    }
}

} // namespace dcgp
