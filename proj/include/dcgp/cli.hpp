#pragma once

/**
 * @file cli.hpp
 * @brief Commands behind the `dcgp_sr` tool. Each returns a process exit code:
 * 0 success, 2 configuration error, 3 data error, 4 numerical failure.
 */

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "config.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "loss.hpp"
#include "momes.hpp"
#include "serialization.hpp"

namespace dcgp {

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_data = 3, exit_numerical = 4 };

/// Runs `body`, mapping the library's exception types to exit codes and
/// reporting the message on `err`.
inline int guarded(std::ostream& err, const std::function<int()>& body)
{
    try {
        return body();
    } catch (const ConfigError& e) {
        fmt::print(err, "config error: {}\n", e.what());
        return exit_config;
    } catch (const DataError& e) {
        fmt::print(err, "data error: {}\n", e.what());
        return exit_data;
    } catch (const NumericalError& e) {
        fmt::print(err, "numerical failure: {}\n", e.what());
        return exit_numerical;
    } catch (const std::exception& e) {
        fmt::print(err, "internal error: {}\n", e.what());
        return exit_numerical;
    }
}

/// Four significant digits in the "-7.666·10¹" notation (U+2212 minus, superscript exponent).
inline std::string format_power10(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", std::fabs(v));
    const std::string s(buf);
    const auto e = s.find('e');
    const int exponent = std::stoi(s.substr(e + 1));
    static const char* const superscripts[] = { "⁰", "¹", "²", "³", "⁴", "⁵", "⁶", "⁷", "⁸", "⁹" };
    std::string exp_str = exponent < 0 ? "⁻" : "";
    for (char ch : std::to_string(std::abs(exponent))) { exp_str += superscripts[ch - '0']; }
    return std::string(v < 0 ? "−" : "+") + s.substr(0, e) + "·10" + exp_str;
}

namespace detail {

struct LoadedData {
    Dataset train;
    std::optional<Dataset> test;
};

inline LoadedData load_run_data(const RunConfig& cfg, bool scaled)
{
    cfg.check_files();
    LoadedData d { load_csv(cfg.train, cfg.columns), std::nullopt };
    if (!cfg.test.empty()) { d.test = load_csv(cfg.test, cfg.columns); }
    if (scaled) {
        const ScalingState state = fit_scaling(d.train, cfg.features());
        d.train = apply_scaling(std::move(d.train), state);
        if (d.test) { d.test = apply_scaling(std::move(*d.test), state); }
    }
    return d;
}

inline std::vector<std::string> csv_header(const std::string& path)
{
    std::ifstream in(path);
    if (!in) { throw DataError("cannot open dataset file '" + path + "'"); }
    std::string line;
    std::getline(in, line);
    auto cells = split_csv_line(line);
    for (auto& c : cells) { c = trim(c); }
    return cells;
}

} // namespace detail

/// Multi-start evolution; writes front_seed_<s>.json, runlog_seed_<s>.csv and report.csv.
inline int cmd_evolve(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        auto data = detail::load_run_data(cfg, true);
        MomesConfig mcfg;
        try {
            mcfg = cfg.momes(data.train.n_features);
            mcfg.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        const auto result = multi_start(data.train, mcfg, cfg.n_starts, cfg.parallelism);

        std::filesystem::create_directories(cfg.output_dir);
        const std::filesystem::path dir(cfg.output_dir);
        const std::string digest = cfg.digest();
        std::ofstream report(dir / "report.csv");
        report << "seed,complexity,train_loss,train_rmse";
        if (data.test) { report << ",test_rmse,test_mae"; }
        report << ",infix\n";
        report.precision(17);

        for (const auto& r : result.runs) {
            FrontFile f;
            f.seed = r.seed;
            f.config_digest = digest;
            f.params = mcfg.cgp;
            f.features = data.train.feature_names;
            f.target = data.train.target_name;
            f.lower_bound = data.train.lower_name;
            f.upper_bound = data.train.upper_name;
            f.scaling = data.train.scaling;
            f.front = r.front;
            write_json((dir / fmt::format("front_seed_{}.json", r.seed)).string(), to_json(f));

            std::ofstream log(dir / fmt::format("runlog_seed_{}.csv", r.seed));
            log.precision(17);
            log << "generation,best_loss,front_size\n";
            for (const auto& e : r.log) { log << e.generation << ',' << e.best_loss << ',' << e.front_size << '\n'; }

            for (const auto& m : r.front.members) {
                report << r.seed << ',' << m.complexity << ',' << m.loss << ',' << std::sqrt(m.loss);
                if (data.test) {
                    const auto mr = metrics(predict(m.genotype, mcfg.cgp, *data.test), *data.test);
                    report << ',' << mr.rmse << ',' << mr.mae;
                }
                report << ",\"" << m.infix << "\"\n";
            }
        }

        fmt::print(out, "{:>8}  {:>16}  {:>10}\n", "seed", "best train loss", "front size");
        for (const auto& r : result.runs) {
            const double best = r.front.empty() ? INFINITY : r.front.extreme().loss;
            fmt::print(out, "{:>8}  {:>16.6g}  {:>10}\n", r.seed, best, r.front.members.size());
        }
        const auto& best = result.runs[result.best];
        if (!best.front.empty()) {
            fmt::print(out, "best run: seed {} (train RMSE {:.6g}, complexity {})\n  {}\n", best.seed,
                std::sqrt(best.front.extreme().loss), best.front.extreme().complexity, best.front.extreme().infix);
        }
        fmt::print(out, "artifacts written to {}\n", cfg.output_dir);
        return int(exit_ok);
    });
}

/// Re-evaluates every member of a front file on `data_path`. `metric_names` is a
/// non-empty subset of {rmse, mae, precision, over, under}. The test-side
/// non-dominated front over (test MSE, complexity) is marked with '*'.
inline int cmd_evaluate(const std::string& front_path, const std::string& data_path, const std::vector<std::string>& metric_names,
    std::ostream& out, std::ostream& err, const std::string& report_path = {})
{
    return guarded(err, [&] {
        static const std::vector<std::string> known { "rmse", "mae", "precision", "over", "under" };
        if (metric_names.empty()) { throw ConfigError("evaluate: the metric set is empty"); }
        for (const auto& m : metric_names) {
            if (std::find(known.begin(), known.end(), m) == known.end()) {
                throw ConfigError("evaluate: unknown metric '" + m + "' (rmse, mae, precision, over, under)");
            }
        }

        const FrontFile f = front_from_json(read_json(front_path));
        const auto header = detail::csv_header(data_path);
        auto has = [&](const std::string& c) { return std::find(header.begin(), header.end(), c) != header.end(); };
        std::vector<ColumnSpec> specs;
        for (const auto& name : f.features) {
            if (!has(name)) { throw DataError("evaluate: dataset lacks expression variable '" + name + "'"); }
            specs.push_back({ name, ColumnRole::feature, ScalingKind::none });
        }
        if (!has(f.target)) { throw DataError("evaluate: dataset lacks target column '" + f.target + "'"); }
        specs.push_back({ f.target, ColumnRole::target, ScalingKind::none });
        if (!f.lower_bound.empty() && has(f.lower_bound) && has(f.upper_bound)) {
            specs.push_back({ f.lower_bound, ColumnRole::lower_bound, ScalingKind::none });
            specs.push_back({ f.upper_bound, ColumnRole::upper_bound, ScalingKind::none });
        }
        const Dataset data = apply_scaling(load_csv(data_path, specs), f.scaling);

        std::vector<MetricReport> reports;
        std::vector<Individual> test_side;
        for (const auto& m : f.front.members) {
            const auto pred = predict(m.genotype, f.params, data);
            reports.push_back(metrics(pred, data));
            double loss = reports.back().rmse * reports.back().rmse;
            test_side.push_back({ m.genotype, std::isfinite(loss) ? loss : INFINITY, m.complexity });
        }
        std::vector<char> on_test_front(test_side.size(), 0);
        if (!test_side.empty()) {
            const auto fronts = non_dominated_sort(test_side);
            for (auto i : fronts.front()) { on_test_front[i] = 1; }
        }

        auto value_of = [](const MetricReport& r, const std::string& name) -> std::optional<double> {
            if (name == "rmse") { return r.rmse; }
            if (name == "mae") { return r.mae; }
            if (name == "over") { return r.avg_overestimate; }
            if (name == "under") { return r.avg_underestimate; }
            return r.precision;
        };

        std::ofstream report;
        if (!report_path.empty()) {
            report.open(report_path);
            if (!report) { throw DataError("cannot write '" + report_path + "'"); }
            report.precision(17);
            report << "complexity,train_loss";
            for (const auto& n : metric_names) { report << ',' << n; }
            report << ",test_front,infix\n";
        }

        fmt::print(out, "{:>5} {:>14}", "cplx", "train loss");
        for (const auto& n : metric_names) { fmt::print(out, " {:>12}", n); }
        fmt::print(out, "  front  expression\n");
        for (std::size_t i = 0; i < f.front.members.size(); ++i) {
            const auto& m = f.front.members[i];
            fmt::print(out, "{:>5} {:>14.6g}", m.complexity, m.loss);
            if (report) { report << m.complexity << ',' << m.loss; }
            for (const auto& n : metric_names) {
                const auto v = value_of(reports[i], n);
                if (v) {
                    fmt::print(out, " {:>12.6g}", *v);
                } else {
                    fmt::print(out, " {:>12}", "n/a");
                }
                if (report) {
                    report << ',';
                    if (v) { report << *v; }
                }
            }
            fmt::print(out, "  {:^5}  {}\n", on_test_front[i] ? "*" : "", m.infix);
            if (report) { report << ',' << (on_test_front[i] ? 1 : 0) << ",\"" << m.infix << "\"\n"; }
        }
        return int(exit_ok);
    });
}

/// OLS baseline on raw (unscaled) features, reported like a reference-model table.
inline int cmd_baseline(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        auto data = detail::load_run_data(cfg, false);
        if (data.test && data.test->feature_names != data.train.feature_names) {
            throw DataError("baseline: train and test schemas differ");
        }
        const LinearModel model = fit_linear(data.train);

        fmt::print(out, "{:<12} {:>16}\n", "feature", "coefficient");
        for (std::size_t j = 0; j < model.coefficients.size(); ++j) {
            fmt::print(out, "{:<12} {:>16}\n", data.train.feature_names[j], format_power10(model.coefficients[j]));
        }
        fmt::print(out, "{:<12} {:>16}\n\n", "(intercept)", format_power10(model.intercept));

        auto row = [&](const char* set, const Dataset& d) {
            const auto r = metrics(model.predict(d), d);
            fmt::print(out, "{:<6} {:<6} {:>10.3f} {:>8} {:>12.3f} {:>12.3f}", set, "OLS", r.rmse, "-", r.avg_overestimate,
                r.avg_underestimate);
            if (r.precision) { fmt::print(out, " {:>10.4f}", *r.precision); }
            fmt::print(out, "\n");
        };
        fmt::print(out, "{:<6} {:<6} {:>10} {:>8} {:>12} {:>12}\n", "set", "model", "RMSE", "complx.", "avg. over", "avg. under");
        row("train", data.train);
        if (data.test) { row("test", *data.test); }
        return int(exit_ok);
    });
}

/// Parses a config, checks the datasets exist and their columns, prints the normalised settings.
inline int cmd_validate_config(const std::string& path, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const RunConfig cfg = load_config(path);
        (void)cfg.momes(1);
        auto data = detail::load_run_data(cfg, true);
        fmt::print(out, "{}", cfg.canonical());
        fmt::print(out, "digest={}\ntrain_rows={}\n", cfg.digest(), data.train.n_rows);
        if (data.test) { fmt::print(out, "test_rows={}\n", data.test->n_rows); }
        fmt::print(out, "config OK\n");
        return int(exit_ok);
    });
}

} // namespace dcgp
