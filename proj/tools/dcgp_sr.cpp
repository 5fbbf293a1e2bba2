// Command-line front end: evolve, evaluate, baseline, validate-config, synth.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dcgp/cli.hpp"
#include "dcgp/dcgp.hpp"

int main(int argc, char** argv)
{
    CLI::App app { "Symbolic regression with differentiable CGP and a multi-objective memetic strategy" };
    app.require_subcommand(1);

    std::string config_path;
    auto* evolve = app.add_subcommand("evolve", "Run (multi-start) evolution for a config file");
    evolve->add_option("config", config_path, "Run configuration file")->required();
    std::size_t override_starts = 0;
    std::size_t override_parallelism = 0;
    evolve->add_option("--starts", override_starts, "Override n_starts");
    evolve->add_option("--parallelism", override_parallelism, "Override parallelism");

    std::string front_path;
    std::string data_path;
    std::string metrics_list = "rmse,mae,precision,over,under";
    std::string report_path;
    auto* evaluate = app.add_subcommand("evaluate", "Re-evaluate a front file on a dataset");
    evaluate->add_option("front", front_path, "Front JSON written by evolve")->required();
    evaluate->add_option("data", data_path, "CSV dataset")->required();
    evaluate->add_option("--metrics", metrics_list, "Comma-separated subset of rmse,mae,precision,over,under");
    evaluate->add_option("--out", report_path, "Also write the table as CSV");

    auto* baseline = app.add_subcommand("baseline", "Fit the ordinary-least-squares baseline");
    baseline->add_option("config", config_path, "Run configuration file (train/test/features/target)")->required();

    auto* validate = app.add_subcommand("validate-config", "Check a configuration file and its datasets");
    validate->add_option("config", config_path, "Run configuration file")->required();

    std::string synth_kind;
    std::string synth_out;
    std::size_t synth_rows = 500;
    std::uint64_t synth_seed = 0;
    double synth_shift = 0.0;
    auto* synth = app.add_subcommand("synth", "Write a synthetic dataset (thermal or stellar schema)");
    synth->add_option("kind", synth_kind, "thermal | stellar")->required()->check(CLI::IsMember({ "thermal", "stellar" }));
    synth->add_option("out", synth_out, "Output CSV path")->required();
    synth->add_option("--rows", synth_rows, "Number of rows");
    synth->add_option("--seed", synth_seed, "Random seed");
    synth->add_option("--shift", synth_shift, "Distribution shift (thermal only)");

    CLI11_PARSE(app, argc, argv);

    using namespace dcgp;
    if (*evolve) {
        return guarded(std::cerr, [&] {
            RunConfig cfg = load_config(config_path);
            if (override_starts) { cfg.n_starts = override_starts; }
            if (override_parallelism) { cfg.parallelism = override_parallelism; }
            return cmd_evolve(cfg, std::cout, std::cerr);
        });
    }
    if (*evaluate) {
        std::vector<std::string> names;
        std::string item;
        std::istringstream ss(metrics_list);
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) { names.push_back(item); }
        }
        return cmd_evaluate(front_path, data_path, names, std::cout, std::cerr, report_path);
    }
    if (*baseline) {
        return guarded(std::cerr, [&] { return cmd_baseline(load_config(config_path), std::cout, std::cerr); });
    }
    if (*validate) { return cmd_validate_config(config_path, std::cout, std::cerr); }
    if (*synth) {
        return guarded(std::cerr, [&] {
            const Dataset d = synth_kind == "thermal" ? synthetic_thermal(synth_rows, synth_seed, synth_shift)
                                                      : synthetic_stellar(synth_rows, synth_seed);
            write_csv(synth_out, d);
            return 0;
        });
    }
    return 0;
}
