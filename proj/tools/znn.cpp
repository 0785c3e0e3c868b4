// znn command-line front end.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O failure.

#include "znn_cli/experiment.hpp"

#include <CLI11.hpp>

#include <exception>
#include <iostream>

namespace {

using namespace znn::cli;

void print_nested(const std::exception& e, int depth = 0) {
    std::cerr << (depth == 0 ? "error: " : "  caused by: ") << e.what() << '\n';
    try {
        std::rethrow_if_nested(e);
    } catch (const std::exception& inner) {
        print_nested(inner, depth + 1);
    } catch (...) {
    }
}

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    unsigned jobs = 0;
    std::optional<std::string> trajectory;
};

void add_common(CLI::App* cmd, Options& o, bool config_required = true) {
    auto* c = cmd->add_option("-c,--config", o.config, "Experiment config (JSON, schema_version 1)");
    if (config_required) c->required();
    cmd->add_option("--seed", o.seed, "Override the config seed");
    cmd->add_option("-o,--out", o.out, "Override the config output directory");
    cmd->add_option("-j,--jobs", o.jobs, "Worker threads for sweeps (0: available parallelism)");
}

int execute(const std::string& name, const Options& o) {
    if (name == "rate" && o.trajectory) {
        if (!o.out) throw ConfigError("rate --trajectory needs --out");
        run_rate_from_file(*o.trajectory, *o.out);
        return 0;
    }
    if (o.config.empty()) throw ConfigError("--config is required");
    RunContext run{name, read_file(o.config), o.jobs};
    ExperimentConfig cfg = parse_config(run.config_bytes, fs::path(o.config).parent_path(), o.seed);
    if (o.out) cfg.output_dir = *o.out;
    if (name == "solve") run_solve(cfg, run);
    else if (name == "rate") run_rate(cfg, run);
    else if (name == "noise-sweep") run_noise_sweep(cfg, run);
    else if (name == "order") run_order(cfg, run);
    else if (name == "tdoa") run_tdoa(cfg, run);
    std::cout << "wrote " << cfg.output_dir.string() << "/manifest.json\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Zeroing neural network solver and experiment runner"};
    app.set_version_flag("--version", std::string(znn::kVersion));
    app.require_subcommand(1);

    Options opts;
    auto* solve = app.add_subcommand("solve", "Integrate the configured model and write its trajectory");
    auto* rate = app.add_subcommand("rate", "Fit the exponential convergence rate of a run or a trajectory CSV");
    auto* sweep = app.add_subcommand("noise-sweep", "Steady residual per formula and noise magnitude");
    auto* order = app.add_subcommand("order", "Empirical order of accuracy of the discrete schemes");
    auto* tdoa = app.add_subcommand("tdoa", "TDOA source localization for a scenario");
    for (auto* cmd : {solve, sweep, order, tdoa}) add_common(cmd, opts);
    add_common(rate, opts, false);
    rate->add_option("--trajectory", opts.trajectory, "Existing trajectory CSV to fit instead of running");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        return execute(name, opts);
    } catch (const ConfigError& e) {
        print_nested(e);
        return 2;
    } catch (const IoError& e) {
        print_nested(e);
        return 4;
    } catch (const fs::filesystem_error& e) {
        print_nested(e);
        return 4;
    } catch (const znn::NumericalError& e) {
        print_nested(e);
        return 3;
    } catch (const znn::Error& e) {
        print_nested(e);
        return 2;
    } catch (const std::exception& e) {
        print_nested(e);
        return 3;
    }
}
