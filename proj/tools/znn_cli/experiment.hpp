#pragma once

#include "znn_cli/config.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <string>
#include <system_error>
#include <unistd.h>
#include <vector>

namespace znn::cli {

inline constexpr const char* kToolName = "znn";

[[nodiscard]] inline std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 computation failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

/// Writes via a sibling temp file and rename, so readers never see partial output.
inline void write_atomic(const fs::path& path, std::string_view content) {
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    }
    const fs::path tmp = path.string() + ".tmp-" + std::to_string(::getpid());
    {
        std::FILE* f = std::fopen(tmp.c_str(), "wb");
        if (!f) throw IoError("cannot open '" + tmp.string() + "' for writing");
        const bool ok = std::fwrite(content.data(), 1, content.size(), f) == content.size();
        if (std::fclose(f) != 0 || !ok) {
            fs::remove(tmp, ec);
            throw IoError("write to '" + tmp.string() + "' failed");
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move output into place at '" + path.string() + "'");
    }
}

struct Artifact {
    std::string name;
    std::string content;
};

struct RunContext {
    std::string subcommand;
    std::string config_bytes;
    unsigned jobs = 0;
};

/// Writes the artifacts and a manifest describing how to reproduce them.
inline void publish(const ExperimentConfig& cfg, const RunContext& run, const std::vector<Artifact>& artifacts) {
    json manifest;
    manifest["tool"] = kToolName;
    manifest["version"] = kVersion;
    manifest["schema_version"] = kSchemaVersion;
    manifest["subcommand"] = run.subcommand;
    manifest["config_sha256"] = sha256_hex(run.config_bytes);
    manifest["seed"] = cfg.seed;
    manifest["config"] = cfg.document;
    json files = json::array();
    for (const auto& a : artifacts) {
        write_atomic(cfg.output_dir / a.name, a.content);
        files.push_back({{"name", a.name}, {"sha256", sha256_hex(a.content)}, {"bytes", a.content.size()}});
    }
    manifest["artifacts"] = files;
    write_atomic(cfg.output_dir / "manifest.json", manifest.dump(2) + "\n");
}

[[nodiscard]] inline std::string fmt(double v, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

// =============================================================================
// Shared setup
// =============================================================================

[[nodiscard]] inline const ProblemSource& need_problem(const ExperimentConfig& cfg) {
    if (!cfg.problem) throw ConfigError("config has no 'problem' section");
    return *cfg.problem;
}

[[nodiscard]] inline const EvolutionSpec& need_evolution(const ExperimentConfig& cfg) {
    if (!cfg.evolution) throw ConfigError("config has no 'evolution' section");
    return *cfg.evolution;
}

[[nodiscard]] inline double need_horizon(const ExperimentConfig& cfg) {
    if (!cfg.horizon) throw ConfigError("config has no 'horizon' (set it in the config or the problem file)");
    return *cfg.horizon;
}

[[nodiscard]] inline Vector initial_state(const ExperimentConfig& cfg, const ProblemInstance& p) {
    using K = InitialConfig::Kind;
    Vector x;
    switch (cfg.initial.kind) {
        case K::Auto:
            x = p.ground_truth ? perturbed_start(p, 0.5, cfg.seed) : Vector(Vector::Zero(p.state_dim));
            break;
        case K::GroundTruth:
            if (!p.ground_truth) throw ConfigError("config.initial: problem has no ground truth");
            x = p.ground_truth(0.0);
            break;
        case K::Perturbed:
            if (!p.ground_truth) throw ConfigError("config.initial: problem has no ground truth");
            x = perturbed_start(p, cfg.initial.magnitude, cfg.seed);
            break;
        case K::State: x = cfg.initial.state; break;
        case K::Zero: x = Vector::Zero(p.state_dim); break;
    }
    if (x.size() != p.state_dim)
        throw ConfigError("config.initial: state has " + std::to_string(x.size()) + " entries, problem needs " +
                          std::to_string(p.state_dim));
    return x;
}

[[nodiscard]] inline AssembledModel build_model(const ExperimentConfig& cfg) {
    AssembledModel m = assemble(need_problem(cfg).instance, need_evolution(cfg));
    if (cfg.noise) m = translate("config.noise", [&] { return perturb_model(m, *cfg.noise); });
    return m;
}

[[nodiscard]] inline Trajectory run_trajectory(const ExperimentConfig& cfg, const AssembledModel& m, const Vector& x0) {
    const double horizon = need_horizon(cfg);
    if (cfg.scheme.reference) return integrate_reference(m, x0, horizon, cfg.scheme.tol, {cfg.scheme.samples});
    const long steps = std::lround(horizon / cfg.scheme.scheme.gap);
    if (steps < 1) throw ConfigError("config.horizon: shorter than one sample gap");
    return solve_discrete(m, x0, cfg.scheme.scheme, steps);
}

[[nodiscard]] inline std::string scheme_label(const SchemeConfig& s) {
    if (s.reference) return "Reference (Dormand-Prince 5(4), tol " + fmt(s.tol) + ")";
    return std::string(to_string(s.scheme.kind)) + " (gap " + fmt(s.scheme.gap) + (s.scheme.strict ? ", strict" : "") +
           ")";
}

[[nodiscard]] inline json report_json(const ConvergenceReport& r) {
    json j;
    j["exponential"] = r.exponential;
    j["rate"] = r.rate ? json(*r.rate) : json(nullptr);
    j["slope"] = r.slope;
    j["r_squared"] = r.r_squared;
    j["fit_rms"] = r.fit_rms;
    j["window"] = r.window;
    json ttt = json::object();
    for (std::size_t i = 0; i < kToleranceThresholds.size(); ++i)
        ttt[fmt(kToleranceThresholds[i], "%g")] =
            r.time_to_tolerance[i] ? json(*r.time_to_tolerance[i]) : json(nullptr);
    j["time_to_tolerance"] = ttt;
    j["terminal_residual"] = r.terminal_residual;
    return j;
}

[[nodiscard]] inline std::string report_markdown(const std::string& title, const ConvergenceReport& r) {
    std::string out = "# " + title + "\n\n| quantity | value |\n|---|---|\n";
    out += "| exponential fit | " + std::string(r.exponential ? "yes" : "no (R^2 < 0.99)") + " |\n";
    out += "| rate (1/time) | " + (r.rate ? fmt(*r.rate) : std::string("n/a")) + " |\n";
    out += "| R^2 | " + fmt(r.r_squared) + " |\n";
    out += "| fit window (samples) | " + std::to_string(r.window) + " |\n";
    for (std::size_t i = 0; i < kToleranceThresholds.size(); ++i)
        out += "| time to " + fmt(kToleranceThresholds[i], "%g") + " | " +
               (r.time_to_tolerance[i] ? fmt(*r.time_to_tolerance[i]) : std::string("not reached")) + " |\n";
    out += "| terminal residual | " + fmt(r.terminal_residual, "%.6e") + " |\n";
    return out;
}

// =============================================================================
// Subcommands
// =============================================================================

inline void run_solve(const ExperimentConfig& cfg, const RunContext& run) {
    const AssembledModel m = build_model(cfg);
    const Vector x0 = initial_state(cfg, m.problem);
    const Trajectory traj = run_trajectory(cfg, m, x0);

    std::string report = "# solve\n\n";
    report += "- problem: " + need_problem(cfg).label + "\n";
    report += "- scheme: " + scheme_label(cfg.scheme) + "\n";
    report += "- samples: " + std::to_string(traj.size()) + "\n";
    report += "- initial residual: " + fmt(traj.residual_norms.front(), "%.6e") + "\n";
    report += "- terminal residual: " + fmt(traj.residual_norms.back(), "%.6e") + "\n";
    report += "- steady residual (max over final 10%): " + fmt(steady_residual(traj), "%.6e") + "\n";
    publish(cfg, run, {{"trajectory.csv", to_csv(traj)}, {"report.md", report}});
}

/// Rate report for a fresh run of the configured model.
inline void run_rate(const ExperimentConfig& cfg, const RunContext& run) {
    const AssembledModel m = build_model(cfg);
    const Vector x0 = initial_state(cfg, m.problem);
    const Trajectory traj = run_trajectory(cfg, m, x0);
    const auto rep = fit_convergence_rate(traj);
    publish(cfg, run,
            {{"trajectory.csv", to_csv(traj)},
             {"rate.json", report_json(rep).dump(2) + "\n"},
             {"rate.md", report_markdown("convergence rate", rep)}});
}

[[nodiscard]] inline Trajectory read_trajectory_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read trajectory '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty file");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    const auto col = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw ConfigError(path.string() + ": missing column '" + name + "'");
    };
    const std::size_t ct = col("t"), cr = col("residual_norm");
    Trajectory traj;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<double> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            cells.push_back(std::strtod(cell.c_str(), &end));
            if (end == cell.c_str()) throw ConfigError(path.string() + ": bad number on line " + std::to_string(row));
        }
        if (cells.size() != header.size())
            throw ConfigError(path.string() + ": wrong column count on line " + std::to_string(row));
        traj.push(cells[ct], Vector(), Vector(), cells[cr]);
    }
    return traj;
}

/// Rate report for an existing trajectory file; the input file is only read.
inline void run_rate_from_file(const fs::path& trajectory, const fs::path& out_dir) {
    const auto rep = fit_convergence_rate(read_trajectory_csv(trajectory));
    write_atomic(out_dir / "rate.json", report_json(rep).dump(2) + "\n");
    write_atomic(out_dir / "rate.md", report_markdown("convergence rate of " + trajectory.filename().string(), rep));
}

inline void run_noise_sweep(const ExperimentConfig& cfg, const RunContext& run) {
    if (!cfg.sweep) throw ConfigError("config has no 'sweep' section");
    const auto& p = need_problem(cfg).instance;
    std::vector<NamedFormula> formulas;
    for (const auto& f : cfg.sweep->formulas) formulas.push_back({f.name, f.spec});
    SweepOptions opt;
    opt.noise = cfg.sweep->noise;
    opt.horizon = need_horizon(cfg);
    if (!cfg.scheme.reference) opt.scheme = cfg.scheme.scheme;
    opt.tol = cfg.scheme.tol;
    opt.x0 = initial_state(cfg, p);
    opt.seed = cfg.seed;
    opt.jobs = run.jobs;
    const auto table = noise_sweep(p, formulas, cfg.sweep->magnitudes, opt);
    std::string md = "# noise sweep: " + std::string(to_string(cfg.sweep->noise)) + " noise\n\n";
    md += "Steady residual (max over final 10%) per formula and noise magnitude; problem " + need_problem(cfg).label +
          ", " + scheme_label(cfg.scheme) + ".\n\n";
    md += to_markdown(table);
    publish(cfg, run, {{"sweep.csv", to_csv(table)}, {"sweep.md", md}});
}

inline void run_order(const ExperimentConfig& cfg, const RunContext& run) {
    if (!cfg.order) throw ConfigError("config has no 'order' section");
    AssembledModel m = build_model(cfg);
    OrderReportOptions opt;
    opt.initial_gap = cfg.order->initial_gap;
    opt.halvings = cfg.order->halvings;
    opt.run.horizon = need_horizon(cfg);
    opt.run.x0 = initial_state(cfg, m.problem);
    opt.run.strict = cfg.order->strict;
    opt.jobs = run.jobs;
    const auto rows = order_report(m, cfg.order->schemes, opt);
    std::string md = "# order of accuracy\n\nProblem " + need_problem(cfg).label + ", " +
                     std::to_string(opt.halvings) + " halvings from gap " + fmt(opt.initial_gap) + ".\n\n";
    md += to_markdown(rows);
    publish(cfg, run, {{"order.csv", to_csv(rows)}, {"order.md", md}});
}

inline void run_tdoa(const ExperimentConfig& cfg, const RunContext& run) {
    if (!cfg.tdoa) throw ConfigError("config has no 'tdoa' section");
    const auto& tc = *cfg.tdoa;
    const DelayTrack track = simulate_delays(tc.scenario, tc.delay_noise);
    LocalizeOptions opt;
    opt.evolution_noise = tc.evolution_noise;

    std::vector<Localization> results(tc.formulas.size());
    parallel_for(tc.formulas.size(), run.jobs,
                 [&](std::size_t i) { results[i] = localize(tc.scenario, track, tc.formulas[i].spec, tc.scheme, opt); });

    std::vector<Artifact> artifacts;
    std::string md = "# TDOA localization\n\n" + std::to_string(tc.scenario.observers.size()) + " observers, v = " +
                     fmt(tc.scenario.v) + " m/s, " + std::string(to_string(tc.scheme.kind)) + " with gap " +
                     fmt(tc.scenario.gap) + ".\n\n| formula | terminal error (m) | max error over second half (m) |\n|---|---|---|\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& errs = results[i].position_errors;
        double worst = 0.0;
        for (std::size_t k = errs.size() / 2; k < errs.size(); ++k) worst = std::max(worst, errs[k]);
        md += "| " + tc.formulas[i].name + " | " + fmt(errs.back(), "%.6e") + " | " + fmt(worst, "%.6e") + " |\n";
        artifacts.push_back({"tdoa_" + tc.formulas[i].name + ".csv", to_report_csv(results[i])});
    }
    artifacts.push_back({"tdoa.md", md});
    publish(cfg, run, artifacts);
}

}  // namespace znn::cli
