#pragma once

// Experiment configuration: one JSON document, schema_version 1, strict keys.
// See README.md for the full grammar.

#include "znn/znn.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace znn::cli {

using nlohmann::json;
namespace fs = std::filesystem;

inline constexpr int kSchemaVersion = 1;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// =============================================================================
// JSON helpers
// =============================================================================

inline void check_keys(const json& j, const std::string& where, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

[[nodiscard]] inline const json& need(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    return j.at(key);
}

[[nodiscard]] inline double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + ": expected a number");
    return j.get<double>();
}

[[nodiscard]] inline double number_at(const json& j, const std::string& key, const std::string& where) {
    return number(need(j, key, where), where + "." + key);
}

[[nodiscard]] inline double number_or(const json& j, const std::string& key, double fallback, const std::string& where) {
    return j.contains(key) ? number(j.at(key), where + "." + key) : fallback;
}

[[nodiscard]] inline long integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
    return j.get<long>();
}

[[nodiscard]] inline std::uint64_t unsigned_integer(const json& j, const std::string& where) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
        throw ConfigError(where + ": expected a nonnegative integer");
    return j.get<std::uint64_t>();
}

[[nodiscard]] inline std::string text(const json& j, const std::string& where) {
    if (!j.is_string()) throw ConfigError(where + ": expected a string");
    return j.get<std::string>();
}

[[nodiscard]] inline std::string text_at(const json& j, const std::string& key, const std::string& where) {
    return text(need(j, key, where), where + "." + key);
}

[[nodiscard]] inline bool boolean_or(const json& j, const std::string& key, bool fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_boolean()) throw ConfigError(where + "." + key + ": expected true or false");
    return j.at(key).get<bool>();
}

/// Number or array of numbers.
[[nodiscard]] inline Vector vector_value(const json& j, const std::string& where) {
    if (j.is_number()) return Vector::Constant(1, j.get<double>());
    if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a number or a nonempty array of numbers");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = number(j[i], where);
    return v;
}

[[nodiscard]] inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

[[nodiscard]] inline json parse_json(const std::string& content, const std::string& origin) {
    try {
        return json::parse(content);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": invalid JSON: " + e.what());
    }
}

template <class F>
decltype(auto) translate(const std::string& where, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const znn::Error& e) {
        throw ConfigError(where + ": " + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

// =============================================================================
// Library types
// =============================================================================

[[nodiscard]] inline ActivationSpec parse_activation(const json& j, const std::string& where) {
    if (j.is_string()) {
        const auto kind = j.get<std::string>();
        if (kind == "Linear") return Linear{};
        if (kind == "PowerSigmoid") return PowerSigmoid{};
        if (kind == "SignBiPower") return SignBiPower{};
        if (kind == "Bounded") return Bounded{};
        throw ConfigError(where + ": unknown activation '" + kind + "'");
    }
    const auto kind = text_at(j, "kind", where);
    ActivationSpec out;
    if (kind == "Linear") {
        check_keys(j, where, {"kind"});
        out = Linear{};
    } else if (kind == "PowerSigmoid") {
        check_keys(j, where, {"kind", "p", "xi"});
        PowerSigmoid a;
        if (j.contains("p")) a.p = static_cast<int>(integer(j.at("p"), where + ".p"));
        a.xi = number_or(j, "xi", a.xi, where);
        out = a;
    } else if (kind == "SignBiPower") {
        check_keys(j, where, {"kind", "r"});
        out = SignBiPower{number_or(j, "r", 0.5, where)};
    } else if (kind == "Bounded") {
        check_keys(j, where, {"kind", "limit"});
        out = Bounded{number_or(j, "limit", 1.0, where)};
    } else {
        throw ConfigError(where + ": unknown activation '" + kind + "'");
    }
    translate(where, [&] { validate(out); });
    return out;
}

[[nodiscard]] inline ActivationSpec activation_or_linear(const json& j, const std::string& key, const std::string& where) {
    return j.contains(key) ? parse_activation(j.at(key), where + "." + key) : ActivationSpec{Linear{}};
}

[[nodiscard]] inline ScaleSchedule parse_schedule(const json& j, const std::string& where) {
    const auto kind = text_at(j, "kind", where);
    if (kind == "Constant") {
        check_keys(j, where, {"kind", "gamma"});
        return ConstantScale{number_at(j, "gamma", where)};
    }
    if (kind == "PowerRamp") {
        check_keys(j, where, {"kind", "gamma", "p"});
        return PowerRampScale{number_at(j, "gamma", where), number_or(j, "p", 2.0, where)};
    }
    throw ConfigError(where + ": unknown schedule '" + kind + "'");
}

[[nodiscard]] inline ProjectionSet parse_set(const json& j, const std::string& where) {
    const auto kind = text_at(j, "kind", where);
    if (kind == "Box") {
        check_keys(j, where, {"kind", "lo", "hi"});
        return BoxSet{number_at(j, "lo", where), number_at(j, "hi", where)};
    }
    if (kind == "SphereShell") {
        check_keys(j, where, {"kind", "r_inner", "r_outer"});
        return SphereShellSet{number_at(j, "r_inner", where), number_at(j, "r_outer", where)};
    }
    if (kind == "HoleBox") {
        check_keys(j, where, {"kind", "lo", "hi", "dead_zone_radius"});
        return HoleBoxSet{number_at(j, "lo", where), number_at(j, "hi", where),
                          number_at(j, "dead_zone_radius", where)};
    }
    if (kind == "Lattice") {
        check_keys(j, where, {"kind", "points"});
        const auto& pts = need(j, "points", where);
        if (!pts.is_array()) throw ConfigError(where + ".points: expected an array");
        LatticeSet s;
        for (const auto& p : pts) s.points.push_back(vector_value(p, where + ".points"));
        return s;
    }
    throw ConfigError(where + ": unknown projection set '" + kind + "'");
}

[[nodiscard]] inline EvolutionSpec parse_evolution(const json& j, const std::string& where) {
    const auto kind = text_at(j, "kind", where);
    EvolutionSpec out;
    if (kind == "OZNN") {
        check_keys(j, where, {"kind", "gamma", "activation"});
        out = OZNN{number_at(j, "gamma", where), activation_or_linear(j, "activation", where)};
    } else if (kind == "VPZNN") {
        check_keys(j, where, {"kind", "schedule", "activation"});
        out = VPZNN{parse_schedule(need(j, "schedule", where), where + ".schedule"),
                    activation_or_linear(j, "activation", where)};
    } else if (kind == "NTZNN") {
        check_keys(j, where, {"kind", "gamma", "beta"});
        out = NTZNN{number_at(j, "gamma", where), number_at(j, "beta", where)};
    } else if (kind == "FTZNN") {
        check_keys(j, where, {"kind", "gamma", "a1", "a2", "b", "c", "activation"});
        FTZNN f;
        f.gamma = number_at(j, "gamma", where);
        f.a1 = number_or(j, "a1", f.a1, where);
        f.a2 = number_or(j, "a2", f.a2, where);
        if (j.contains("b")) f.b = static_cast<int>(integer(j.at("b"), where + ".b"));
        if (j.contains("c")) f.c = static_cast<int>(integer(j.at("c"), where + ".c"));
        f.activation = activation_or_linear(j, "activation", where);
        out = f;
    } else if (kind == "ActivatedNTZNN") {
        check_keys(j, where, {"kind", "gamma", "beta", "psi1", "psi2"});
        out = ActivatedNTZNN{number_at(j, "gamma", where), number_at(j, "beta", where),
                             activation_or_linear(j, "psi1", where), activation_or_linear(j, "psi2", where)};
    } else if (kind == "NPZNN") {
        check_keys(j, where, {"kind", "gamma", "set"});
        out = NPZNN{number_at(j, "gamma", where), parse_set(need(j, "set", where), where + ".set")};
    } else {
        throw ConfigError(where + ": unknown evolution formula '" + kind + "'");
    }
    translate(where, [&] { validate(out); });
    return out;
}

[[nodiscard]] inline NoiseSpec parse_noise(const json& j, const std::string& where, std::uint64_t default_seed) {
    const auto kind = text_at(j, "kind", where);
    NoiseSpec out;
    if (kind == "Constant") {
        check_keys(j, where, {"kind", "value"});
        out = ConstantNoise{vector_value(need(j, "value", where), where + ".value")};
    } else if (kind == "Linear") {
        check_keys(j, where, {"kind", "slope"});
        out = LinearNoise{vector_value(need(j, "slope", where), where + ".slope")};
    } else if (kind == "BoundedRandom") {
        check_keys(j, where, {"kind", "bound", "seed", "hold"});
        BoundedRandomNoise n;
        n.bound = number_at(j, "bound", where);
        n.seed = j.contains("seed") ? unsigned_integer(j.at("seed"), where + ".seed") : default_seed;
        n.hold = number_or(j, "hold", n.hold, where);
        out = n;
    } else {
        throw ConfigError(where + ": unknown noise kind '" + kind + "'");
    }
    translate(where, [&] { validate(out); });
    return out;
}

[[nodiscard]] inline NoiseKind parse_noise_kind(const json& j, const std::string& where) {
    const auto kind = text(j, where);
    if (kind == "Constant") return NoiseKind::Constant;
    if (kind == "Linear") return NoiseKind::Linear;
    if (kind == "BoundedRandom") return NoiseKind::BoundedRandom;
    throw ConfigError(where + ": unknown noise kind '" + kind + "'");
}

struct SchemeConfig {
    bool reference = false;
    Scheme scheme;
    double tol = 1e-9;
    std::size_t samples = 200;
};

[[nodiscard]] inline SchemeKind parse_scheme_kind(const json& j, const std::string& where) {
    const auto name = text(j, where);
    if (auto k = scheme_from_string(name)) return *k;
    throw ConfigError(where + ": unknown scheme '" + name + "'");
}

[[nodiscard]] inline SchemeConfig parse_scheme(const json& j, const std::string& where) {
    SchemeConfig out;
    const auto kind = text_at(j, "kind", where);
    if (kind == "Reference") {
        check_keys(j, where, {"kind", "tol", "samples"});
        out.reference = true;
        out.tol = number_or(j, "tol", out.tol, where);
        if (!(out.tol >= 1e-12 && out.tol <= 1e-2)) throw ConfigError(where + ".tol: must lie in [1e-12, 1e-2]");
        if (j.contains("samples")) {
            const long s = integer(j.at("samples"), where + ".samples");
            if (s < 2) throw ConfigError(where + ".samples: must be >= 2");
            out.samples = static_cast<std::size_t>(s);
        }
        return out;
    }
    check_keys(j, where, {"kind", "gap", "strict"});
    out.scheme.kind = parse_scheme_kind(j.at("kind"), where + ".kind");
    out.scheme.gap = number_or(j, "gap", out.scheme.gap, where);
    out.scheme.strict = boolean_or(j, "strict", false, where);
    if (!(out.scheme.gap > 0.0)) throw ConfigError(where + ".gap: must be positive");
    return out;
}

// =============================================================================
// Problems and scenarios
// =============================================================================

struct ProblemSource {
    ProblemInstance instance;
    std::string label;
    std::optional<double> horizon;
};

/// Body shared by inline problems and problem files.
[[nodiscard]] inline ProblemSource parse_problem_body(const json& j, const std::string& where, std::uint64_t seed) {
    ProblemSource out;
    const auto kind_name = text_at(j, "kind", where);
    const auto kind = problem_kind_from_string(kind_name);
    if (!kind) throw ConfigError(where + ": unknown problem kind '" + kind_name + "'");
    out.label = kind_name;
    if (j.contains("horizon")) out.horizon = number(j.at("horizon"), where + ".horizon");

    if (j.contains("synthetic")) {
        check_keys(j, where, {"schema_version", "kind", "synthetic", "horizon", "seed"});
        const auto& s = j.at("synthetic");
        check_keys(s, where + ".synthetic", {"dim"});
        const long dim = integer(need(s, "dim", where + ".synthetic"), where + ".synthetic.dim");
        const std::uint64_t problem_seed = j.contains("seed") ? unsigned_integer(j.at("seed"), where + ".seed") : seed;
        out.instance = translate(where, [&] { return make_synthetic(*kind, dim, problem_seed); });
        out.label += " (synthetic, dim " + std::to_string(dim) + ")";
        return out;
    }

    check_keys(j, where, {"schema_version", "kind", "operators", "ground_truth", "horizon", "seed"});
    const auto& ops = need(j, "operators", where);
    if (!ops.is_object()) throw ConfigError(where + ".operators: expected an object of expressions");
    std::map<std::string, TimeVaryingOperator> operators;
    for (const auto& [name, expr] : ops.items()) {
        const auto w = where + ".operators." + name;
        operators[name] = translate(w, [&] { return Expression::parse(text(expr, w)).to_operator(); });
    }
    const auto expected = operator_names(*kind);
    for (const auto& [name, op] : operators)
        if (std::find(expected.begin(), expected.end(), name) == expected.end())
            throw ConfigError(where + ".operators: unknown operator '" + name + "' for " + kind_name);

    std::function<Vector(double)> truth;
    if (j.contains("ground_truth")) {
        const auto w = where + ".ground_truth";
        auto e = translate(w, [&] { return Expression::parse(text(j.at("ground_truth"), w)); });
        truth = [e](double t) { return Vector(vec(e.evaluate(t))); };
    }
    out.instance = translate(where, [&] { return make_problem(*kind, std::move(operators), std::move(truth)); });
    if (out.instance.ground_truth && out.instance.ground_truth(0.0).size() != out.instance.state_dim)
        throw ConfigError(where + ".ground_truth: has the wrong size for the problem state");
    return out;
}

[[nodiscard]] inline ProblemSource parse_problem(const json& j, const std::string& where, std::uint64_t seed,
                                                 const fs::path& base) {
    if (j.is_object() && j.contains("file")) {
        check_keys(j, where, {"file"});
        const fs::path path = base / text(j.at("file"), where + ".file");
        if (!fs::exists(path)) throw ConfigError(where + ".file: problem file '" + path.string() + "' does not exist");
        const json doc = parse_json(read_file(path), path.string());
        if (!doc.is_object()) throw ConfigError(path.string() + ": expected an object");
        if (integer(need(doc, "schema_version", path.string()), path.string() + ".schema_version") != kSchemaVersion)
            throw ConfigError(path.string() + ": unsupported schema_version");
        return parse_problem_body(doc, path.string(), seed);
    }
    return parse_problem_body(j, where, seed);
}

[[nodiscard]] inline Scenario parse_scenario_body(const json& j, const std::string& where) {
    check_keys(j, where, {"schema_version", "observers", "v", "target_path", "horizon", "gap"});
    Scenario s;
    const auto& obs = need(j, "observers", where);
    if (!obs.is_array()) throw ConfigError(where + ".observers: expected an array of [x, y, z]");
    for (const auto& o : obs) {
        const Vector p = vector_value(o, where + ".observers");
        if (p.size() != 3) throw ConfigError(where + ".observers: each observer needs 3 coordinates");
        s.observers.emplace_back(p[0], p[1], p[2]);
    }
    s.v = number_or(j, "v", s.v, where);
    const auto w = where + ".target_path";
    const auto path = translate(w, [&] { return Expression::parse(text_at(j, "target_path", where)); });
    if (path.rows() != 3 || path.cols() != 1) throw ConfigError(w + ": must be a 3-vector expression");
    s.target_path = [path](double t) {
        const Matrix m = path.evaluate(t);
        return Point3(m(0, 0), m(1, 0), m(2, 0));
    };
    s.horizon = number_at(j, "horizon", where);
    s.gap = number_or(j, "gap", s.gap, where);
    translate(where, [&] { validate(s); });
    return s;
}

[[nodiscard]] inline Scenario parse_scenario(const json& j, const std::string& where, const fs::path& base) {
    if (j.is_object() && j.contains("file")) {
        check_keys(j, where, {"file"});
        const fs::path path = base / text(j.at("file"), where + ".file");
        if (!fs::exists(path)) throw ConfigError(where + ".file: scenario file '" + path.string() + "' does not exist");
        const json doc = parse_json(read_file(path), path.string());
        return parse_scenario_body(doc, path.string());
    }
    return parse_scenario_body(j, where);
}

// =============================================================================
// Experiment configuration
// =============================================================================

struct InitialConfig {
    enum class Kind { Auto, GroundTruth, Perturbed, State, Zero } kind = Kind::Auto;
    double magnitude = 0.5;
    Vector state;
};

struct FormulaEntry {
    std::string name;
    EvolutionSpec spec;
};

struct SweepConfig {
    std::vector<FormulaEntry> formulas;
    std::vector<double> magnitudes;
    NoiseKind noise = NoiseKind::Constant;
};

struct OrderConfig {
    std::vector<SchemeKind> schemes;
    double initial_gap = 4e-3;
    int halvings = 4;
    bool strict = false;
};

struct TdoaConfig {
    Scenario scenario;
    std::vector<FormulaEntry> formulas;
    Scheme scheme;
    std::optional<NoiseSpec> delay_noise;
    std::optional<NoiseSpec> evolution_noise;
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    fs::path output_dir = "out";
    std::optional<ProblemSource> problem;
    std::optional<EvolutionSpec> evolution;
    SchemeConfig scheme;
    std::optional<NoiseSpec> noise;
    std::optional<double> horizon;
    InitialConfig initial;
    std::optional<SweepConfig> sweep;
    std::optional<OrderConfig> order;
    std::optional<TdoaConfig> tdoa;
    json document;  // parsed config, with the effective seed
};

[[nodiscard]] inline std::vector<FormulaEntry> parse_formulas(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a nonempty array");
    std::vector<FormulaEntry> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto w = where + "[" + std::to_string(i) + "]";
        check_keys(j[i], w, {"name", "evolution"});
        const auto name = text_at(j[i], "name", w);
        if (name.empty() || !std::all_of(name.begin(), name.end(), [](unsigned char c) {
                return std::isalnum(c) || c == '_' || c == '-';
            }))
            throw ConfigError(w + ".name: use letters, digits, '_' or '-'");
        for (const auto& f : out)
            if (f.name == name) throw ConfigError(w + ".name: duplicate formula name '" + name + "'");
        out.push_back({name, parse_evolution(need(j[i], "evolution", w), w + ".evolution")});
    }
    return out;
}

/// Parses and validates a config document. Relative paths resolve against `base`.
[[nodiscard]] inline ExperimentConfig parse_config(const std::string& content, const fs::path& base,
                                                   std::optional<std::uint64_t> seed_override = std::nullopt) {
    const json j = parse_json(content, "config");
    check_keys(j, "config", {"schema_version", "description", "seed", "output_dir", "problem", "evolution", "scheme",
                             "noise", "horizon", "initial", "sweep", "order", "tdoa"});
    const long version = integer(need(j, "schema_version", "config"), "config.schema_version");
    if (version != kSchemaVersion)
        throw ConfigError("config.schema_version: unsupported version " + std::to_string(version) + " (expected " +
                          std::to_string(kSchemaVersion) + ")");
    if (j.contains("description")) (void)text(j.at("description"), "config.description");

    ExperimentConfig cfg;
    cfg.seed = j.contains("seed") ? unsigned_integer(j.at("seed"), "config.seed") : 0;
    if (seed_override) cfg.seed = *seed_override;
    if (j.contains("output_dir")) cfg.output_dir = text(j.at("output_dir"), "config.output_dir");

    if (j.contains("problem")) cfg.problem = parse_problem(j.at("problem"), "config.problem", cfg.seed, base);
    if (j.contains("evolution")) cfg.evolution = parse_evolution(j.at("evolution"), "config.evolution");
    if (j.contains("scheme")) cfg.scheme = parse_scheme(j.at("scheme"), "config.scheme");
    if (j.contains("noise")) cfg.noise = parse_noise(j.at("noise"), "config.noise", cfg.seed);
    if (j.contains("horizon")) {
        cfg.horizon = number(j.at("horizon"), "config.horizon");
        if (!(*cfg.horizon >= 0.0)) throw ConfigError("config.horizon: must be >= 0");
    } else if (cfg.problem && cfg.problem->horizon) {
        cfg.horizon = cfg.problem->horizon;
    }

    if (j.contains("initial")) {
        const auto& in = j.at("initial");
        const auto kind = text_at(in, "kind", "config.initial");
        if (kind == "ground_truth") {
            check_keys(in, "config.initial", {"kind"});
            cfg.initial.kind = InitialConfig::Kind::GroundTruth;
        } else if (kind == "perturbed") {
            check_keys(in, "config.initial", {"kind", "magnitude"});
            cfg.initial.kind = InitialConfig::Kind::Perturbed;
            cfg.initial.magnitude = number_or(in, "magnitude", 0.5, "config.initial");
        } else if (kind == "state") {
            check_keys(in, "config.initial", {"kind", "value"});
            cfg.initial.kind = InitialConfig::Kind::State;
            cfg.initial.state = vector_value(need(in, "value", "config.initial"), "config.initial.value");
        } else if (kind == "zero") {
            check_keys(in, "config.initial", {"kind"});
            cfg.initial.kind = InitialConfig::Kind::Zero;
        } else {
            throw ConfigError("config.initial: unknown kind '" + kind + "'");
        }
    }

    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        check_keys(s, "config.sweep", {"formulas", "magnitudes", "noise"});
        SweepConfig sw;
        sw.formulas = parse_formulas(need(s, "formulas", "config.sweep"), "config.sweep.formulas");
        const Vector mags = vector_value(need(s, "magnitudes", "config.sweep"), "config.sweep.magnitudes");
        sw.magnitudes.assign(mags.data(), mags.data() + mags.size());
        if (s.contains("noise")) sw.noise = parse_noise_kind(s.at("noise"), "config.sweep.noise");
        if (sw.formulas.size() < 2) throw ConfigError("config.sweep.formulas: need at least 2 formulas");
        if (sw.magnitudes.size() < 2) throw ConfigError("config.sweep.magnitudes: need at least 2 magnitudes");
        for (double m : sw.magnitudes)
            if (!(m >= 0.0)) throw ConfigError("config.sweep.magnitudes: must be >= 0");
        cfg.sweep = std::move(sw);
    }

    if (j.contains("order")) {
        const auto& o = j.at("order");
        check_keys(o, "config.order", {"schemes", "initial_gap", "halvings", "strict"});
        OrderConfig oc;
        if (o.contains("schemes")) {
            const auto& list = o.at("schemes");
            if (!list.is_array() || list.empty()) throw ConfigError("config.order.schemes: expected a nonempty array");
            for (const auto& s : list) oc.schemes.push_back(parse_scheme_kind(s, "config.order.schemes"));
        } else {
            oc.schemes.assign(kAllSchemes.begin(), kAllSchemes.end());
        }
        oc.initial_gap = number_or(o, "initial_gap", oc.initial_gap, "config.order");
        if (o.contains("halvings")) oc.halvings = static_cast<int>(integer(o.at("halvings"), "config.order.halvings"));
        oc.strict = boolean_or(o, "strict", false, "config.order");
        if (oc.halvings < 3) throw ConfigError("config.order.halvings: must be >= 3");
        if (!(oc.initial_gap > 0.0)) throw ConfigError("config.order.initial_gap: must be positive");
        cfg.order = std::move(oc);
    }

    if (j.contains("tdoa")) {
        const auto& t = j.at("tdoa");
        check_keys(t, "config.tdoa", {"scenario", "formulas", "scheme", "delay_noise", "evolution_noise"});
        TdoaConfig tc;
        tc.scenario = parse_scenario(need(t, "scenario", "config.tdoa"), "config.tdoa.scenario", base);
        tc.formulas = parse_formulas(need(t, "formulas", "config.tdoa"), "config.tdoa.formulas");
        if (t.contains("scheme")) {
            const auto sc = parse_scheme(t.at("scheme"), "config.tdoa.scheme");
            if (sc.reference) throw ConfigError("config.tdoa.scheme: localization needs a discrete scheme");
            tc.scheme = sc.scheme;
        }
        if (t.contains("delay_noise")) tc.delay_noise = parse_noise(t.at("delay_noise"), "config.tdoa.delay_noise", cfg.seed);
        if (t.contains("evolution_noise"))
            tc.evolution_noise = parse_noise(t.at("evolution_noise"), "config.tdoa.evolution_noise", cfg.seed);
        cfg.tdoa = std::move(tc);
    }

    cfg.document = j;
    cfg.document["seed"] = cfg.seed;
    return cfg;
}

[[nodiscard]] inline ExperimentConfig load_config(const fs::path& path,
                                                  std::optional<std::uint64_t> seed_override = std::nullopt) {
    if (!fs::exists(path)) throw ConfigError("config file '" + path.string() + "' does not exist");
    return parse_config(read_file(path), path.parent_path(), seed_override);
}

}  // namespace znn::cli
