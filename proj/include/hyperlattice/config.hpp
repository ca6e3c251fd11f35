#pragma once

// Run configuration documents and named presets.
//
// Schema (all keys optional except where noted, unknown keys rejected):
//   dimension   integer >= 1
//   seed        unsigned integer
//   samplers    { length: {min,max} | number, density: {min,max} | number,
//                 speed: number, loss_factor: number, min_round_trip_separation: number }
//   overrides   { "<edge id>": { length?, density?, speed?, loss_factor? } }
//   terminations{ "<node id>": "none" | "infinite" | admittance }
//   drive       { edge, position, amplitude }
//   assess      { edge, position }
//   sweep       { delta_omega, bins, window: "rectangular" | "raised_cosine" }
//   variant     { in_vivo: bool, in_vitro: bool, excess: bool, level: integer | null }
//   output      { directory: string, emit_plot: bool }

#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>

#include "hyperlattice/error.hpp"
#include "hyperlattice/experiments.hpp"
#include "hyperlattice/io.hpp"

namespace hyperlattice {

struct VariantSelection {
    bool in_vivo = false;
    bool in_vitro = false;
    bool excess = false;
    std::optional<int> level; ///< defaults to the lattice's top level

    friend bool operator==(const VariantSelection&, const VariantSelection&) = default;
};

struct OutputSettings {
    std::string directory;
    bool emit_plot = false;

    friend bool operator==(const OutputSettings&, const OutputSettings&) = default;
};

struct RunConfig {
    int dimension = 1;
    std::uint64_t seed = 0;
    GenerateOptions samplers;
    ParameterOverrides overrides;
    std::map<int, Termination> terminations;
    DriveSpec drive;
    AssessSpec assess;
    SweepConfig sweep;
    VariantSelection variant;
    OutputSettings output;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

inline json sampler_to_json(const Sampler& s) {
    if (s.kind == Sampler::Kind::constant) return s.min;
    return json{{"min", s.min}, {"max", s.max}};
}

inline Sampler sampler_from_json(const json& j, const std::string& field) {
    if (j.is_number()) return Sampler::constant(j.get<double>());
    if (j.is_object() && j.contains("min") && j.contains("max") && j.size() == 2 && j["min"].is_number() &&
        j["max"].is_number())
        return Sampler::uniform(j["min"].get<double>(), j["max"].get<double>());
    throw ConfigError(field + ": expected a number or {\"min\", \"max\"}");
}

inline void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items())
        if (!ok.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

inline int parse_id(const std::string& key, const std::string& where) {
    try {
        std::size_t used = 0;
        const int id = std::stoi(key, &used);
        if (used != key.size()) throw ConfigError(where + ": '" + key + "' is not an integer id");
        return id;
    } catch (const std::logic_error&) {
        throw ConfigError(where + ": '" + key + "' is not an integer id");
    }
}

template <typename T>
T get_field(const json& obj, const char* key, const std::string& where, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

} // namespace detail

inline json config_to_json(const RunConfig& c) {
    json j;
    j["dimension"] = c.dimension;
    j["seed"] = c.seed;
    j["samplers"] = {{"length", detail::sampler_to_json(c.samplers.length)},
                     {"density", detail::sampler_to_json(c.samplers.density)},
                     {"speed", c.samplers.speed},
                     {"loss_factor", c.samplers.loss_factor},
                     {"min_round_trip_separation", c.samplers.min_round_trip_separation}};
    json ov = json::object();
    for (const auto& [id, a] : c.overrides) {
        json e = json::object();
        if (a.length) e["length"] = *a.length;
        if (a.density) e["density"] = *a.density;
        if (a.speed) e["speed"] = *a.speed;
        if (a.loss_factor) e["loss_factor"] = *a.loss_factor;
        ov[std::to_string(id)] = std::move(e);
    }
    j["overrides"] = std::move(ov);
    json terms = json::object();
    for (const auto& [id, t] : c.terminations) terms[std::to_string(id)] = termination_to_json(t);
    j["terminations"] = std::move(terms);
    j["drive"] = {{"edge", c.drive.edge}, {"position", c.drive.position}, {"amplitude", c.drive.amplitude}};
    j["assess"] = {{"edge", c.assess.edge}, {"position", c.assess.position}};
    j["sweep"] = {{"delta_omega", c.sweep.delta_omega}, {"bins", c.sweep.bins}, {"window", to_string(c.sweep.window)}};
    j["variant"] = {{"in_vivo", c.variant.in_vivo},
                    {"in_vitro", c.variant.in_vitro},
                    {"excess", c.variant.excess},
                    {"level", c.variant.level ? json(*c.variant.level) : json(nullptr)}};
    j["output"] = {{"directory", c.output.directory}, {"emit_plot", c.output.emit_plot}};
    return j;
}

inline RunConfig config_from_json(const json& j) {
    using detail::get_field;
    detail::reject_unknown(j,
                           {"dimension", "seed", "samplers", "overrides", "terminations", "drive", "assess", "sweep",
                            "variant", "output"},
                           "config");
    RunConfig c;
    c.dimension = get_field(j, "dimension", "config", c.dimension);
    if (c.dimension < 1) throw ConfigError("dimension: must be >= 1");
    c.seed = get_field(j, "seed", "config", c.seed);

    if (j.contains("samplers")) {
        const auto& s = j["samplers"];
        detail::reject_unknown(s, {"length", "density", "speed", "loss_factor", "min_round_trip_separation"},
                               "samplers");
        if (s.contains("length")) c.samplers.length = detail::sampler_from_json(s["length"], "samplers.length");
        if (s.contains("density")) c.samplers.density = detail::sampler_from_json(s["density"], "samplers.density");
        c.samplers.speed = get_field(s, "speed", "samplers", c.samplers.speed);
        c.samplers.loss_factor = get_field(s, "loss_factor", "samplers", c.samplers.loss_factor);
        c.samplers.min_round_trip_separation =
            get_field(s, "min_round_trip_separation", "samplers", c.samplers.min_round_trip_separation);
        auto check = [](const Sampler& smp, const char* name) {
            if (!(smp.min > 0.0) || !(smp.max >= smp.min) || !std::isfinite(smp.max))
                throw ConfigError(std::string("samplers.") + name + ": bounds must satisfy 0 < min <= max");
        };
        check(c.samplers.length, "length");
        check(c.samplers.density, "density");
        if (!(c.samplers.speed > 0.0)) throw ConfigError("samplers.speed: must be positive");
        if (!(c.samplers.loss_factor >= 0.0)) throw ConfigError("samplers.loss_factor: must be >= 0");
    }

    if (j.contains("overrides")) {
        if (!j["overrides"].is_object()) throw ConfigError("overrides: expected an object");
        for (const auto& [key, val] : j["overrides"].items()) {
            const std::string where = "overrides." + key;
            detail::reject_unknown(val, {"length", "density", "speed", "loss_factor"}, where);
            EdgeAssignment a;
            if (val.contains("length")) a.length = get_field(val, "length", where, 0.0);
            if (val.contains("density")) a.density = get_field(val, "density", where, 0.0);
            if (val.contains("speed")) a.speed = get_field(val, "speed", where, 0.0);
            if (val.contains("loss_factor")) a.loss_factor = get_field(val, "loss_factor", where, 0.0);
            c.overrides[detail::parse_id(key, "overrides")] = a;
        }
    }
    if (j.contains("terminations")) {
        if (!j["terminations"].is_object()) throw ConfigError("terminations: expected an object");
        for (const auto& [key, val] : j["terminations"].items())
            c.terminations[detail::parse_id(key, "terminations")] = termination_from_json(val, "terminations." + key);
    }
    if (j.contains("drive")) {
        const auto& d = j["drive"];
        detail::reject_unknown(d, {"edge", "position", "amplitude"}, "drive");
        c.drive.edge = get_field(d, "edge", "drive", c.drive.edge);
        c.drive.position = get_field(d, "position", "drive", c.drive.position);
        c.drive.amplitude = get_field(d, "amplitude", "drive", c.drive.amplitude);
    }
    if (j.contains("assess")) {
        const auto& a = j["assess"];
        detail::reject_unknown(a, {"edge", "position"}, "assess");
        c.assess.edge = get_field(a, "edge", "assess", c.assess.edge);
        c.assess.position = get_field(a, "position", "assess", c.assess.position);
    }
    if (j.contains("sweep")) {
        const auto& s = j["sweep"];
        detail::reject_unknown(s, {"delta_omega", "bins", "window"}, "sweep");
        c.sweep.delta_omega = get_field(s, "delta_omega", "sweep", c.sweep.delta_omega);
        c.sweep.bins = get_field(s, "bins", "sweep", c.sweep.bins);
        const auto w = get_field(s, "window", "sweep", std::string(to_string(c.sweep.window)));
        if (w == "rectangular") c.sweep.window = Window::rectangular;
        else if (w == "raised_cosine") c.sweep.window = Window::raised_cosine;
        else throw ConfigError("sweep.window: unknown window '" + w + "'");
        if (!(c.sweep.delta_omega > 0.0)) throw ConfigError("sweep.delta_omega: must be positive");
        if (c.sweep.bins < 2) throw ConfigError("sweep.bins: must be >= 2");
    }
    if (j.contains("variant")) {
        const auto& v = j["variant"];
        detail::reject_unknown(v, {"in_vivo", "in_vitro", "excess", "level"}, "variant");
        c.variant.in_vivo = get_field(v, "in_vivo", "variant", false);
        c.variant.in_vitro = get_field(v, "in_vitro", "variant", false);
        c.variant.excess = get_field(v, "excess", "variant", false);
        if (v.contains("level") && !v["level"].is_null()) c.variant.level = get_field(v, "level", "variant", 0);
    }
    if (j.contains("output")) {
        const auto& o = j["output"];
        detail::reject_unknown(o, {"directory", "emit_plot"}, "output");
        c.output.directory = get_field(o, "directory", "output", std::string{});
        c.output.emit_plot = get_field(o, "emit_plot", "output", false);
    }
    return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"paper-1d", "paper-2d", "paper-3d", "paper-4d", "matched-edge"};
    return names;
}

/// Canonical scenarios: drive system 1 at 0.2, assess at 0.7, eta = 0.003,
/// z2 = 1.7 and z4 = 1.8 for the square.
inline RunConfig preset(const std::string& name) {
    RunConfig c;
    if (name == "paper-1d") {
        c.dimension = 1;
    } else if (name == "paper-2d") {
        c.dimension = 2;
        c.seed = 2;
        c.overrides[2].density = 1.7;
        c.overrides[4].density = 1.8;
        c.variant = {true, false, true, std::nullopt};
    } else if (name == "paper-3d") {
        c.dimension = 3;
        c.seed = 3;
        c.variant = {true, false, true, std::nullopt};
    } else if (name == "paper-4d") {
        c.dimension = 4;
        c.seed = 4;
        c.variant = {true, false, true, std::nullopt};
    } else if (name == "matched-edge") {
        c.dimension = 1;
        c.terminations[0] = Termination::impedance(1.0);
        c.terminations[1] = Termination::impedance(1.0);
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    return c;
}

/// Lattice and sweep inputs described by a configuration.
inline ScenarioInputs scenario_inputs(const RunConfig& c) {
    ScenarioInputs in = canonical_scenario(c.dimension, c.seed, c.overrides, c.samplers);
    for (const auto& [id, t] : c.terminations) {
        auto it = std::find_if(in.lattice.nodes.begin(), in.lattice.nodes.end(),
                               [id = id](const Node& n) { return n.id == id; });
        if (it == in.lattice.nodes.end()) throw ConfigError("terminations: unknown node id " + std::to_string(id));
        it->termination = t;
    }
    in.drive = c.drive;
    in.assess = c.assess;
    in.sweep = c.sweep;
    if (!in.lattice.has_edge(c.drive.edge)) throw ConfigError("drive.edge: unknown edge " + std::to_string(c.drive.edge));
    if (!in.lattice.has_edge(c.assess.edge))
        throw ConfigError("assess.edge: unknown edge " + std::to_string(c.assess.edge));
    return in;
}

} // namespace hyperlattice
