#pragma once

// Scenario configuration: a YAML document with fixed sections. Parsing is
// strict; unknown keys are errors, and every error carries the line of the
// offending node.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "cptkin/core_state.hpp"
#include "cptkin/stochastic_chain.hpp"
#include "cptkin/symmetry.hpp"

namespace cptkin::cli {

enum class ScenarioKind { Exchange, Radiation, Chain, Typicality, SymmetryCheck };

inline std::string_view to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::Exchange: return "exchange";
        case ScenarioKind::Radiation: return "radiation";
        case ScenarioKind::Chain: return "chain";
        case ScenarioKind::Typicality: return "typicality";
        case ScenarioKind::SymmetryCheck: return "symmetry-check";
    }
    return "?";
}

struct FieldError {
    std::string field;
    int line = 0;  // 1-based; 0 when unknown
    std::string message;

    std::string describe() const {
        std::string s = line > 0 ? "line " + std::to_string(line) + ": " : std::string{};
        return s + field + ": " + message;
    }
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<FieldError> errors)
        : std::runtime_error(join(errors)), errors_(std::move(errors)) {}
    const std::vector<FieldError>& errors() const noexcept { return errors_; }

private:
    static std::string join(const std::vector<FieldError>& errors) {
        std::string s;
        for (const auto& e : errors) s += (s.empty() ? "" : "\n") + e.describe();
        return s;
    }
    std::vector<FieldError> errors_;
};

struct TimeSection {
    double t_end = 0.0;
    double dt_max = 0.5;
    TimeDirection direction = TimeDirection::Forward;
};

struct ChainSection {
    ChainScenario process = ChainScenario::Exchange;
    double tau = 0.01;
    std::size_t steps = 0;
    std::size_t record_every = 1;
};

struct TypicalitySection {
    std::size_t n_s = 2;
    std::vector<std::size_t> n_e;
    std::vector<std::size_t> n_m{1};
    std::size_t samples = 1000;
};

struct SymmetrySection {
    std::vector<symmetry::Family> families{symmetry::kAllFamilies.begin(), symmetry::kAllFamilies.end()};
    std::vector<symmetry::Transform> transforms{symmetry::Transform::CP, symmetry::Transform::CPT};
    std::size_t states = 1000;
};

struct Thresholds {
    double regime_ratio = 10.0;
    double equilibrium_tolerance = 1e-10;
    double symmetry_tolerance = 1e-12;
    double h_theorem_rel_tol = 1e-9;
    double conservation_tolerance = 1e-9;
};

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::Exchange;
    std::string name;
    std::string description;
    KineticsMode mode;
    PopulationState initial;
    std::vector<double> occupations;
    Species species = Species::Matter;
    bool reservoir = false;
    double k = 1.0;
    TimeSection time;
    ChainSection chain;
    TypicalitySection typicality;
    SymmetrySection symmetry;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    Thresholds thresholds;
};

namespace detail {

class Reader {
public:
    std::vector<FieldError> errors;

    void error(const std::string& field, const YAML::Node& node, const std::string& msg) {
        errors.push_back({field, line_of(node), msg});
    }

    static int line_of(const YAML::Node& node) {
        if (!node.IsDefined()) return 0;
        const auto m = node.Mark();
        return m.line >= 0 ? m.line + 1 : 0;
    }

    static std::string join(std::string_view path, std::string_view key) {
        return path.empty() ? std::string(key) : std::string(path) + "." + std::string(key);
    }

    /// Checks that `node` is a map with keys drawn from `allowed`.
    bool section(const YAML::Node& node, std::string_view path, std::initializer_list<std::string_view> allowed) {
        if (!node.IsMap()) {
            error(std::string(path.empty() ? "document" : path), node, "expected a mapping");
            return false;
        }
        for (auto it = node.begin(); it != node.end(); ++it) {
            const std::string key = it->first.as<std::string>("");
            bool ok = false;
            for (auto a : allowed) ok = ok || a == key;
            if (!ok) error(join(path, key), it->first, "unknown key");
        }
        return true;
    }

    template <typename T>
    std::optional<T> scalar(const YAML::Node& map, std::string_view path, std::string_view key, bool required,
                            std::string_view expected) {
        const auto node = map[std::string(key)];
        if (!node.IsDefined() || node.IsNull()) {
            if (required) error(join(path, key), map, "missing required field");
            return std::nullopt;
        }
        try {
            if (!node.IsScalar()) throw YAML::BadConversion(node.Mark());
            return node.as<T>();
        } catch (const YAML::BadConversion&) {
            error(join(path, key), node, "expected " + std::string(expected));
            return std::nullopt;
        }
    }

    std::optional<double> number(const YAML::Node& map, std::string_view path, std::string_view key,
                                 bool required = false) {
        return scalar<double>(map, path, key, required, "a number");
    }
    std::optional<std::size_t> count(const YAML::Node& map, std::string_view path, std::string_view key,
                                     bool required = false) {
        const auto node = map[std::string(key)];
        if (node.IsDefined() && node.IsScalar() && !node.Scalar().empty() && node.Scalar()[0] == '-') {
            error(join(path, key), node, "expected a non-negative integer");
            return std::nullopt;
        }
        return scalar<std::size_t>(map, path, key, required, "a non-negative integer");
    }
    std::optional<std::string> text(const YAML::Node& map, std::string_view path, std::string_view key,
                                    bool required = false) {
        return scalar<std::string>(map, path, key, required, "a string");
    }
    std::optional<bool> flag(const YAML::Node& map, std::string_view path, std::string_view key) {
        return scalar<bool>(map, path, key, false, "true or false");
    }

    template <typename T>
    std::optional<std::vector<T>> list(const YAML::Node& map, std::string_view path, std::string_view key,
                                       bool required, std::string_view expected) {
        const auto node = map[std::string(key)];
        if (!node.IsDefined() || node.IsNull()) {
            if (required) error(join(path, key), map, "missing required field");
            return std::nullopt;
        }
        if (!node.IsSequence()) {
            error(join(path, key), node, "expected a list of " + std::string(expected));
            return std::nullopt;
        }
        std::vector<T> out;
        for (const auto& item : node) {
            try {
                if (!item.IsScalar()) throw YAML::BadConversion(item.Mark());
                if constexpr (std::is_unsigned_v<T>) {
                    if (!item.Scalar().empty() && item.Scalar()[0] == '-') throw YAML::BadConversion(item.Mark());
                }
                out.push_back(item.as<T>());
            } catch (const YAML::BadConversion&) {
                error(join(path, key), item, "expected a list of " + std::string(expected));
                return std::nullopt;
            }
        }
        return out;
    }

    template <typename E>
    std::optional<E> choice(const YAML::Node& map, std::string_view path, std::string_view key, bool required,
                            std::initializer_list<std::pair<std::string_view, E>> options) {
        const auto s = text(map, path, key, required);
        if (!s) return std::nullopt;
        std::string allowed;
        for (const auto& [name, value] : options) {
            if (*s == name) return value;
            allowed += (allowed.empty() ? "" : ", ") + std::string(name);
        }
        error(join(path, key), map[std::string(key)], "unknown value '" + *s + "' (expected one of: " + allowed + ")");
        return std::nullopt;
    }
};

inline void positive(Reader& r, const YAML::Node& map, std::string_view path, std::string_view key, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) r.error(Reader::join(path, key), map[std::string(key)], "must be positive and finite");
}

}  // namespace detail

/// Parses and validates a scenario document. Throws ConfigError listing every
/// problem found.
inline ScenarioConfig parse_config(std::string_view text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw ConfigError({{"document", e.mark.line + 1, e.msg}});
    }
    detail::Reader r;
    ScenarioConfig cfg;
    if (!r.section(root, "",
                   {"scenario", "name", "description", "mode", "initial", "k", "time", "radiation", "chain",
                    "typicality", "symmetry", "seed", "output", "thresholds"}))
        throw ConfigError(r.errors);

    const auto kind = r.choice<ScenarioKind>(root, "", "scenario", true,
                                             {{"exchange", ScenarioKind::Exchange},
                                              {"radiation", ScenarioKind::Radiation},
                                              {"chain", ScenarioKind::Chain},
                                              {"typicality", ScenarioKind::Typicality},
                                              {"symmetry-check", ScenarioKind::SymmetryCheck}});
    if (!kind) throw ConfigError(r.errors);
    cfg.kind = *kind;
    if (auto v = r.text(root, "", "name")) cfg.name = *v;
    if (auto v = r.text(root, "", "description")) cfg.description = *v;
    if (auto v = r.scalar<std::uint64_t>(root, "", "seed", false, "a non-negative integer")) cfg.seed = *v;

    const bool kinetic = cfg.kind == ScenarioKind::Exchange || cfg.kind == ScenarioKind::Radiation ||
                         cfg.kind == ScenarioKind::Chain;

    if (const auto out = root["output"]; out.IsDefined()) {
        if (r.section(out, "output", {"dir"}))
            if (auto v = r.text(out, "output", "dir")) cfg.out_dir = *v;
    }

    if (const auto th = root["thresholds"]; th.IsDefined()) {
        if (r.section(th, "thresholds",
                      {"regime_ratio", "equilibrium_tolerance", "symmetry_tolerance", "h_theorem_rel_tol",
                       "conservation_tolerance"})) {
            auto& t = cfg.thresholds;
            if (auto v = r.number(th, "thresholds", "regime_ratio")) {
                t.regime_ratio = *v;
                if (!(*v > 1.0)) r.error("thresholds.regime_ratio", th["regime_ratio"], "must exceed 1");
            }
            for (auto [key, dst] : {std::pair{"equilibrium_tolerance", &t.equilibrium_tolerance},
                                    std::pair{"symmetry_tolerance", &t.symmetry_tolerance},
                                    std::pair{"h_theorem_rel_tol", &t.h_theorem_rel_tol},
                                    std::pair{"conservation_tolerance", &t.conservation_tolerance}}) {
                if (auto v = r.number(th, "thresholds", key)) {
                    *dst = *v;
                    detail::positive(r, th, "thresholds", key, *v);
                }
            }
        }
    }

    if (const auto mode = root["mode"]; mode.IsDefined()) {
        if (r.section(mode, "mode", {"extension", "radiation_variant"})) {
            if (auto v = r.choice<Extension>(mode, "mode", "extension", false,
                                              {{"symmetric", Extension::Symmetric},
                                               {"antisymmetric", Extension::Antisymmetric}}))
                cfg.mode.extension = *v;
            if (auto v = r.choice<RadiationVariant>(mode, "mode", "radiation_variant", false,
                                                     {{"neutral", RadiationVariant::Neutral},
                                                      {"decohering", RadiationVariant::Decohering},
                                                      {"recohering", RadiationVariant::Recohering}}))
                cfg.mode.radiation_variant = *v;
        }
    } else if (cfg.kind == ScenarioKind::Exchange) {
        r.error("mode", root, "missing required section");
    }

    if (kinetic) {
        const auto init = root["initial"];
        if (!init.IsDefined()) {
            r.error("initial", root, "missing required section");
        } else if (r.section(init, "initial",
                             {"f_a_star", "f_a_circ", "f_abar_star", "f_abar_circ", "n_secondary", "delta_e",
                              "occupations"})) {
            auto& p = cfg.initial;
            const bool exchange_like = cfg.kind != ScenarioKind::Radiation;
            for (auto [key, dst] : {std::pair{"f_a_star", &p.f_a_star}, std::pair{"f_a_circ", &p.f_a_circ},
                                    std::pair{"f_abar_star", &p.f_abar_star},
                                    std::pair{"f_abar_circ", &p.f_abar_circ}}) {
                if (auto v = r.number(init, "initial", key, exchange_like)) *dst = *v;
            }
            if (auto v = r.number(init, "initial", "n_secondary")) p.n_secondary = *v;
            if (auto v = r.number(init, "initial", "delta_e")) p.delta_e = *v;
            if (auto v = r.list<double>(init, "initial", "occupations", false, "numbers")) cfg.occupations = *v;
            for (const auto& issue : validate(p).violations) {
                const std::string key = issue.field;
                r.error("initial." + key, init[key].IsDefined() ? init[key] : init,
                        issue.message + " (populations must be finite, non-negative and at most 1)");
            }
            for (const auto& issue : validate(RadiationState{cfg.occupations, 1.0}).violations)
                r.error("initial.occupations", init["occupations"], issue.message);
        }

        if (auto v = r.number(root, "", "k", true)) {
            cfg.k = *v;
            if (!(*v >= 0.0) || !std::isfinite(*v)) r.error("k", root["k"], "must be non-negative and finite");
        }
    }

    if (cfg.kind == ScenarioKind::Exchange || cfg.kind == ScenarioKind::Radiation) {
        const auto time = root["time"];
        if (!time.IsDefined()) {
            r.error("time", root, "missing required section");
        } else if (r.section(time, "time", {"t_end", "dt_max", "direction"})) {
            if (auto v = r.number(time, "time", "t_end", true)) {
                cfg.time.t_end = *v;
                detail::positive(r, time, "time", "t_end", *v);
            }
            if (auto v = r.number(time, "time", "dt_max")) {
                cfg.time.dt_max = *v;
                detail::positive(r, time, "time", "dt_max", *v);
            }
            if (auto v = r.choice<TimeDirection>(time, "time", "direction", false,
                                                  {{"forward", TimeDirection::Forward},
                                                   {"backward", TimeDirection::Backward}}))
                cfg.time.direction = *v;
        }
    } else if (root["time"].IsDefined()) {
        r.error("time", root["time"], "not used by scenario '" + std::string(to_string(cfg.kind)) + "'");
    }

    const bool needs_radiation =
        cfg.kind == ScenarioKind::Radiation || (cfg.kind == ScenarioKind::Chain && root["chain"].IsMap() &&
                                                root["chain"]["process"].IsDefined() &&
                                                root["chain"]["process"].as<std::string>("") == "radiation");
    if (const auto rad = root["radiation"]; rad.IsDefined()) {
        if (!needs_radiation) r.error("radiation", rad, "only used by radiation scenarios");
        if (r.section(rad, "radiation", {"species", "reservoir"})) {
            if (auto v = r.choice<Species>(rad, "radiation", "species", true,
                                           {{"matter", Species::Matter}, {"antimatter", Species::Antimatter}}))
                cfg.species = *v;
            if (auto v = r.flag(rad, "radiation", "reservoir")) cfg.reservoir = *v;
        }
    } else if (needs_radiation) {
        r.error("radiation", root, "missing required section");
    }
    if (needs_radiation && cfg.occupations.empty())
        r.error("initial.occupations", root["initial"], "radiation scenarios need at least one photon mode");
    if (needs_radiation && cfg.mode.radiation_variant != RadiationVariant::Neutral &&
        cfg.species != Species::Matter)
        r.error("mode.radiation_variant", root["mode"], "control variants are defined for matter only");

    if (cfg.kind == ScenarioKind::Chain) {
        const auto ch = root["chain"];
        if (!ch.IsDefined()) {
            r.error("chain", root, "missing required section");
        } else if (r.section(ch, "chain", {"process", "tau", "steps", "record_every"})) {
            if (auto v = r.choice<ChainScenario>(ch, "chain", "process", true,
                                                  {{"exchange", ChainScenario::Exchange},
                                                   {"radiation", ChainScenario::Radiation}}))
                cfg.chain.process = *v;
            if (auto v = r.number(ch, "chain", "tau", true)) {
                cfg.chain.tau = *v;
                detail::positive(r, ch, "chain", "tau", *v);
            }
            if (auto v = r.count(ch, "chain", "steps", true)) {
                cfg.chain.steps = *v;
                if (*v < 1) r.error("chain.steps", ch["steps"], "must be at least 1");
            }
            if (auto v = r.count(ch, "chain", "record_every")) {
                cfg.chain.record_every = *v;
                if (*v < 1) r.error("chain.record_every", ch["record_every"], "must be at least 1");
            }
        }
    } else if (root["chain"].IsDefined()) {
        r.error("chain", root["chain"], "only used by chain scenarios");
    }

    if (cfg.kind == ScenarioKind::Typicality) {
        const auto ty = root["typicality"];
        if (!ty.IsDefined()) {
            r.error("typicality", root, "missing required section");
        } else if (r.section(ty, "typicality", {"n_s", "n_e", "n_m", "samples"})) {
            auto& t = cfg.typicality;
            if (auto v = r.count(ty, "typicality", "n_s")) t.n_s = *v;
            if (auto v = r.list<std::size_t>(ty, "typicality", "n_e", true, "positive integers")) t.n_e = *v;
            if (auto v = r.list<std::size_t>(ty, "typicality", "n_m", false, "positive integers")) t.n_m = *v;
            if (auto v = r.count(ty, "typicality", "samples")) t.samples = *v;
            if (t.n_s < 1) r.error("typicality.n_s", ty["n_s"], "must be at least 1");
            if (t.samples < 2) r.error("typicality.samples", ty["samples"], "must be at least 2");
            if (t.n_m.empty()) r.error("typicality.n_m", ty["n_m"], "must not be empty");
            for (auto v : t.n_e)
                if (v < 1) r.error("typicality.n_e", ty["n_e"], "entries must be at least 1");
            for (auto v : t.n_m)
                if (v < 1) r.error("typicality.n_m", ty["n_m"], "entries must be at least 1");
        }
    } else if (root["typicality"].IsDefined()) {
        r.error("typicality", root["typicality"], "only used by typicality scenarios");
    }

    if (const auto sy = root["symmetry"]; sy.IsDefined()) {
        if (cfg.kind != ScenarioKind::SymmetryCheck) r.error("symmetry", sy, "only used by symmetry-check scenarios");
        if (r.section(sy, "symmetry", {"families", "transforms", "states"})) {
            auto& s = cfg.symmetry;
            if (auto v = r.list<std::string>(sy, "symmetry", "families", false, "family names")) {
                s.families.clear();
                for (const auto& name : *v) {
                    try {
                        s.families.push_back(symmetry::family_from_string(name));
                    } catch (const InvalidInput& e) {
                        r.error("symmetry.families", sy["families"], e.what());
                    }
                }
            }
            if (auto v = r.list<std::string>(sy, "symmetry", "transforms", false, "CP or CPT")) {
                s.transforms.clear();
                for (const auto& name : *v) {
                    try {
                        s.transforms.push_back(symmetry::transform_from_string(name));
                    } catch (const InvalidInput& e) {
                        r.error("symmetry.transforms", sy["transforms"], e.what());
                    }
                }
            }
            if (auto v = r.count(sy, "symmetry", "states")) {
                s.states = *v;
                if (*v < 1) r.error("symmetry.states", sy["states"], "must be at least 1");
            }
        }
    }

    if (!r.errors.empty()) throw ConfigError(r.errors);
    return cfg;
}

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
    return ss.str();
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_text_file(path));
}

}  // namespace cptkin::cli
