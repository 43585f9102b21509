// cptkin: runs kinetics, chain, typicality and symmetry scenarios from YAML configs.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "cptkin/cli/config.hpp"
#include "cptkin/cli/demos.hpp"
#include "cptkin/cli/run.hpp"

namespace {

using namespace cptkin::cli;

constexpr std::string_view kDemoPrefix = "demo:";

ScenarioConfig load(const std::string& source) {
    if (source.rfind(kDemoPrefix, 0) == 0) {
        const auto name = std::string_view(source).substr(kDemoPrefix.size());
        const auto* demo = find_demo(name);
        if (!demo) throw ConfigError({{"source", 0, "no built-in scenario named '" + std::string(name) + "'"}});
        return parse_config(demo->yaml);
    }
    return load_config(source);
}

void list_scenarios() {
    for (const auto& d : kDemos) {
        const auto cfg = parse_config(d.yaml);
        std::cout << d.name << "  [" << to_string(cfg.kind) << "]  " << cfg.description << '\n';
    }
}

void print(const ScenarioResult& r) {
    for (const auto& [k, v] : r.summary) std::cout << k << ": " << v << '\n';
    for (const auto& f : r.files) std::cout << "wrote " << f.string() << '\n';
}

void require_kind(const ScenarioConfig& cfg, ScenarioKind kind, std::string_view command) {
    if (cfg.kind != kind)
        throw ConfigError({{"scenario", 0,
                            "'" + std::string(command) + "' needs a '" + std::string(to_string(kind)) +
                                "' scenario, got '" + std::string(to_string(cfg.kind)) + "'"}});
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Matter/antimatter thermodynamic kinetics scenarios"};
    app.require_subcommand(0, 1);

    bool list = false;
    app.add_flag("--list-scenarios", list, "Print the built-in demo scenarios (use as demo:<name>)");

    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string source;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", source, "YAML config path or demo:<name>")->required();
        sub->add_option("--seed", seed, "Override the config seed");
        sub->add_option("--out-dir", out_dir, "Override the output directory");
    };
    auto* simulate = app.add_subcommand("simulate", "Run any scenario");
    auto* equilibrium = app.add_subcommand("equilibrium", "Equilibrium analysis without time integration");
    auto* symmetry = app.add_subcommand("symmetry", "Run a symmetry-check scenario");
    auto* typicality = app.add_subcommand("typicality", "Run a typicality scenario");
    for (auto* sub : {simulate, equilibrium, symmetry, typicality}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error[usage]: " << e.what() << '\n';
        return static_cast<int>(ErrorCategory::Config);
    }

    try {
        if (list) {
            list_scenarios();
            if (app.get_subcommands().empty()) return 0;
        }
        if (app.get_subcommands().empty()) {
            std::cerr << app.help();
            return static_cast<int>(ErrorCategory::Config);
        }
        auto cfg = load(source);
        if (seed) cfg.seed = *seed;
        if (!out_dir.empty()) cfg.out_dir = out_dir;

        if (*equilibrium) {
            print(run_equilibrium(cfg));
            return 0;
        }
        if (*symmetry) require_kind(cfg, ScenarioKind::SymmetryCheck, "symmetry");
        if (*typicality) require_kind(cfg, ScenarioKind::Typicality, "typicality");
        print(run_scenario(cfg));
        return 0;
    } catch (const ConfigError& e) {
        for (const auto& fe : e.errors()) std::cerr << "error[config]: " << fe.describe() << '\n';
        return static_cast<int>(ErrorCategory::Config);
    } catch (const std::exception& e) {
        const auto cat = categorize(e);
        std::cerr << "error[" << to_string(cat) << "]: " << e.what() << '\n';
        return static_cast<int>(cat);
    }
}
