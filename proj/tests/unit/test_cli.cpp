#include <catch_amalgamated.hpp>

#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "cptkin/cli/config.hpp"
#include "cptkin/cli/demos.hpp"
#include "cptkin/cli/run.hpp"

using namespace cptkin;
using namespace cptkin::cli;
namespace fs = std::filesystem;

namespace {

constexpr const char* kMinimalExchange = R"(scenario: exchange
mode:
  extension: symmetric
initial:
  f_a_star: 0.02
  f_a_circ: 0.05
  f_abar_star: 0.01
  f_abar_circ: 0.04
k: 10
time:
  t_end: 500
)";

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("cptkin_test_cli_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> read_summary(const fs::path& dir) {
    std::map<std::string, std::string> m;
    std::istringstream in(slurp(dir / "summary.csv"));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        m[line.substr(0, comma)] = line.substr(comma + 1);
    }
    return m;
}

std::vector<std::vector<double>> read_rows(const fs::path& file) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(slurp(file));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

std::vector<FieldError> errors_of(std::string_view text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.errors();
    }
    return {};
}

bool has_error(const std::vector<FieldError>& errs, const std::string& field) {
    for (const auto& e : errs)
        if (e.field == field) return true;
    return false;
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    return s.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("minimal exchange config parses") {
    const auto cfg = parse_config(kMinimalExchange);
    CHECK(cfg.kind == ScenarioKind::Exchange);
    CHECK(cfg.mode.extension == Extension::Symmetric);
    CHECK(cfg.initial.f_abar_circ == 0.04);
    CHECK(cfg.k == 10.0);
    CHECK(cfg.time.t_end == 500.0);
    CHECK(cfg.seed == 1);
}

TEST_CASE("missing k is reported by name") {
    const auto errs = errors_of(replace(kMinimalExchange, "k: 10\n", ""));
    REQUIRE(errs.size() == 1);
    CHECK(errs[0].field == "k");
    CHECK(errs[0].message.find("missing") != std::string::npos);
}

TEST_CASE("negative fraction cites the population invariant with its line") {
    const auto errs = errors_of(replace(kMinimalExchange, "f_a_circ: 0.05", "f_a_circ: -0.05"));
    REQUIRE(errs.size() == 1);
    CHECK(errs[0].field == "initial.f_a_circ");
    CHECK(errs[0].line == 6);
    CHECK(errs[0].message.find("non-negative") != std::string::npos);
}

TEST_CASE("strict parsing rejects unknown keys, kinds and misplaced sections") {
    CHECK(errors_of(replace(kMinimalExchange, "k: 10", "k: 10\nspeed: 3"))[0].field == "speed");
    CHECK(has_error(errors_of(replace(kMinimalExchange, "t_end: 500", "t_end: 500\n  t_start: 0")), "time.t_start"));
    CHECK(has_error(errors_of(replace(kMinimalExchange, "scenario: exchange", "scenario: diffusion")), "scenario"));
    CHECK(has_error(errors_of(replace(kMinimalExchange, "k: 10", "k: fast")), "k"));
    CHECK(has_error(errors_of(replace(kMinimalExchange, "extension: symmetric", "extension: sideways")),
                    "mode.extension"));
    CHECK(has_error(errors_of(std::string(kMinimalExchange) + "chain:\n  tau: 0.1\n"), "chain"));
    CHECK(has_error(errors_of(replace(kMinimalExchange, "time:\n  t_end: 500\n", "")), "time"));
    CHECK(has_error(errors_of("scenario: [1, 2\n"), "document"));

    // Every error is collected, not only the first.
    const auto many = errors_of(replace(replace(kMinimalExchange, "k: 10\n", ""), "f_a_star: 0.02", "f_a_star: 2"));
    CHECK(many.size() == 2);
}

TEST_CASE("radiation configs need species and modes; control variants are matter-only") {
    const std::string base = R"(scenario: radiation
mode:
  radiation_variant: decohering
initial:
  f_abar_star: 0.02
  f_abar_circ: 0.05
  occupations: [0.5]
radiation:
  species: antimatter
k: 1
time:
  t_end: 10
)";
    CHECK(has_error(errors_of(base), "mode.radiation_variant"));
    CHECK_NOTHROW(parse_config(replace(base, "decohering", "neutral")));
    CHECK(has_error(errors_of(replace(base, "  occupations: [0.5]\n", "")), "initial.occupations"));
    CHECK(has_error(errors_of(replace(base, "  occupations: [0.5]", "  occupations: [-1]")), "initial.occupations"));
    CHECK(has_error(errors_of(replace(base, "radiation:\n  species: antimatter\n", "")), "radiation"));
}

TEST_CASE("built-in demos parse and mirror the scenario files") {
    for (const auto& d : kDemos) {
        INFO(d.name);
        CHECK_NOTHROW(parse_config(d.yaml));
        const fs::path file = fs::path(CPTKIN_SOURCE_DIR) / "scenarios" / (std::string(d.name) + ".yaml");
        REQUIRE(fs::exists(file));
        CHECK(slurp(file) == d.yaml);
    }
    CHECK(find_demo("laser") != nullptr);
    CHECK(find_demo("no-such-demo") == nullptr);
}

TEST_CASE("format_double round-trips exactly") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<std::uint64_t> bits;
    int checked = 0;
    while (checked < 2000) {
        const auto b = bits(rng);
        double x;
        std::memcpy(&x, &b, sizeof x);
        if (!std::isfinite(x)) continue;
        const auto s = format_double(x);
        double back = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        CHECK(back == x);
        ++checked;
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
}

TEST_CASE("symmetric exchange run converges to the closed-form equilibrium") {
    const auto cfg = parse_config(kMinimalExchange);
    const auto dir = scratch("sym");
    run_scenario(cfg, dir);

    auto s = read_summary(dir);
    CHECK(s["terminated"] == "equilibrium");
    CHECK(s["converged"] == "true");
    CHECK(s["h_theorem"] == "pass");
    CHECK(s["conservation"] == "pass");

    // Same excited fraction on both species: f*/f = F*/(F_A + F_Abar).
    const double a = 0.07, abar = 0.05, star = 0.03;
    const double x = star / (a + abar);
    const auto rows = read_rows(dir / "trajectory.csv");
    const auto& last = rows.back();
    CHECK(std::abs(last[1] - a * x) < 1e-8);
    CHECK(std::abs(last[2] - a * (1 - x)) < 1e-8);
    CHECK(std::abs(last[3] - abar * x) < 1e-8);
    CHECK(std::abs(last[4] - abar * (1 - x)) < 1e-8);
    CHECK(last[8] == 1.0);

    CHECK(slurp(dir / "trajectory.csv").rfind(std::string(kTrajectoryHeader) + "\n", 0) == 0);
}

TEST_CASE("trajectory rows satisfy conservation within the reported tolerance") {
    for (auto name : {"symmetric-exchange", "antisymmetric-stable", "antisymmetric-unstable"}) {
        INFO(name);
        const auto dir = scratch(std::string("cons_") + name);
        run_scenario(parse_config(find_demo(name)->yaml), dir);
        const double tol = std::stod(read_summary(dir)["conservation_tolerance"]);
        const auto rows = read_rows(dir / "trajectory.csv");
        const auto& r0 = rows.front();
        for (const auto& r : rows) {
            CHECK(std::abs((r[1] + r[2]) - (r0[1] + r0[2])) <= tol);
            CHECK(std::abs((r[3] + r[4]) - (r0[3] + r0[4])) <= tol);
            CHECK(std::abs((r[1] + r[3]) - (r0[1] + r0[3])) <= tol);
        }
    }
    // Closed matter-radiation system: N f* + Q fixed.
    const auto dir = scratch("cons_laser");
    const auto cfg = parse_config(find_demo("laser")->yaml);
    run_scenario(cfg, dir);
    const double tol = std::stod(read_summary(dir)["conservation_tolerance"]);
    const auto rows = read_rows(dir / "trajectory.csv");
    const double n = cfg.initial.n_secondary;
    const double e0 = n * rows.front()[1] + rows.front()[5];
    for (const auto& r : rows) CHECK(std::abs(n * r[1] + r[5] - e0) <= tol * e0);
}

TEST_CASE("antimatter with positive intrinsic temperature exhausts its excited population") {
    const auto dir = scratch("collapse");
    run_scenario(parse_config(find_demo("antimatter-collapse")->yaml), dir);
    auto s = read_summary(dir);
    CHECK(s["terminated"] == "excited population exhausted");
    CHECK(s["boundary_component"] == "f_abar_star");
    CHECK(std::stod(s["final_f_abar_star"]) == 0.0);
}

TEST_CASE("symmetry-check over all families reproduces the documented claims") {
    const auto dir = scratch("ledger");
    run_scenario(parse_config(find_demo("symmetry-ledger")->yaml), dir);
    auto s = read_summary(dir);
    CHECK(s["symmetry_verdicts"] == "pass");

    std::map<std::string, std::string> verdict;
    std::istringstream in(slurp(dir / "symmetry.csv"));
    std::string line;
    std::getline(in, line);
    int rows = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string fam, tr, mirror, v;
        std::getline(ls, fam, ',');
        std::getline(ls, tr, ',');
        std::getline(ls, mirror, ',');
        std::getline(ls, v, ',');
        verdict[tr + "(" + fam + ")"] = v;
        ++rows;
    }
    CHECK(rows == 12);
    CHECK(verdict["CP(ExchangeSym)"] == "invariant");
    CHECK(verdict["CPT(ExchangeAnti)"] == "invariant");
    CHECK(verdict["CPT(RadiationSteps(Matter))"] == "invariant");
    CHECK(verdict["CPT(RadiationODE(Matter))"] == "violated");
}

TEST_CASE("outputs are byte-identical for identical config and seed") {
    for (auto name : {"chain-symmetric", "typicality", "laser"}) {
        INFO(name);
        auto cfg = parse_config(find_demo(name)->yaml);
        if (cfg.kind == ScenarioKind::Chain) cfg.chain.steps = 2000;
        if (cfg.kind == ScenarioKind::Typicality) cfg.typicality.samples = 200;
        const auto a = scratch(std::string("det_a_") + name), b = scratch(std::string("det_b_") + name);
        const auto ra = run_scenario(cfg, a);
        run_scenario(cfg, b);
        for (const auto& f : ra.files) CHECK(slurp(f) == slurp(b / f.filename()));

        if (cfg.kind == ScenarioKind::Chain) {
            cfg.seed += 1;
            const auto c = scratch(std::string("det_c_") + name);
            run_scenario(cfg, c);
            CHECK(slurp(a / "counts.csv") != slurp(c / "counts.csv"));
        }
    }
}

TEST_CASE("chain scenario conserves counts exactly") {
    auto cfg = parse_config(find_demo("chain-symmetric")->yaml);
    cfg.chain.steps = 3000;
    const auto dir = scratch("chain");
    run_scenario(cfg, dir);
    auto s = read_summary(dir);
    CHECK(s["rng_algorithm"] == "mt19937_64");
    CHECK(s["conservation"] == "pass");
    const auto rows = read_rows(dir / "counts.csv");
    CHECK(rows.size() == 31);
    for (const auto& r : rows) {
        CHECK(r[2] + r[3] == 40000);
        CHECK(r[4] + r[5] == 60000);
        CHECK(r[2] + r[4] == 40000);
    }
}

TEST_CASE("equilibrium subcommand reports regime without integrating") {
    const auto dir = scratch("eq");
    run_equilibrium(parse_config(find_demo("antisymmetric-unstable")->yaml), dir);
    auto s = read_summary(dir);
    CHECK(s["regime"] == "matter dominant");
    CHECK(s["equilibrium_stable"] == "false");
    CHECK_FALSE(fs::exists(dir / "trajectory.csv"));
    CHECK_THROWS_AS(run_equilibrium(parse_config(find_demo("typicality")->yaml), dir), NotApplicable);
}

TEST_CASE("errors map to categories and exit codes") {
    auto cfg = parse_config(find_demo("typicality")->yaml);
    cfg.typicality.n_e = {16384};
    try {
        run_scenario(cfg, scratch("budget"));
        FAIL("expected a budget error");
    } catch (const std::exception& e) {
        CHECK(categorize(e) == ErrorCategory::Budget);
        CHECK(static_cast<int>(categorize(e)) == 4);
    }

    const auto file = scratch("not_a_dir");
    std::ofstream(file) << "x";
    try {
        run_scenario(parse_config(kMinimalExchange), file / "sub");
        FAIL("expected an I/O error");
    } catch (const std::exception& e) {
        CHECK(categorize(e) == ErrorCategory::Io);
    }
    CHECK_THROWS_AS(load_config(scratch("missing") / "none.yaml"), IoError);

    try {
        parse_config("scenario: nope\n");
    } catch (const std::exception& e) {
        CHECK(categorize(e) == ErrorCategory::Config);
    }
    CHECK(categorize(std::runtime_error("x")) == ErrorCategory::Other);
}
