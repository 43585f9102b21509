#pragma once

// Scenario dispatch and CSV output.

#include <charconv>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cptkin/cli/config.hpp"
#include "cptkin/entropy.hpp"
#include "cptkin/exchange_kinetics.hpp"
#include "cptkin/radiation_kinetics.hpp"
#include "cptkin/stochastic_chain.hpp"
#include "cptkin/symmetry.hpp"
#include "cptkin/temperature.hpp"
#include "cptkin/typicality.hpp"

namespace cptkin::cli {

inline constexpr std::string_view kVersion = "0.1.0";

inline constexpr std::string_view kTrajectoryHeader =
    "t,f_a_star,f_a_circ,f_abar_star,f_abar_circ,q_total,S_s,S_a,terminated";

/// Shortest decimal that round-trips.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline std::string format_bool(bool b) { return b ? "true" : "false"; }

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

class CsvFile {
public:
    explicit CsvFile(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw IoError("cannot open '" + path.string() + "' for writing");
    }
    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << csv_field(fields[i]);
        out_ << '\n';
    }
    void line(std::string_view raw) { out_ << raw << '\n'; }
    void close() {
        out_.close();
        if (!out_) throw IoError("failed writing '" + path_.string() + "'");
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

using Summary = std::vector<std::pair<std::string, std::string>>;

struct ScenarioResult {
    Summary summary;
    std::vector<std::filesystem::path> files;
};

enum class ErrorCategory { Other = 1, Config = 2, Io = 3, Budget = 4 };

inline std::string_view to_string(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::Other: return "runtime";
        case ErrorCategory::Config: return "config";
        case ErrorCategory::Io: return "io";
        case ErrorCategory::Budget: return "budget";
    }
    return "?";
}

inline ErrorCategory categorize(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidInput*>(&e) ||
        dynamic_cast<const NotApplicable*>(&e))
        return ErrorCategory::Config;
    if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const std::filesystem::filesystem_error*>(&e))
        return ErrorCategory::Io;
    if (dynamic_cast<const typicality::BudgetExceeded*>(&e)) return ErrorCategory::Budget;
    return ErrorCategory::Other;
}

namespace detail {

inline void prepare_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

inline std::filesystem::path write_summary(const std::filesystem::path& dir, const Summary& s) {
    const auto path = dir / "summary.csv";
    CsvFile f(path);
    f.line("key,value");
    for (const auto& [k, v] : s) f.row({k, v});
    f.close();
    return path;
}

inline std::filesystem::path write_trajectory(const std::filesystem::path& dir, const Trajectory& traj) {
    const auto path = dir / "trajectory.csv";
    CsvFile f(path);
    f.line(kTrajectoryHeader);
    for (const auto& s : traj.samples) {
        const auto& p = s.populations;
        f.row({format_double(s.t), format_double(p.f_a_star), format_double(p.f_a_circ),
               format_double(p.f_abar_star), format_double(p.f_abar_circ), format_double(s.q_total()),
               format_double(s.s_symmetric), format_double(s.s_antisymmetric), s.terminated ? "1" : "0"});
    }
    f.close();
    return path;
}

inline void header(Summary& s, const ScenarioConfig& cfg) {
    s.push_back({"version", std::string(kVersion)});
    s.push_back({"scenario", std::string(to_string(cfg.kind))});
    if (!cfg.name.empty()) s.push_back({"name", cfg.name});
    s.push_back({"seed", std::to_string(cfg.seed)});
}

inline void add_state(Summary& s, const std::string& prefix, const PopulationState& p) {
    const auto f = p.fractions();
    for (std::size_t i = 0; i < 4; ++i) s.push_back({prefix + std::string(kFractionNames[i]), format_double(f[i])});
}

inline std::string describe(const Temperature& t) {
    if (std::isnan(t.inverse())) return "undefined";
    if (t.is_plus_zero()) return "+0";
    if (t.is_minus_zero()) return "-0";
    if (t.is_infinite()) return "inf";
    return format_double(t.value());
}

inline void add_h_theorem(Summary& s, const Trajectory& traj, EntropyFunctional which, double rel_tol,
                          const std::string& key = "h_theorem") {
    const auto v = check_h_theorem(traj, which, rel_tol);
    s.push_back({"h_theorem_functional", which == EntropyFunctional::Symmetric ? "S_s" : "S_a"});
    s.push_back({key, v.pass ? "pass" : "fail"});
    s.push_back({"h_theorem_max_violation", format_double(v.max_violation)});
}

inline void add_exchange_equilibrium(Summary& s, const ScenarioConfig& cfg) {
    const auto totals = conserved_quantities(cfg.initial);
    const auto eq = exchange_equilibrium(totals, cfg.mode, cfg.initial.delta_e);
    add_state(s, "equilibrium_", eq.state);
    s.push_back({"equilibrium_exists_physically", format_bool(eq.exists_physically)});
    s.push_back({"equilibrium_stable", format_bool(eq.stable)});
    s.push_back({"equilibrium_neutral_family", format_bool(eq.neutral_family)});
    s.push_back({"temperature", describe(eq.temperature)});
    s.push_back({"intrinsic_antitemperature", describe(eq.intrinsic_antitemperature)});
    if (cfg.mode.extension == Extension::Antisymmetric) {
        const auto reg = classify_regime(totals, cfg.mode, cfg.thresholds.regime_ratio);
        s.push_back({"regime", std::string(to_string(reg.regime))});
        s.push_back({"stability", reg.stability});
        s.push_back({"abar_to_a_ratio", format_double(reg.ratio)});
        s.push_back({"ratio_exceeded", format_bool(reg.ratio_exceeded)});
    } else {
        s.push_back({"stability", "stable equilibrium"});
    }
}

inline double max_abs_diff(const PopulationState& a, const PopulationState& b) {
    const auto fa = a.fractions(), fb = b.fractions();
    double m = 0.0;
    for (std::size_t i = 0; i < 4; ++i) m = std::max(m, std::abs(fa[i] - fb[i]));
    return m;
}

inline ScenarioResult run_exchange(const ScenarioConfig& cfg, const std::filesystem::path& dir) {
    ScenarioResult res;
    ExchangeIntegration opt;
    opt.direction = cfg.time.direction;
    opt.dt_max = cfg.time.dt_max;
    opt.equilibrium_tolerance = cfg.thresholds.equilibrium_tolerance;
    const auto traj = integrate_exchange(cfg.initial, cfg.k, cfg.time.t_end, cfg.mode, opt);
    res.files.push_back(write_trajectory(dir, traj));

    auto& s = res.summary;
    header(s, cfg);
    s.push_back({"extension", std::string(to_string(cfg.mode.extension))});
    s.push_back({"direction", std::string(to_string(cfg.time.direction))});
    s.push_back({"k", format_double(cfg.k)});
    s.push_back({"terminated", std::string(to_string(traj.termination))});
    if (!traj.boundary_component.empty()) s.push_back({"boundary_component", traj.boundary_component});
    s.push_back({"t_final", format_double(traj.back().t)});
    add_state(s, "final_", traj.back().populations);
    add_exchange_equilibrium(s, cfg);
    const auto eq = exchange_equilibrium(conserved_quantities(cfg.initial), cfg.mode, cfg.initial.delta_e);
    if (eq.exists_physically && !eq.neutral_family) {
        const double dist = max_abs_diff(traj.back().populations, eq.state);
        s.push_back({"distance_to_equilibrium", format_double(dist)});
        s.push_back({"converged", format_bool(traj.termination == Termination::Equilibrium && dist < 1e-6)});
    }
    add_h_theorem(s, traj,
                  cfg.mode.extension == Extension::Symmetric ? EntropyFunctional::Symmetric
                                                             : EntropyFunctional::Antisymmetric,
                  cfg.thresholds.h_theorem_rel_tol);

    const auto c0 = conserved_quantities(cfg.initial);
    double dev = 0.0;
    for (const auto& smp : traj.samples) {
        const auto& p = smp.populations;
        dev = std::max({dev, std::abs(p.f_a() - c0.f_a_total), std::abs(p.f_abar() - c0.f_abar_total),
                        std::abs(p.f_a_star + p.f_abar_star - c0.f_star_total)});
    }
    s.push_back({"conservation_max_deviation", format_double(dev)});
    s.push_back({"conservation_tolerance", format_double(cfg.thresholds.conservation_tolerance)});
    s.push_back({"conservation", dev <= cfg.thresholds.conservation_tolerance ? "pass" : "fail"});
    return res;
}

inline void add_radiation_equilibrium(Summary& s, const ScenarioConfig& cfg) {
    const double fs = cfg.initial.star(cfg.species);
    const double fc = cfg.initial.circ(cfg.species);
    s.push_back({"species", std::string(to_string(cfg.species))});
    s.push_back({"radiation_variant", std::string(to_string(cfg.mode.radiation_variant))});
    if (fs + fc <= 0.0) {
        s.push_back({"temperature", "undefined"});
        return;
    }
    const auto t = gibbs_temperature(fs, fc, cfg.initial.delta_e);
    s.push_back({cfg.species == Species::Matter ? "temperature" : "intrinsic_temperature", describe(t)});
    if (cfg.species == Species::Antimatter) s.push_back({"apparent_temperature", describe(t.negated())});
    const auto eq = radiation_equilibrium(cfg.mode.radiation_variant, cfg.species, cfg.initial.delta_e, t);
    s.push_back({"equilibrium_q", format_double(eq.q_e)});
    s.push_back({"equilibrium_stable", format_bool(eq.stable)});
    s.push_back({"equilibrium_physical", format_bool(eq.physical)});
}

inline ScenarioResult run_radiation(const ScenarioConfig& cfg, const std::filesystem::path& dir) {
    ScenarioResult res;
    CoupledIntegration opt;
    opt.direction = cfg.time.direction;
    opt.variant = cfg.mode.radiation_variant;
    opt.reservoir = cfg.reservoir;
    opt.dt_max = cfg.time.dt_max;
    const RadiationState q0{cfg.occupations, cfg.initial.delta_e};
    const auto traj = integrate_coupled(q0, cfg.initial, cfg.k, cfg.species, cfg.time.t_end, opt);
    res.files.push_back(write_trajectory(dir, traj));

    auto& s = res.summary;
    header(s, cfg);
    s.push_back({"direction", std::string(to_string(cfg.time.direction))});
    s.push_back({"reservoir", format_bool(cfg.reservoir)});
    s.push_back({"k", format_double(cfg.k)});
    s.push_back({"terminated", std::string(to_string(traj.termination))});
    if (!traj.boundary_component.empty()) s.push_back({"boundary_component", traj.boundary_component});
    s.push_back({"t_final", format_double(traj.back().t)});
    add_state(s, "final_", traj.back().populations);
    const auto& qf = traj.back().occupations;
    for (std::size_t i = 0; i < qf.size(); ++i) s.push_back({"final_q[" + std::to_string(i) + "]", format_double(qf[i])});
    add_radiation_equilibrium(s, cfg);
    try {
        const auto inst = detect_instability(traj);
        s.push_back({"instability", inst.unstable ? "unstable" : "stable"});
        s.push_back({"growth_exponent", format_double(inst.exponent)});
        s.push_back({"dominant_mode", std::to_string(inst.dominant_mode)});
    } catch (const InsufficientData&) {
        s.push_back({"instability", "insufficient data"});
    }
    // Against a reservoir the photon entropy alone need not grow.
    if (cfg.reservoir)
        s.push_back({"h_theorem", "not applicable (reservoir)"});
    else
        add_h_theorem(s, traj,
                      cfg.species == Species::Matter ? EntropyFunctional::Symmetric : EntropyFunctional::Antisymmetric,
                      cfg.thresholds.h_theorem_rel_tol);

    // Energy: N f_star + Q; particles: f_star + f_circ.
    const double n = cfg.initial.n_secondary;
    const auto energy = [&](const TrajectorySample& smp) { return n * smp.populations.star(cfg.species) + smp.q_total(); };
    const auto particles = [&](const TrajectorySample& smp) {
        return smp.populations.star(cfg.species) + smp.populations.circ(cfg.species);
    };
    double dev = 0.0;
    const auto& first = traj.front();
    for (const auto& smp : traj.samples) {
        if (!cfg.reservoir)
            dev = std::max(dev, std::abs(energy(smp) - energy(first)) / std::max(1.0, std::abs(energy(first))));
        dev = std::max(dev, std::abs(particles(smp) - particles(first)));
    }
    s.push_back({"conservation_max_deviation", format_double(dev)});
    s.push_back({"conservation_tolerance", format_double(cfg.thresholds.conservation_tolerance)});
    s.push_back({"conservation", dev <= cfg.thresholds.conservation_tolerance ? "pass" : "fail"});
    return res;
}

inline ScenarioResult run_chain_scenario(const ScenarioConfig& cfg, const std::filesystem::path& dir) {
    ScenarioResult res;
    ChainConfig cc;
    cc.scenario = cfg.chain.process;
    cc.mode = cfg.mode;
    cc.species = cfg.species;
    cc.reservoir = cfg.reservoir;
    cc.k = cfg.k;
    cc.tau = cfg.chain.tau;
    const auto init = chain_state_from(cfg.initial, cc.scenario == ChainScenario::Radiation ? cfg.occupations
                                                                                           : std::vector<double>{});
    const auto run = run_chain(init, cfg.chain.steps, cc, cfg.seed, {cfg.chain.record_every, true});
    res.files.push_back(write_trajectory(dir, run.trajectory));

    const auto counts_path = dir / "counts.csv";
    CsvFile f(counts_path);
    f.line("step,t,F_a_star,F_a_circ,F_abar_star,F_abar_circ,Q,rejected");
    for (const auto& r : run.records) {
        const auto& c = r.counts;
        f.row({std::to_string(r.step), format_double(r.t), std::to_string(c.a_star), std::to_string(c.a_circ),
               std::to_string(c.abar_star), std::to_string(c.abar_circ), std::to_string(c.photon_total()),
               std::to_string(r.rejected)});
    }
    f.close();
    res.files.push_back(counts_path);

    auto& s = res.summary;
    header(s, cfg);
    s.push_back({"process", std::string(to_string(cc.scenario))});
    s.push_back({"rng_algorithm", run.rng_algorithm});
    s.push_back({"tau", format_double(cc.tau)});
    s.push_back({"k", format_double(cc.k)});
    s.push_back({"steps", std::to_string(run.final_state.step)});
    s.push_back({"terminated", std::string(to_string(run.trajectory.termination))});
    if (!run.trajectory.boundary_component.empty())
        s.push_back({"boundary_component", run.trajectory.boundary_component});
    s.push_back({"rejected_events", std::to_string(run.total_rejected())});
    add_state(s, "final_", run.final_state.populations());

    const auto& c0 = init.counts;
    bool conserved = true;
    for (const auto& r : run.records) {
        const auto& c = r.counts;
        if (cc.scenario == ChainScenario::Exchange) {
            conserved = conserved && c.a_star + c.a_circ == c0.a_star + c0.a_circ &&
                        c.abar_star + c.abar_circ == c0.abar_star + c0.abar_circ &&
                        c.a_star + c.abar_star == c0.a_star + c0.abar_star;
        } else if (!cc.reservoir) {
            const bool m = cc.species == Species::Matter;
            conserved = conserved && (m ? c.a_star : c.abar_star) + c.photon_total() ==
                                         (m ? c0.a_star : c0.abar_star) + c0.photon_total();
        }
    }
    s.push_back({"conservation_tolerance", "0"});
    s.push_back({"conservation", conserved ? "pass" : "fail"});
    // Fluctuations make single-chain entropies non-monotone, so this verdict
    // is informational.
    if (cc.scenario == ChainScenario::Exchange) {
        add_h_theorem(s, run.trajectory,
                      cc.mode.extension == Extension::Symmetric ? EntropyFunctional::Symmetric
                                                                : EntropyFunctional::Antisymmetric,
                      cfg.thresholds.h_theorem_rel_tol, "h_theorem_single_chain");
    }
    return res;
}

inline ScenarioResult run_typicality(const ScenarioConfig& cfg, const std::filesystem::path& dir) {
    ScenarioResult res;
    const auto& ty = cfg.typicality;
    for (auto ne : ty.n_e)
        for (auto nm : ty.n_m) typicality::require_budget(ty.n_s * ne, nm);

    const auto path = dir / "typicality.csv";
    CsvFile f(path);
    f.line("n_s,n_e,n_m,samples,rms,predicted_scale,max_diag_z,max_offdiag_z");
    auto& s = res.summary;
    header(s, cfg);
    bool means_ok = true;
    std::vector<std::vector<double>> rms_by_nm;
    for (std::size_t mi = 0; mi < ty.n_m.size(); ++mi) {
        const auto table = typicality::typicality_convergence(ty.n_s, ty.n_e, ty.n_m[mi], ty.samples, cfg.seed);
        std::vector<double> rms;
        for (const auto& row : table.rows) {
            double zd = 0.0, zo = 0.0;
            const auto ns = static_cast<Eigen::Index>(ty.n_s);
            for (Eigen::Index k = 0; k < ns; ++k)
                for (Eigen::Index j = 0; j < ns; ++j) {
                    const double target = k == j ? 1.0 / static_cast<double>(ty.n_s) : 0.0;
                    const double zr = std::abs(row.mean(k, j).real() - target) / std::max(row.stderr_re(k, j), 1e-300);
                    const double zi = k == j ? 0.0 : std::abs(row.mean(k, j).imag()) / std::max(row.stderr_im(k, j), 1e-300);
                    (k == j ? zd : zo) = std::max(k == j ? zd : zo, std::max(zr, zi));
                }
            means_ok = means_ok && zd <= 3.0 && zo <= 3.0;
            f.row({std::to_string(ty.n_s), std::to_string(row.n_e), std::to_string(row.n_m),
                   std::to_string(row.samples), format_double(row.rms), format_double(row.predicted_scale),
                   format_double(zd), format_double(zo)});
            rms.push_back(row.rms);
        }
        s.push_back({"slope_vs_n_e[n_m=" + std::to_string(ty.n_m[mi]) + "]", format_double(table.slope)});
        rms_by_nm.push_back(std::move(rms));
    }
    f.close();
    res.files.push_back(path);
    if (ty.n_m.size() >= 2) {
        std::vector<double> xs(ty.n_m.begin(), ty.n_m.end());
        for (std::size_t ei = 0; ei < ty.n_e.size(); ++ei) {
            std::vector<double> ys;
            for (const auto& r : rms_by_nm) ys.push_back(r[ei]);
            s.push_back({"slope_vs_n_m[n_e=" + std::to_string(ty.n_e[ei]) + "]",
                         format_double(typicality::loglog_slope(xs, ys))});
        }
    }
    s.push_back({"means_within_3se", format_bool(means_ok)});
    const auto id = typicality::observable_statistics(typicality::ObservableSpec::identity(ty.n_s * ty.n_e.front()),
                                                      {ty.n_s * ty.n_e.front(), ty.n_m.front(), 100, cfg.seed});
    s.push_back({"identity_mean", format_double(id.mean)});
    s.push_back({"identity_rms", format_double(id.rms)});
    return res;
}

/// Documented outcomes; nullopt where no claim is made.
inline std::optional<bool> expected_invariance(symmetry::Family f, symmetry::Transform t) {
    using symmetry::Family;
    using symmetry::Transform;
    if (t == Transform::CP && f == Family::ExchangeSym) return true;
    if (t == Transform::CPT && f == Family::ExchangeAnti) return true;
    if (t == Transform::CP && f == Family::ExchangeAnti) return false;
    if (t == Transform::CPT && (f == Family::RadiationStepsMatter || f == Family::RadiationStepsAntimatter))
        return true;
    if (t == Transform::CPT && (f == Family::RadiationOdeMatter || f == Family::RadiationOdeAntimatter))
        return false;
    return std::nullopt;
}

inline std::string describe_probe(const symmetry::Probe& p) {
    using symmetry::Epoch;
    using symmetry::Symbol;
    std::string out;
    const char* epochs[] = {"", "'", "''"};
    for (std::size_t sym = 0; sym < 5; ++sym)
        for (std::size_t e = 0; e < 3; ++e) {
            if (!out.empty()) out += ";";
            out += symmetry::describe(static_cast<Symbol>(sym)) + epochs[e] + "=" +
                   format_double(p.get(static_cast<Symbol>(sym), static_cast<Epoch>(e)));
        }
    return out;
}

inline ScenarioResult run_symmetry(const ScenarioConfig& cfg, const std::filesystem::path& dir) {
    ScenarioResult res;
    const auto path = dir / "symmetry.csv";
    CsvFile f(path);
    f.line("family,transform,mirror,verdict,expected,matches,structurally_equal,max_deviation,witness");
    std::size_t mismatches = 0, checked = 0;
    for (auto fam : cfg.symmetry.families)
        for (auto tr : cfg.symmetry.transforms) {
            const auto v = symmetry::check_invariance(fam, tr, cfg.symmetry.states, cfg.thresholds.symmetry_tolerance,
                                                      cfg.seed);
            const auto expected = expected_invariance(fam, tr);
            std::string matches = "-";
            if (expected) {
                ++checked;
                matches = format_bool(*expected == v.invariant);
                if (*expected != v.invariant) ++mismatches;
            }
            f.row({std::string(symmetry::to_string(fam)), std::string(symmetry::to_string(tr)),
                   std::string(symmetry::to_string(v.mirror)), v.invariant ? "invariant" : "violated",
                   expected ? (*expected ? "invariant" : "violated") : "-", matches,
                   format_bool(v.structurally_equal), format_double(v.max_deviation),
                   v.witness ? describe_probe(*v.witness) : ""});
        }
    f.close();
    res.files.push_back(path);
    auto& s = res.summary;
    header(s, cfg);
    s.push_back({"random_states", std::to_string(cfg.symmetry.states)});
    s.push_back({"tolerance", format_double(cfg.thresholds.symmetry_tolerance)});
    s.push_back({"documented_claims_checked", std::to_string(checked)});
    s.push_back({"documented_claims_reproduced", std::to_string(checked - mismatches)});
    s.push_back({"symmetry_verdicts", mismatches == 0 ? "pass" : "fail"});
    return res;
}

}  // namespace detail

/// Runs the scenario and writes its CSV files into `out_dir` (the config's
/// output.dir when empty). Output depends only on config, seed and version.
inline ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir = {}) {
    const std::filesystem::path dir = out_dir.empty() ? std::filesystem::path(cfg.out_dir) : out_dir;
    detail::prepare_dir(dir);
    ScenarioResult res;
    switch (cfg.kind) {
        case ScenarioKind::Exchange: res = detail::run_exchange(cfg, dir); break;
        case ScenarioKind::Radiation: res = detail::run_radiation(cfg, dir); break;
        case ScenarioKind::Chain: res = detail::run_chain_scenario(cfg, dir); break;
        case ScenarioKind::Typicality: res = detail::run_typicality(cfg, dir); break;
        case ScenarioKind::SymmetryCheck: res = detail::run_symmetry(cfg, dir); break;
    }
    res.files.push_back(detail::write_summary(dir, res.summary));
    return res;
}

/// Equilibrium analysis only (no time integration); writes summary.csv.
inline ScenarioResult run_equilibrium(const ScenarioConfig& cfg, const std::filesystem::path& out_dir = {}) {
    const std::filesystem::path dir = out_dir.empty() ? std::filesystem::path(cfg.out_dir) : out_dir;
    ScenarioResult res;
    auto& s = res.summary;
    detail::header(s, cfg);
    if (cfg.kind == ScenarioKind::Exchange ||
        (cfg.kind == ScenarioKind::Chain && cfg.chain.process == ChainScenario::Exchange)) {
        s.push_back({"extension", std::string(to_string(cfg.mode.extension))});
        detail::add_exchange_equilibrium(s, cfg);
    } else if (cfg.kind == ScenarioKind::Radiation ||
               (cfg.kind == ScenarioKind::Chain && cfg.chain.process == ChainScenario::Radiation)) {
        detail::add_radiation_equilibrium(s, cfg);
    } else {
        throw NotApplicable("equilibrium analysis needs an exchange, radiation or chain scenario");
    }
    detail::prepare_dir(dir);
    res.files.push_back(detail::write_summary(dir, s));
    return res;
}

}  // namespace cptkin::cli
