#pragma once

// Discrete event simulator over integer counts. Each step of length tau
// draws Poisson event numbers whose means are the expected conversion counts
// of the rate laws evaluated at the start of the step, then applies the
// events one reaction at a time (reaction 1, then 2). An event that would
// drive a count negative is rejected and logged.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cptkin/core_state.hpp"
#include "cptkin/entropy.hpp"
#include "cptkin/trajectory.hpp"

namespace cptkin {

// ---------------------------------------------------------------------------
// Transition weights of one unitary segment, S = I + i h.

struct WeightMatrix {
    std::size_t dimension = 0;
    /// Row-major W[i][f].
    std::vector<double> entries;
    std::vector<bool> forbidden;
    double h_norm = 0.0;
    std::vector<std::string> warnings;

    double operator()(std::size_t i, std::size_t f) const { return entries[i * dimension + f]; }
    bool is_forbidden(std::size_t i, std::size_t f) const { return forbidden[i * dimension + f]; }

    /// Total weight of the off-diagonal (state-changing) transitions out of i.
    double transition_weight(std::size_t i) const {
        double s = 0.0;
        for (std::size_t f = 0; f < dimension; ++f)
            if (f != i) s += (*this)(i, f);
        return s;
    }
};

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kPerturbativeNormWarning = 0.1;

/// W[i][f] = |delta_if + i h_if|^2, so 1 + h_ii^2 on the diagonal and
/// |h_if|^2 elsewhere. `h` is square and row-major; `forbidden` (optional,
/// same shape) zeroes both W[i][f] and W[f][i]. The norm used for the
/// perturbative warning is the Frobenius norm of h.
inline WeightMatrix build_weight_matrix(const std::vector<std::vector<std::complex<double>>>& h,
                                        const std::vector<std::vector<bool>>& forbidden = {}) {
    const std::size_t n = h.size();
    if (n == 0) throw InvalidInput("build_weight_matrix: empty perturbation");
    for (const auto& row : h)
        if (row.size() != n) throw InvalidInput("build_weight_matrix: h must be square");
    if (!forbidden.empty()) {
        if (forbidden.size() != n) throw InvalidInput("build_weight_matrix: mask shape mismatch");
        for (const auto& row : forbidden)
            if (row.size() != n) throw InvalidInput("build_weight_matrix: mask shape mismatch");
    }
    WeightMatrix w;
    w.dimension = n;
    w.entries.assign(n * n, 0.0);
    w.forbidden.assign(n * n, false);
    double frob = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t f = 0; f < n; ++f) {
            const auto hij = h[i][f];
            if (std::abs(hij - std::conj(h[f][i])) > kHermitianTolerance)
                throw InvalidInput("build_weight_matrix: h is not Hermitian at (" + std::to_string(i) + "," +
                                   std::to_string(f) + ")");
            frob += std::norm(hij);
        }
    }
    w.h_norm = std::sqrt(frob);
    if (w.h_norm > kPerturbativeNormWarning)
        w.warnings.push_back("perturbation norm " + std::to_string(w.h_norm) + " exceeds " +
                             std::to_string(kPerturbativeNormWarning));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t f = i; f < n; ++f) {
            const bool masked = !forbidden.empty() && (forbidden[i][f] || forbidden[f][i]);
            double value = 0.0;
            if (i == f) value = 1.0 + h[i][i].real() * h[i][i].real();
            else if (!masked) value = std::norm(h[i][f]);
            // Hermiticity makes |h_if| = |h_fi|; storing one value makes W
            // exactly symmetric.
            w.entries[i * n + f] = value;
            w.entries[f * n + i] = value;
            if (masked && i != f) w.forbidden[i * n + f] = w.forbidden[f * n + i] = true;
        }
    }
    return w;
}

// ---------------------------------------------------------------------------
// Chain state and configuration.

enum class ChainScenario { Exchange, Radiation };

inline std::string_view to_string(ChainScenario s) { return s == ChainScenario::Exchange ? "exchange" : "radiation"; }

struct ChainCounts {
    std::int64_t a_star = 0;
    std::int64_t a_circ = 0;
    std::int64_t abar_star = 0;
    std::int64_t abar_circ = 0;
    std::vector<std::int64_t> photons;

    std::int64_t photon_total() const noexcept {
        std::int64_t s = 0;
        for (auto q : photons) s += q;
        return s;
    }
    bool non_negative() const noexcept {
        if (a_star < 0 || a_circ < 0 || abar_star < 0 || abar_circ < 0) return false;
        for (auto q : photons)
            if (q < 0) return false;
        return true;
    }
    friend bool operator==(const ChainCounts&, const ChainCounts&) = default;
};

struct ChainState {
    ChainCounts counts;
    /// N, the number of secondary states; fractions are counts / N.
    double n_secondary = 1e6;
    double delta_e = 1.0;
    std::size_t step = 0;
    double t = 0.0;

    PopulationState populations() const {
        PopulationState p;
        p.f_a_star = static_cast<double>(counts.a_star) / n_secondary;
        p.f_a_circ = static_cast<double>(counts.a_circ) / n_secondary;
        p.f_abar_star = static_cast<double>(counts.abar_star) / n_secondary;
        p.f_abar_circ = static_cast<double>(counts.abar_circ) / n_secondary;
        p.n_secondary = n_secondary;
        p.delta_e = delta_e;
        return p;
    }

    std::vector<double> occupations() const {
        return {counts.photons.begin(), counts.photons.end()};
    }
};

/// Builds integer counts by rounding F = f N.
inline ChainState chain_state_from(const PopulationState& p, const std::vector<double>& q = {}) {
    require_valid(p);
    ChainState s;
    s.n_secondary = p.n_secondary;
    s.delta_e = p.delta_e;
    s.counts.a_star = std::llround(p.f_a_star * p.n_secondary);
    s.counts.a_circ = std::llround(p.f_a_circ * p.n_secondary);
    s.counts.abar_star = std::llround(p.f_abar_star * p.n_secondary);
    s.counts.abar_circ = std::llround(p.f_abar_circ * p.n_secondary);
    for (double qi : q) {
        if (!(qi >= 0.0)) throw InvalidInput("chain_state_from: negative occupation");
        s.counts.photons.push_back(std::llround(qi));
    }
    return s;
}

struct ChainConfig {
    ChainScenario scenario = ChainScenario::Exchange;
    KineticsMode mode;
    /// Species interacting with the radiation.
    Species species = Species::Matter;
    /// Freeze the atomic counts in radiation runs.
    bool reservoir = false;
    double k = 1.0;
    double tau = 1e-2;
};

/// Per-step log of one reaction channel. mode is the photon mode for
/// radiation and 0 for exchange; reaction 1 is the forward exchange or
/// absorption, 2 the reverse exchange or emission.
struct ReactionLog {
    int reaction = 1;
    std::size_t mode = 0;
    double mean = 0.0;
    std::int64_t drawn = 0;
    std::int64_t accepted = 0;
    std::int64_t rejected() const noexcept { return drawn - accepted; }
};

struct StepLog {
    std::vector<ReactionLog> reactions;
    /// A required population is absent; the kinetics stops here.
    bool terminated = false;
    Termination termination = Termination::None;
    std::string boundary_component;

    std::int64_t rejected() const noexcept {
        std::int64_t r = 0;
        for (const auto& x : reactions) r += x.rejected();
        return r;
    }
};

namespace detail {

inline void require_chain_state(const ChainState& s, const ChainConfig& c) {
    if (!s.counts.non_negative()) throw InvalidInput("chain state has a negative count");
    if (!(s.n_secondary > 0.0)) throw InvalidInput("chain state needs n_secondary > 0");
    if (!(c.k >= 0.0)) throw InvalidInput("chain k must be non-negative");
    if (!(c.tau > 0.0)) throw InvalidInput("chain tau must be positive");
    if (c.scenario == ChainScenario::Radiation) {
        if (s.counts.photons.empty()) throw InvalidInput("radiation chain needs at least one photon mode");
        if (c.mode.radiation_variant != RadiationVariant::Neutral && c.species != Species::Matter)
            throw NotApplicable("control radiation variants are defined for matter only");
    }
}

inline double h(std::int64_t n) { return n > 0 ? 1.0 : 0.0; }

// Applies up to `drawn` events; each consumes one unit from every pointer in
// `consumed` and adds one to every pointer in `produced`.
inline std::int64_t apply_events(std::int64_t drawn, std::initializer_list<std::int64_t*> consumed,
                                 std::initializer_list<std::int64_t*> produced, std::int64_t photon_delta,
                                 std::int64_t* photons) {
    std::int64_t room = drawn;
    for (auto* c : consumed) room = std::min(room, *c);
    if (photon_delta < 0 && photons) room = std::min(room, *photons);
    for (auto* c : consumed) *c -= room;
    for (auto* p : produced) *p += room;
    if (photons) *photons += photon_delta * room;
    return room;
}

inline std::int64_t draw(double mean, std::mt19937_64& rng) {
    if (!(mean > 0.0)) return 0;
    return std::poisson_distribution<std::int64_t>(mean)(rng);
}

// Boundary reached by kinetics that carry Heaviside factors on every
// population: antisymmetric exchange, and radiation coupled to antimatter.
inline void mark_boundary(const ChainState& s, const ChainConfig& c, StepLog& log) {
    const auto& n = s.counts;
    if (c.scenario == ChainScenario::Exchange) {
        if (c.mode.extension != Extension::Antisymmetric) return;
        const std::int64_t v[4] = {n.a_star, n.a_circ, n.abar_star, n.abar_circ};
        for (std::size_t i = 0; i < 4; ++i) {
            if (v[i] <= 0) {
                log.terminated = true;
                log.termination = Termination::Boundary;
                log.boundary_component = std::string(kFractionNames[i]);
                return;
            }
        }
        return;
    }
    if (c.species != Species::Antimatter) return;
    if (n.abar_star <= 0) {
        log.terminated = true;
        log.termination = Termination::ExcitedPopulationExhausted;
        log.boundary_component = "f_abar_star";
    } else if (n.abar_circ <= 0) {
        log.terminated = true;
        log.termination = Termination::Boundary;
        log.boundary_component = "f_abar_circ";
    }
}

}  // namespace detail

/// Advances `state` by one step of length tau. Both reactions use means
/// computed from the state at the start of the step.
///
/// Exchange means (events over the step): N k tau times the rate factors
/// of the forward and reverse terms, each for the reaction
/// A* + Abar° -> A° + Abar* and its reverse. Radiation means per mode:
/// k tau times the absorption and emission terms of the mode rate; every
/// photon moves one particle between the levels of the interacting species
/// unless the populations are a reservoir.
inline StepLog sample_chain_step(ChainState& state, const ChainConfig& cfg, std::mt19937_64& rng) {
    detail::require_chain_state(state, cfg);
    StepLog log;
    detail::mark_boundary(state, cfg, log);
    if (log.terminated) return log;

    auto& n = state.counts;
    const double kt = cfg.k * cfg.tau;
    const double big_n = state.n_secondary;
    using detail::h;

    if (cfg.scenario == ChainScenario::Exchange) {
        const double a_s = static_cast<double>(n.a_star), a_c = static_cast<double>(n.a_circ);
        const double b_s = static_cast<double>(n.abar_star), b_c = static_cast<double>(n.abar_circ);
        double mean1 = 0.0, mean2 = 0.0;
        if (cfg.mode.extension == Extension::Symmetric) {
            mean1 = kt * a_s * b_c / big_n;
            mean2 = kt * a_c * b_s / big_n;
        } else {
            mean1 = kt * a_s * b_s / big_n * h(n.a_circ) * h(n.abar_circ);
            mean2 = kt * a_c * b_c / big_n * h(n.a_star) * h(n.abar_star);
        }
        ReactionLog r1{1, 0, mean1, detail::draw(mean1, rng), 0};
        ReactionLog r2{2, 0, mean2, detail::draw(mean2, rng), 0};
        r1.accepted = detail::apply_events(r1.drawn, {&n.a_star, &n.abar_circ}, {&n.a_circ, &n.abar_star}, 0, nullptr);
        r2.accepted = detail::apply_events(r2.drawn, {&n.a_circ, &n.abar_star}, {&n.a_star, &n.abar_circ}, 0, nullptr);
        log.reactions = {r1, r2};
    } else {
        const bool matter = cfg.species == Species::Matter;
        std::int64_t& star = matter ? n.a_star : n.abar_star;
        std::int64_t& circ = matter ? n.a_circ : n.abar_circ;
        const double fs = static_cast<double>(star) / big_n;
        const double fc = static_cast<double>(circ) / big_n;
        const std::int64_t star0 = star, circ0 = circ;
        std::vector<std::pair<double, double>> means;
        means.reserve(n.photons.size());
        for (auto qi : n.photons) {
            const double q = static_cast<double>(qi);
            double absorb = 0.0, emit = 0.0;
            if (!matter) {
                absorb = kt * q * fs * h(circ0);
                emit = kt * (q + 1.0) * fc * h(star0);
            } else {
                switch (cfg.mode.radiation_variant) {
                    case RadiationVariant::Neutral: absorb = kt * q * fc; emit = kt * (q + 1.0) * fs; break;
                    case RadiationVariant::Decohering: absorb = kt * q * fc; emit = kt * fs; break;
                    case RadiationVariant::Recohering: absorb = kt * fc * h(qi); emit = kt * (q + 1.0) * fs; break;
                }
            }
            means.emplace_back(absorb, emit);
        }
        // For both species an absorption lifts one particle from the ground
        // to the excited level and an emission lowers one; only the rate
        // factors differ.
        for (std::size_t i = 0; i < n.photons.size(); ++i) {
            ReactionLog r1{1, i, means[i].first, detail::draw(means[i].first, rng), 0};
            ReactionLog r2{2, i, means[i].second, detail::draw(means[i].second, rng), 0};
            if (cfg.reservoir) {
                r1.accepted = detail::apply_events(r1.drawn, {}, {}, -1, &n.photons[i]);
                r2.accepted = detail::apply_events(r2.drawn, {}, {}, +1, &n.photons[i]);
            } else {
                r1.accepted = detail::apply_events(r1.drawn, {&circ}, {&star}, -1, &n.photons[i]);
                r2.accepted = detail::apply_events(r2.drawn, {&star}, {&circ}, +1, &n.photons[i]);
            }
            log.reactions.push_back(r1);
            log.reactions.push_back(r2);
        }
    }
    if (!n.non_negative()) throw std::logic_error("sample_chain_step produced a negative count");
    ++state.step;
    state.t += cfg.tau;
    detail::mark_boundary(state, cfg, log);
    return log;
}

// ---------------------------------------------------------------------------
// Runs.

inline constexpr std::string_view kChainRngAlgorithm = "mt19937_64";

struct ChainRecord {
    std::size_t step = 0;
    double t = 0.0;
    ChainCounts counts;
    std::int64_t rejected = 0;
};

struct RejectionRecord {
    std::size_t step = 0;
    int reaction = 1;
    std::size_t mode = 0;
    std::int64_t rejected = 0;
};

struct ChainRun {
    std::uint64_t seed = 0;
    std::string rng_algorithm{kChainRngAlgorithm};
    ChainConfig config;
    std::vector<ChainRecord> records;
    std::vector<RejectionRecord> rejections;
    /// Fractions and entropies for every record, in the shape shared with
    /// the ODE integrators.
    Trajectory trajectory;
    ChainState final_state;

    std::int64_t total_rejected() const noexcept {
        std::int64_t s = 0;
        for (const auto& r : rejections) s += r.rejected;
        return s;
    }
};

struct ChainRunOptions {
    /// Keep every n-th step (the first and last are always kept).
    std::size_t record_every = 1;
    /// Stop early at a boundary of a guarded kinetics.
    bool stop_at_boundary = true;
};

namespace detail {

inline TrajectorySample chain_sample(const ChainState& s, const ChainConfig& c) {
    TrajectorySample smp;
    smp.t = s.t;
    smp.populations = s.populations();
    smp.occupations = s.occupations();
    const auto e = c.scenario == ChainScenario::Exchange
                       ? exchange_entropy(smp.populations)
                       : radiation_entropy(smp.populations, smp.occupations, c.species);
    smp.s_symmetric = e.s_symmetric;
    smp.s_antisymmetric = e.s_antisymmetric;
    return smp;
}

}  // namespace detail

/// Runs n_steps steps (fewer if a boundary stops the run). The result is a
/// pure function of (initial, n_steps, config, seed).
inline ChainRun run_chain(const ChainState& initial, std::size_t n_steps, const ChainConfig& cfg,
                          std::uint64_t seed, const ChainRunOptions& opt = {}) {
    if (n_steps < 1) throw InvalidInput("run_chain: n_steps must be at least 1");
    if (opt.record_every < 1) throw InvalidInput("run_chain: record_every must be at least 1");
    detail::require_chain_state(initial, cfg);
    ChainRun run;
    run.seed = seed;
    run.config = cfg;
    std::mt19937_64 rng(seed);
    ChainState s = initial;

    auto record = [&](std::int64_t rejected) {
        run.records.push_back({s.step, s.t, s.counts, rejected});
        run.trajectory.samples.push_back(detail::chain_sample(s, cfg));
    };
    record(0);
    run.trajectory.termination = Termination::TimeLimit;
    std::int64_t pending_rejected = 0;
    for (std::size_t i = 0; i < n_steps; ++i) {
        const auto log = sample_chain_step(s, cfg, rng);
        for (const auto& r : log.reactions)
            if (r.rejected() > 0) run.rejections.push_back({s.step, r.reaction, r.mode, r.rejected()});
        pending_rejected += log.rejected();
        const bool last = i + 1 == n_steps;
        const bool stop = log.terminated && opt.stop_at_boundary;
        if (last || stop || s.step % opt.record_every == 0) {
            if (run.records.back().step != s.step) record(pending_rejected);
            pending_rejected = 0;
        }
        if (stop) {
            run.trajectory.termination = log.termination;
            run.trajectory.boundary_component = log.boundary_component;
            break;
        }
    }
    run.trajectory.steps_accepted = s.step;
    run.trajectory.samples.back().terminated = true;
    run.final_state = s;
    return run;
}

/// Independent seed for chain `index` of an ensemble started from `base`.
inline std::uint64_t chain_seed(std::uint64_t base, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

// ---------------------------------------------------------------------------
// Ensembles.

/// Welford accumulator; merge() combines partial results in any order.
struct RunningStats {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    void merge(const RunningStats& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double total = static_cast<double>(n + o.n);
        const double d = o.mean - mean;
        mean += d * static_cast<double>(o.n) / total;
        m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / total;
        n += o.n;
    }
    double variance() const noexcept { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double stddev() const noexcept { return std::sqrt(variance()); }
    double standard_error() const noexcept { return n > 0 ? stddev() / std::sqrt(static_cast<double>(n)) : 0.0; }
};

/// Ensemble statistics at one step: the four fractions and the total photon
/// number, in kFractionNames order followed by q_total.
struct EnsembleCheckpoint {
    std::size_t step = 0;
    double t = 0.0;
    std::array<RunningStats, 5> stats;
};

struct ChainEnsemble {
    std::size_t n_chains = 0;
    std::uint64_t base_seed = 0;
    std::vector<EnsembleCheckpoint> checkpoints;
    std::int64_t total_rejected = 0;
    std::size_t terminated_runs = 0;
};

/// Runs n_chains independent chains (seeds from chain_seed) and collects
/// statistics at the requested step indices. A chain stopped at a boundary
/// contributes its final state to later checkpoints.
inline ChainEnsemble run_ensemble(const ChainState& initial, const ChainConfig& cfg, std::size_t n_chains,
                                  std::uint64_t base_seed, std::vector<std::size_t> checkpoint_steps) {
    if (n_chains < 1) throw InvalidInput("run_ensemble: need at least one chain");
    if (checkpoint_steps.empty()) throw InvalidInput("run_ensemble: need at least one checkpoint");
    std::sort(checkpoint_steps.begin(), checkpoint_steps.end());
    detail::require_chain_state(initial, cfg);
    ChainEnsemble ens;
    ens.n_chains = n_chains;
    ens.base_seed = base_seed;
    for (auto st : checkpoint_steps)
        ens.checkpoints.push_back({st, static_cast<double>(st) * cfg.tau, {}});
    auto observe = [&](EnsembleCheckpoint& cp, const ChainState& s) {
        const auto p = s.populations();
        const auto f = p.fractions();
        for (std::size_t j = 0; j < 4; ++j) cp.stats[j].add(f[j]);
        cp.stats[4].add(static_cast<double>(s.counts.photon_total()));
    };
    for (std::size_t c = 0; c < n_chains; ++c) {
        std::mt19937_64 rng(chain_seed(base_seed, c));
        ChainState s = initial;
        bool stopped = false;
        for (auto& cp : ens.checkpoints) {
            while (!stopped && s.step < cp.step) {
                const auto log = sample_chain_step(s, cfg, rng);
                ens.total_rejected += log.rejected();
                if (log.terminated) {
                    stopped = true;
                    ++ens.terminated_runs;
                }
            }
            observe(cp, s);
        }
    }
    return ens;
}

}  // namespace cptkin
