#pragma once

// Energy exchange A* + Abar° <-> A° + Abar* between atoms and antiatoms.
//
// Symmetric kinetics uses the mass-action rates k f(A*) f(Abar°) and
// k f(A°) f(Abar*). In the antisymmetric kinetics antimatter decoheres in the
// opposite time direction, so the rates become k f(A*) f(Abar*) and
// k f(A°) f(Abar°).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cptkin/core_state.hpp"
#include "cptkin/entropy.hpp"
#include "cptkin/ode.hpp"
#include "cptkin/temperature.hpp"
#include "cptkin/trajectory.hpp"

namespace cptkin {

struct ExchangeRates {
    double d_f_a_star = 0.0;
    double d_f_a_circ = 0.0;
    double d_f_abar_star = 0.0;
    double d_f_abar_circ = 0.0;
    bool terminated = false;

    std::array<double, 4> values() const noexcept {
        return {d_f_a_star, d_f_a_circ, d_f_abar_star, d_f_abar_circ};
    }

    double norm_inf() const noexcept {
        double m = 0.0;
        for (double v : values()) m = std::max(m, std::abs(v));
        return m;
    }
};

struct ExchangeEventCounts {
    double delta_f1 = 0.0;
    double delta_f2 = 0.0;
};

/// Expected numbers of conversion events over one reaction time, evaluated
/// from the populations just before (primed) and just after (double-primed)
/// the decoherence event. K = K1 = K2 is the weight sum over secondary states.
inline ExchangeEventCounts exchange_event_counts(const PopulationState& before,
                                                 const PopulationState& after, double K,
                                                 const KineticsMode& mode) {
    if (!(K >= 0.0)) throw InvalidInput("exchange_event_counts: K must be non-negative");
    require_valid(before);
    require_valid(after);
    const auto& p = before;
    const auto& pp = after;
    if (mode.extension == Extension::Symmetric) {
        return {
            K * p.f_a_star * p.f_abar_circ * heaviside(pp.f_a_circ) * heaviside(pp.f_abar_star),
            K * p.f_a_circ * p.f_abar_star * heaviside(pp.f_a_star) * heaviside(pp.f_abar_circ),
        };
    }
    // Antimatter reads "before" and "after" the other way round.
    return {
        K * p.f_a_star * pp.f_abar_star * heaviside(pp.f_a_circ) * heaviside(p.f_abar_circ),
        K * p.f_a_circ * pp.f_abar_circ * heaviside(pp.f_a_star) * heaviside(p.f_abar_star),
    };
}

namespace detail {

// Net forward flux of the exchange reaction; dF(A°)/dt in fraction units.
inline double exchange_flux(double a_star, double a_circ, double abar_star, double abar_circ,
                            double k, Extension ext, bool guarded) {
    if (ext == Extension::Symmetric) {
        if (!guarded) return k * (a_star * abar_circ - a_circ * abar_star);
        return k * (a_star * abar_circ * heaviside(a_circ) * heaviside(abar_star) -
                    a_circ * abar_star * heaviside(a_star) * heaviside(abar_circ));
    }
    if (!guarded) return k * (a_star * abar_star - a_circ * abar_circ);
    return k * (a_star * abar_star * heaviside(a_circ) * heaviside(abar_circ) -
                a_circ * abar_circ * heaviside(a_star) * heaviside(abar_star));
}

// Heaviside guards may be dropped only for forward-time symmetric kinetics,
// where populations cannot leave the non-negative orthant.
inline bool needs_guards(Extension ext, TimeDirection dir) {
    return !(ext == Extension::Symmetric && dir == TimeDirection::Forward);
}

// Both extensions describe the same reaction A* + Abar° <-> A° + Abar*;
// only the rate factors differ.
inline ExchangeRates rates_from_flux(double flux) {
    ExchangeRates r;
    r.d_f_a_circ = flux;
    r.d_f_a_star = -flux;
    r.d_f_abar_star = flux;
    r.d_f_abar_circ = -flux;
    return r;
}

}  // namespace detail

/// Right-hand side of the exchange rate equations. The result is dF/dt for
/// the given direction's equation; the direction only controls whether the
/// Heaviside guards are kept.
inline ExchangeRates exchange_rhs(const PopulationState& s, double k, const KineticsMode& mode,
                                  TimeDirection direction = TimeDirection::Forward) {
    if (!(k >= 0.0)) throw InvalidInput("exchange_rhs: k must be non-negative");
    require_valid(s);
    const Extension ext = mode.extension;
    const bool guarded = detail::needs_guards(ext, direction);
    const double flux = detail::exchange_flux(s.f_a_star, s.f_a_circ, s.f_abar_star, s.f_abar_circ,
                                              k, ext, guarded);
    ExchangeRates r = detail::rates_from_flux(flux);
    if (guarded) {
        const auto f = s.fractions();
        r.terminated = std::any_of(f.begin(), f.end(), [](double x) { return x <= 0.0; });
    }
    return r;
}

/// Entropy production from explicit rates: dS/dt = -N sum_X Theta_X sum_l
/// (ln f + 1) df/dt, with Theta_Abar = -1 in the antisymmetric extension.
/// Gives dS_s/dt (symmetric) or dS_a/dt (antisymmetric).
inline double entropy_production(const PopulationState& s, const ExchangeRates& rates,
                                 const KineticsMode& mode) {
    const double theta_abar = mode.extension == Extension::Symmetric ? 1.0 : -1.0;
    auto term = [](double f, double df) {
        if (df == 0.0) return 0.0;
        if (f <= 0.0) return df > 0.0 ? -std::numeric_limits<double>::infinity()
                                      : std::numeric_limits<double>::infinity();
        return (std::log(f) + 1.0) * df;
    };
    const double matter = term(s.f_a_star, rates.d_f_a_star) + term(s.f_a_circ, rates.d_f_a_circ);
    const double anti =
        term(s.f_abar_star, rates.d_f_abar_star) + term(s.f_abar_circ, rates.d_f_abar_circ);
    return -s.n_secondary * (matter + theta_abar * anti);
}

struct EquilibriumSolution {
    PopulationState state;
    /// Temperature of matter.
    Temperature temperature = Temperature::infinite();
    /// Intrinsic temperature of antimatter: T in the symmetric extension,
    /// -T in the antisymmetric one.
    Temperature intrinsic_antitemperature = Temperature::infinite();
    bool exists_physically = false;
    bool stable = false;
    /// f_A = f_Abar in the antisymmetric extension: no unique solution, only
    /// the family f(A°) = f(Abar*), f(A*) = f(Abar°). `state` then holds the
    /// all-equal member.
    bool neutral_family = false;
};

inline constexpr double kDegenerateRelativeEps = 1e-12;

namespace detail {

inline void require_consistent(const ConservedQuantities& c) {
    for (double v : {c.f_a_total, c.f_abar_total, c.f_circ_total, c.f_star_total}) {
        if (!std::isfinite(v) || v < 0.0)
            throw InvalidInput("conserved totals must be finite and non-negative");
    }
    const double scale = std::max(1.0, c.f_a_total + c.f_abar_total);
    if (std::abs(c.particle_imbalance()) > 1e-12 * scale)
        throw InvalidInput("conserved totals inconsistent: f_A + f_Abar != f_circ + f_star");
}

inline bool degenerate(double f_a, double f_abar, double eps) {
    return std::abs(f_abar - f_a) <= eps * std::max(f_a + f_abar, std::numeric_limits<double>::min());
}

}  // namespace detail

inline EquilibriumSolution exchange_equilibrium(const ConservedQuantities& c, const KineticsMode& mode,
                                                double delta_e = 1.0,
                                                double degenerate_eps = kDegenerateRelativeEps) {
    detail::require_consistent(c);
    if (!(delta_e > 0.0)) throw InvalidInput("exchange_equilibrium: delta_e must be positive");
    const double fa = c.f_a_total;
    const double fb = c.f_abar_total;
    const double fc = c.f_circ_total;
    const double fs = c.f_star_total;

    EquilibriumSolution sol;
    sol.state.delta_e = delta_e;

    if (mode.extension == Extension::Symmetric) {
        const double total = fa + fb;
        if (total > 0.0) {
            sol.state.f_a_circ = fa * fc / total;
            sol.state.f_a_star = fa * fs / total;
            sol.state.f_abar_circ = fb * fc / total;
            sol.state.f_abar_star = fb * fs / total;
            sol.temperature = gibbs_temperature(fs, fc, delta_e);
        }
        sol.intrinsic_antitemperature = sol.temperature;
        sol.exists_physically = true;
        sol.stable = true;
        return sol;
    }

    if (detail::degenerate(fa, fb, degenerate_eps)) {
        const double f = 0.5 * (fa + fb);
        sol.neutral_family = true;
        sol.state.f_a_circ = sol.state.f_a_star = 0.5 * f;
        sol.state.f_abar_circ = sol.state.f_abar_star = 0.5 * f;
        // Every family member has f_circ = f_star = f; otherwise the flux
        // keeps one sign and no equilibrium exists.
        sol.exists_physically = std::abs(fc - fs) <= degenerate_eps * std::max(fc + fs, 1e-300);
        sol.stable = false;
        return sol;
    }

    const double d = fb - fa;
    const double r1 = (fb - fc) / d;  // f(A°)/f_A = f(Abar*)/f_Abar
    const double r2 = (fc - fa) / d;  // f(A*)/f_A = f(Abar°)/f_Abar
    sol.state.f_a_circ = fa * r1;
    sol.state.f_abar_star = fb * r1;
    sol.state.f_a_star = fa * r2;
    sol.state.f_abar_circ = fb * r2;
    sol.exists_physically = r1 >= 0.0 && r2 >= 0.0;
    sol.stable = fb > fa;
    if (sol.exists_physically) {
        sol.temperature = gibbs_temperature(r2, r1, delta_e);
        sol.intrinsic_antitemperature = sol.temperature.negated();
    } else {
        sol.temperature = Temperature::from_inverse(std::numeric_limits<double>::quiet_NaN());
        sol.intrinsic_antitemperature = sol.temperature;
    }
    return sol;
}

enum class Regime { EarlyUniverse, AntiworldDominant, MatterDominant };

inline std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::EarlyUniverse: return "early universe";
        case Regime::AntiworldDominant: return "antiworld dominant";
        case Regime::MatterDominant: return "matter dominant";
    }
    return "?";
}

struct RegimeReport {
    Regime regime = Regime::EarlyUniverse;
    std::string stability;
    /// f_Abar / f_A (inf when there is no matter).
    double ratio = 1.0;
    /// The imbalance is strong in the sense of the threshold (>> or <<).
    bool ratio_exceeded = false;
};

inline RegimeReport classify_regime(const ConservedQuantities& c, const KineticsMode& mode,
                                    double ratio_threshold = 10.0,
                                    double degenerate_eps = kDegenerateRelativeEps) {
    if (mode.extension != Extension::Antisymmetric)
        throw NotApplicable("regime classification applies to antisymmetric kinetics only");
    if (!(ratio_threshold > 1.0)) throw InvalidInput("classify_regime: ratio threshold must exceed 1");
    detail::require_consistent(c);
    const double fa = c.f_a_total;
    const double fb = c.f_abar_total;
    RegimeReport r;
    r.ratio = fa > 0.0 ? fb / fa : (fb > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    if (detail::degenerate(fa, fb, degenerate_eps)) {
        r.regime = Regime::EarlyUniverse;
        r.stability = "neutral equilibrium family";
        return r;
    }
    if (fb > fa) {
        r.regime = Regime::AntiworldDominant;
        r.stability = "stable equilibrium at negative traveller temperature";
        r.ratio_exceeded = r.ratio > ratio_threshold;
    } else {
        r.regime = Regime::MatterDominant;
        r.stability = "unstable equilibrium";
        r.ratio_exceeded = r.ratio < 1.0 / ratio_threshold;
    }
    return r;
}

struct ExchangeIntegration {
    TimeDirection direction = TimeDirection::Forward;
    double dt_max = 0.5;
    double rtol = 1e-10;
    double atol = 1e-14;
    /// Stop once ||rhs||_inf < equilibrium_tolerance * k * max(f).
    double equilibrium_tolerance = 1e-10;
    bool stop_at_equilibrium = true;
    std::size_t max_steps = 5'000'000;
};

namespace detail {

inline PopulationState with_fractions(const PopulationState& tmpl, std::span<const double> y) {
    PopulationState s = tmpl;
    s.f_a_star = y[0];
    s.f_a_circ = y[1];
    s.f_abar_star = y[2];
    s.f_abar_circ = y[3];
    return s;
}

inline Termination to_termination(ode::StopReason r) {
    switch (r) {
        case ode::StopReason::TimeLimit: return Termination::TimeLimit;
        case ode::StopReason::Boundary: return Termination::Boundary;
        case ode::StopReason::Equilibrium: return Termination::Equilibrium;
        case ode::StopReason::StepUnderflow: return Termination::StepUnderflow;
        case ode::StopReason::StepLimit: return Termination::StepLimit;
    }
    return Termination::None;
}

inline TrajectorySample exchange_sample(double t, const PopulationState& s) {
    TrajectorySample smp;
    smp.t = t;
    smp.populations = s;
    const auto e = exchange_entropy(s);
    smp.s_symmetric = e.s_symmetric;
    smp.s_antisymmetric = e.s_antisymmetric;
    return smp;
}

}  // namespace detail

/// Integrates the exchange kinetics from t = 0 to t_end (forward) or -t_end
/// (backward). Guarded runs stop at the first population that reaches zero.
inline Trajectory integrate_exchange(const PopulationState& initial, double k, double t_end,
                                     const KineticsMode& mode, const ExchangeIntegration& opt = {}) {
    require_valid(initial);
    if (!(k >= 0.0)) throw InvalidInput("integrate_exchange: k must be non-negative");
    if (!(t_end > 0.0)) throw InvalidInput("integrate_exchange: t_end must be positive");
    if (!(opt.dt_max > 0.0)) throw InvalidInput("integrate_exchange: dt_max must be positive");

    const Extension ext = mode.extension;
    const bool guarded = detail::needs_guards(ext, opt.direction);
    Trajectory traj;

    if (guarded && exchange_rhs(initial, k, mode, opt.direction).terminated) {
        auto smp = detail::exchange_sample(0.0, initial);
        smp.terminated = true;
        traj.samples.push_back(smp);
        traj.termination = Termination::Boundary;
        const auto f = initial.fractions();
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (f[i] <= 0.0) {
                traj.boundary_component = std::string(kFractionNames[i]);
                break;
            }
        }
        return traj;
    }

    // Inside the orthant the guards are all 1, so the smooth polynomial is
    // integrated and leaving the orthant is handled as an event.
    auto rhs = [&](double, std::span<const double> y, std::span<double> dy) {
        const double flux = detail::exchange_flux(y[0], y[1], y[2], y[3], k, ext, false);
        const auto r = detail::rates_from_flux(flux);
        dy[0] = r.d_f_a_star;
        dy[1] = r.d_f_a_circ;
        dy[2] = r.d_f_abar_star;
        dy[3] = r.d_f_abar_circ;
    };
    auto observe = [&](double t, std::span<const double> y) {
        traj.samples.push_back(detail::exchange_sample(t, detail::with_fractions(initial, y)));
    };
    auto stop = [&](double, std::span<const double> y, std::span<const double> dy) {
        if (!opt.stop_at_equilibrium) return false;
        double fmax = 0.0, rmax = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
            fmax = std::max(fmax, y[i]);
            rmax = std::max(rmax, std::abs(dy[i]));
        }
        return rmax < opt.equilibrium_tolerance * k * fmax;
    };

    ode::Options o;
    o.rtol = opt.rtol;
    o.atol = opt.atol;
    o.dt_max = opt.dt_max;
    o.max_steps = opt.max_steps;
    std::vector<double> y{initial.f_a_star, initial.f_a_circ, initial.f_abar_star, initial.f_abar_circ};
    const double t1 = opt.direction == TimeDirection::Forward ? t_end : -t_end;
    const std::vector<bool> guards(4, guarded);
    const auto out = ode::integrate(rhs, y, 0.0, t1, o, guards, observe, stop);

    traj.termination = detail::to_termination(out.reason);
    traj.steps_accepted = out.accepted;
    traj.steps_rejected = out.rejected;
    if (out.reason == ode::StopReason::Boundary)
        traj.boundary_component = std::string(kFractionNames[out.boundary_index]);
    if (out.reason == ode::StopReason::StepUnderflow) {
        auto& last = traj.samples.back().populations;
        for (double* f : {&last.f_a_star, &last.f_a_circ, &last.f_abar_star, &last.f_abar_circ})
            *f = std::max(*f, 0.0);
    }
    traj.samples.back().terminated = out.reason != ode::StopReason::TimeLimit;
    return traj;
}

}  // namespace cptkin
