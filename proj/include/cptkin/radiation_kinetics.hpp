#pragma once

// Photon absorption/emission by two-level atoms (matter) and antiatoms.
//
//   matter:      A° + nu -> A*        A* -> A° + nu
//   antimatter:  Abar° + nu -> Abar*  Abar* -> Abar° + nu
//
// Decoherence-neutral radiation is the physical variant. The decohering and
// recohering variants are kept as falsification controls for matter only.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cptkin/core_state.hpp"
#include "cptkin/entropy.hpp"
#include "cptkin/exchange_kinetics.hpp"
#include "cptkin/ode.hpp"
#include "cptkin/temperature.hpp"
#include "cptkin/trajectory.hpp"

namespace cptkin {

namespace detail {

inline void require_matter_for_control(RadiationVariant v, Species s, const char* where) {
    if (v != RadiationVariant::Neutral && s == Species::Antimatter)
        throw NotApplicable(std::string(where) + ": control radiation variants are defined for matter only");
}

inline void require_occupation(double q, const char* where) {
    if (!(q >= 0.0) || !std::isfinite(q))
        throw InvalidInput(std::string(where) + ": occupation must be finite and non-negative");
}

}  // namespace detail

struct RadiationEventCounts {
    double delta_q1 = 0.0;  // absorptions
    double delta_q2 = 0.0;  // emissions
};

/// Expected absorption and emission events over one reaction time. q_before
/// is q' (photons present before an absorption), q_after is q'' (photons
/// present after an emission); in the forward-time limit q'' = q' + 1.
inline RadiationEventCounts radiation_event_counts(double q_before, double q_after,
                                                   const PopulationState& before,
                                                   const PopulationState& after, double K,
                                                   RadiationVariant variant, Species species) {
    detail::require_occupation(q_before, "radiation_event_counts");
    detail::require_occupation(q_after, "radiation_event_counts");
    if (!(K >= 0.0)) throw InvalidInput("radiation_event_counts: K must be non-negative");
    require_valid(before);
    require_valid(after);
    detail::require_matter_for_control(variant, species, "radiation_event_counts");

    if (species == Species::Antimatter) {
        return {K * after.f_abar_star * q_before * heaviside(before.f_abar_circ),
                K * after.f_abar_circ * q_after * heaviside(before.f_abar_star)};
    }
    switch (variant) {
        case RadiationVariant::Neutral:
            return {K * before.f_a_circ * q_before * heaviside(after.f_a_star),
                    K * before.f_a_star * q_after * heaviside(after.f_a_circ)};
        case RadiationVariant::Decohering:
            return {K * before.f_a_circ * q_before * heaviside(after.f_a_star),
                    K * before.f_a_star * heaviside(after.f_a_circ) * heaviside(q_after)};
        case RadiationVariant::Recohering:
            return {K * before.f_a_circ * heaviside(after.f_a_star) * heaviside(q_before),
                    K * before.f_a_star * q_after * heaviside(after.f_a_circ)};
    }
    return {};
}

/// Single-state convenience form: f'' = f', q'' = q' + 1.
inline RadiationEventCounts radiation_event_counts(double q, const PopulationState& state, double K,
                                                   RadiationVariant variant, Species species) {
    return radiation_event_counts(q, q + 1.0, state, state, K, variant, species);
}

/// Forward-time rate dq/dt of one mode. f_star and f_circ belong to the
/// interacting species.
inline double radiation_rhs(double q, double f_star, double f_circ, double k,
                            RadiationVariant variant, Species species) {
    detail::require_occupation(q, "radiation_rhs");
    if (!(f_star >= 0.0) || !(f_circ >= 0.0))
        throw InvalidInput("radiation_rhs: fractions must be non-negative");
    if (!(k >= 0.0)) throw InvalidInput("radiation_rhs: k must be non-negative");
    detail::require_matter_for_control(variant, species, "radiation_rhs");
    if (species == Species::Antimatter)
        return k * ((q + 1.0) * f_circ * heaviside(f_star) - q * f_star * heaviside(f_circ));
    switch (variant) {
        case RadiationVariant::Neutral: return k * ((q + 1.0) * f_star - q * f_circ);
        case RadiationVariant::Decohering: return k * (f_star - q * f_circ);
        case RadiationVariant::Recohering: return k * ((q + 1.0) * f_star - f_circ * heaviside(q));
    }
    return 0.0;
}

struct RadiationEquilibrium {
    double q_e = 0.0;
    RadiationVariant variant = RadiationVariant::Neutral;
    Species species = Species::Matter;
    bool stable = false;
    /// Matches Bose-Einstein behaviour (only the neutral variant can).
    bool physical = false;
    /// Temperature was +0 or -0; q_e is the limiting value.
    bool zero_temperature_limit = false;
};

/// Fixed point of the mode equation from the populations alone. Returns
/// +inf when the linear coefficient vanishes, and a negative value when the
/// fixed point is unphysical.
inline double population_fixed_point(RadiationVariant variant, Species species, double f_star,
                                     double f_circ) {
    detail::require_matter_for_control(variant, species, "population_fixed_point");
    const double inf = std::numeric_limits<double>::infinity();
    if (species == Species::Antimatter)
        return f_star == f_circ ? inf : f_circ / (f_star - f_circ);
    switch (variant) {
        case RadiationVariant::Neutral: return f_circ == f_star ? inf : f_star / (f_circ - f_star);
        case RadiationVariant::Decohering: return f_circ == 0.0 ? inf : f_star / f_circ;
        case RadiationVariant::Recohering: return f_star == 0.0 ? inf : f_circ / f_star - 1.0;
    }
    return 0.0;
}

/// Equilibrium occupation from the Gibbs temperature. For matter `t` is T;
/// for antimatter it is the intrinsic temperature Tbar, and the photons see
/// the apparent temperature -Tbar.
inline RadiationEquilibrium radiation_equilibrium(RadiationVariant variant, Species species,
                                                  double delta_e, Temperature t) {
    if (!(delta_e > 0.0)) throw InvalidInput("radiation_equilibrium: quantum must be positive");
    detail::require_matter_for_control(variant, species, "radiation_equilibrium");
    const Temperature apparent = species == Species::Antimatter ? t.negated() : t;
    const double x = apparent.inverse() * delta_e;  // h nu / T
    RadiationEquilibrium r;
    r.variant = variant;
    r.species = species;
    r.zero_temperature_limit = std::isinf(x);
    switch (variant) {
        case RadiationVariant::Neutral:
            r.q_e = x == std::numeric_limits<double>::infinity() ? 0.0 : 1.0 / std::expm1(x);
            r.stable = x > 0.0;
            r.physical = r.stable;
            break;
        case RadiationVariant::Decohering:
            r.q_e = std::exp(-x);
            r.stable = true;
            r.physical = false;
            break;
        case RadiationVariant::Recohering:
            r.q_e = std::expm1(x);
            r.stable = false;
            r.physical = false;
            break;
    }
    return r;
}

/// Full check: the Gibbs route and the population route must give the same
/// occupation, otherwise the inputs are not a Gibbs pair.
inline RadiationEquilibrium radiation_equilibrium(RadiationVariant variant, Species species,
                                                  double f_star, double f_circ, double delta_e,
                                                  Temperature t, double rel_tol = 1e-9) {
    const auto r = radiation_equilibrium(variant, species, delta_e, t);
    if (f_star > 0.0 && f_circ > 0.0 && std::isfinite(r.q_e)) {
        const double q_pop = population_fixed_point(variant, species, f_star, f_circ);
        if (std::abs(q_pop - r.q_e) > rel_tol * std::max(1.0, std::abs(r.q_e)))
            throw InvalidInput("radiation_equilibrium: populations and temperature are not a Gibbs pair");
    }
    return r;
}

struct RadiationRhs {
    std::vector<double> dq;
    double d_f_star = 0.0;
    double d_f_circ = 0.0;
    bool terminated = false;

    double dq_total() const noexcept {
        double s = 0.0;
        for (double v : dq) s += v;
        return s;
    }
};

/// Mode rates plus the population response of the interacting species. The
/// population moves by one particle per photon, so in fraction units
/// df_star/dt = -dQ/dt / N and df_circ/dt = +dQ/dt / N.
inline RadiationRhs coupled_rhs(const RadiationState& q, const PopulationState& pop, double k,
                                RadiationVariant variant, Species species, bool reservoir = false) {
    require_valid(q);
    require_valid(pop);
    const double f_star = pop.star(species);
    const double f_circ = pop.circ(species);
    RadiationRhs r;
    r.dq.reserve(q.occupations.size());
    for (double qi : q.occupations) r.dq.push_back(radiation_rhs(qi, f_star, f_circ, k, variant, species));
    if (species == Species::Antimatter && (f_star <= 0.0 || f_circ <= 0.0)) {
        r.terminated = true;
        std::fill(r.dq.begin(), r.dq.end(), 0.0);
    }
    if (!reservoir) {
        const double dq_total = r.dq_total();
        r.d_f_star = -dq_total / pop.n_secondary;
        r.d_f_circ = dq_total / pop.n_secondary;
    }
    return r;
}

/// dS_a/dt (antimatter) or dS_s/dt (matter) from explicit rates: the photon
/// part sum_i ln((1+q)/q) dq_i combined with the atomic part.
inline double coupled_entropy_rate(const PopulationState& pop, std::span<const double> q,
                                   const RadiationRhs& rates, Species species) {
    double photon = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (rates.dq[i] == 0.0) continue;
        photon += q[i] > 0.0 ? std::log1p(1.0 / q[i]) * rates.dq[i]
                             : std::copysign(std::numeric_limits<double>::infinity(), rates.dq[i]);
    }
    auto atom_term = [](double f, double df) {
        if (df == 0.0) return 0.0;
        if (f <= 0.0) return std::copysign(std::numeric_limits<double>::infinity(), -df);
        return -(std::log(f) + 1.0) * df;
    };
    const double atoms = pop.n_secondary * (atom_term(pop.star(species), rates.d_f_star) +
                                            atom_term(pop.circ(species), rates.d_f_circ));
    return species == Species::Matter ? photon + atoms : photon - atoms;
}

struct CoupledIntegration {
    TimeDirection direction = TimeDirection::Forward;
    RadiationVariant variant = RadiationVariant::Neutral;
    /// Freeze the atomic populations (large reservoir).
    bool reservoir = false;
    double dt_max = 0.5;
    double rtol = 1e-10;
    double atol = 1e-14;
    /// Stop once max|dy/dt| < equilibrium_tolerance * k * max(1, max q).
    double equilibrium_tolerance = 1e-13;
    bool stop_at_equilibrium = true;
    std::size_t max_steps = 5'000'000;
};

namespace detail {

inline PopulationState with_pair(const PopulationState& tmpl, Species sp, double f_star, double f_circ) {
    PopulationState s = tmpl;
    if (sp == Species::Matter) {
        s.f_a_star = f_star;
        s.f_a_circ = f_circ;
    } else {
        s.f_abar_star = f_star;
        s.f_abar_circ = f_circ;
    }
    return s;
}

inline TrajectorySample radiation_sample(double t, const PopulationState& pop,
                                         std::span<const double> q, Species sp) {
    TrajectorySample smp;
    smp.t = t;
    smp.populations = pop;
    smp.occupations.assign(q.begin(), q.end());
    const auto e = radiation_entropy(pop, q, sp);
    smp.s_symmetric = e.s_symmetric;
    smp.s_antisymmetric = e.s_antisymmetric;
    return smp;
}

inline std::string star_name(Species sp) { return sp == Species::Matter ? "f_a_star" : "f_abar_star"; }
inline std::string circ_name(Species sp) { return sp == Species::Matter ? "f_a_circ" : "f_abar_circ"; }

}  // namespace detail

/// Evolves every mode together with the interacting species' populations.
/// Energy bookkeeping keeps F(star) + Q constant.
inline Trajectory integrate_coupled(const RadiationState& initial_q, const PopulationState& initial_pop,
                                    double k, Species species, double t_end,
                                    const CoupledIntegration& opt = {}) {
    require_valid(initial_q);
    require_valid(initial_pop);
    if (!(k >= 0.0)) throw InvalidInput("integrate_coupled: k must be non-negative");
    if (!(t_end > 0.0)) throw InvalidInput("integrate_coupled: t_end must be positive");
    if (!(opt.dt_max > 0.0)) throw InvalidInput("integrate_coupled: dt_max must be positive");
    if (initial_q.occupations.empty()) throw InvalidInput("integrate_coupled: at least one mode required");
    detail::require_matter_for_control(opt.variant, species, "integrate_coupled");

    const std::size_t nq = initial_q.occupations.size();
    const double n_sec = initial_pop.n_secondary;
    Trajectory traj;

    const double f_star0 = initial_pop.star(species);
    const double f_circ0 = initial_pop.circ(species);
    if (species == Species::Antimatter && (f_star0 <= 0.0 || f_circ0 <= 0.0)) {
        auto smp = detail::radiation_sample(0.0, initial_pop, initial_q.occupations, species);
        smp.terminated = true;
        traj.samples.push_back(smp);
        traj.termination = f_star0 <= 0.0 ? Termination::ExcitedPopulationExhausted : Termination::Boundary;
        traj.boundary_component = f_star0 <= 0.0 ? detail::star_name(species) : detail::circ_name(species);
        return traj;
    }

    // Interior form: every Heaviside factor is 1 while all components are
    // positive; reaching zero is handled as a boundary event.
    const RadiationVariant variant = opt.variant;
    auto mode_rate = [&](double q, double fs, double fc) {
        if (species == Species::Antimatter) return k * ((q + 1.0) * fc - q * fs);
        switch (variant) {
            case RadiationVariant::Neutral: return k * ((q + 1.0) * fs - q * fc);
            case RadiationVariant::Decohering: return k * (fs - q * fc);
            case RadiationVariant::Recohering: return k * ((q + 1.0) * fs - fc);
        }
        return 0.0;
    };
    auto rhs = [&](double, std::span<const double> y, std::span<double> dy) {
        const double fs = y[nq];
        const double fc = y[nq + 1];
        double total = 0.0;
        for (std::size_t i = 0; i < nq; ++i) {
            dy[i] = mode_rate(y[i], fs, fc);
            total += dy[i];
        }
        dy[nq] = opt.reservoir ? 0.0 : -total / n_sec;
        dy[nq + 1] = opt.reservoir ? 0.0 : total / n_sec;
    };
    auto observe = [&](double t, std::span<const double> y) {
        const auto pop = detail::with_pair(initial_pop, species, y[nq], y[nq + 1]);
        traj.samples.push_back(detail::radiation_sample(t, pop, y.first(nq), species));
    };
    auto stop = [&](double, std::span<const double> y, std::span<const double> dy) {
        if (!opt.stop_at_equilibrium) return false;
        double qmax = 1.0, rmax = 0.0;
        for (std::size_t i = 0; i < nq; ++i) qmax = std::max(qmax, y[i]);
        for (double d : dy) rmax = std::max(rmax, std::abs(d));
        return rmax < opt.equilibrium_tolerance * k * qmax;
    };

    // Neutral matter never drives q negative; the guard on q matters for the
    // recohering control, where H(q) switches absorption off at q = 0.
    std::vector<bool> guards(nq + 2, true);
    std::vector<double> y(initial_q.occupations);
    y.push_back(f_star0);
    y.push_back(f_circ0);

    ode::Options o;
    o.rtol = opt.rtol;
    o.atol = opt.atol;
    o.dt_max = opt.dt_max;
    o.max_steps = opt.max_steps;
    const double t1 = opt.direction == TimeDirection::Forward ? t_end : -t_end;
    const auto out = ode::integrate(rhs, y, 0.0, t1, o, guards, observe, stop);

    traj.termination = detail::to_termination(out.reason);
    traj.steps_accepted = out.accepted;
    traj.steps_rejected = out.rejected;
    if (out.reason == ode::StopReason::Boundary) {
        if (out.boundary_index == nq) {
            traj.termination = Termination::ExcitedPopulationExhausted;
            traj.boundary_component = detail::star_name(species);
        } else if (out.boundary_index == nq + 1) {
            traj.boundary_component = detail::circ_name(species);
        } else {
            traj.boundary_component = "q[" + std::to_string(out.boundary_index) + "]";
        }
    }
    traj.samples.back().terminated = out.reason != ode::StopReason::TimeLimit;
    return traj;
}

class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct InstabilityOptions {
    /// The fit window ends once any population fraction has moved by more
    /// than this relative amount from its initial value.
    double saturation_fraction = 0.05;
    /// Minimum growth factor of the dominant mode across the fitted part of
    /// the window to call it unstable.
    double min_growth = 2.0;
};

struct InstabilityReport {
    bool unstable = false;
    double exponent = 0.0;
    std::size_t dominant_mode = 0;
    std::vector<double> mode_exponents;
    std::size_t window_samples = 0;
    double window_end = 0.0;
    Termination termination = Termination::None;
};

namespace detail {

inline double ls_slope(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace detail

/// Log-linear growth fit per mode over the pre-saturation window. Only the
/// later half (in time) of the window is fitted: with a source term the
/// early part of ln q is curved by the additive offset of the solution.
inline InstabilityReport detect_instability(const Trajectory& traj, const InstabilityOptions& opt = {}) {
    if (traj.samples.size() < 3) throw InsufficientData("detect_instability: need at least 3 samples");
    const auto& first = traj.samples.front();
    const std::size_t nq = first.occupations.size();
    if (nq == 0) throw InsufficientData("detect_instability: trajectory carries no photon modes");

    const auto f0 = first.populations.fractions();
    std::size_t end = traj.samples.size();
    for (std::size_t s = 1; s < traj.samples.size(); ++s) {
        const auto f = traj.samples[s].populations.fractions();
        bool moved = false;
        for (std::size_t j = 0; j < 4; ++j)
            if (std::abs(f[j] - f0[j]) > opt.saturation_fraction * f0[j] && f0[j] > 0.0) moved = true;
        if (moved) {
            end = s;
            break;
        }
    }
    if (end < 3) throw InsufficientData("detect_instability: pre-saturation window has fewer than 3 samples");

    InstabilityReport rep;
    rep.termination = traj.termination;
    rep.window_samples = end;
    rep.window_end = traj.samples[end - 1].t;
    const double t_half = 0.5 * (first.t + rep.window_end);
    std::size_t begin = 0;
    while (begin < end && std::abs(traj.samples[begin].t - first.t) < std::abs(t_half - first.t)) ++begin;
    begin = std::min(begin, end - 2);
    rep.mode_exponents.assign(nq, 0.0);
    for (std::size_t i = 0; i < nq; ++i) {
        std::vector<double> t, lq;
        for (std::size_t s = begin; s < end; ++s) {
            const double q = traj.samples[s].occupations[i];
            if (q > 0.0) {
                t.push_back(traj.samples[s].t);
                lq.push_back(std::log(q));
            }
        }
        if (t.size() >= 2) rep.mode_exponents[i] = detail::ls_slope(t, lq);
    }
    const auto& last = traj.samples[end - 1].occupations;
    rep.dominant_mode = static_cast<std::size_t>(std::max_element(last.begin(), last.end()) - last.begin());
    rep.exponent = rep.mode_exponents[rep.dominant_mode];
    const double span = std::abs(rep.window_end - traj.samples[begin].t);
    const bool grew = rep.exponent * span > std::log(opt.min_growth);
    rep.unstable = rep.exponent > 0.0 && grew;
    return rep;
}

}  // namespace cptkin
