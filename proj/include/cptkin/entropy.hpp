#pragma once

#include <cmath>
#include <limits>
#include <span>

#include "cptkin/core_state.hpp"
#include "cptkin/trajectory.hpp"

namespace cptkin {

/// x ln x continued to 0 at x = 0.
inline double xlogx(double x) noexcept { return x > 0.0 ? x * std::log(x) : 0.0; }

/// S_X = -F(X circ) ln f(X circ) - F(X star) ln f(X star), with F = f N.
inline double component_entropy(double f_circ, double f_star, double n_secondary) {
    if (f_circ < 0.0 || f_star < 0.0) throw InvalidInput("component_entropy: negative fraction");
    return -n_secondary * (xlogx(f_circ) + xlogx(f_star));
}

/// Entropy of one photon mode with occupation q (maximised by Bose-Einstein).
inline double photon_entropy(double q) {
    if (q < 0.0) throw InvalidInput("photon_entropy: negative occupation");
    return xlogx(1.0 + q) - xlogx(q);
}

inline double photon_entropy(std::span<const double> q) {
    double s = 0.0;
    for (double qi : q) s += photon_entropy(qi);
    return s;
}

struct EntropyReport {
    double s_matter = 0.0;
    double s_antimatter = 0.0;
    double s_photon = 0.0;
    double s_symmetric = 0.0;
    double s_antisymmetric = 0.0;
    double ds_a_dt = 0.0;
};

/// S_s = S_A + S_Abar and S_a = S_A - S_Abar.
inline EntropyReport exchange_entropy(const PopulationState& s) {
    EntropyReport r;
    r.s_matter = component_entropy(s.f_a_circ, s.f_a_star, s.n_secondary);
    r.s_antimatter = component_entropy(s.f_abar_circ, s.f_abar_star, s.n_secondary);
    r.s_symmetric = r.s_matter + r.s_antimatter;
    r.s_antisymmetric = r.s_matter - r.s_antimatter;
    return r;
}

/// Photons paired with one species: S_s = S_nu + S_X and S_a = S_nu - S_X.
inline EntropyReport radiation_entropy(const PopulationState& s, std::span<const double> q,
                                       Species species) {
    EntropyReport r;
    r.s_matter = component_entropy(s.f_a_circ, s.f_a_star, s.n_secondary);
    r.s_antimatter = component_entropy(s.f_abar_circ, s.f_abar_star, s.n_secondary);
    r.s_photon = photon_entropy(q);
    const double s_x = species == Species::Matter ? r.s_matter : r.s_antimatter;
    r.s_symmetric = r.s_photon + s_x;
    r.s_antisymmetric = r.s_photon - s_x;
    return r;
}

namespace detail {

// (x - y) ln(x / y) >= 0 with the boundary conventions: both zero -> 0,
// one side zero -> +inf (the log term diverges towards the positive side).
inline double relative_flux(double x, double y) {
    if (x == y) return 0.0;
    if (x <= 0.0 || y <= 0.0) {
        if (x <= 0.0 && y <= 0.0) return 0.0;
        return std::numeric_limits<double>::infinity();
    }
    return (x - y) * std::log(x / y);
}

}  // namespace detail

/// Closed-form entropy production of the exchange kinetics: dS_s/dt in the
/// symmetric extension, dS_a/dt in the antisymmetric one. Units follow
/// component_entropy (scaled by n_secondary).
///
/// At a physical boundary the antisymmetric evolution is terminated and the
/// production is 0. The symmetric kinetics is never terminated; there the
/// limit with one empty population is +inf.
inline double entropy_production(const PopulationState& s, double k, Extension ext) {
    if (k < 0.0) throw InvalidInput("entropy_production: negative rate constant");
    double forward = 0.0;
    double reverse = 0.0;
    if (ext == Extension::Symmetric) {
        forward = s.f_a_star * s.f_abar_circ;
        reverse = s.f_a_circ * s.f_abar_star;
    } else {
        const bool at_boundary = s.f_a_star <= 0.0 || s.f_a_circ <= 0.0 ||
                                 s.f_abar_star <= 0.0 || s.f_abar_circ <= 0.0;
        if (at_boundary) return 0.0;
        forward = s.f_a_star * s.f_abar_star;
        reverse = s.f_a_circ * s.f_abar_circ;
    }
    if (forward == reverse) return 0.0;
    return s.n_secondary * k * detail::relative_flux(forward, reverse);
}

/// dS_a/dt for radiation coupled to antimatter, summed over modes. Returns 0
/// once either antimatter population is exhausted.
inline double entropy_production(const PopulationState& s, std::span<const double> q, double k) {
    if (k < 0.0) throw InvalidInput("entropy_production: negative rate constant");
    const double f_star = s.f_abar_star;
    const double f_circ = s.f_abar_circ;
    if (f_star <= 0.0 || f_circ <= 0.0) return 0.0;
    double total = 0.0;
    for (double qi : q) {
        if (qi < 0.0) throw InvalidInput("entropy_production: negative occupation");
        total += k * detail::relative_flux((qi + 1.0) * f_circ, qi * f_star);
    }
    return total;
}

enum class EntropyFunctional { Symmetric, Antisymmetric };

struct HTheoremVerdict {
    bool pass = true;
    /// Largest decrease of the entropy in forward time (0 if none).
    double max_violation = 0.0;
    std::size_t worst_index = 0;
    double tolerance = 0.0;
};

/// Checks that S_s or S_a never decreases in forward time along a
/// trajectory. Samples may run backward in time; pairs are compared in the
/// order of increasing t. Decreases up to rel_tol * max(1, max|S|) pass.
inline HTheoremVerdict check_h_theorem(const Trajectory& traj, EntropyFunctional which,
                                       double rel_tol = 1e-9) {
    auto value = [&](const TrajectorySample& s) {
        return which == EntropyFunctional::Symmetric ? s.s_symmetric : s.s_antisymmetric;
    };
    HTheoremVerdict v;
    double scale = 1.0;
    for (const auto& s : traj.samples) scale = std::max(scale, std::abs(value(s)));
    v.tolerance = rel_tol * scale;
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        const auto& a = traj.samples[i - 1];
        const auto& b = traj.samples[i];
        if (b.t == a.t) continue;
        const double forward_change = b.t > a.t ? value(b) - value(a) : value(a) - value(b);
        if (-forward_change > v.max_violation) {
            v.max_violation = -forward_change;
            v.worst_index = i;
        }
    }
    v.pass = v.max_violation <= v.tolerance;
    return v;
}

}  // namespace cptkin
