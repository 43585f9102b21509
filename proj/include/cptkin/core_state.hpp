#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cptkin {

class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NotApplicable : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Heaviside step with H(0) = 0.
constexpr double heaviside(double x) noexcept { return x > 0.0 ? 1.0 : 0.0; }

enum class Extension { Symmetric, Antisymmetric };
enum class RadiationVariant { Neutral, Decohering, Recohering };
enum class Species { Matter, Antimatter };
enum class TimeDirection { Forward, Backward };

/// Which thermodynamic extension is active and how radiation decoheres.
/// Decohering/Recohering radiation exist only as falsification controls.
struct KineticsMode {
    Extension extension = Extension::Symmetric;
    RadiationVariant radiation_variant = RadiationVariant::Neutral;
};

/// Per-secondary-state occupation fractions f = F/N of the four two-level
/// populations: excited (star) and ground (circ) atoms A and antiatoms Abar.
struct PopulationState {
    double f_a_star = 0.0;
    double f_a_circ = 0.0;
    double f_abar_star = 0.0;
    double f_abar_circ = 0.0;
    double n_secondary = 1.0e6;
    double delta_e = 1.0;

    double f_a() const noexcept { return f_a_star + f_a_circ; }
    double f_abar() const noexcept { return f_abar_star + f_abar_circ; }

    std::array<double, 4> fractions() const noexcept {
        return {f_a_star, f_a_circ, f_abar_star, f_abar_circ};
    }

    double max_fraction() const noexcept {
        double m = f_a_star;
        for (double f : {f_a_circ, f_abar_star, f_abar_circ}) m = std::max(m, f);
        return m;
    }

    /// Matter and antimatter labels exchanged (the CP image).
    PopulationState species_swapped() const noexcept {
        PopulationState s = *this;
        s.f_a_star = f_abar_star;
        s.f_a_circ = f_abar_circ;
        s.f_abar_star = f_a_star;
        s.f_abar_circ = f_a_circ;
        return s;
    }

    double star(Species sp) const noexcept { return sp == Species::Matter ? f_a_star : f_abar_star; }
    double circ(Species sp) const noexcept { return sp == Species::Matter ? f_a_circ : f_abar_circ; }

    friend bool operator==(const PopulationState&, const PopulationState&) = default;
};

inline constexpr std::array<std::string_view, 4> kFractionNames = {
    "f_a_star", "f_a_circ", "f_abar_star", "f_abar_circ"};

/// Totals fixed by the exchange kinetics: amounts of matter and antimatter
/// and the ground/excited energy totals.
struct ConservedQuantities {
    double f_a_total = 0.0;
    double f_abar_total = 0.0;
    double f_circ_total = 0.0;
    double f_star_total = 0.0;

    /// Both sums count every particle once.
    double particle_imbalance() const noexcept {
        return (f_a_total + f_abar_total) - (f_circ_total + f_star_total);
    }
};

/// Photon occupations q(i) of N_q modes sharing the quantum h*nu.
struct RadiationState {
    std::vector<double> occupations;
    double quantum = 1.0;

    std::size_t mode_count() const noexcept { return occupations.size(); }

    double total() const noexcept {
        double s = 0.0;
        for (double q : occupations) s += q;
        return s;
    }
};

struct ValidityIssue {
    std::string field;
    std::string message;
};

struct ValidityReport {
    std::vector<ValidityIssue> violations;
    std::vector<ValidityIssue> warnings;

    bool valid() const noexcept { return violations.empty(); }
};

/// Soft limit for the dilute (f << 1) assumption.
inline constexpr double kDiluteWarningThreshold = 0.1;

inline ValidityReport validate(const PopulationState& state) {
    ValidityReport report;
    const auto values = state.fractions();
    bool warned_dilute = false;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::string name(kFractionNames[i]);
        const double f = values[i];
        if (!std::isfinite(f)) {
            report.violations.push_back({name, "non-finite fraction " + name});
        } else if (f < 0.0) {
            report.violations.push_back({name, "negative fraction " + name});
        } else if (f > 1.0) {
            report.violations.push_back({name, "fraction " + name + " exceeds 1"});
        } else if (f > kDiluteWarningThreshold && !warned_dilute) {
            report.warnings.push_back({name, "fraction exceeds dilute-limit threshold 0.1"});
            warned_dilute = true;
        }
    }
    if (!(state.n_secondary > 0.0) || !std::isfinite(state.n_secondary))
        report.violations.push_back({"n_secondary", "n_secondary must be positive and finite"});
    if (!(state.delta_e > 0.0) || !std::isfinite(state.delta_e))
        report.violations.push_back({"delta_e", "delta_e must be positive and finite"});
    return report;
}

inline ValidityReport validate(const RadiationState& state) {
    ValidityReport report;
    for (std::size_t i = 0; i < state.occupations.size(); ++i) {
        const double q = state.occupations[i];
        const std::string name = "q[" + std::to_string(i) + "]";
        if (!std::isfinite(q)) report.violations.push_back({name, "non-finite occupation " + name});
        else if (q < 0.0) report.violations.push_back({name, "negative occupation " + name});
    }
    if (!(state.quantum > 0.0) || !std::isfinite(state.quantum))
        report.violations.push_back({"quantum", "photon quantum must be positive and finite"});
    return report;
}

namespace detail {
inline std::string first_violation(const ValidityReport& r) {
    return r.violations.empty() ? std::string{} : r.violations.front().message;
}
}  // namespace detail

inline void require_valid(const PopulationState& state) {
    const auto r = validate(state);
    if (!r.valid()) throw InvalidInput("invalid population state: " + detail::first_violation(r));
}

inline void require_valid(const RadiationState& state) {
    const auto r = validate(state);
    if (!r.valid()) throw InvalidInput("invalid radiation state: " + detail::first_violation(r));
}

inline ConservedQuantities conserved_quantities(const PopulationState& state) {
    require_valid(state);
    return ConservedQuantities{
        state.f_a_star + state.f_a_circ,
        state.f_abar_star + state.f_abar_circ,
        state.f_a_circ + state.f_abar_circ,
        state.f_a_star + state.f_abar_star,
    };
}

inline std::string_view to_string(Extension e) {
    return e == Extension::Symmetric ? "symmetric" : "antisymmetric";
}

inline std::string_view to_string(RadiationVariant v) {
    switch (v) {
        case RadiationVariant::Neutral: return "neutral";
        case RadiationVariant::Decohering: return "decohering";
        case RadiationVariant::Recohering: return "recohering";
    }
    return "?";
}

inline std::string_view to_string(Species s) { return s == Species::Matter ? "matter" : "antimatter"; }

inline std::string_view to_string(TimeDirection d) {
    return d == TimeDirection::Forward ? "forward" : "backward";
}

}  // namespace cptkin
