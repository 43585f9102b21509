#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cptkin/core_state.hpp"

namespace cptkin {

enum class Termination {
    None,            // still running (only seen on intermediate samples)
    TimeLimit,       // reached t_end or the requested number of steps
    Equilibrium,     // right-hand side fell below the equilibrium tolerance
    Boundary,        // a population reached zero
    ExcitedPopulationExhausted,
    StepUnderflow,
    StepLimit,
};

inline std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::None: return "none";
        case Termination::TimeLimit: return "time limit";
        case Termination::Equilibrium: return "equilibrium";
        case Termination::Boundary: return "boundary";
        case Termination::ExcitedPopulationExhausted: return "excited population exhausted";
        case Termination::StepUnderflow: return "step-size underflow";
        case Termination::StepLimit: return "step limit";
    }
    return "?";
}

struct TrajectorySample {
    double t = 0.0;
    PopulationState populations;
    std::vector<double> occupations;
    double s_symmetric = 0.0;
    double s_antisymmetric = 0.0;
    bool terminated = false;

    double q_total() const noexcept {
        double s = 0.0;
        for (double q : occupations) s += q;
        return s;
    }
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    Termination termination = Termination::None;
    /// Name of the component that hit zero when termination is a boundary.
    std::string boundary_component;
    std::size_t steps_accepted = 0;
    std::size_t steps_rejected = 0;

    bool empty() const noexcept { return samples.empty(); }
    const TrajectorySample& back() const { return samples.back(); }
    const TrajectorySample& front() const { return samples.front(); }
    bool terminated_at_boundary() const noexcept {
        return termination == Termination::Boundary ||
               termination == Termination::ExcitedPopulationExhausted;
    }
};

}  // namespace cptkin
