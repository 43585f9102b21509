#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "cptkin/core_state.hpp"

namespace cptkin {

/// Temperature stored as its inverse so that the limits T = +0, T = -0 and
/// |T| = infinity are all representable without special cases.
class Temperature {
public:
    static Temperature from_inverse(double beta) { return Temperature(beta); }
    static Temperature from_value(double t) { return Temperature(1.0 / t); }
    static Temperature infinite() { return Temperature(0.0); }

    double inverse() const noexcept { return beta_; }
    /// +0.0 for the ground-state limit, -0.0 for the roof-state limit,
    /// +inf when 1/T = 0.
    double value() const noexcept { return 1.0 / beta_; }

    bool is_plus_zero() const noexcept { return beta_ == std::numeric_limits<double>::infinity(); }
    bool is_minus_zero() const noexcept { return beta_ == -std::numeric_limits<double>::infinity(); }
    bool is_infinite() const noexcept { return beta_ == 0.0; }
    bool is_finite_nonzero() const noexcept { return std::isfinite(beta_) && beta_ != 0.0; }
    bool is_negative() const noexcept { return beta_ < 0.0; }

    Temperature negated() const noexcept { return Temperature(beta_ == 0.0 ? 0.0 : -beta_); }

    std::string describe() const {
        if (is_plus_zero()) return "+0";
        if (is_minus_zero()) return "-0";
        if (is_infinite()) return "inf";
        return std::to_string(value());
    }

private:
    explicit Temperature(double beta) : beta_(beta) {}
    double beta_;
};

/// Inverts the Gibbs ratio f_star/f_circ = exp(-delta_e/T).
inline Temperature gibbs_temperature(double f_star, double f_circ, double delta_e) {
    if (!(f_star >= 0.0) || !(f_circ >= 0.0))
        throw InvalidInput("gibbs_temperature: fractions must be non-negative");
    if (!(delta_e > 0.0)) throw InvalidInput("gibbs_temperature: delta_e must be positive");
    if (f_star == 0.0 && f_circ == 0.0)
        throw InvalidInput("gibbs_temperature: empty component has no temperature");
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (f_star == 0.0) return Temperature::from_inverse(inf);
    if (f_circ == 0.0) return Temperature::from_inverse(-inf);
    return Temperature::from_inverse(std::log(f_circ / f_star) / delta_e);
}

}  // namespace cptkin
