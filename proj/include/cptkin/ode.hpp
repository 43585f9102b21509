#pragma once

// Adaptive Dormand-Prince 5(4) integrator with non-negativity boundaries.
//
// Components flagged as guarded must stay >= 0. When an accepted trial step
// would push one of them below zero, the step length is bisected until the
// crossing is bracketed to within dt_min, the state at the lower bracket is
// taken, the crossing component is clamped to exactly 0 and integration
// stops with StopReason::Boundary.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace cptkin::ode {

struct Options {
    double rtol = 1e-10;
    double atol = 1e-14;
    double dt_max = 1.0;
    double dt_initial = 0.0;  // 0 selects a starting step automatically
    double dt_min = 1e-13;
    std::size_t max_steps = 20'000'000;
};

enum class StopReason { TimeLimit, Boundary, Equilibrium, StepUnderflow, StepLimit };

struct Outcome {
    StopReason reason = StopReason::TimeLimit;
    double t = 0.0;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t boundary_index = 0;
};

namespace detail {

struct Tableau {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

}  // namespace detail

/// Single-step engine. Rhs: void(double t, std::span<const double> y, std::span<double> dydt).
template <typename Rhs>
class DormandPrince {
public:
    DormandPrince(Rhs& rhs, std::size_t n, const Options& opt)
        : rhs_(rhs), opt_(opt), n_(n), tmp_(n), err_(n) {
        for (auto& k : k_) k.resize(n);
    }

    /// Takes one step of length h from (t, y) whose derivative is f0.
    /// Writes the result to y_out and its derivative to f_out; returns the
    /// scaled error norm (<= 1 means acceptable).
    double attempt(double t, std::span<const double> y, std::span<const double> f0, double h,
                   std::span<double> y_out, std::span<double> f_out) {
        using T = detail::Tableau;
        auto& k2 = k_[0];
        auto& k3 = k_[1];
        auto& k4 = k_[2];
        auto& k5 = k_[3];
        auto& k6 = k_[4];
        for (std::size_t i = 0; i < n_; ++i) tmp_[i] = y[i] + h * T::a21 * f0[i];
        rhs_(t + T::c2 * h, tmp_, k2);
        for (std::size_t i = 0; i < n_; ++i) tmp_[i] = y[i] + h * (T::a31 * f0[i] + T::a32 * k2[i]);
        rhs_(t + T::c3 * h, tmp_, k3);
        for (std::size_t i = 0; i < n_; ++i)
            tmp_[i] = y[i] + h * (T::a41 * f0[i] + T::a42 * k2[i] + T::a43 * k3[i]);
        rhs_(t + T::c4 * h, tmp_, k4);
        for (std::size_t i = 0; i < n_; ++i)
            tmp_[i] = y[i] + h * (T::a51 * f0[i] + T::a52 * k2[i] + T::a53 * k3[i] + T::a54 * k4[i]);
        rhs_(t + T::c5 * h, tmp_, k5);
        for (std::size_t i = 0; i < n_; ++i)
            tmp_[i] = y[i] + h * (T::a61 * f0[i] + T::a62 * k2[i] + T::a63 * k3[i] +
                                  T::a64 * k4[i] + T::a65 * k5[i]);
        rhs_(t + h, tmp_, k6);
        for (std::size_t i = 0; i < n_; ++i)
            y_out[i] = y[i] + h * (T::b1 * f0[i] + T::b3 * k3[i] + T::b4 * k4[i] + T::b5 * k5[i] +
                                   T::b6 * k6[i]);
        rhs_(t + h, y_out, f_out);
        double norm = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double e = h * (T::e1 * f0[i] + T::e3 * k3[i] + T::e4 * k4[i] + T::e5 * k5[i] +
                                  T::e6 * k6[i] + T::e7 * f_out[i]);
            const double scale =
                opt_.atol + opt_.rtol * std::max(std::abs(y[i]), std::abs(y_out[i]));
            norm = std::max(norm, std::abs(e) / scale);
        }
        if (!std::isfinite(norm)) norm = std::numeric_limits<double>::infinity();
        return norm;
    }

private:
    Rhs& rhs_;
    const Options& opt_;
    std::size_t n_;
    std::vector<double> tmp_;
    std::vector<double> err_;
    std::array<std::vector<double>, 5> k_;
};

namespace detail {

inline double initial_step(std::span<const double> y, std::span<const double> f, const Options& opt,
                           double span) {
    if (opt.dt_initial > 0.0) return std::min(opt.dt_initial, span);
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double sc = opt.atol + opt.rtol * std::abs(y[i]);
        d0 = std::max(d0, std::abs(y[i]) / sc);
        d1 = std::max(d1, std::abs(f[i]) / sc);
    }
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min({h, opt.dt_max, span});
    return std::max(h, std::min(opt.dt_min * 10.0, span));
}

inline std::ptrdiff_t most_negative_guarded(std::span<const double> y, const std::vector<bool>& guarded) {
    std::ptrdiff_t idx = -1;
    double lowest = 0.0;
    for (std::size_t i = 0; i < y.size() && i < guarded.size(); ++i) {
        if (guarded[i] && y[i] < lowest) {
            lowest = y[i];
            idx = static_cast<std::ptrdiff_t>(i);
        }
    }
    return idx;
}

}  // namespace detail

/// Integrates y from t0 towards t1 (t1 < t0 integrates backward in time).
///
/// observe(t, y) is called for the initial point and after every accepted
/// step; stop(t, y, dydt) is checked at the same points and ends the run with
/// StopReason::Equilibrium when it returns true.
template <typename Rhs, typename Observer, typename StopFn>
Outcome integrate(Rhs&& rhs, std::vector<double>& y, double t0, double t1, const Options& opt,
                  const std::vector<bool>& guarded, Observer&& observe, StopFn&& stop) {
    const std::size_t n = y.size();
    Outcome out;
    out.t = t0;
    const double dir = t1 >= t0 ? 1.0 : -1.0;
    std::vector<double> f(n), y_new(n), f_new(n), y_lo(n), f_lo(n);
    rhs(t0, std::span<const double>(y), std::span<double>(f));
    observe(t0, std::span<const double>(y));
    if (stop(t0, std::span<const double>(y), std::span<const double>(f))) {
        out.reason = StopReason::Equilibrium;
        return out;
    }

    DormandPrince<std::remove_reference_t<Rhs>> stepper(rhs, n, opt);
    double t = t0;
    double h = detail::initial_step(y, f, opt, std::abs(t1 - t0));

    while (dir * (t1 - t) > 0.0) {
        if (out.accepted >= opt.max_steps) {
            out.reason = StopReason::StepLimit;
            out.t = t;
            return out;
        }
        const double remaining = std::abs(t1 - t);
        h = std::min({h, remaining, opt.dt_max});
        if (h < opt.dt_min && h < remaining) {
            out.reason = StopReason::StepUnderflow;
            out.t = t;
            return out;
        }
        const double err = stepper.attempt(t, y, f, dir * h, y_new, f_new);
        if (err > 1.0) {
            ++out.rejected;
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            continue;
        }

        const std::ptrdiff_t crossing = detail::most_negative_guarded(y_new, guarded);
        if (crossing >= 0) {
            // Bracket the first crossing of zero by bisection on the step length.
            double lo = 0.0;
            double hi = h;
            std::size_t hit = static_cast<std::size_t>(crossing);
            std::copy(y.begin(), y.end(), y_lo.begin());
            std::copy(f.begin(), f.end(), f_lo.begin());
            const double floor = std::max(opt.dt_min, 4.0 * std::numeric_limits<double>::epsilon() *
                                                          std::max(1.0, std::abs(t)));
            for (int iter = 0; iter < 200 && hi - lo > floor; ++iter) {
                const double mid = 0.5 * (lo + hi);
                stepper.attempt(t, y, f, dir * mid, y_new, f_new);
                const std::ptrdiff_t c = detail::most_negative_guarded(y_new, guarded);
                if (c < 0) {
                    lo = mid;
                    y_lo = y_new;
                    f_lo = f_new;
                } else {
                    hi = mid;
                    hit = static_cast<std::size_t>(c);
                }
            }
            t += dir * lo;
            y = y_lo;
            y[hit] = 0.0;
            ++out.accepted;
            observe(t, std::span<const double>(y));
            out.reason = StopReason::Boundary;
            out.boundary_index = hit;
            out.t = t;
            return out;
        }

        t += dir * h;
        if (dir * (t - t1) > 0.0 || std::abs(t1 - t) < 1e-15 * std::max(1.0, std::abs(t1))) t = t1;
        std::swap(y, y_new);
        std::swap(f, f_new);
        ++out.accepted;
        observe(t, std::span<const double>(y));
        if (stop(t, std::span<const double>(y), std::span<const double>(f))) {
            out.reason = StopReason::Equilibrium;
            out.t = t;
            return out;
        }
        const double grow = err == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
        h *= grow;
    }
    out.reason = StopReason::TimeLimit;
    out.t = t;
    return out;
}

}  // namespace cptkin::ode
