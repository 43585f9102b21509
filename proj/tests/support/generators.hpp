#pragma once

// Hand-rolled generators for property tests. Every generator is seeded so
// a failing case can be replayed from the seed printed by the test.

#include <cstdint>
#include <random>

#include "cptkin/core_state.hpp"

namespace cptkin::testing {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin() { return integer(0, 1) == 1; }

    PopulationState population(double lo = 0.01, double hi = 0.3) {
        PopulationState s;
        s.f_a_star = uniform(lo, hi);
        s.f_a_circ = uniform(lo, hi);
        s.f_abar_star = uniform(lo, hi);
        s.f_abar_circ = uniform(lo, hi);
        s.n_secondary = 1e6;
        return s;
    }

    /// Population with each fraction independently zeroed with probability p.
    PopulationState population_with_zeros(double p) {
        PopulationState s = population();
        for (double* f : {&s.f_a_star, &s.f_a_circ, &s.f_abar_star, &s.f_abar_circ})
            if (uniform(0.0, 1.0) < p) *f = 0.0;
        return s;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

}  // namespace cptkin::testing
