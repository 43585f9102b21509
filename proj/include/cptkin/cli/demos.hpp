#pragma once

// Built-in demo scenarios. Each mirrors scenarios/<name>.yaml; regenerate
// with tools/embed_scenarios.py.

#include <array>
#include <string_view>

namespace cptkin::cli {

struct Demo {
    std::string_view name;
    std::string_view yaml;
};

inline constexpr std::array<Demo, 11> kDemos{{
    {"symmetric-exchange", R"(scenario: exchange
name: symmetric-exchange
description: Symmetric exchange relaxing to its unique equilibrium.
mode:
  extension: symmetric
initial:
  f_a_star: 0.02
  f_a_circ: 0.05
  f_abar_star: 0.01
  f_abar_circ: 0.04
  n_secondary: 1.0e6
k: 10
time:
  t_end: 500
  dt_max: 0.5
seed: 1
output:
  dir: out/symmetric-exchange
)"},
    {"antisymmetric-stable", R"(scenario: exchange
name: antisymmetric-stable
description: Antisymmetric exchange with more antimatter than matter; converges.
mode:
  extension: antisymmetric
initial:
  f_a_star: 0.01
  f_a_circ: 0.02
  f_abar_star: 0.03
  f_abar_circ: 0.05
  n_secondary: 1.0e6
k: 10
time:
  t_end: 500
  dt_max: 0.5
seed: 1
output:
  dir: out/antisymmetric-stable
)"},
    {"antisymmetric-unstable", R"(scenario: exchange
name: antisymmetric-unstable
description: Antisymmetric exchange with more matter than antimatter; runs into a zero boundary.
mode:
  extension: antisymmetric
initial:
  f_a_star: 0.03
  f_a_circ: 0.05
  f_abar_star: 0.01
  f_abar_circ: 0.02
  n_secondary: 1.0e6
k: 10
time:
  t_end: 500
  dt_max: 0.5
seed: 1
output:
  dir: out/antisymmetric-unstable
)"},
    {"matter-bose-einstein", R"(scenario: radiation
name: matter-bose-einstein
description: Neutral radiation against a matter reservoir; the mode relaxes to the Bose-Einstein occupation.
mode:
  radiation_variant: neutral
initial:
  f_a_star: 0.02
  f_a_circ: 0.05
  occupations: [0.1, 2.0]
radiation:
  species: matter
  reservoir: true
k: 1
time:
  t_end: 2000
  dt_max: 1
seed: 1
output:
  dir: out/matter-bose-einstein
)"},
    {"decohering-control", R"(scenario: radiation
name: decohering-control
description: Decohering radiation against a matter reservoir; relaxes to exp(-dE/T) instead of Bose-Einstein.
mode:
  radiation_variant: decohering
initial:
  f_a_star: 0.02
  f_a_circ: 0.05
  occupations: [0.1]
radiation:
  species: matter
  reservoir: true
k: 1
time:
  t_end: 2000
  dt_max: 1
seed: 1
output:
  dir: out/decohering-control
)"},
    {"laser", R"(scenario: radiation
name: laser
description: Inverted matter population coupled to three modes; exponential growth, then saturation once the inversion is used up.
mode:
  radiation_variant: neutral
initial:
  f_a_star: 0.05
  f_a_circ: 0.01
  n_secondary: 1.0e5
  occupations: [0.01, 0.02, 0.005]
radiation:
  species: matter
k: 1
time:
  t_end: 1500
  dt_max: 1
seed: 1
output:
  dir: out/laser
)"},
    {"antimatter-collapse", R"(scenario: radiation
name: antimatter-collapse
description: Antimatter with positive intrinsic temperature coupled to radiation; the excited population is exhausted.
mode:
  radiation_variant: neutral
initial:
  f_abar_star: 0.02
  f_abar_circ: 0.05
  n_secondary: 1000
  occupations: [0.5]
radiation:
  species: antimatter
k: 1
time:
  t_end: 2000
  dt_max: 0.5
seed: 1
output:
  dir: out/antimatter-collapse
)"},
    {"antimatter-bose-einstein", R"(scenario: radiation
name: antimatter-bose-einstein
description: Antimatter reservoir with negative intrinsic (positive apparent) temperature; the mode relaxes to Bose-Einstein.
mode:
  radiation_variant: neutral
initial:
  f_abar_star: 0.05
  f_abar_circ: 0.02
  occupations: [0.1]
radiation:
  species: antimatter
  reservoir: true
k: 1
time:
  t_end: 2000
  dt_max: 1
seed: 1
output:
  dir: out/antimatter-bose-einstein
)"},
    {"chain-symmetric", R"(scenario: chain
name: chain-symmetric
description: Stochastic symmetric exchange with about 1e5 particles.
mode:
  extension: symmetric
initial:
  f_a_star: 0.03
  f_a_circ: 0.01
  f_abar_star: 0.01
  f_abar_circ: 0.05
  n_secondary: 1.0e6
k: 10
chain:
  process: exchange
  tau: 0.001
  steps: 20000
  record_every: 100
seed: 7
output:
  dir: out/chain-symmetric
)"},
    {"typicality", R"(scenario: typicality
name: typicality
description: Reduced density matrix of a qubit in random pure states and mixtures.
typicality:
  n_s: 2
  n_e: [16, 64, 256]
  n_m: [1, 4]
  samples: 2000
seed: 3
output:
  dir: out/typicality
)"},
    {"symmetry-ledger", R"(scenario: symmetry-check
name: symmetry-ledger
description: CP and CPT on all six rate-law families.
symmetry:
  states: 1000
seed: 20240601
output:
  dir: out/symmetry-ledger
)"},
}};

inline const Demo* find_demo(std::string_view name) {
    for (const auto& d : kDemos)
        if (d.name == name) return &d;
    return nullptr;
}

}  // namespace cptkin::cli
