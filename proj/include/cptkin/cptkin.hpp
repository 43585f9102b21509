#pragma once

// Everything except the CLI layer (which needs yaml-cpp).

#include "cptkin/core_state.hpp"
#include "cptkin/entropy.hpp"
#include "cptkin/exchange_kinetics.hpp"
#include "cptkin/ode.hpp"
#include "cptkin/radiation_kinetics.hpp"
#include "cptkin/stochastic_chain.hpp"
#include "cptkin/symmetry.hpp"
#include "cptkin/temperature.hpp"
#include "cptkin/trajectory.hpp"
#include "cptkin/typicality.hpp"
