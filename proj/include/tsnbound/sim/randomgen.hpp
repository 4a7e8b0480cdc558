#pragma once

#include "tsnbound/network.hpp"
#include "tsnbound/sim/scenario.hpp"

#include <random>

namespace tsnbound::sim::randomgen {

/// Small random network (<= 6 nodes, <= 8 flows) that passes validation with
/// strict per-class stability. Rates are chosen so every packet duration and
/// regulation gap is an integral number of picoseconds.
model::NetworkSpec random_spec(std::mt19937_64& rng);

/// Regulation-conformant random arrival scripts for every flow, plus
/// conformant CDT and arbitrary BE traffic, with seeded delay realizations.
Scenario random_scenario(const model::NetworkSpec& spec, std::mt19937_64& rng, SimTime horizon);

}  // namespace tsnbound::sim::randomgen
