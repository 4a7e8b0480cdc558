#pragma once

#include "tsnbound/network.hpp"
#include "tsnbound/sim/scenario.hpp"
#include "tsnbound/sim/trace.hpp"

namespace tsnbound::sim {

struct RunOptions {
    bool record_events = true;  // per-event lines (series and packets always kept)
};

/// Deterministic packet-level simulation of the CBFS + interleaved-regulator
/// pipeline. Throws on invalid scenarios and on internal invariant failures
/// (credit ceilings, event cap).
SimTrace run(const model::NetworkSpec& spec, const Scenario& scenario, SimTime horizon,
             const RunOptions& options = {});

}  // namespace tsnbound::sim
