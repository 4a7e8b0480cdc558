#pragma once

#include "tsnbound/network.hpp"
#include "tsnbound/sim/scenario.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tsnbound::sim::adversarial {

struct Result {
    Scenario scenario;
    std::vector<std::string> diagnostics;  // unmet tightness preconditions etc.
    Rational predicted_s;                  // expected worst CBFS response of the target
    std::optional<Rational> predicted_h;   // expected worst IR response (when an IR follows)
    std::optional<Rational> predicted_e2e;
    SimTime horizon_hint = 0;
};

/// Worst-case arrival pattern driving the target flow's CBFS response at link
/// (i, j) to its bound: low-priority blocker, CDT burst sustained to the
/// start of the class backlog, class burst with the target's packet last, a
/// second blocker just before the credit recovers, and a CDT replay. Upstream
/// segments of the path are scripted the same way, shifted by the combined
/// per-hop bound, so the pattern reaches (i, j) intact.
Result cbfs_tightness(const model::NetworkSpec& spec, const std::string& flow,
                      const std::string& i, const std::string& j);

/// Chained copies of the per-segment pattern along the whole path, driving
/// the end-to-end delay to its bound.
Result e2e_tightness(const model::NetworkSpec& spec, const std::string& flow);

}  // namespace tsnbound::sim::adversarial
