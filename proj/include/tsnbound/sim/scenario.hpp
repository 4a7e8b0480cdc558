#pragma once

#include "tsnbound/network.hpp"
#include "tsnbound/sim/trace.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tsnbound::sim {

/// A flow packet handed to the source host's CBFS at time t.
struct Injection {
    SimTime t = 0;
    std::string flow;
    std::int64_t bits = 0;
};

/// A scripted CDT or BE packet entering one link's CBFS queue.
struct LinkPacket {
    SimTime t = 0;
    std::string from, to;
    std::int64_t bits = 0;
};

/// How the per-packet variable/processing delays of a link are realized.
struct DelayRealization {
    enum class Mode { Max, Min, Fixed, Seeded };
    Mode mode = Mode::Max;
    SimTime fixed = 0;       // Fixed
    std::uint64_t seed = 0;  // Seeded: uniform over [min, max]
};

struct Scenario {
    std::vector<Injection> injections;  // tie order at equal times = array order
    std::vector<LinkPacket> cdt;
    std::vector<LinkPacket> be;
    std::map<std::pair<std::string, std::string>, DelayRealization> var_delay;
    std::map<std::pair<std::string, std::string>, DelayRealization> proc_delay;
    DelayRealization default_var;
    DelayRealization default_proc;
    std::int64_t event_cap = 5000000;
};

nlohmann::json to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario_file(const std::string& path);

/// Structural and regulation checks: known flows and links, packet sizes in
/// [M_f, L_f], integral transmission durations on every traversed link, and
/// source conformance (LRQ spacing / LB bucket). Fatal on violation.
std::vector<model::Diagnostic> validate_scenario(const model::NetworkSpec& spec,
                                                 const Scenario& scenario);

}  // namespace tsnbound::sim
