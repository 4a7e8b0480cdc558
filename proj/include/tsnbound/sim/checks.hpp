#pragma once

#include "tsnbound/bounds.hpp"
#include "tsnbound/sim/trace.hpp"

#include <string>
#include <vector>

namespace tsnbound::sim {

struct Violation {
    std::string metric;    // S, H, C, e2e, ir_backlog, cbfs_backlog, ...
    std::string location;  // flow/packet/queue description
    Rational observed;
    Rational bound;

    std::string describe() const;
};

/// Every observed S/H/C/e2e and queue backlog must stay within its bound.
/// Throws when the trace and report come from different specs.
std::vector<Violation> conformance_check(const SimTrace& trace, const model::NetworkSpec& spec,
                                         const bounds::BoundsReport& report);

/// Service-curve conformance of each CBFS class queue: at every start of
/// service there exists m <= n with sum_{k=m}^{n-1} l_k >= beta(Q_n - A_m),
/// scanning all m.
std::vector<Violation> service_curve_check(const SimTrace& trace, const model::NetworkSpec& spec);

/// Regulator output conformance: LRQ release gaps and LB bucket replay per
/// flow at every interleaved regulator.
std::vector<Violation> shaper_output_check(const SimTrace& trace, const model::NetworkSpec& spec);

/// FIFO order inside every regulator and every CBFS class queue.
std::vector<Violation> fifo_order_check(const SimTrace& trace, const model::NetworkSpec& spec);

/// Credit never above V^{x,max} anywhere in the trace.
std::vector<Violation> credit_ceiling_check(const SimTrace& trace);

}  // namespace tsnbound::sim
