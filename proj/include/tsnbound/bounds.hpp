#pragma once

#include "tsnbound/curves.hpp"
#include "tsnbound/network.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <string>
#include <vector>

namespace tsnbound::bounds {

using model::NetworkSpec;
using model::TrafficClass;

/// CBS service curve for one class on one link, with the credit ceiling the
/// derivation rests on.
struct CbsServiceCurve {
    curves::RateLatency curve;  // (R^x_ij, T^x_ij)
    Rational credit_max;        // V^{x,max}, bits
};

/// Rate-latency service curve offered by the CBFS of node i on link (i,j) to
/// class x, accounting for CDT. Throws when the class is not configured.
CbsServiceCurve cbs_service_curve(const NetworkSpec& spec, const std::string& i,
                                  const std::string& j, TrafficClass x);

/// Waiting-time bound W(f,i,j,x) = T + (b_tot - psi_f)/R for the worst packet.
Rational cbfs_waiting_bound(const NetworkSpec& spec, const std::string& flow,
                            const std::string& i, const std::string& j);

/// CBFS response-time bound S(f,i,j,x).
Rational cbfs_response_bound(const NetworkSpec& spec, const std::string& flow,
                             const std::string& i, const std::string& j);

/// Combined CBFS + interleaved-regulator bound C(i,j,k,x). Computed in its
/// algebraic form and cross-checked against the sup-of-S form; the two are
/// asserted equal. Throws on an empty flow set.
Rational combined_bound(const NetworkSpec& spec, const std::string& i, const std::string& j,
                        const std::string& k, TrafficClass x);

struct IrResponse {
    Rational value;
    bool clamped = false;  // negative result clamped to zero
};

/// Interleaved-regulator response-time bound H(f,i,j,k,x), clamped at zero.
IrResponse ir_response_bound(const NetworkSpec& spec, const std::string& flow,
                             const std::string& i, const std::string& j, const std::string& k);

/// D(i,j,k,x) = sup over F^x_ijk of H.
Rational ir_fifo_delay(const NetworkSpec& spec, const std::string& i, const std::string& j,
                       const std::string& k, TrafficClass x);

/// End-to-end bound along the flow's path (sum of C terms plus final S).
Rational e2e_bound(const NetworkSpec& spec, const std::string& flow);

/// Per-switch additive bound (H + S + processing per hop), for comparison.
Rational additive_e2e(const NetworkSpec& spec, const std::string& flow);

struct IrBacklog {
    Rational value;
    Rational b_w;        // competing burst used
    bool bw_ambiguous = false;  // flows terminating at j make the reading ambiguous
};

/// Backlog bound of the interleaved regulator at node j for link (j,k) fed by
/// the CBFS of node i. b_w aggregates class-x flows on (i,j) that continue to
/// a next hop other than k.
IrBacklog ir_backlog(const NetworkSpec& spec, const std::string& i, const std::string& j,
                     const std::string& k, TrafficClass x);

/// Arrival curve at the input of the same interleaved regulator.
curves::CappedArrival ir_input_arrival(const NetworkSpec& spec, const std::string& i,
                                       const std::string& j, const std::string& k,
                                       TrafficClass x);

/// Backlog bound of the CBFS class-x queue at node i for link (i,j).
Rational cbfs_backlog(const NetworkSpec& spec, const std::string& i, const std::string& j,
                      TrafficClass x);

// ---------------------------------------------------------------------------
// Aggregate report

struct HopBound {
    std::string from, to;  // CBFS link (i,j)
    std::string next;      // next node k; empty on the destination link
    Rational s;            // S(f,i,j,x)
    std::optional<Rational> h;  // H(f,i,j,k,x) when an IR follows
    bool h_clamped = false;
};

struct FlowBounds {
    std::string flow;
    TrafficClass cls;
    std::vector<HopBound> hops;
    Rational e2e;
    Rational additive;
};

struct CbfsQueueBounds {
    std::string from, to;
    TrafficClass cls;
    Rational service_rate, service_latency, credit_max;
    Rational backlog;
};

struct IrQueueBounds {
    std::string from, to, next;
    TrafficClass cls;
    Rational c;  // C(i,j,k,x)
    Rational d;  // D(i,j,k,x)
    Rational backlog;
    Rational b_w;
    bool bw_ambiguous = false;
};

struct BoundsReport {
    std::uint64_t spec_hash = 0;
    std::vector<FlowBounds> flows;
    std::vector<CbfsQueueBounds> cbfs;
    std::vector<IrQueueBounds> irs;
    std::vector<std::string> notes;

    const FlowBounds* find_flow(const std::string& id) const;
    const CbfsQueueBounds* find_cbfs(const std::string& i, const std::string& j,
                                     TrafficClass x) const;
    const IrQueueBounds* find_ir(const std::string& i, const std::string& j,
                                 const std::string& k, TrafficClass x) const;
};

BoundsReport full_report(const NetworkSpec& spec);

nlohmann::json to_json(const BoundsReport& report);
BoundsReport report_from_json(const nlohmann::json& j);
std::string to_table(const BoundsReport& report);

/// "140 us" or, when not an integral number of microseconds, the decimal with
/// the exact fraction appended.
std::string format_duration(const Rational& seconds);
std::string format_bits(const Rational& bits);

}  // namespace tsnbound::bounds
