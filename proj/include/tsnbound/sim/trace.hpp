#pragma once

#include "tsnbound/network.hpp"
#include "tsnbound/rational.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tsnbound::sim {

using SimTime = std::int64_t;  // picoseconds

/// Timing instants of one packet on one hop. -1 means "not reached".
struct HopLog {
    int link = -1;        // index into NetworkSpec::links
    SimTime a = -1;       // enqueued in the CBFS class queue at the sending node
    SimTime q = -1;       // start of transmission
    SimTime d = -1;       // received at the next node
    SimTime dprime = -1;  // enqueued in the interleaved regulator
    SimTime e = -1;       // released by the interleaved regulator
};

struct PacketRecord {
    std::string flow;
    int seq = 0;  // 1-based per flow
    std::int64_t bits = 0;
    std::vector<HopLog> hops;
    bool delivered = false;
};

struct TraceEvent {
    SimTime t = 0;
    std::string node;
    std::string queue;
    std::string kind;  // cbfs_arrival, tx_start, tx_end, node_arrival, ir_enqueue, ir_release, delivered
    std::string flow;  // flow id, "CDT" or "BE"
    int seq = 0;
    std::int64_t bits = 0;
};

struct SimTrace {
    std::uint64_t spec_hash = 0;
    SimTime horizon = 0;
    std::vector<TraceEvent> events;
    std::vector<PacketRecord> packets;
    // Step series indexed by queue id ("cbfs:A:H1->1", "ir:A:H1->1->2", ...),
    // recording the value after each change.
    std::map<std::string, std::vector<std::pair<SimTime, std::int64_t>>> backlog;
    std::map<std::string, std::int64_t> backlog_max;
    // Credit series per "credit:A:H1->1"; value after each update.
    std::map<std::string, std::vector<std::pair<SimTime, Rational>>> credit;
    std::map<std::string, Rational> credit_max_seen;
    std::map<std::string, Rational> credit_ceiling;  // V^{x,max} per credit key
};

std::string cbfs_queue_id(const std::string& cls, const std::string& from, const std::string& to);
std::string ir_queue_id(const std::string& cls, const std::string& from, const std::string& to,
                        const std::string& next);
std::string credit_key(const std::string& cls, const std::string& from, const std::string& to);

enum class Metric { S, H, C, E2E };
Metric metric_from_string(const std::string& s);

/// Worst observed value of a metric over the trace, in seconds.
/// S and C are per CBFS link (i,j); H and C take the continuation node k;
/// E2E ignores the hop arguments. Throws when no packet matches.
Rational worst_observed(const SimTrace& trace, const model::NetworkSpec& spec,
                        const std::string& flow, Metric metric, const std::string& i = "",
                        const std::string& j = "", const std::string& k = "");

/// Peak queued bits of a queue id; throws on unknown queue.
std::int64_t max_backlog(const SimTrace& trace, const std::string& queue_id);

/// Line-oriented event dump: time_ps node queue event_kind flow seq bits.
std::string to_event_lines(const SimTrace& trace);
nlohmann::json to_json(const SimTrace& trace);
/// CSV with one (queue, time_ps, bits) row per backlog sample.
std::string backlog_csv(const SimTrace& trace);
/// CSV with one (credit_key, time_ps, credit_bits, exact) row per sample.
std::string credit_csv(const SimTrace& trace);

}  // namespace tsnbound::sim
