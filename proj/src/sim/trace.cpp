#include "tsnbound/sim/trace.hpp"

#include <nlohmann/json.hpp>

#include <sstream>

namespace tsnbound::sim {

std::string cbfs_queue_id(const std::string& cls, const std::string& from, const std::string& to) {
    return "cbfs:" + cls + ":" + from + "->" + to;
}

std::string ir_queue_id(const std::string& cls, const std::string& from, const std::string& to,
                        const std::string& next) {
    return "ir:" + cls + ":" + from + "->" + to + "->" + next;
}

std::string credit_key(const std::string& cls, const std::string& from, const std::string& to) {
    return "credit:" + cls + ":" + from + "->" + to;
}

Metric metric_from_string(const std::string& s) {
    if (s == "S") return Metric::S;
    if (s == "H") return Metric::H;
    if (s == "C") return Metric::C;
    if (s == "e2e" || s == "E2E") return Metric::E2E;
    throw tsn_error("unknown metric: " + s);
}

Rational worst_observed(const SimTrace& trace, const model::NetworkSpec& spec,
                        const std::string& flow, Metric metric, const std::string& i,
                        const std::string& j, const std::string& k) {
    bool found = false;
    SimTime worst = 0;
    int link_idx = -1;
    int next_link_idx = -1;
    if (metric != Metric::E2E) {
        link_idx = spec.link_index(i, j);
        if (link_idx < 0) throw tsn_error("unknown link (" + i + ", " + j + ")");
        if (metric == Metric::H || metric == Metric::C) {
            next_link_idx = spec.link_index(j, k);
            if (next_link_idx < 0) throw tsn_error("unknown link (" + j + ", " + k + ")");
        }
    }
    for (const PacketRecord& p : trace.packets) {
        if (p.flow != flow) continue;
        if (metric == Metric::E2E) {
            if (!p.delivered || p.hops.empty()) continue;
            SimTime v = p.hops.back().d - p.hops.front().a;
            if (!found || v > worst) worst = v;
            found = true;
            continue;
        }
        for (std::size_t h = 0; h < p.hops.size(); ++h) {
            const HopLog& hop = p.hops[h];
            if (hop.link != link_idx) continue;
            switch (metric) {
                case Metric::S:
                    if (hop.d < 0) break;
                    if (!found || hop.d - hop.a > worst) worst = hop.d - hop.a;
                    found = true;
                    break;
                case Metric::H:
                case Metric::C: {
                    if (hop.e < 0) break;
                    if (h + 1 >= p.hops.size() || p.hops[h + 1].link != next_link_idx) break;
                    SimTime v = metric == Metric::H ? hop.e - hop.dprime : hop.e - hop.a;
                    if (!found || v > worst) worst = v;
                    found = true;
                    break;
                }
                default:
                    break;
            }
        }
    }
    if (!found) throw tsn_error("no observation for flow " + flow + " at the requested hop");
    return ps_to_seconds(worst);
}

std::int64_t max_backlog(const SimTrace& trace, const std::string& queue_id) {
    auto it = trace.backlog_max.find(queue_id);
    if (it == trace.backlog_max.end()) throw tsn_error("unknown queue: " + queue_id);
    return it->second;
}

std::string to_event_lines(const SimTrace& trace) {
    std::ostringstream os;
    for (const TraceEvent& e : trace.events)
        os << e.t << " " << e.node << " " << e.queue << " " << e.kind << " " << e.flow << " "
           << e.seq << " " << e.bits << "\n";
    return os.str();
}

nlohmann::json to_json(const SimTrace& trace) {
    nlohmann::json j;
    j["spec_hash"] = trace.spec_hash;
    j["horizon_ps"] = trace.horizon;
    nlohmann::json evs = nlohmann::json::array();
    for (const TraceEvent& e : trace.events)
        evs.push_back({{"t", e.t},
                       {"node", e.node},
                       {"queue", e.queue},
                       {"kind", e.kind},
                       {"flow", e.flow},
                       {"seq", e.seq},
                       {"bits", e.bits}});
    j["events"] = evs;
    nlohmann::json pkts = nlohmann::json::array();
    for (const PacketRecord& p : trace.packets) {
        nlohmann::json pj;
        pj["flow"] = p.flow;
        pj["seq"] = p.seq;
        pj["bits"] = p.bits;
        pj["delivered"] = p.delivered;
        nlohmann::json hops = nlohmann::json::array();
        for (const HopLog& h : p.hops)
            hops.push_back({{"link", h.link},
                            {"a", h.a},
                            {"q", h.q},
                            {"d", h.d},
                            {"dprime", h.dprime},
                            {"e", h.e}});
        pj["hops"] = hops;
        pkts.push_back(std::move(pj));
    }
    j["packets"] = pkts;
    nlohmann::json bmax;
    for (const auto& [queue, v] : trace.backlog_max) bmax[queue] = v;
    j["backlog_max"] = bmax;
    return j;
}

std::string backlog_csv(const SimTrace& trace) {
    std::ostringstream os;
    os << "queue,time_ps,bits\n";
    for (const auto& [queue, series] : trace.backlog)
        for (const auto& [t, bits] : series) os << queue << "," << t << "," << bits << "\n";
    return os.str();
}

std::string credit_csv(const SimTrace& trace) {
    std::ostringstream os;
    os << "key,time_ps,credit_bits,exact\n";
    for (const auto& [key, series] : trace.credit)
        for (const auto& [t, v] : series)
            os << key << "," << t << "," << v.to_decimal_string() << "," << v.to_fraction_string()
               << "\n";
    return os.str();
}

}  // namespace tsnbound::sim
