#include "tsnbound/sim/checks.hpp"

#include <algorithm>
#include <map>

namespace tsnbound::sim {

using model::NetworkSpec;
using model::TrafficClass;

std::string Violation::describe() const {
    return metric + " at " + location + ": observed " + observed.to_decimal_string() +
           " exceeds bound " + bound.to_decimal_string();
}

namespace {

struct HopRef {
    const PacketRecord* pkt;
    std::size_t hop;
};

// Per-link hop observations grouped by (link index, class).
std::map<std::pair<int, int>, std::vector<HopRef>> hops_by_link(const SimTrace& trace,
                                                                const NetworkSpec& spec) {
    std::map<std::pair<int, int>, std::vector<HopRef>> out;
    for (const PacketRecord& p : trace.packets) {
        const model::FlowSpec* f = spec.find_flow(p.flow);
        if (!f) continue;
        for (std::size_t h = 0; h < p.hops.size(); ++h)
            out[{p.hops[h].link, static_cast<int>(f->cls)}].push_back({&p, h});
    }
    return out;
}

}  // namespace

std::vector<Violation> conformance_check(const SimTrace& trace, const NetworkSpec& spec,
                                         const bounds::BoundsReport& report) {
    if (trace.spec_hash != report.spec_hash)
        throw tsn_error("trace and bounds report come from different specs");
    std::vector<Violation> out;

    for (const PacketRecord& p : trace.packets) {
        const model::FlowSpec* f = spec.find_flow(p.flow);
        if (!f) continue;
        const bounds::FlowBounds* fb = report.find_flow(p.flow);
        if (!fb) continue;
        for (std::size_t h = 0; h < p.hops.size() && h < fb->hops.size(); ++h) {
            const HopLog& hop = p.hops[h];
            const bounds::HopBound& hb = fb->hops[h];
            std::string where = p.flow + "#" + std::to_string(p.seq) + " " + hb.from + "->" +
                                hb.to;
            if (hop.d >= 0) {
                Rational s = ps_to_seconds(hop.d - hop.a);
                if (s > hb.s) out.push_back({"S", where, s, hb.s});
            }
            if (hop.e >= 0 && hb.h) {
                Rational hv = ps_to_seconds(hop.e - hop.dprime);
                if (hv > *hb.h) out.push_back({"H", where + "->" + hb.next, hv, *hb.h});
                const bounds::IrQueueBounds* ir = report.find_ir(hb.from, hb.to, hb.next, f->cls);
                if (ir) {
                    Rational cv = ps_to_seconds(hop.e - hop.a);
                    if (cv > ir->c) out.push_back({"C", where + "->" + hb.next, cv, ir->c});
                }
            }
        }
        if (p.delivered && !p.hops.empty()) {
            Rational e2e = ps_to_seconds(p.hops.back().d - p.hops.front().a);
            if (e2e > fb->e2e)
                out.push_back({"e2e", p.flow + "#" + std::to_string(p.seq), e2e, fb->e2e});
        }
    }

    for (const bounds::CbfsQueueBounds& q : report.cbfs) {
        std::string id = cbfs_queue_id(model::to_string(q.cls), q.from, q.to);
        auto it = trace.backlog_max.find(id);
        if (it == trace.backlog_max.end()) continue;
        Rational seen(it->second);
        if (seen > q.backlog) out.push_back({"cbfs_backlog", id, seen, q.backlog});
    }
    for (const bounds::IrQueueBounds& q : report.irs) {
        std::string id = ir_queue_id(model::to_string(q.cls), q.from, q.to, q.next);
        auto it = trace.backlog_max.find(id);
        if (it == trace.backlog_max.end()) continue;
        Rational seen(it->second);
        if (seen > q.backlog) out.push_back({"ir_backlog", id, seen, q.backlog});
    }
    return out;
}

std::vector<Violation> service_curve_check(const SimTrace& trace, const NetworkSpec& spec) {
    std::vector<Violation> out;
    auto grouped = hops_by_link(trace, spec);
    for (auto& [key, hops] : grouped) {
        auto [link_idx, cls_int] = key;
        TrafficClass cls = static_cast<TrafficClass>(cls_int);
        const model::LinkDef& link = spec.links[static_cast<std::size_t>(link_idx)];
        curves::RateLatency beta =
            bounds::cbs_service_curve(spec, link.from, link.to, cls).curve;
        // Service order within a class queue; only packets that started.
        std::vector<HopRef> served;
        for (const HopRef& h : hops)
            if (h.pkt->hops[h.hop].q >= 0) served.push_back(h);
        std::sort(served.begin(), served.end(), [](const HopRef& x, const HopRef& y) {
            return x.pkt->hops[x.hop].q < y.pkt->hops[y.hop].q;
        });
        for (std::size_t n = 0; n < served.size(); ++n) {
            SimTime qn = served[n].pkt->hops[served[n].hop].q;
            bool ok = false;
            bool first_deficit = true;
            Rational acc;  // sum of l_k for k in [m, n-1]
            Rational min_deficit;
            for (std::size_t m = n + 1; m-- > 0;) {
                if (m < n) acc += Rational(served[m].pkt->bits);
                SimTime am = served[m].pkt->hops[served[m].hop].a;
                Rational need = curves::evaluate(beta, ps_to_seconds(qn - am)).value;
                if (acc >= need) {
                    ok = true;
                    break;
                }
                if (first_deficit || need - acc < min_deficit) min_deficit = need - acc;
                first_deficit = false;
            }
            if (!ok) {
                const PacketRecord* p = served[n].pkt;
                out.push_back({"service_curve",
                               cbfs_queue_id(model::to_string(cls), link.from, link.to) + " " +
                                   p->flow + "#" + std::to_string(p->seq),
                               min_deficit, Rational(0)});
            }
        }
    }
    return out;
}

std::vector<Violation> shaper_output_check(const SimTrace& trace, const NetworkSpec& spec) {
    std::vector<Violation> out;
    // Releases per (IR = in-link + next node, flow), ordered by release time.
    struct Release {
        SimTime e;
        std::int64_t bits;
        int seq;
    };
    std::map<std::pair<int, std::string>, std::vector<Release>> per_flow;
    for (const PacketRecord& p : trace.packets) {
        for (std::size_t h = 0; h + 1 < p.hops.size(); ++h) {
            if (p.hops[h].e < 0) continue;
            per_flow[{p.hops[h].link, p.flow}].push_back(
                {p.hops[h].e, p.bits, p.seq});
        }
    }
    for (auto& [key, releases] : per_flow) {
        const model::FlowSpec* f = spec.find_flow(key.second);
        if (!f) continue;
        std::sort(releases.begin(), releases.end(),
                  [](const Release& a, const Release& b) { return a.e < b.e; });
        const model::LinkDef& link = spec.links[static_cast<std::size_t>(key.first)];
        std::string where = key.second + " after IR fed by " + link.from + "->" + link.to;
        if (f->regulator == model::Regulator::LRQ) {
            for (std::size_t n = 0; n + 1 < releases.size(); ++n) {
                Rational gap = ps_to_seconds(releases[n + 1].e - releases[n].e);
                Rational need = Rational(releases[n].bits) / f->rate;
                if (gap < need)
                    out.push_back({"lrq_output", where + " #" + std::to_string(releases[n + 1].seq),
                                   gap, need});
            }
        } else {
            Rational level = f->burst;
            SimTime prev = releases.empty() ? 0 : releases.front().e;
            for (const Release& r : releases) {
                level = min(f->burst, level + f->rate * ps_to_seconds(r.e - prev));
                prev = r.e;
                if (level < Rational(r.bits)) {
                    out.push_back({"lb_output", where + " #" + std::to_string(r.seq),
                                   Rational(r.bits) - level, Rational(0)});
                    break;
                }
                level -= Rational(r.bits);
            }
        }
    }
    return out;
}

std::vector<Violation> fifo_order_check(const SimTrace& trace, const NetworkSpec& spec) {
    std::vector<Violation> out;
    // Regulators: release order must equal enqueue order.
    struct IrEntry {
        SimTime dprime, e;
        std::string who;
    };
    std::map<std::tuple<int, int, int>, std::vector<IrEntry>> irs;  // (in_link, out_link, cls)
    for (const PacketRecord& p : trace.packets) {
        const model::FlowSpec* f = spec.find_flow(p.flow);
        if (!f) continue;
        for (std::size_t h = 0; h + 1 < p.hops.size(); ++h) {
            if (p.hops[h].e < 0 || p.hops[h].dprime < 0) continue;
            irs[{p.hops[h].link, p.hops[h + 1].link, static_cast<int>(f->cls)}].push_back(
                {p.hops[h].dprime, p.hops[h].e, p.flow + "#" + std::to_string(p.seq)});
        }
    }
    // A strictly earlier enqueue must never be released strictly later.
    // Entries tied on the enqueue instant may pop in either order.
    for (auto& [key, entries] : irs) {
        std::sort(entries.begin(), entries.end(), [](const IrEntry& a, const IrEntry& b) {
            return a.dprime != b.dprime ? a.dprime < b.dprime : a.e < b.e;
        });
        for (std::size_t n = 0; n + 1 < entries.size(); ++n)
            if (entries[n].dprime < entries[n + 1].dprime && entries[n + 1].e < entries[n].e)
                out.push_back({"ir_fifo", entries[n + 1].who,
                               ps_to_seconds(entries[n].e - entries[n + 1].e), Rational(0)});
    }
    // CBFS class queues: same rule for arrival versus start of service.
    auto grouped = hops_by_link(trace, spec);
    for (auto& [key, hops] : grouped) {
        std::vector<HopRef> served;
        for (const HopRef& h : hops)
            if (h.pkt->hops[h.hop].q >= 0) served.push_back(h);
        std::sort(served.begin(), served.end(), [](const HopRef& x, const HopRef& y) {
            const HopLog& hx = x.pkt->hops[x.hop];
            const HopLog& hy = y.pkt->hops[y.hop];
            return hx.a != hy.a ? hx.a < hy.a : hx.q < hy.q;
        });
        for (std::size_t n = 0; n + 1 < served.size(); ++n) {
            const HopLog& cur = served[n].pkt->hops[served[n].hop];
            const HopLog& nxt = served[n + 1].pkt->hops[served[n + 1].hop];
            if (cur.a < nxt.a && nxt.q < cur.q)
                out.push_back(
                    {"cbfs_fifo",
                     served[n + 1].pkt->flow + "#" + std::to_string(served[n + 1].pkt->seq),
                     Rational(0), Rational(0)});
        }
    }
    return out;
}

std::vector<Violation> credit_ceiling_check(const SimTrace& trace) {
    std::vector<Violation> out;
    for (const auto& [key, series] : trace.credit) {
        auto ceiling = trace.credit_ceiling.find(key);
        if (ceiling == trace.credit_ceiling.end()) continue;
        for (const auto& [t, v] : series)
            if (v > ceiling->second)
                out.push_back({"credit_ceiling", key + " at t=" + std::to_string(t), v,
                               ceiling->second});
    }
    return out;
}

}  // namespace tsnbound::sim
