#include "tsnbound/sim/engine.hpp"

#include "tsnbound/bounds.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <queue>
#include <random>
#include <tuple>
#include <vector>

namespace tsnbound::sim {

using model::NetworkSpec;
using model::TrafficClass;

namespace {

enum class QueueKind { Cdt, A, B, Be };

const char* queue_class_name(QueueKind k) {
    switch (k) {
        case QueueKind::Cdt: return "CDT";
        case QueueKind::A: return "A";
        case QueueKind::B: return "B";
        case QueueKind::Be: return "BE";
    }
    return "?";
}

struct QItem {
    QueueKind kind = QueueKind::Be;
    int pkt = -1;           // runtime packet index for flow packets
    std::int64_t bits = 0;  // for CDT/BE packets
    int seq = 0;            // CDT/BE per-link sequence for logging
};

struct RuntimePkt {
    int flow_idx = -1;
    int rec = -1;  // index into trace.packets
    std::int64_t bits = 0;
    int hop = 0;  // index into the flow's link list
};

struct CreditState {
    bool configured = false;
    Rational idle, send;  // slopes
    Rational vmax;
    Rational v;
};

struct Port {
    int link_idx = -1;
    std::string from, to;
    Rational capacity;
    SimTime bit_time = 0;  // ps per bit when integral, else 0 (durations computed exactly)
    std::deque<QItem> cdt, a, b, be;
    CreditState credit_a, credit_b;
    SimTime credit_time = 0;
    bool transmitting = false;
    QueueKind tx_kind = QueueKind::Be;
    QItem tx_item;
    SimTime last_d = 0;  // wire FIFO clamp
    // Realized delays.
    SimTime var_min = 0, var_max = 0, proc_min = 0, proc_max = 0;
    DelayRealization var_real, proc_real;
    std::mt19937_64 var_rng, proc_rng;
    std::string q_id_cdt, q_id_a, q_id_b, q_id_be, credit_id_a, credit_id_b;
    int cdt_seq = 0, be_seq = 0;
};

struct RegState {
    SimTime lrq_next_eligible = 0;
    Rational lb_level;
    SimTime lb_time = 0;
    bool lb_init = false;
};

struct IrState {
    int out_link = -1;
    int in_link = -1;
    TrafficClass cls = TrafficClass::A;
    std::string queue_id;
    std::string node;
    std::deque<int> fifo;  // runtime packet indexes
    std::int64_t gen = 0;  // invalidates stale release events
    SimTime last_dprime = 0;
    std::map<int, RegState> reg;  // per flow
};

enum EvKind {
    EV_COMPLETION = 0,
    EV_NODE_ARRIVAL,
    EV_IR_ENQUEUE,
    EV_REG_RELEASE,
    EV_INJECT,
    EV_CDT_ARRIVAL,
    EV_BE_ARRIVAL,
    EV_WAKE,
};

// Rank groups simultaneous events: frame completions and their downstream
// enqueues first, regulator releases second, scenario arrivals third.
int rank_of(EvKind k) {
    switch (k) {
        case EV_COMPLETION:
        case EV_NODE_ARRIVAL:
        case EV_IR_ENQUEUE: return 0;
        case EV_REG_RELEASE: return 1;
        case EV_INJECT:
        case EV_CDT_ARRIVAL:
        case EV_BE_ARRIVAL: return 2;
        case EV_WAKE: return 3;
    }
    return 3;
}

struct Event {
    SimTime t;
    int rank;
    std::uint64_t seq;
    EvKind kind;
    int a = 0;  // port / packet / ir / scenario index
    std::int64_t b = 0;  // generation for releases
};

struct EventOrder {
    bool operator()(const Event& x, const Event& y) const {
        if (x.t != y.t) return x.t > y.t;
        if (x.rank != y.rank) return x.rank > y.rank;
        return x.seq > y.seq;
    }
};

class Engine {
public:
    Engine(const NetworkSpec& spec, const Scenario& scenario, SimTime horizon,
           const RunOptions& options)
        : spec_(spec), scenario_(scenario), horizon_(horizon), options_(options) {}

    SimTrace run();

private:
    const NetworkSpec& spec_;
    const Scenario& scenario_;
    SimTime horizon_;
    RunOptions options_;

    SimTrace trace_;
    std::vector<Port> ports_;
    std::vector<IrState> irs_;
    std::map<std::tuple<int, int, int>, int> ir_index_;  // (out_link, in_link, cls) -> idx
    std::vector<RuntimePkt> pkts_;
    std::vector<std::vector<int>> flow_links_;  // per flow: link idx along the path
    std::map<std::string, int> flow_idx_;
    std::vector<int> flow_seq_counter_;
    std::priority_queue<Event, std::vector<Event>, EventOrder> pq_;
    std::uint64_t event_seq_ = 0;
    std::int64_t processed_ = 0;
    std::map<std::string, std::int64_t> backlog_now_;
    std::vector<int> touched_;  // ports needing selection at the end of the batch

    void setup();
    void schedule(SimTime t, EvKind kind, int a, std::int64_t b = 0);
    void log(SimTime t, const std::string& node, const std::string& queue, const char* kind,
             const std::string& flow, int seq, std::int64_t bits);
    void backlog_change(const std::string& queue, SimTime t, std::int64_t delta);
    void record_credit(Port& port, TrafficClass cls, SimTime t);
    void touch(Port& port, SimTime t);
    void try_start(Port& port, SimTime t);
    void start_frame(Port& port, QueueKind kind, SimTime t);
    SimTime tx_duration(const Port& port, std::int64_t bits) const;
    SimTime realize_delay(Port& port, bool var, SimTime t);
    void handle_completion(Port& port, SimTime t);
    void node_arrival(int pkt_idx, SimTime t);
    void ir_enqueue(int pkt_idx, SimTime t);
    void schedule_head(IrState& ir, SimTime t);
    void do_release(IrState& ir, SimTime t);
    SimTime eligibility_time(IrState& ir, const RuntimePkt& pkt, SimTime now);
    void consume_regulation(IrState& ir, const RuntimePkt& pkt, SimTime t);
    std::deque<QItem>& queue_of(Port& port, QueueKind k);
    const std::string& queue_id_of(const Port& port, QueueKind k) const;
    Port& out_port_of(const RuntimePkt& pkt);
    std::string flow_name(const QItem& item) const;
    int item_seq(const QItem& item) const;
    std::int64_t item_bits(const QItem& item) const;
};

void Engine::setup() {
    trace_.spec_hash = model::spec_hash(spec_);
    trace_.horizon = horizon_;

    ports_.resize(spec_.links.size());
    for (std::size_t li = 0; li < spec_.links.size(); ++li) {
        const model::LinkDef& link = spec_.links[li];
        Port& p = ports_[li];
        p.link_idx = static_cast<int>(li);
        p.from = link.from;
        p.to = link.to;
        p.capacity = link.params.capacity;
        Rational bt = Rational(ps_per_second()) / p.capacity;
        p.bit_time = bt.is_integer() ? bt.to_int64() : 0;
        p.var_min = seconds_to_ps(link.params.t_var_min, "t_var_min");
        p.var_max = seconds_to_ps(link.params.t_var_max, "t_var_max");
        p.proc_min = seconds_to_ps(link.params.t_proc_min, "t_proc_min");
        p.proc_max = seconds_to_ps(link.params.t_proc_max, "t_proc_max");
        auto var_it = scenario_.var_delay.find({link.from, link.to});
        p.var_real = var_it == scenario_.var_delay.end() ? scenario_.default_var : var_it->second;
        auto proc_it = scenario_.proc_delay.find({link.from, link.to});
        p.proc_real =
            proc_it == scenario_.proc_delay.end() ? scenario_.default_proc : proc_it->second;
        p.var_rng.seed(p.var_real.seed ^ (0x9e3779b97f4a7c15ULL + li));
        p.proc_rng.seed(p.proc_real.seed ^ (0xc2b2ae3d27d4eb4fULL + li));
        p.q_id_cdt = cbfs_queue_id("CDT", link.from, link.to);
        p.q_id_a = cbfs_queue_id("A", link.from, link.to);
        p.q_id_b = cbfs_queue_id("B", link.from, link.to);
        p.q_id_be = cbfs_queue_id("BE", link.from, link.to);
        for (TrafficClass x : {TrafficClass::A, TrafficClass::B}) {
            CreditState& cs = x == TrafficClass::A ? p.credit_a : p.credit_b;
            const auto& cbs = link.params.cbs(x);
            if (!cbs) continue;
            cs.configured = true;
            cs.idle = cbs->idle_slope;
            cs.send = cbs->send_slope;
            cs.vmax = bounds::cbs_service_curve(spec_, link.from, link.to, x).credit_max;
            std::string key = credit_key(model::to_string(x), link.from, link.to);
            if (x == TrafficClass::A) p.credit_id_a = key;
            else p.credit_id_b = key;
            trace_.credit_ceiling[key] = cs.vmax;
            trace_.credit[key].push_back({0, Rational(0)});
            trace_.credit_max_seen[key] = Rational(0);
        }
    }

    flow_links_.resize(spec_.flows.size());
    flow_seq_counter_.assign(spec_.flows.size(), 0);
    for (std::size_t fi = 0; fi < spec_.flows.size(); ++fi) {
        const model::FlowSpec& f = spec_.flows[fi];
        flow_idx_[f.id] = static_cast<int>(fi);
        for (std::size_t h = 0; h + 1 < f.path.size(); ++h) {
            int li = spec_.link_index(f.path[h], f.path[h + 1]);
            if (li < 0) throw tsn_error("flow " + f.id + ": missing link in path");
            flow_links_[fi].push_back(li);
        }
        // Interleaved regulator instances along the path.
        for (std::size_t h = 1; h < flow_links_[fi].size(); ++h) {
            int in_link = flow_links_[fi][h - 1];
            int out_link = flow_links_[fi][h];
            auto key = std::make_tuple(out_link, in_link, static_cast<int>(f.cls));
            if (!ir_index_.count(key)) {
                IrState ir;
                ir.out_link = out_link;
                ir.in_link = in_link;
                ir.cls = f.cls;
                ir.node = spec_.links[out_link].from;
                ir.queue_id = ir_queue_id(model::to_string(f.cls), spec_.links[in_link].from,
                                          spec_.links[in_link].to, spec_.links[out_link].to);
                ir_index_[key] = static_cast<int>(irs_.size());
                irs_.push_back(std::move(ir));
            }
        }
    }

    // Every queue of the spec exists in the trace, active or not.
    for (const Port& p : ports_) {
        trace_.backlog_max[p.q_id_cdt] = 0;
        trace_.backlog_max[p.q_id_a] = 0;
        trace_.backlog_max[p.q_id_b] = 0;
        trace_.backlog_max[p.q_id_be] = 0;
    }
    for (const IrState& ir : irs_) trace_.backlog_max[ir.queue_id] = 0;

    for (std::size_t i = 0; i < scenario_.injections.size(); ++i)
        schedule(scenario_.injections[i].t, EV_INJECT, static_cast<int>(i));
    for (std::size_t i = 0; i < scenario_.cdt.size(); ++i)
        schedule(scenario_.cdt[i].t, EV_CDT_ARRIVAL, static_cast<int>(i));
    for (std::size_t i = 0; i < scenario_.be.size(); ++i)
        schedule(scenario_.be[i].t, EV_BE_ARRIVAL, static_cast<int>(i));
}

void Engine::schedule(SimTime t, EvKind kind, int a, std::int64_t b) {
    pq_.push(Event{t, rank_of(kind), event_seq_++, kind, a, b});
}

void Engine::log(SimTime t, const std::string& node, const std::string& queue, const char* kind,
                 const std::string& flow, int seq, std::int64_t bits) {
    if (!options_.record_events) return;
    trace_.events.push_back(TraceEvent{t, node, queue, kind, flow, seq, bits});
}

void Engine::backlog_change(const std::string& queue, SimTime t, std::int64_t delta) {
    std::int64_t& now = backlog_now_[queue];
    now += delta;
    auto& series = trace_.backlog[queue];
    series.emplace_back(t, now);
    auto it = trace_.backlog_max.find(queue);
    if (it == trace_.backlog_max.end()) trace_.backlog_max[queue] = std::max<std::int64_t>(0, now);
    else it->second = std::max(it->second, now);
}

void Engine::record_credit(Port& port, TrafficClass cls, SimTime t) {
    const CreditState& cs = cls == TrafficClass::A ? port.credit_a : port.credit_b;
    const std::string& key = cls == TrafficClass::A ? port.credit_id_a : port.credit_id_b;
    auto& series = trace_.credit[key];
    if (!series.empty() && series.back().first == t && series.back().second == cs.v)
        return;
    series.emplace_back(t, cs.v);
    Rational& seen = trace_.credit_max_seen[key];
    if (cs.v > seen) seen = cs.v;
    if (cs.v > cs.vmax)
        throw tsn_error("credit ceiling exceeded on " + key + " at t=" + std::to_string(t) +
                        ": " + cs.v.to_fraction_string() + " > " + cs.vmax.to_fraction_string());
}

void Engine::touch(Port& port, SimTime t) {
    if (t < port.credit_time) throw tsn_error("engine time went backwards");
    if (t == port.credit_time) return;
    Rational dt = ps_to_seconds(t - port.credit_time);
    for (TrafficClass x : {TrafficClass::A, TrafficClass::B}) {
        CreditState& cs = x == TrafficClass::A ? port.credit_a : port.credit_b;
        if (!cs.configured) continue;
        QueueKind own = x == TrafficClass::A ? QueueKind::A : QueueKind::B;
        bool backlogged = !(x == TrafficClass::A ? port.a : port.b).empty();
        if (port.transmitting && port.tx_kind == own) {
            cs.v += cs.send * dt;
        } else if (port.transmitting && port.tx_kind == QueueKind::Cdt) {
            // Credit frozen while CDT transmits.
        } else if (backlogged) {
            cs.v += cs.idle * dt;
        } else if (cs.v.is_negative()) {
            cs.v = min(Rational(0), cs.v + cs.idle * dt);
        }
        record_credit(port, x, t);
    }
    port.credit_time = t;
}

SimTime Engine::tx_duration(const Port& port, std::int64_t bits) const {
    Rational dur = Rational(bits) * Rational(ps_per_second()) / port.capacity;
    if (!dur.is_integer())
        throw tsn_error("non-integral transmission duration on " + port.from + "->" + port.to);
    return dur.to_int64();
}

SimTime Engine::realize_delay(Port& port, bool var, SimTime) {
    const DelayRealization& r = var ? port.var_real : port.proc_real;
    SimTime lo = var ? port.var_min : port.proc_min;
    SimTime hi = var ? port.var_max : port.proc_max;
    switch (r.mode) {
        case DelayRealization::Mode::Max: return hi;
        case DelayRealization::Mode::Min: return lo;
        case DelayRealization::Mode::Fixed:
            if (r.fixed < lo || r.fixed > hi)
                throw tsn_error("fixed delay outside configured range on " + port.from + "->" +
                                port.to);
            return r.fixed;
        case DelayRealization::Mode::Seeded: {
            if (hi == lo) return lo;
            std::mt19937_64& rng = var ? port.var_rng : port.proc_rng;
            return lo + static_cast<SimTime>(rng() %
                                             static_cast<std::uint64_t>(hi - lo + 1));
        }
    }
    return hi;
}

std::deque<QItem>& Engine::queue_of(Port& port, QueueKind k) {
    switch (k) {
        case QueueKind::Cdt: return port.cdt;
        case QueueKind::A: return port.a;
        case QueueKind::B: return port.b;
        case QueueKind::Be: return port.be;
    }
    return port.be;
}

const std::string& Engine::queue_id_of(const Port& port, QueueKind k) const {
    switch (k) {
        case QueueKind::Cdt: return port.q_id_cdt;
        case QueueKind::A: return port.q_id_a;
        case QueueKind::B: return port.q_id_b;
        case QueueKind::Be: return port.q_id_be;
    }
    return port.q_id_be;
}

Port& Engine::out_port_of(const RuntimePkt& pkt) {
    return ports_[static_cast<std::size_t>(flow_links_[pkt.flow_idx][pkt.hop])];
}

std::string Engine::flow_name(const QItem& item) const {
    if (item.kind == QueueKind::Cdt) return "CDT";
    if (item.kind == QueueKind::Be) return "BE";
    return trace_.packets[pkts_[item.pkt].rec].flow;
}

int Engine::item_seq(const QItem& item) const {
    if (item.pkt >= 0) return trace_.packets[pkts_[item.pkt].rec].seq;
    return item.seq;
}

std::int64_t Engine::item_bits(const QItem& item) const {
    if (item.pkt >= 0) return pkts_[item.pkt].bits;
    return item.bits;
}

void Engine::start_frame(Port& port, QueueKind kind, SimTime t) {
    std::deque<QItem>& q = queue_of(port, kind);
    QItem item = q.front();
    q.pop_front();
    backlog_change(queue_id_of(port, kind), t, -item_bits(item));
    port.transmitting = true;
    port.tx_kind = kind;
    port.tx_item = item;
    if (item.pkt >= 0) {
        RuntimePkt& pkt = pkts_[item.pkt];
        trace_.packets[pkt.rec].hops[pkt.hop].q = t;
    }
    log(t, port.from, queue_id_of(port, kind), "tx_start", flow_name(item), item_seq(item),
        item_bits(item));
    schedule(t + tx_duration(port, item_bits(item)), EV_COMPLETION, port.link_idx);
}

void Engine::try_start(Port& port, SimTime t) {
    if (port.transmitting) return;
    if (!port.cdt.empty()) return start_frame(port, QueueKind::Cdt, t);
    if (port.credit_a.configured && !port.a.empty() && !port.credit_a.v.is_negative())
        return start_frame(port, QueueKind::A, t);
    if (port.credit_b.configured && !port.b.empty() && !port.credit_b.v.is_negative())
        return start_frame(port, QueueKind::B, t);
    if (!port.be.empty()) return start_frame(port, QueueKind::Be, t);
    // Nothing eligible; wake when a blocked AVB class recovers to zero.
    for (TrafficClass x : {TrafficClass::A, TrafficClass::B}) {
        CreditState& cs = x == TrafficClass::A ? port.credit_a : port.credit_b;
        bool backlogged = !(x == TrafficClass::A ? port.a : port.b).empty();
        if (!cs.configured || !backlogged || !cs.v.is_negative()) continue;
        Rational dt = (-cs.v) / cs.idle;  // seconds to reach zero
        SimTime wake = t + (dt * Rational(ps_per_second())).ceil().convert_to<SimTime>();
        schedule(wake, EV_WAKE, port.link_idx);
    }
}

void Engine::handle_completion(Port& port, SimTime t) {
    touch(port, t);
    QItem item = port.tx_item;
    port.transmitting = false;
    log(t, port.from, queue_id_of(port, port.tx_kind), "tx_end", flow_name(item), item_seq(item),
        item_bits(item));
    // Credit reset: queue emptied with positive credit.
    for (TrafficClass x : {TrafficClass::A, TrafficClass::B}) {
        CreditState& cs = x == TrafficClass::A ? port.credit_a : port.credit_b;
        QueueKind own = x == TrafficClass::A ? QueueKind::A : QueueKind::B;
        if (cs.configured && port.tx_kind == own && queue_of(port, own).empty() &&
            cs.v.sign() > 0) {
            cs.v = Rational(0);
            record_credit(port, x, t);
        }
    }
    if (item.pkt < 0) return;  // scripted CDT/BE packets end at the link

    RuntimePkt& pkt = pkts_[item.pkt];
    SimTime d = t + realize_delay(port, true, t);
    d = std::max(d, port.last_d);  // the wire is FIFO
    port.last_d = d;
    if (d == t) node_arrival(item.pkt, t);
    else schedule(d, EV_NODE_ARRIVAL, item.pkt);
}

void Engine::node_arrival(int pkt_idx, SimTime t) {
    RuntimePkt& pkt = pkts_[pkt_idx];
    PacketRecord& rec = trace_.packets[pkt.rec];
    rec.hops[pkt.hop].d = t;
    Port& port = out_port_of(pkt);
    const std::string& node = spec_.links[port.link_idx].to;
    log(t, node, "", "node_arrival", rec.flow, rec.seq, pkt.bits);
    bool final_hop = pkt.hop + 1 >= static_cast<int>(flow_links_[pkt.flow_idx].size());
    if (final_hop) {
        rec.delivered = true;
        log(t, node, "", "delivered", rec.flow, rec.seq, pkt.bits);
        return;
    }
    SimTime dprime = t + realize_delay(port, false, t);
    auto key = std::make_tuple(flow_links_[pkt.flow_idx][pkt.hop + 1],
                               flow_links_[pkt.flow_idx][pkt.hop], static_cast<int>(
                                   spec_.flows[pkt.flow_idx].cls));
    IrState& ir = irs_[ir_index_.at(key)];
    dprime = std::max(dprime, ir.last_dprime);  // enqueue order is FIFO
    ir.last_dprime = dprime;
    if (dprime == t) ir_enqueue(pkt_idx, t);
    else schedule(dprime, EV_IR_ENQUEUE, pkt_idx);
}

void Engine::ir_enqueue(int pkt_idx, SimTime t) {
    RuntimePkt& pkt = pkts_[pkt_idx];
    PacketRecord& rec = trace_.packets[pkt.rec];
    rec.hops[pkt.hop].dprime = t;
    auto key = std::make_tuple(flow_links_[pkt.flow_idx][pkt.hop + 1],
                               flow_links_[pkt.flow_idx][pkt.hop],
                               static_cast<int>(spec_.flows[pkt.flow_idx].cls));
    IrState& ir = irs_[ir_index_.at(key)];
    ir.fifo.push_back(pkt_idx);
    backlog_change(ir.queue_id, t, pkt.bits);
    log(t, ir.node, ir.queue_id, "ir_enqueue", rec.flow, rec.seq, pkt.bits);
    if (ir.fifo.size() == 1) schedule_head(ir, t);
}

SimTime Engine::eligibility_time(IrState& ir, const RuntimePkt& pkt, SimTime now) {
    const model::FlowSpec& f = spec_.flows[pkt.flow_idx];
    RegState& rs = ir.reg[pkt.flow_idx];
    if (f.regulator == model::Regulator::LRQ) return std::max(now, rs.lrq_next_eligible);
    if (!rs.lb_init) {
        rs.lb_level = f.burst;
        rs.lb_time = now;
        rs.lb_init = true;
    }
    Rational level = min(f.burst, rs.lb_level + f.rate * ps_to_seconds(now - rs.lb_time));
    if (level >= Rational(pkt.bits)) return now;
    Rational wait = (Rational(pkt.bits) - level) / f.rate;  // seconds
    return now + (wait * Rational(ps_per_second())).ceil().convert_to<SimTime>();
}

void Engine::consume_regulation(IrState& ir, const RuntimePkt& pkt, SimTime t) {
    const model::FlowSpec& f = spec_.flows[pkt.flow_idx];
    RegState& rs = ir.reg[pkt.flow_idx];
    if (f.regulator == model::Regulator::LRQ) {
        Rational gap = Rational(pkt.bits) / f.rate * Rational(ps_per_second());
        rs.lrq_next_eligible = t + gap.ceil().convert_to<SimTime>();
    } else {
        if (!rs.lb_init) {
            rs.lb_level = f.burst;
            rs.lb_time = t;
            rs.lb_init = true;
        }
        rs.lb_level = min(f.burst, rs.lb_level + f.rate * ps_to_seconds(t - rs.lb_time));
        rs.lb_level -= Rational(pkt.bits);
        rs.lb_time = t;
    }
}

void Engine::schedule_head(IrState& ir, SimTime t) {
    while (!ir.fifo.empty()) {
        RuntimePkt& pkt = pkts_[ir.fifo.front()];
        SimTime elig = eligibility_time(ir, pkt, t);
        if (elig > t) {
            ++ir.gen;
            schedule(elig, EV_REG_RELEASE, static_cast<int>(&ir - irs_.data()), ir.gen);
            return;
        }
        do_release(ir, t);
    }
}

void Engine::do_release(IrState& ir, SimTime t) {
    int pkt_idx = ir.fifo.front();
    ir.fifo.pop_front();
    ++ir.gen;
    RuntimePkt& pkt = pkts_[pkt_idx];
    PacketRecord& rec = trace_.packets[pkt.rec];
    rec.hops[pkt.hop].e = t;
    consume_regulation(ir, pkt, t);
    backlog_change(ir.queue_id, t, -pkt.bits);
    log(t, ir.node, ir.queue_id, "ir_release", rec.flow, rec.seq, pkt.bits);
    // Hand over to the CBFS of the next hop; selection runs at batch end.
    pkt.hop += 1;
    HopLog hop;
    hop.link = flow_links_[pkt.flow_idx][pkt.hop];
    hop.a = t;
    rec.hops.push_back(hop);
    Port& port = out_port_of(pkt);
    touch(port, t);
    QueueKind qk = spec_.flows[pkt.flow_idx].cls == TrafficClass::A ? QueueKind::A : QueueKind::B;
    queue_of(port, qk).push_back(QItem{qk, pkt_idx, 0, 0});
    backlog_change(queue_id_of(port, qk), t, pkt.bits);
    log(t, port.from, queue_id_of(port, qk), "cbfs_arrival", rec.flow, rec.seq, pkt.bits);
    touched_.push_back(port.link_idx);
}

SimTrace Engine::run() {
    setup();
    while (!pq_.empty()) {
        SimTime t = pq_.top().t;
        if (t > horizon_) break;
        touched_.clear();
        while (!pq_.empty() && pq_.top().t == t) {
            Event ev = pq_.top();
            pq_.pop();
            if (++processed_ > scenario_.event_cap)
                throw tsn_error("event cap exceeded (" + std::to_string(scenario_.event_cap) +
                                ")");
            switch (ev.kind) {
                case EV_COMPLETION: {
                    Port& port = ports_[static_cast<std::size_t>(ev.a)];
                    handle_completion(port, t);
                    touched_.push_back(ev.a);
                    break;
                }
                case EV_NODE_ARRIVAL:
                    node_arrival(ev.a, t);
                    break;
                case EV_IR_ENQUEUE:
                    ir_enqueue(ev.a, t);
                    break;
                case EV_REG_RELEASE: {
                    IrState& ir = irs_[static_cast<std::size_t>(ev.a)];
                    if (ir.gen != ev.b || ir.fifo.empty()) break;  // stale
                    do_release(ir, t);
                    schedule_head(ir, t);
                    break;
                }
                case EV_INJECT: {
                    const Injection& inj = scenario_.injections[static_cast<std::size_t>(ev.a)];
                    int fi = flow_idx_.count(inj.flow) ? flow_idx_[inj.flow] : -1;
                    if (fi < 0) throw tsn_error("scenario references unknown flow " + inj.flow);
                    PacketRecord rec;
                    rec.flow = inj.flow;
                    rec.seq = ++flow_seq_counter_[static_cast<std::size_t>(fi)];
                    rec.bits = inj.bits;
                    HopLog hop;
                    hop.link = flow_links_[static_cast<std::size_t>(fi)][0];
                    hop.a = t;
                    rec.hops.push_back(hop);
                    trace_.packets.push_back(std::move(rec));
                    RuntimePkt pkt;
                    pkt.flow_idx = fi;
                    pkt.rec = static_cast<int>(trace_.packets.size()) - 1;
                    pkt.bits = inj.bits;
                    pkt.hop = 0;
                    pkts_.push_back(pkt);
                    Port& port = ports_[static_cast<std::size_t>(hop.link)];
                    touch(port, t);
                    QueueKind qk = spec_.flows[static_cast<std::size_t>(fi)].cls ==
                                           TrafficClass::A
                                       ? QueueKind::A
                                       : QueueKind::B;
                    queue_of(port, qk).push_back(
                        QItem{qk, static_cast<int>(pkts_.size()) - 1, 0, 0});
                    backlog_change(queue_id_of(port, qk), t, inj.bits);
                    log(t, port.from, queue_id_of(port, qk), "cbfs_arrival", inj.flow,
                        trace_.packets.back().seq, inj.bits);
                    touched_.push_back(port.link_idx);
                    break;
                }
                case EV_CDT_ARRIVAL:
                case EV_BE_ARRIVAL: {
                    bool is_cdt = ev.kind == EV_CDT_ARRIVAL;
                    const LinkPacket& lp = is_cdt
                                               ? scenario_.cdt[static_cast<std::size_t>(ev.a)]
                                               : scenario_.be[static_cast<std::size_t>(ev.a)];
                    int li = spec_.link_index(lp.from, lp.to);
                    if (li < 0)
                        throw tsn_error("scenario packet on unknown link (" + lp.from + ", " +
                                        lp.to + ")");
                    Port& port = ports_[static_cast<std::size_t>(li)];
                    touch(port, t);
                    QItem item;
                    item.kind = is_cdt ? QueueKind::Cdt : QueueKind::Be;
                    item.bits = lp.bits;
                    item.seq = is_cdt ? ++port.cdt_seq : ++port.be_seq;
                    queue_of(port, item.kind).push_back(item);
                    backlog_change(queue_id_of(port, item.kind), t, lp.bits);
                    log(t, port.from, queue_id_of(port, item.kind), "cbfs_arrival",
                        is_cdt ? "CDT" : "BE", item.seq, lp.bits);
                    touched_.push_back(li);
                    break;
                }
                case EV_WAKE:
                    touched_.push_back(ev.a);
                    break;
            }
        }
        std::sort(touched_.begin(), touched_.end());
        touched_.erase(std::unique(touched_.begin(), touched_.end()), touched_.end());
        for (int li : touched_) {
            Port& port = ports_[static_cast<std::size_t>(li)];
            touch(port, t);
            try_start(port, t);
        }
    }
    return std::move(trace_);
}

}  // namespace

SimTrace run(const NetworkSpec& spec, const Scenario& scenario, SimTime horizon,
             const RunOptions& options) {
    auto diags = validate_scenario(spec, scenario);
    if (model::has_fatal(diags)) {
        std::string msg = "invalid scenario:";
        for (const auto& d : diags)
            if (d.severity == model::Diagnostic::Severity::Fatal) msg += "\n  " + d.message;
        throw tsn_error(msg);
    }
    Engine engine(spec, scenario, horizon, options);
    return engine.run();
}

}  // namespace tsnbound::sim
