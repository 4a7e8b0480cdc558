#include "tsnbound/sim/adversarial.hpp"

#include "tsnbound/bounds.hpp"

#include <algorithm>

namespace tsnbound::sim::adversarial {

using model::FlowSpec;
using model::NetworkSpec;
using model::Regulator;
using model::TrafficClass;

namespace {

SimTime ceil_ps(const Rational& seconds) {
    return (seconds * Rational(ps_per_second())).ceil().convert_to<SimTime>();
}

bool integral_ps(const Rational& seconds) {
    return (seconds * Rational(ps_per_second())).is_integer();
}

struct SegmentParams {
    int link_idx = -1;
    std::string i, j;
    Rational c;            // line rate
    SimTime bit_time = 0;  // ps per bit
    Rational cdt_r, cdt_b;
    Rational idle, send;
    Rational big_r, big_t;  // CBS service curve
    Rational b_tot;
    Rational lbar_a;        // blocker size (bits)
    SimTime lbar_a_ps = 0;  // blocker transmission time
    SimTime var_max = 0, proc_max = 0;
    std::vector<const FlowSpec*> companions;  // other class-x flows on the link
};

// Credit replay mirroring the engine's CBS dynamics for one class queue.
struct Replay {
    Rational v;
    SimTime t_free = 0;
    Rational idle, send, c;
    SimTime bit_time = 0;

    // Serve a packet that entered the queue at `arr`; returns start time.
    SimTime serve(SimTime arr, std::int64_t bits) {
        SimTime begin;
        if (arr <= t_free) {
            begin = t_free;
            if (v.is_negative()) {
                SimTime wait = ceil_ps((-v) / idle);
                v += idle * ps_to_seconds(wait);
                begin += wait;
            }
        } else {
            // Queue idle and empty until arr: recovery capped at zero.
            if (v.is_negative()) v = min(Rational(0), v + idle * ps_to_seconds(arr - t_free));
            begin = arr;
            if (v.is_negative()) {
                SimTime wait = ceil_ps((-v) / idle);
                v += idle * ps_to_seconds(wait);
                begin += wait;
            }
        }
        v += send * Rational(bits) / c;
        t_free = begin + bits * bit_time;
        return begin;
    }
};

class Builder {
public:
    Builder(const NetworkSpec& spec, const FlowSpec& flow) : spec_(spec), flow_(flow) {}

    Result build(std::size_t last_seg, bool include_second_companion, bool want_e2e);

private:
    const NetworkSpec& spec_;
    const FlowSpec& flow_;
    Result result_;
    SimTime max_time_ = 0;

    void note(std::string msg) { result_.diagnostics.push_back(std::move(msg)); }
    void emit_cdt(const SegmentParams& sp, SimTime t, std::int64_t bits) {
        result_.scenario.cdt.push_back({t, sp.i, sp.j, bits});
        max_time_ = std::max(max_time_, t);
    }
    void emit_be(const SegmentParams& sp, SimTime t, std::int64_t bits) {
        result_.scenario.be.push_back({t, sp.i, sp.j, bits});
        max_time_ = std::max(max_time_, t);
    }
    void emit_flow(const std::string& flow, SimTime t, std::int64_t bits) {
        result_.scenario.injections.push_back({t, flow, bits});
        max_time_ = std::max(max_time_, t);
    }

    SegmentParams segment_params(std::size_t seg);
    SimTime upstream_transit(const FlowSpec& f, const std::string& node, std::int64_t bits);
    void emit_companion_packet(const SegmentParams& sp, const FlowSpec& comp, SimTime arrive,
                               std::int64_t bits);
    // Emits everything for one segment; returns the replay state positioned
    // just after the CDT replay (line free at s5) plus the segment s5.
    struct SegmentPlan {
        Replay replay;
        SimTime s5 = 0;
        SimTime s_arr = 0;
    };
    SegmentPlan build_segment(const SegmentParams& sp, SimTime s, bool companions_early);
};

SegmentParams Builder::segment_params(std::size_t seg) {
    SegmentParams sp;
    sp.i = flow_.path[seg];
    sp.j = flow_.path[seg + 1];
    sp.link_idx = spec_.link_index(sp.i, sp.j);
    const model::LinkDef& link = spec_.link_or_throw(sp.i, sp.j);
    sp.c = link.params.capacity;
    Rational bt = Rational(ps_per_second()) / sp.c;
    if (!bt.is_integer()) {
        note("link " + sp.i + "->" + sp.j +
             ": line rate does not divide one second in ps; schedule rounded");
        sp.bit_time = bt.ceil().convert_to<SimTime>();
    } else {
        sp.bit_time = bt.to_int64();
    }
    sp.cdt_r = link.params.cdt.rate;
    sp.cdt_b = link.params.cdt.burst;
    const auto& cbs = link.params.cbs(flow_.cls);
    if (!cbs)
        throw tsn_error("link " + sp.i + "->" + sp.j + " lacks class " +
                        model::to_string(flow_.cls) + " CBS configuration");
    sp.idle = cbs->idle_slope;
    sp.send = cbs->send_slope;
    bounds::CbsServiceCurve sc = bounds::cbs_service_curve(spec_, sp.i, sp.j, flow_.cls);
    sp.big_r = sc.curve.rate;
    sp.big_t = sc.curve.latency;
    model::LinkAggregates agg = spec_.link_aggregates(sp.i, sp.j, flow_.cls);
    sp.b_tot = agg.b_tot;
    if (flow_.cls == TrafficClass::B)
        note("class-B target: the blocking pattern uses the class-A construction best-effort");
    sp.lbar_a = agg.lbar_a;
    if (sp.lbar_a > agg.l_e) {
        note("link " + sp.i + "->" + sp.j +
             ": blocking frame capped at the BE maximum; bound may not be attained");
        sp.lbar_a = agg.l_e;
    }
    if (agg.lbar != agg.lbar_a)
        note("link " + sp.i + "->" + sp.j +
             ": class max packet exceeds lower-priority max; CDT window stretched");
    if (!sp.lbar_a.is_integer()) throw tsn_error("non-integer blocker size");
    sp.lbar_a_ps = sp.lbar_a.to_int64() * sp.bit_time;
    sp.var_max = seconds_to_ps(link.params.t_var_max, "t_var_max");
    sp.proc_max = seconds_to_ps(link.params.t_proc_max, "t_proc_max");
    if (link.params.t_var_max != link.params.t_var_min ||
        link.params.t_proc_max != link.params.t_proc_min)
        note("link " + sp.i + "->" + sp.j +
             ": nonzero delay ranges; regulator tightness needs per-packet minima and is not "
             "attained");
    for (const FlowSpec* other : spec_.flows_on_link(sp.i, sp.j, flow_.cls))
        if (other->id != flow_.id) sp.companions.push_back(other);
    return sp;
}

SimTime Builder::upstream_transit(const FlowSpec& f, const std::string& node,
                                  std::int64_t bits) {
    SimTime total = 0;
    for (std::size_t h = 0; h + 1 < f.path.size() && f.path[h] != node; ++h) {
        const model::LinkDef& link = spec_.link_or_throw(f.path[h], f.path[h + 1]);
        Rational tx = Rational(bits) * Rational(ps_per_second()) / link.params.capacity;
        total += tx.ceil().convert_to<SimTime>();
        total += seconds_to_ps(link.params.t_var_max, "t_var_max");
        total += seconds_to_ps(link.params.t_proc_max, "t_proc_max");
        // Shared links with scripted segments would distort this estimate.
        for (std::size_t g = 0; g + 1 < flow_.path.size(); ++g)
            if (flow_.path[g] == f.path[h] && flow_.path[g + 1] == f.path[h + 1])
                note("companion " + f.id + " shares scripted link " + f.path[h] + "->" +
                     f.path[h + 1] + "; its burst may arrive late");
    }
    return total;
}

void Builder::emit_companion_packet(const SegmentParams& sp, const FlowSpec& comp,
                                    SimTime arrive, std::int64_t bits) {
    if (comp.path.front() == sp.i) {
        emit_flow(comp.id, arrive, bits);
        return;
    }
    SimTime transit = upstream_transit(comp, sp.i, bits);
    if (transit > arrive) {
        note("companion " + comp.id + " cannot reach " + sp.i + " by the burst instant");
        emit_flow(comp.id, 0, bits);
        return;
    }
    emit_flow(comp.id, arrive - transit, bits);
}

Builder::SegmentPlan Builder::build_segment(const SegmentParams& sp, SimTime s,
                                            bool companions_early) {
    SegmentPlan plan;
    SimTime eps = companions_early ? sp.bit_time : 0;
    plan.s_arr = s - eps;

    // Low-priority blocker, then the CDT burst held behind it.
    if (sp.lbar_a_ps > 0) {
        SimTime be1 = plan.s_arr - sp.lbar_a_ps;
        if (be1 < 0) throw tsn_error("segment base too early for the blocking frame");
        emit_be(sp, be1, sp.lbar_a.to_int64());
        if (sp.cdt_b.sign() > 0) emit_cdt(sp, be1 + 1, sp.cdt_b.to_int64());
    } else if (sp.cdt_b.sign() > 0) {
        note("no lower-priority blocker on " + sp.i + "->" + sp.j + "; bound not attained");
        emit_cdt(sp, std::max<SimTime>(0, plan.s_arr - 1), sp.cdt_b.to_int64());
    }

    // Sustain CDT so the class backlog is frozen until s1.
    SimTime s1 = plan.s_arr;
    if (sp.cdt_r.sign() > 0 || sp.cdt_b.sign() > 0) {
        Rational window = (sp.cdt_b + sp.cdt_r * ps_to_seconds(sp.lbar_a_ps)) /
                          (sp.c - sp.cdt_r);
        if (!integral_ps(window))
            note("CDT window on " + sp.i + "->" + sp.j + " rounded to the next picosecond");
        s1 = plan.s_arr + ceil_ps(window);
        SimTime cursor = plan.s_arr + (sp.cdt_b.is_integer() ? sp.cdt_b.to_int64() : 0) *
                                          sp.bit_time;
        const std::int64_t quantum = 100;
        while (cursor < s1) {
            std::int64_t bits = std::min<std::int64_t>(quantum, (s1 - cursor) / sp.bit_time);
            if (bits <= 0) break;
            emit_cdt(sp, cursor, bits);
            cursor += bits * sp.bit_time;
        }
        s1 = cursor > plan.s_arr ? cursor : s1;
    } else {
        note("no CDT on " + sp.i + "->" + sp.j + "; response stays one selection instant short");
    }

    // Class burst: every companion's burst, the target's packet after them.
    for (const FlowSpec* comp : sp.companions) {
        Rational rem = comp->burst;
        while (rem >= comp->min_packet) {
            Rational take = min(rem, comp->max_packet);
            if (rem - take > Rational(0) && rem - take < comp->min_packet)
                take = rem - comp->min_packet;  // keep the tail packetizable
            if (!take.is_integer()) {
                note("companion " + comp->id + " burst not packetizable exactly");
                break;
            }
            emit_companion_packet(sp, *comp, plan.s_arr, take.to_int64());
            rem -= take;
        }
        if (rem.sign() > 0)
            note("companion " + comp->id + " burst short by " + rem.to_decimal_string() +
                 " bits");
    }
    if (sp.companions.empty() && flow_.regulator == Regulator::LRQ)
        note("lone LRQ flow on " + sp.i + "->" + sp.j +
             ": the response-time bound needs a second flow in the class queue");

    // Serve-and-recover replay over the companion burst.
    plan.replay.v = Rational(0);
    plan.replay.t_free = s1;
    plan.replay.idle = sp.idle;
    plan.replay.send = sp.send;
    plan.replay.c = sp.c;
    plan.replay.bit_time = sp.bit_time;
    for (const FlowSpec* comp : sp.companions) {
        Rational rem = comp->burst;
        while (rem >= comp->min_packet) {
            Rational take = min(rem, comp->max_packet);
            if (rem - take > Rational(0) && rem - take < comp->min_packet)
                take = rem - comp->min_packet;
            if (!take.is_integer()) break;
            plan.replay.serve(plan.s_arr, take.to_int64());
            rem -= take;
        }
    }

    // Second blocker while the credit is still negative, then the CDT replay
    // holding the line exactly until the target's start of service.
    Rational s5_off = sp.big_t + (sp.b_tot - flow_.psi()) / sp.big_r;
    if (!integral_ps(s5_off))
        note("target start-of-service on " + sp.i + "->" + sp.j + " rounded");
    plan.s5 = s + ceil_ps(s5_off);
    if (plan.replay.v.is_negative()) {
        SimTime s3 = plan.replay.t_free + ceil_ps((-plan.replay.v) / sp.idle);
        SimTime be2 = s3 - sp.bit_time;
        if (be2 <= plan.replay.t_free) {
            note("credit recovery shorter than one bit time on " + sp.i + "->" + sp.j);
            be2 = plan.replay.t_free;
        }
        if (sp.lbar_a_ps > 0) emit_be(sp, be2, sp.lbar_a.to_int64());
        SimTime s4 = be2 + sp.lbar_a_ps;
        // Credit evolution over [t_free, s4]: idle recovery then the blocker.
        plan.replay.v += sp.idle * ps_to_seconds(s4 - plan.replay.t_free -
                                                 sp.lbar_a_ps) ;
        plan.replay.v += sp.idle * ps_to_seconds(sp.lbar_a_ps);
        if (s4 < plan.s5) {
            std::int64_t replay_bits = (plan.s5 - s4) / sp.bit_time;
            if ((plan.s5 - s4) % sp.bit_time != 0)
                note("CDT hold on " + sp.i + "->" + sp.j + " leaves a sub-bit gap");
            if (replay_bits > 0 && sp.cdt_r.sign() > 0) {
                emit_cdt(sp, s4, replay_bits);
            } else if (replay_bits > 0) {
                note("no CDT available for the final hold on " + sp.i + "->" + sp.j +
                     "; bound not attained");
                plan.s5 = s4;
            }
        }
        plan.replay.t_free = std::max(plan.s5, s4);
    } else {
        note("credit non-negative after the class burst on " + sp.i + "->" + sp.j +
             "; target starts immediately");
        plan.s5 = plan.replay.t_free;
    }
    return plan;
}

Result Builder::build(std::size_t last_seg, bool include_second_companion, bool want_e2e) {
    if (flow_.path.size() < 2) throw tsn_error("flow path too short");
    if (last_seg + 1 >= flow_.path.size())
        throw tsn_error("segment index beyond the flow's path");

    std::vector<SegmentParams> params;
    for (std::size_t m = 0; m <= last_seg; ++m) params.push_back(segment_params(m));

    // Segment bases: the target packet reaches segment m's CBFS after the
    // combined per-hop bounds of the preceding segments.
    std::vector<SimTime> base(last_seg + 1);
    base[0] = params[0].lbar_a_ps > 0 ? params[0].lbar_a_ps : params[0].bit_time;
    for (std::size_t m = 0; m + 1 <= last_seg; ++m) {
        Rational c_m = bounds::combined_bound(spec_, flow_.path[m], flow_.path[m + 1],
                                              flow_.path[m + 2], flow_.cls);
        if (!integral_ps(c_m)) note("combined bound not an integral number of ps; chain rounded");
        base[m + 1] = base[m] + ceil_ps(c_m);
    }

    // Target train: spacing at the regulation minimum.
    if (!flow_.psi().is_integer()) throw tsn_error("target packet size not integral");
    std::int64_t psi_bits = flow_.psi().to_int64();
    Rational spacing_s = flow_.psi() / flow_.rate;
    if (!integral_ps(spacing_s)) note("target spacing rounded to the next picosecond");
    SimTime spacing = ceil_ps(spacing_s);

    std::vector<Builder::SegmentPlan> plans;
    for (std::size_t m = 0; m <= last_seg; ++m)
        plans.push_back(build_segment(params[m], base[m], m > 0));

    // Find the train length: the last packet must cross the CBFS of every
    // segment transparently so the regulator chain sets its response.
    int train = 2;
    for (std::size_t m = 0; m <= last_seg; ++m) {
        Replay replay = plans[m].replay;  // state just before the target's first packet
        replay.serve(base[m], psi_bits);
        int k = 2;
        for (; k <= 64; ++k) {
            SimTime arr = base[m] + (k - 1) * spacing;
            SimTime start = replay.serve(arr, psi_bits);
            if (start == arr) break;
        }
        if (k > 64) {
            note("no transparent train packet within 64 on segment " + std::to_string(m));
            k = 8;
        }
        train = std::max(train, k);
    }

    for (int k = 0; k < train; ++k)
        emit_flow(flow_.id, base[0] + k * spacing, psi_bits);

    // Second companion packet: arrives right after the train drains, queues
    // in the regulator behind the target's still-ineligible packets.
    const SegmentParams& last = params[last_seg];
    bool has_next = last_seg + 2 < flow_.path.size();
    if (include_second_companion && has_next) {
        const FlowSpec* mate = nullptr;
        for (const FlowSpec* f :
             spec_.flows_through(last.i, last.j, flow_.path[last_seg + 2], flow_.cls))
            if (f->id != flow_.id && (!mate || f->id < mate->id)) mate = f;
        if (mate) {
            Replay replay = plans[last_seg].replay;
            for (int k = 0; k < train; ++k)
                replay.serve(base[last_seg] + k * spacing, psi_bits);
            SimTime t2 = replay.t_free;
            if (replay.v.is_negative()) t2 += ceil_ps((-replay.v) / last.idle);
            if (!mate->max_packet.is_integer()) throw tsn_error("companion packet not integral");
            // Source regulation of the mate's earlier burst packet.
            Rational min_gap = mate->max_packet / mate->rate;
            SimTime earliest = plans[last_seg].s_arr + ceil_ps(min_gap);
            if (earliest > t2) {
                note("companion " + mate->id + " regulation delays its trailing packet");
                t2 = earliest;
            }
            emit_companion_packet(last, *mate, t2, mate->max_packet.to_int64());
        }
    }

    // Predictions.
    result_.predicted_s = bounds::cbfs_response_bound(spec_, flow_.id, last.i, last.j);
    Rational sup_s = result_.predicted_s;
    for (const FlowSpec* comp : last.companions) {
        bool continues = false;
        if (has_next)
            for (const FlowSpec* f :
                 spec_.flows_through(last.i, last.j, flow_.path[last_seg + 2], flow_.cls))
                if (f->id == comp->id) continues = true;
        if (continues)
            sup_s = max(sup_s, bounds::cbfs_response_bound(spec_, comp->id, last.i, last.j));
    }
    if (has_next) {
        bounds::IrResponse h = bounds::ir_response_bound(spec_, flow_.id, last.i, last.j,
                                                         flow_.path[last_seg + 2]);
        result_.predicted_h = h.value;
        if (sup_s > result_.predicted_s)
            note("another flow attains the combined bound; the target's regulator response "
                 "stays below its bound");
        if (flow_.regulator == Regulator::LRQ && flow_.min_packet != flow_.max_packet)
            note("target min and max packet sizes differ; regulator bound not attained");
    }
    if (want_e2e) result_.predicted_e2e = bounds::e2e_bound(spec_, flow_.id);

    result_.horizon_hint = max_time_ + plans[last_seg].s5 + train * spacing +
                           2 * (plans[last_seg].s5 - base[0]) + 1000000000;
    return std::move(result_);
}

}  // namespace

Result cbfs_tightness(const NetworkSpec& spec, const std::string& flow, const std::string& i,
                      const std::string& j) {
    const FlowSpec* f = spec.find_flow(flow);
    if (!f) throw tsn_error("unknown flow " + flow);
    int seg = -1;
    for (std::size_t h = 0; h + 1 < f->path.size(); ++h)
        if (f->path[h] == i && f->path[h + 1] == j) seg = static_cast<int>(h);
    if (seg < 0) throw tsn_error("flow " + flow + " does not traverse (" + i + ", " + j + ")");
    Builder builder(spec, *f);
    return builder.build(static_cast<std::size_t>(seg), true, false);
}

Result e2e_tightness(const NetworkSpec& spec, const std::string& flow) {
    const FlowSpec* f = spec.find_flow(flow);
    if (!f) throw tsn_error("unknown flow " + flow);
    Builder builder(spec, *f);
    return builder.build(f->path.size() - 2, false, true);
}

}  // namespace tsnbound::sim::adversarial
