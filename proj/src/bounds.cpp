#include "tsnbound/bounds.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <set>
#include <sstream>

namespace tsnbound::bounds {

using model::FlowSpec;
using model::LinkDef;
using model::Regulator;

namespace {

const FlowSpec& flow_or_throw(const NetworkSpec& spec, const std::string& id) {
    const FlowSpec* f = spec.find_flow(id);
    if (!f) throw tsn_error("unknown flow " + id);
    return *f;
}

const model::CbsSlopes& cbs_or_throw(const LinkDef& link, TrafficClass x) {
    const auto& cbs = link.params.cbs(x);
    if (!cbs)
        throw tsn_error("link (" + link.from + ", " + link.to + ") has no class " +
                        model::to_string(x) + " CBS configuration");
    return *cbs;
}

void require_on_link(const NetworkSpec& spec, const FlowSpec& f, const std::string& i,
                     const std::string& j) {
    for (std::size_t p = 0; p + 1 < f.path.size(); ++p)
        if (f.path[p] == i && f.path[p + 1] == j) return;
    throw tsn_error("flow " + f.id + " does not traverse link (" + i + ", " + j + ")");
}

}  // namespace

CbsServiceCurve cbs_service_curve(const NetworkSpec& spec, const std::string& i,
                                  const std::string& j, TrafficClass x) {
    const LinkDef& link = spec.link_or_throw(i, j);
    const model::CbsSlopes& cbs = cbs_or_throw(link, x);
    const Rational& c = link.params.capacity;
    const Rational& r = link.params.cdt.rate;
    const Rational& b = link.params.cdt.burst;
    if (c <= r) throw tsn_error("link (" + i + ", " + j + "): CDT saturates the line rate");
    model::LinkAggregates agg = spec.link_aggregates(i, j, x);

    CbsServiceCurve out;
    out.curve.rate = cbs.idle_slope * (c - r) / (cbs.idle_slope - cbs.send_slope);
    if (x == TrafficClass::A) {
        out.curve.latency = (agg.lbar_a + b + r * agg.lbar / c) / (c - r);
        out.credit_max = agg.lbar_a * cbs.idle_slope / c;
    } else {
        const model::CbsSlopes& cbs_a = cbs_or_throw(link, TrafficClass::A);
        Rational blocking = agg.l_e + agg.l_a - agg.lbar_a * cbs_a.idle_slope / cbs_a.send_slope;
        out.curve.latency = (blocking + b + r * agg.lbar / c) / (c - r);
        out.credit_max = cbs.idle_slope * blocking / c;
    }
    return out;
}

Rational cbfs_waiting_bound(const NetworkSpec& spec, const std::string& flow,
                            const std::string& i, const std::string& j) {
    const FlowSpec& f = flow_or_throw(spec, flow);
    require_on_link(spec, f, i, j);
    CbsServiceCurve sc = cbs_service_curve(spec, i, j, f.cls);
    model::LinkAggregates agg = spec.link_aggregates(i, j, f.cls);
    return sc.curve.latency + (agg.b_tot - f.psi()) / sc.curve.rate;
}

Rational cbfs_response_bound(const NetworkSpec& spec, const std::string& flow,
                             const std::string& i, const std::string& j) {
    const FlowSpec& f = flow_or_throw(spec, flow);
    require_on_link(spec, f, i, j);
    const LinkDef& link = spec.link_or_throw(i, j);
    return cbfs_waiting_bound(spec, flow, i, j) + f.psi() / link.params.capacity +
           link.params.t_var_max;
}

Rational combined_bound(const NetworkSpec& spec, const std::string& i, const std::string& j,
                        const std::string& k, TrafficClass x) {
    auto through = spec.flows_through(i, j, k, x);
    if (through.empty())
        throw tsn_error("no class " + std::string(model::to_string(x)) + " flows through (" + i +
                        ", " + j + ", " + k + "): sup over an empty set");
    const LinkDef& link = spec.link_or_throw(i, j);
    CbsServiceCurve sc = cbs_service_curve(spec, i, j, x);
    model::LinkAggregates agg = spec.link_aggregates(i, j, x);

    // Algebraic form.
    bool first = true;
    Rational sup_term;
    for (const FlowSpec* f : through) {
        Rational term = f->psi() / link.params.capacity - f->psi() / sc.curve.rate;
        if (first || term > sup_term) sup_term = term;
        first = false;
    }
    Rational algebraic = sc.curve.latency + agg.b_tot / sc.curve.rate + link.params.t_var_max +
                         sup_term + link.params.t_proc_max;

    // Sup-of-response form; the two must agree exactly.
    first = true;
    Rational sup_s;
    for (const FlowSpec* f : through) {
        Rational s = cbfs_response_bound(spec, f->id, i, j);
        if (first || s > sup_s) sup_s = s;
        first = false;
    }
    Rational from_sup = sup_s + link.params.t_proc_max;
    if (algebraic != from_sup)
        throw tsn_error("combined bound forms disagree at (" + i + ", " + j + ", " + k + ")");
    return algebraic;
}

IrResponse ir_response_bound(const NetworkSpec& spec, const std::string& flow,
                             const std::string& i, const std::string& j, const std::string& k) {
    const FlowSpec& f = flow_or_throw(spec, flow);
    bool through = false;
    for (std::size_t p = 0; p + 2 < f.path.size(); ++p)
        if (f.path[p] == i && f.path[p + 1] == j && f.path[p + 2] == k) through = true;
    if (!through)
        throw tsn_error("flow " + flow + " does not traverse (" + i + ", " + j + ", " + k + ")");
    const LinkDef& link = spec.link_or_throw(i, j);
    Rational h = combined_bound(spec, i, j, k, f.cls) - f.min_packet / link.params.capacity -
                 link.params.t_var_min - link.params.t_proc_min;
    if (h.is_negative()) return {Rational(0), true};
    return {h, false};
}

Rational ir_fifo_delay(const NetworkSpec& spec, const std::string& i, const std::string& j,
                       const std::string& k, TrafficClass x) {
    auto through = spec.flows_through(i, j, k, x);
    if (through.empty())
        throw tsn_error("no class " + std::string(model::to_string(x)) + " flows through (" + i +
                        ", " + j + ", " + k + "): sup over an empty set");
    bool first = true;
    Rational d;
    for (const FlowSpec* f : through) {
        Rational h = ir_response_bound(spec, f->id, i, j, k).value;
        if (first || h > d) d = h;
        first = false;
    }
    return d;
}

Rational e2e_bound(const NetworkSpec& spec, const std::string& flow) {
    const FlowSpec& f = flow_or_throw(spec, flow);
    const auto& path = f.path;
    Rational total;
    for (std::size_t p = 0; p + 2 < path.size(); ++p)
        total += combined_bound(spec, path[p], path[p + 1], path[p + 2], f.cls);
    total += cbfs_response_bound(spec, flow, path[path.size() - 2], path.back());
    return total;
}

Rational additive_e2e(const NetworkSpec& spec, const std::string& flow) {
    const FlowSpec& f = flow_or_throw(spec, flow);
    const auto& path = f.path;
    Rational total;
    for (std::size_t m = 0; m + 1 < path.size(); ++m) {
        // Node path[m] forwarding onto link (path[m], path[m+1]).
        Rational d = cbfs_response_bound(spec, flow, path[m], path[m + 1]);
        if (m > 0) {
            d += ir_response_bound(spec, flow, path[m - 1], path[m], path[m + 1]).value;
            d += spec.link_or_throw(path[m - 1], path[m]).params.t_proc_max;
        }
        total += d;
    }
    return total;
}

namespace {

struct IrAggregates {
    Rational r_s, b_s;  // flows sharing the regulator (F^x_ijk)
    Rational b_w;       // flows on (i,j) headed to other regulators at j
    Rational sup_l;     // sup of max packet over F^x_ijk
    bool ambiguous = false;
};

IrAggregates ir_aggregates(const NetworkSpec& spec, const std::string& i, const std::string& j,
                           const std::string& k, TrafficClass x) {
    auto through = spec.flows_through(i, j, k, x);
    if (through.empty())
        throw tsn_error("no class " + std::string(model::to_string(x)) + " flows through (" + i +
                        ", " + j + ", " + k + ")");
    IrAggregates agg;
    std::set<std::string> in_set;
    for (const FlowSpec* f : through) {
        in_set.insert(f->id);
        agg.r_s += f->rate;
        agg.b_s += f->burst;
        agg.sup_l = max(agg.sup_l, f->max_packet);
    }
    for (const FlowSpec* f : spec.flows_on_link(i, j, x)) {
        if (in_set.count(f->id)) continue;
        if (f->path.back() == j) {
            // Terminates at j: enters no regulator, so it is outside both
            // readings of the competing set; flag the ambiguity.
            agg.ambiguous = true;
            continue;
        }
        agg.b_w += f->burst;
    }
    return agg;
}

}  // namespace

curves::CappedArrival ir_input_arrival(const NetworkSpec& spec, const std::string& i,
                                       const std::string& j, const std::string& k,
                                       TrafficClass x) {
    const LinkDef& link = spec.link_or_throw(i, j);
    IrAggregates agg = ir_aggregates(spec, i, j, k, x);
    CbsServiceCurve sc = cbs_service_curve(spec, i, j, x);
    Rational b_out = curves::output_burst(curves::TokenBucket{agg.r_s, agg.b_s}, agg.b_w,
                                          sc.curve);
    return curves::make_capped_arrival(link.params.capacity, agg.sup_l,
                                       curves::TokenBucket{agg.r_s, b_out});
}

IrBacklog ir_backlog(const NetworkSpec& spec, const std::string& i, const std::string& j,
                     const std::string& k, TrafficClass x) {
    const LinkDef& link = spec.link_or_throw(i, j);
    IrAggregates agg = ir_aggregates(spec, i, j, k, x);
    CbsServiceCurve sc = cbs_service_curve(spec, i, j, x);
    Rational d = ir_fifo_delay(spec, i, j, k, x);
    Rational line_term = link.params.capacity * d + agg.sup_l;
    Rational bucket_term =
        agg.r_s * d + agg.b_s + agg.r_s * (sc.curve.latency + agg.b_w / sc.curve.rate);
    return {min(line_term, bucket_term), agg.b_w, agg.ambiguous};
}

Rational cbfs_backlog(const NetworkSpec& spec, const std::string& i, const std::string& j,
                      TrafficClass x) {
    CbsServiceCurve sc = cbs_service_curve(spec, i, j, x);
    model::LinkAggregates agg = spec.link_aggregates(i, j, x);
    return agg.b_tot + agg.r_tot * sc.curve.latency;
}

const FlowBounds* BoundsReport::find_flow(const std::string& id) const {
    for (const FlowBounds& f : flows)
        if (f.flow == id) return &f;
    return nullptr;
}

const CbfsQueueBounds* BoundsReport::find_cbfs(const std::string& i, const std::string& j,
                                               TrafficClass x) const {
    for (const CbfsQueueBounds& q : cbfs)
        if (q.from == i && q.to == j && q.cls == x) return &q;
    return nullptr;
}

const IrQueueBounds* BoundsReport::find_ir(const std::string& i, const std::string& j,
                                           const std::string& k, TrafficClass x) const {
    for (const IrQueueBounds& q : irs)
        if (q.from == i && q.to == j && q.next == k && q.cls == x) return &q;
    return nullptr;
}

BoundsReport full_report(const NetworkSpec& spec) {
    BoundsReport report;
    report.spec_hash = model::spec_hash(spec);

    std::vector<const FlowSpec*> flows;
    for (const FlowSpec& f : spec.flows) flows.push_back(&f);
    std::sort(flows.begin(), flows.end(),
              [](const FlowSpec* a, const FlowSpec* b) { return a->id < b->id; });

    std::set<std::tuple<std::string, std::string, TrafficClass>> cbfs_keys;
    std::set<std::tuple<std::string, std::string, std::string, TrafficClass>> ir_keys;

    for (const FlowSpec* f : flows) {
        FlowBounds fb;
        fb.flow = f->id;
        fb.cls = f->cls;
        const auto& path = f->path;
        for (std::size_t p = 0; p + 1 < path.size(); ++p) {
            HopBound hop;
            hop.from = path[p];
            hop.to = path[p + 1];
            hop.s = cbfs_response_bound(spec, f->id, hop.from, hop.to);
            if (p + 2 < path.size()) {
                hop.next = path[p + 2];
                IrResponse ir = ir_response_bound(spec, f->id, hop.from, hop.to, hop.next);
                hop.h = ir.value;
                hop.h_clamped = ir.clamped;
                if (ir.clamped)
                    report.notes.push_back("H(" + f->id + "," + hop.from + "," + hop.to + "," +
                                           hop.next + ") clamped to 0");
                ir_keys.insert({hop.from, hop.to, hop.next, f->cls});
            }
            cbfs_keys.insert({hop.from, hop.to, f->cls});
            fb.hops.push_back(std::move(hop));
        }
        fb.e2e = e2e_bound(spec, f->id);
        fb.additive = additive_e2e(spec, f->id);
        report.flows.push_back(std::move(fb));
    }

    for (const auto& [i, j, x] : cbfs_keys) {
        CbfsQueueBounds q;
        q.from = i;
        q.to = j;
        q.cls = x;
        CbsServiceCurve sc = cbs_service_curve(spec, i, j, x);
        q.service_rate = sc.curve.rate;
        q.service_latency = sc.curve.latency;
        q.credit_max = sc.credit_max;
        q.backlog = cbfs_backlog(spec, i, j, x);
        report.cbfs.push_back(std::move(q));
    }

    for (const auto& [i, j, k, x] : ir_keys) {
        IrQueueBounds q;
        q.from = i;
        q.to = j;
        q.next = k;
        q.cls = x;
        q.c = combined_bound(spec, i, j, k, x);
        q.d = ir_fifo_delay(spec, i, j, k, x);
        IrBacklog bl = ir_backlog(spec, i, j, k, x);
        q.backlog = bl.value;
        q.b_w = bl.b_w;
        q.bw_ambiguous = bl.bw_ambiguous;
        if (bl.bw_ambiguous)
            report.notes.push_back("IR (" + i + "," + j + "," + k + "," + model::to_string(x) +
                                   "): flows terminating at " + j +
                                   " make the competing-burst reading ambiguous");
        report.irs.push_back(std::move(q));
    }

    return report;
}

namespace {

using nlohmann::json;

json rat_json(const Rational& r) {
    json j;
    j["num"] = r.num().str();
    j["den"] = r.den().str();
    j["dec"] = r.to_decimal_string();
    return j;
}

Rational rat_from(const json& j) {
    return Rational(BigInt(j.at("num").get<std::string>()),
                    BigInt(j.at("den").get<std::string>()));
}

}  // namespace

nlohmann::json to_json(const BoundsReport& report) {
    json j;
    j["spec_hash"] = report.spec_hash;
    json flows = json::array();
    for (const FlowBounds& f : report.flows) {
        json fj;
        fj["flow"] = f.flow;
        fj["class"] = model::to_string(f.cls);
        json hops = json::array();
        for (const HopBound& h : f.hops) {
            json hj;
            hj["from"] = h.from;
            hj["to"] = h.to;
            hj["s"] = rat_json(h.s);
            if (h.h) {
                hj["next"] = h.next;
                hj["h"] = rat_json(*h.h);
                hj["h_clamped"] = h.h_clamped;
            }
            hops.push_back(std::move(hj));
        }
        fj["hops"] = hops;
        fj["e2e"] = rat_json(f.e2e);
        fj["additive"] = rat_json(f.additive);
        flows.push_back(std::move(fj));
    }
    j["flows"] = flows;
    json cbfs = json::array();
    for (const CbfsQueueBounds& q : report.cbfs) {
        cbfs.push_back({{"from", q.from},
                        {"to", q.to},
                        {"class", model::to_string(q.cls)},
                        {"service_rate", rat_json(q.service_rate)},
                        {"service_latency", rat_json(q.service_latency)},
                        {"credit_max", rat_json(q.credit_max)},
                        {"backlog", rat_json(q.backlog)}});
    }
    j["cbfs"] = cbfs;
    json irs = json::array();
    for (const IrQueueBounds& q : report.irs) {
        irs.push_back({{"from", q.from},
                       {"to", q.to},
                       {"next", q.next},
                       {"class", model::to_string(q.cls)},
                       {"c", rat_json(q.c)},
                       {"d", rat_json(q.d)},
                       {"backlog", rat_json(q.backlog)},
                       {"b_w", rat_json(q.b_w)},
                       {"bw_ambiguous", q.bw_ambiguous}});
    }
    j["irs"] = irs;
    j["notes"] = report.notes;
    return j;
}

BoundsReport report_from_json(const nlohmann::json& j) {
    BoundsReport report;
    report.spec_hash = j.at("spec_hash").get<std::uint64_t>();
    for (const json& fj : j.at("flows")) {
        FlowBounds f;
        f.flow = fj.at("flow").get<std::string>();
        f.cls = model::traffic_class_from_string(fj.at("class").get<std::string>());
        for (const json& hj : fj.at("hops")) {
            HopBound h;
            h.from = hj.at("from").get<std::string>();
            h.to = hj.at("to").get<std::string>();
            h.s = rat_from(hj.at("s"));
            if (hj.contains("h")) {
                h.next = hj.at("next").get<std::string>();
                h.h = rat_from(hj.at("h"));
                h.h_clamped = hj.value("h_clamped", false);
            }
            f.hops.push_back(std::move(h));
        }
        f.e2e = rat_from(fj.at("e2e"));
        f.additive = rat_from(fj.at("additive"));
        report.flows.push_back(std::move(f));
    }
    for (const json& qj : j.at("cbfs")) {
        CbfsQueueBounds q;
        q.from = qj.at("from").get<std::string>();
        q.to = qj.at("to").get<std::string>();
        q.cls = model::traffic_class_from_string(qj.at("class").get<std::string>());
        q.service_rate = rat_from(qj.at("service_rate"));
        q.service_latency = rat_from(qj.at("service_latency"));
        q.credit_max = rat_from(qj.at("credit_max"));
        q.backlog = rat_from(qj.at("backlog"));
        report.cbfs.push_back(std::move(q));
    }
    for (const json& qj : j.at("irs")) {
        IrQueueBounds q;
        q.from = qj.at("from").get<std::string>();
        q.to = qj.at("to").get<std::string>();
        q.next = qj.at("next").get<std::string>();
        q.cls = model::traffic_class_from_string(qj.at("class").get<std::string>());
        q.c = rat_from(qj.at("c"));
        q.d = rat_from(qj.at("d"));
        q.backlog = rat_from(qj.at("backlog"));
        q.b_w = rat_from(qj.at("b_w"));
        q.bw_ambiguous = qj.value("bw_ambiguous", false);
        report.irs.push_back(std::move(q));
    }
    if (j.contains("notes")) report.notes = j.at("notes").get<std::vector<std::string>>();
    return report;
}

std::string format_duration(const Rational& seconds) {
    Rational us = seconds * Rational(1000000);
    if (us.is_integer()) return us.to_decimal_string() + " us";
    return us.to_decimal_string() + " us (" + us.to_fraction_string() + " us)";
}

std::string format_bits(const Rational& bits) {
    if (bits.is_integer()) return bits.to_decimal_string() + " bits";
    return bits.to_decimal_string() + " bits (" + bits.to_fraction_string() + ")";
}

std::string to_table(const BoundsReport& report) {
    std::ostringstream os;
    os << "Per-flow bounds\n";
    for (const FlowBounds& f : report.flows) {
        os << "  " << f.flow << " (class " << model::to_string(f.cls) << ")\n";
        for (const HopBound& h : f.hops) {
            os << "    " << h.from << "->" << h.to << "  S=" << format_duration(h.s);
            if (h.h) {
                os << "  H@" << h.to << "->" << h.next << "=" << format_duration(*h.h);
                if (h.h_clamped) os << " (clamped)";
            }
            os << "\n";
        }
        // Integer-percent ratio of the tight bound to the additive one.
        Rational ratio = f.e2e / f.additive * Rational(100);
        long long pct = ratio.num() == 0
                            ? 0
                            : ((Rational(2) * ratio + Rational(1)) / Rational(2)).floor()
                                  .convert_to<long long>();
        os << "    e2e=" << format_duration(f.e2e) << "  additive=" << format_duration(f.additive)
           << "  ratio=" << pct << "%\n";
    }
    os << "CBFS queues\n";
    for (const CbfsQueueBounds& q : report.cbfs) {
        os << "  " << q.from << "->" << q.to << " class " << model::to_string(q.cls)
           << "  R=" << q.service_rate.to_decimal_string()
           << " bit/s  T=" << format_duration(q.service_latency)
           << "  Vmax=" << format_bits(q.credit_max) << "  backlog<=" << format_bits(q.backlog)
           << "\n";
    }
    os << "Interleaved regulators\n";
    for (const IrQueueBounds& q : report.irs) {
        os << "  " << q.from << "->" << q.to << "->" << q.next << " class "
           << model::to_string(q.cls) << "  C=" << format_duration(q.c)
           << "  D=" << format_duration(q.d) << "  backlog<=" << format_bits(q.backlog);
        if (q.bw_ambiguous) os << "  (b_w ambiguous)";
        os << "\n";
    }
    for (const std::string& n : report.notes) os << "note: " << n << "\n";
    return os.str();
}

}  // namespace tsnbound::bounds
