#include "tsnbound/network.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace tsnbound::model {

using nlohmann::json;

const char* to_string(TrafficClass c) { return c == TrafficClass::A ? "A" : "B"; }
const char* to_string(Regulator r) { return r == Regulator::LRQ ? "LRQ" : "LB"; }

TrafficClass traffic_class_from_string(const std::string& s) {
    if (s == "A") return TrafficClass::A;
    if (s == "B") return TrafficClass::B;
    throw tsn_error("unknown traffic class: " + s);
}

Regulator regulator_from_string(const std::string& s) {
    if (s == "LRQ") return Regulator::LRQ;
    if (s == "LB") return Regulator::LB;
    throw tsn_error("unknown regulator kind: " + s);
}

bool has_fatal(const std::vector<Diagnostic>& diags) {
    return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) {
        return d.severity == Diagnostic::Severity::Fatal;
    });
}

void NetworkSpec::reindex() {
    node_index_.clear();
    link_index_.clear();
    flow_index_.clear();
    for (std::size_t i = 0; i < nodes.size(); ++i) node_index_.emplace(nodes[i].id, i);
    for (std::size_t i = 0; i < links.size(); ++i)
        link_index_.emplace(std::make_pair(links[i].from, links[i].to), i);
    for (std::size_t i = 0; i < flows.size(); ++i) flow_index_.emplace(flows[i].id, i);
}

bool NetworkSpec::has_node(const std::string& id) const { return node_index_.count(id) > 0; }

const Node* NetworkSpec::find_node(const std::string& id) const {
    auto it = node_index_.find(id);
    return it == node_index_.end() ? nullptr : &nodes[it->second];
}

const LinkDef* NetworkSpec::find_link(const std::string& from, const std::string& to) const {
    auto it = link_index_.find(std::make_pair(from, to));
    return it == link_index_.end() ? nullptr : &links[it->second];
}

const LinkDef& NetworkSpec::link_or_throw(const std::string& from, const std::string& to) const {
    const LinkDef* l = find_link(from, to);
    if (!l) throw tsn_error("unknown link (" + from + ", " + to + ")");
    return *l;
}

const FlowSpec* NetworkSpec::find_flow(const std::string& id) const {
    auto it = flow_index_.find(id);
    return it == flow_index_.end() ? nullptr : &flows[it->second];
}

int NetworkSpec::link_index(const std::string& from, const std::string& to) const {
    auto it = link_index_.find(std::make_pair(from, to));
    return it == link_index_.end() ? -1 : static_cast<int>(it->second);
}

int NetworkSpec::path_index(const FlowSpec& f, const std::string& node) {
    for (std::size_t i = 0; i < f.path.size(); ++i)
        if (f.path[i] == node) return static_cast<int>(i);
    return -1;
}

std::vector<const FlowSpec*> NetworkSpec::flows_on_link(const std::string& i,
                                                        const std::string& j,
                                                        TrafficClass x) const {
    if (!has_node(i) || !has_node(j)) throw tsn_error("unknown node in link (" + i + ", " + j + ")");
    std::vector<const FlowSpec*> out;
    for (const FlowSpec& f : flows) {
        if (f.cls != x) continue;
        for (std::size_t p = 0; p + 1 < f.path.size(); ++p) {
            if (f.path[p] == i && f.path[p + 1] == j) {
                out.push_back(&f);
                break;
            }
        }
    }
    return out;
}

std::vector<const FlowSpec*> NetworkSpec::flows_through(const std::string& i,
                                                        const std::string& j,
                                                        const std::string& k,
                                                        TrafficClass x) const {
    if (!has_node(k)) throw tsn_error("unknown node " + k);
    std::vector<const FlowSpec*> out;
    for (const FlowSpec* f : flows_on_link(i, j, x)) {
        for (std::size_t p = 0; p + 2 < f->path.size(); ++p) {
            if (f->path[p] == i && f->path[p + 1] == j && f->path[p + 2] == k) {
                out.push_back(f);
                break;
            }
        }
    }
    return out;
}

LinkAggregates NetworkSpec::link_aggregates(const std::string& i, const std::string& j,
                                            TrafficClass x) const {
    const LinkDef& link = link_or_throw(i, j);
    LinkAggregates agg;
    agg.l_e = link.params.be_max_packet;
    for (const FlowSpec* f : flows_on_link(i, j, TrafficClass::A))
        agg.l_a = max(agg.l_a, f->max_packet);
    for (const FlowSpec* f : flows_on_link(i, j, TrafficClass::B))
        agg.l_b = max(agg.l_b, f->max_packet);
    for (const FlowSpec* f : flows_on_link(i, j, x)) {
        agg.b_tot += f->burst;
        agg.r_tot += f->rate;
    }
    agg.l_x = x == TrafficClass::A ? agg.l_a : agg.l_b;
    agg.lbar_a = max(agg.l_b, agg.l_e);
    agg.lbar = max(agg.l_a, agg.lbar_a);
    return agg;
}

namespace {

Rational rational_from_json(const json& j, const std::string& what) {
    if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
    if (j.is_object() && j.contains("num") && j.contains("den"))
        return Rational(BigInt(j.at("num").get<std::int64_t>()),
                        BigInt(j.at("den").get<std::int64_t>()));
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        auto slash = s.find('/');
        try {
            if (slash == std::string::npos) return Rational(BigInt(s));
            return Rational(BigInt(s.substr(0, slash)), BigInt(s.substr(slash + 1)));
        } catch (const std::exception&) {
            throw tsn_error("cannot parse rational for " + what + ": " + s);
        }
    }
    throw tsn_error("cannot parse rational for " + what);
}

Rational ps_field(const json& j, const char* key, const std::string& ctx) {
    if (!j.contains(key)) return Rational(0);
    return rational_from_json(j.at(key), ctx + "." + key) / Rational(ps_per_second());
}

json rational_to_json(const Rational& r) {
    if (r.is_integer() && r.num() <= BigInt(INT64_MAX) && r.num() >= BigInt(INT64_MIN))
        return json(r.to_int64());
    json j;
    j["num"] = r.num().str();
    j["den"] = r.den().str();
    return j;
}

json ps_to_json(const Rational& seconds) {
    return rational_to_json(seconds * Rational(ps_per_second()));
}

}  // namespace

LoadResult load_spec(const json& j) {
    LoadResult result;
    NetworkSpec& spec = result.spec;

    if (j.contains("units")) {
        const json& u = j.at("units");
        auto expect = [&](const char* key, const char* want) {
            if (u.contains(key) && u.at(key).get<std::string>() != want)
                throw tsn_error(std::string("unsupported unit for ") + key + ": expected " + want);
        };
        expect("time", "ps");
        expect("rate", "bits_per_second");
        expect("size", "bits");
    }

    for (const json& n : j.at("nodes")) {
        Node node;
        node.id = n.at("id").get<std::string>();
        std::string role = n.value("role", std::string("switch"));
        if (role != "host" && role != "switch") throw tsn_error("unknown node role: " + role);
        node.is_host = role == "host";
        spec.nodes.push_back(std::move(node));
    }

    for (const json& l : j.at("links")) {
        LinkDef link;
        link.from = l.at("from").get<std::string>();
        link.to = l.at("to").get<std::string>();
        std::string ctx = "link(" + link.from + "," + link.to + ")";
        LinkParams& p = link.params;
        p.capacity = rational_from_json(l.at("capacity"), ctx + ".capacity");
        p.t_proc_min = ps_field(l, "t_proc_min", ctx);
        p.t_proc_max = ps_field(l, "t_proc_max", ctx);
        p.t_var_min = ps_field(l, "t_var_min", ctx);
        p.t_var_max = ps_field(l, "t_var_max", ctx);
        p.be_max_packet = l.contains("be_max_packet")
                              ? rational_from_json(l.at("be_max_packet"), ctx + ".be_max_packet")
                              : Rational(0);
        if (l.contains("cdt")) {
            p.cdt.rate = rational_from_json(l.at("cdt").at("rate"), ctx + ".cdt.rate");
            p.cdt.burst = rational_from_json(l.at("cdt").at("burst"), ctx + ".cdt.burst");
        }
        if (l.contains("cbs")) {
            for (auto& [cls, slopes] : l.at("cbs").items()) {
                CbsSlopes s;
                s.idle_slope = rational_from_json(slopes.at("idle_slope"), ctx + ".idle_slope");
                s.send_slope = rational_from_json(slopes.at("send_slope"), ctx + ".send_slope");
                if (cls == "A") p.cbs_a = s;
                else if (cls == "B") p.cbs_b = s;
                else throw tsn_error("unknown CBS class: " + cls);
            }
        }
        spec.links.push_back(std::move(link));
    }

    for (const json& f : j.at("flows")) {
        FlowSpec flow;
        flow.id = f.at("id").get<std::string>();
        std::string ctx = "flow " + flow.id;
        flow.cls = traffic_class_from_string(f.at("class").get<std::string>());
        flow.regulator = regulator_from_string(f.at("regulator").get<std::string>());
        flow.rate = rational_from_json(f.at("rate"), ctx + ".rate");
        flow.max_packet = rational_from_json(f.at("max_packet"), ctx + ".max_packet");
        flow.min_packet = f.contains("min_packet")
                              ? rational_from_json(f.at("min_packet"), ctx + ".min_packet")
                              : flow.max_packet;
        flow.burst = f.contains("burst") ? rational_from_json(f.at("burst"), ctx + ".burst")
                                         : flow.max_packet;
        flow.path = f.at("path").get<std::vector<std::string>>();
        if (flow.regulator == Regulator::LRQ && flow.burst != flow.max_packet) {
            result.diagnostics.push_back(
                {Diagnostic::Severity::Notice,
                 "flow " + flow.id + ": LRQ burst rewritten from " +
                     flow.burst.to_fraction_string() + " to max_packet " +
                     flow.max_packet.to_fraction_string()});
            flow.burst = flow.max_packet;
        }
        spec.flows.push_back(std::move(flow));
    }

    spec.reindex();
    return result;
}

LoadResult load_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw tsn_error("cannot open spec file: " + path);
    json j;
    in >> j;
    return load_spec(j);
}

json to_json(const NetworkSpec& spec) {
    json j;
    j["units"] = {{"time", "ps"}, {"rate", "bits_per_second"}, {"size", "bits"}};
    json nodes = json::array();
    for (const Node& n : spec.nodes)
        nodes.push_back({{"id", n.id}, {"role", n.is_host ? "host" : "switch"}});
    j["nodes"] = nodes;
    json links = json::array();
    for (const LinkDef& l : spec.links) {
        json lj;
        lj["from"] = l.from;
        lj["to"] = l.to;
        lj["capacity"] = rational_to_json(l.params.capacity);
        lj["t_proc_min"] = ps_to_json(l.params.t_proc_min);
        lj["t_proc_max"] = ps_to_json(l.params.t_proc_max);
        lj["t_var_min"] = ps_to_json(l.params.t_var_min);
        lj["t_var_max"] = ps_to_json(l.params.t_var_max);
        lj["be_max_packet"] = rational_to_json(l.params.be_max_packet);
        lj["cdt"] = {{"rate", rational_to_json(l.params.cdt.rate)},
                     {"burst", rational_to_json(l.params.cdt.burst)}};
        json cbs;
        if (l.params.cbs_a)
            cbs["A"] = {{"idle_slope", rational_to_json(l.params.cbs_a->idle_slope)},
                        {"send_slope", rational_to_json(l.params.cbs_a->send_slope)}};
        if (l.params.cbs_b)
            cbs["B"] = {{"idle_slope", rational_to_json(l.params.cbs_b->idle_slope)},
                        {"send_slope", rational_to_json(l.params.cbs_b->send_slope)}};
        if (!cbs.is_null()) lj["cbs"] = cbs;
        links.push_back(std::move(lj));
    }
    j["links"] = links;
    json flows = json::array();
    for (const FlowSpec& f : spec.flows) {
        json fj;
        fj["id"] = f.id;
        fj["class"] = to_string(f.cls);
        fj["regulator"] = to_string(f.regulator);
        fj["rate"] = rational_to_json(f.rate);
        fj["burst"] = rational_to_json(f.burst);
        fj["max_packet"] = rational_to_json(f.max_packet);
        fj["min_packet"] = rational_to_json(f.min_packet);
        fj["path"] = f.path;
        flows.push_back(std::move(fj));
    }
    j["flows"] = flows;
    return j;
}

std::vector<Diagnostic> validate(const NetworkSpec& spec) {
    std::vector<Diagnostic> diags;
    auto fatal = [&](std::string msg) {
        diags.push_back({Diagnostic::Severity::Fatal, std::move(msg)});
    };
    auto warn = [&](std::string msg) {
        diags.push_back({Diagnostic::Severity::Warning, std::move(msg)});
    };

    std::set<std::string> node_ids;
    for (const Node& n : spec.nodes)
        if (!node_ids.insert(n.id).second) fatal("duplicate node id " + n.id);

    std::set<std::pair<std::string, std::string>> link_keys;
    for (const LinkDef& l : spec.links) {
        std::string name = "link (" + l.from + ", " + l.to + ")";
        if (!node_ids.count(l.from)) fatal(name + ": undeclared node " + l.from);
        if (!node_ids.count(l.to)) fatal(name + ": undeclared node " + l.to);
        if (!link_keys.insert({l.from, l.to}).second) fatal("duplicate " + name);
        const LinkParams& p = l.params;
        if (p.capacity.sign() <= 0) fatal(name + ": capacity must be > 0");
        if (p.t_proc_min.is_negative() || p.t_proc_min > p.t_proc_max)
            fatal(name + ": processing delay range must satisfy 0 <= min <= max");
        if (p.t_var_min.is_negative() || p.t_var_min > p.t_var_max)
            fatal(name + ": variable delay range must satisfy 0 <= min <= max");
        if (p.be_max_packet.is_negative()) fatal(name + ": be_max_packet must be >= 0");
        if (p.cdt.rate.is_negative() || p.cdt.burst.is_negative())
            fatal(name + ": CDT rate and burst must be >= 0");
        if (p.cdt.rate >= p.capacity) fatal(name + ": CDT rate must be below link capacity");
        for (TrafficClass x : {TrafficClass::A, TrafficClass::B}) {
            const auto& cbs = p.cbs(x);
            if (!cbs) continue;
            if (cbs->idle_slope.sign() <= 0)
                fatal(name + ": class " + to_string(x) + " idle slope must be > 0");
            if (cbs->send_slope.sign() >= 0)
                fatal(name + ": class " + to_string(x) + " send slope must be < 0");
        }
    }

    std::set<std::string> flow_ids;
    for (const FlowSpec& f : spec.flows) {
        std::string name = "flow " + f.id;
        if (!flow_ids.insert(f.id).second) fatal("duplicate flow id " + f.id);
        if (f.rate.sign() <= 0) fatal(name + ": rate must be > 0");
        if (f.min_packet.sign() <= 0) fatal(name + ": min_packet must be > 0");
        if (f.min_packet > f.max_packet) fatal(name + ": min_packet must be <= max_packet");
        if (f.burst.is_negative()) fatal(name + ": burst must be >= 0");
        if (f.regulator == Regulator::LRQ && f.burst != f.max_packet)
            fatal(name + ": LRQ flow must have burst == max_packet");
        if (f.path.size() < 2) {
            fatal(name + ": path must have at least two nodes");
            continue;
        }
        std::set<std::string> seen;
        bool path_ok = true;
        for (const std::string& n : f.path) {
            if (!node_ids.count(n)) {
                fatal(name + ": undeclared path node " + n);
                path_ok = false;
            }
            if (!seen.insert(n).second) {
                fatal(name + ": path visits node " + n + " twice");
                path_ok = false;
            }
        }
        if (!path_ok) continue;
        const Node* src = spec.find_node(f.path.front());
        const Node* dst = spec.find_node(f.path.back());
        if (src && !src->is_host) fatal(name + ": source " + f.path.front() + " is not a host");
        if (dst && !dst->is_host) fatal(name + ": destination " + f.path.back() + " is not a host");
        for (std::size_t p = 0; p + 1 < f.path.size(); ++p) {
            const LinkDef* l = spec.find_link(f.path[p], f.path[p + 1]);
            if (!l) {
                fatal(name + ": no link (" + f.path[p] + ", " + f.path[p + 1] + ")");
                continue;
            }
            if (!l->params.cbs(f.cls))
                fatal(name + ": link (" + f.path[p] + ", " + f.path[p + 1] +
                      ") has no CBS configuration for class " + to_string(f.cls));
        }
    }

    if (has_fatal(diags)) return diags;

    // Stability: R^x_ij must exceed the aggregate class rate for the output
    // arrival curve propagation of the IR input curve to be finite.
    for (const LinkDef& l : spec.links) {
        for (TrafficClass x : {TrafficClass::A, TrafficClass::B}) {
            const auto& cbs = l.params.cbs(x);
            if (!cbs) continue;
            auto flows = spec.flows_on_link(l.from, l.to, x);
            if (flows.empty()) continue;
            Rational sum;
            for (const FlowSpec* f : flows) sum += f->rate;
            Rational r_x = cbs->idle_slope * (l.params.capacity - l.params.cdt.rate) /
                           (cbs->idle_slope - cbs->send_slope);
            std::string name = "link (" + l.from + ", " + l.to + ") class " + to_string(x);
            if (sum > r_x)
                warn(name + ": aggregate rate " + sum.to_decimal_string() +
                     " exceeds service rate " + r_x.to_decimal_string() +
                     " (unstable; output-curve propagation is invalid)");
            else if (sum == r_x)
                warn(name + ": non-strict stability (aggregate rate equals service rate " +
                     r_x.to_decimal_string() + ")");
        }
    }

    return diags;
}

std::uint64_t spec_hash(const NetworkSpec& spec) {
    std::string dump = to_json(spec).dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace tsnbound::model
