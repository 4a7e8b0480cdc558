#include "tsnbound/sim/scenario.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <map>

namespace tsnbound::sim {

using model::Diagnostic;
using model::NetworkSpec;

namespace {

const char* mode_name(DelayRealization::Mode m) {
    switch (m) {
        case DelayRealization::Mode::Max: return "max";
        case DelayRealization::Mode::Min: return "min";
        case DelayRealization::Mode::Fixed: return "fixed";
        case DelayRealization::Mode::Seeded: return "seeded";
    }
    return "max";
}

DelayRealization realization_from_json(const nlohmann::json& j) {
    DelayRealization r;
    std::string mode = j.value("mode", std::string("max"));
    if (mode == "max") r.mode = DelayRealization::Mode::Max;
    else if (mode == "min") r.mode = DelayRealization::Mode::Min;
    else if (mode == "fixed") {
        r.mode = DelayRealization::Mode::Fixed;
        r.fixed = j.at("value").get<SimTime>();
    } else if (mode == "seeded") {
        r.mode = DelayRealization::Mode::Seeded;
        r.seed = j.at("seed").get<std::uint64_t>();
    } else {
        throw tsn_error("unknown delay realization mode: " + mode);
    }
    return r;
}

nlohmann::json realization_to_json(const DelayRealization& r) {
    nlohmann::json j;
    j["mode"] = mode_name(r.mode);
    if (r.mode == DelayRealization::Mode::Fixed) j["value"] = r.fixed;
    if (r.mode == DelayRealization::Mode::Seeded) j["seed"] = r.seed;
    return j;
}

}  // namespace

nlohmann::json to_json(const Scenario& s) {
    nlohmann::json j;
    nlohmann::json inj = nlohmann::json::array();
    for (const Injection& p : s.injections)
        inj.push_back({{"t", p.t}, {"flow", p.flow}, {"bits", p.bits}});
    j["packets"] = inj;
    nlohmann::json cdt = nlohmann::json::array();
    for (const LinkPacket& p : s.cdt)
        cdt.push_back({{"t", p.t}, {"from", p.from}, {"to", p.to}, {"bits", p.bits}});
    j["cdt"] = cdt;
    nlohmann::json be = nlohmann::json::array();
    for (const LinkPacket& p : s.be)
        be.push_back({{"t", p.t}, {"from", p.from}, {"to", p.to}, {"bits", p.bits}});
    j["be"] = be;
    nlohmann::json var;
    for (const auto& [link, r] : s.var_delay)
        var[link.first + "->" + link.second] = realization_to_json(r);
    j["t_var"] = var;
    nlohmann::json proc;
    for (const auto& [link, r] : s.proc_delay)
        proc[link.first + "->" + link.second] = realization_to_json(r);
    j["t_proc"] = proc;
    j["default_t_var"] = realization_to_json(s.default_var);
    j["default_t_proc"] = realization_to_json(s.default_proc);
    j["event_cap"] = s.event_cap;
    return j;
}

namespace {

std::pair<std::string, std::string> parse_link_key(const std::string& key) {
    auto pos = key.find("->");
    if (pos == std::string::npos) throw tsn_error("bad link key: " + key);
    return {key.substr(0, pos), key.substr(pos + 2)};
}

}  // namespace

Scenario scenario_from_json(const nlohmann::json& j) {
    Scenario s;
    if (j.contains("packets"))
        for (const auto& p : j.at("packets"))
            s.injections.push_back({p.at("t").get<SimTime>(), p.at("flow").get<std::string>(),
                                    p.at("bits").get<std::int64_t>()});
    if (j.contains("cdt"))
        for (const auto& p : j.at("cdt"))
            s.cdt.push_back({p.at("t").get<SimTime>(), p.at("from").get<std::string>(),
                             p.at("to").get<std::string>(), p.at("bits").get<std::int64_t>()});
    if (j.contains("be"))
        for (const auto& p : j.at("be"))
            s.be.push_back({p.at("t").get<SimTime>(), p.at("from").get<std::string>(),
                            p.at("to").get<std::string>(), p.at("bits").get<std::int64_t>()});
    if (j.contains("t_var"))
        for (const auto& [key, r] : j.at("t_var").items())
            s.var_delay[parse_link_key(key)] = realization_from_json(r);
    if (j.contains("t_proc"))
        for (const auto& [key, r] : j.at("t_proc").items())
            s.proc_delay[parse_link_key(key)] = realization_from_json(r);
    if (j.contains("default_t_var")) s.default_var = realization_from_json(j.at("default_t_var"));
    if (j.contains("default_t_proc"))
        s.default_proc = realization_from_json(j.at("default_t_proc"));
    if (j.contains("event_cap")) s.event_cap = j.at("event_cap").get<std::int64_t>();
    return s;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw tsn_error("cannot open scenario file: " + path);
    nlohmann::json j;
    in >> j;
    return scenario_from_json(j);
}

std::vector<Diagnostic> validate_scenario(const NetworkSpec& spec, const Scenario& scenario) {
    std::vector<Diagnostic> diags;
    auto fatal = [&](std::string msg) {
        diags.push_back({Diagnostic::Severity::Fatal, std::move(msg)});
    };

    auto check_tx_integral = [&](std::int64_t bits, const model::LinkDef& link,
                                 const std::string& what) {
        Rational tx = Rational(bits) * Rational(ps_per_second()) / link.params.capacity;
        if (!tx.is_integer())
            fatal(what + ": " + std::to_string(bits) + " bits on link (" + link.from + ", " +
                  link.to + ") is not an integral number of picoseconds");
    };

    // Per-flow ordered injections for regulation replay.
    std::map<std::string, std::vector<const Injection*>> per_flow;
    for (const Injection& p : scenario.injections) {
        const model::FlowSpec* f = spec.find_flow(p.flow);
        if (!f) {
            fatal("scenario references unknown flow " + p.flow);
            continue;
        }
        if (p.t < 0) fatal("flow " + p.flow + ": negative injection time");
        Rational bits(p.bits);
        if (bits < f->min_packet || bits > f->max_packet)
            fatal("flow " + p.flow + ": packet of " + std::to_string(p.bits) +
                  " bits outside [M_f, L_f]");
        for (std::size_t h = 0; h + 1 < f->path.size(); ++h)
            check_tx_integral(p.bits, spec.link_or_throw(f->path[h], f->path[h + 1]),
                              "flow " + p.flow);
        per_flow[p.flow].push_back(&p);
    }

    for (auto& [flow_id, packets] : per_flow) {
        const model::FlowSpec* f = spec.find_flow(flow_id);
        std::stable_sort(packets.begin(), packets.end(),
                         [](const Injection* a, const Injection* b) { return a->t < b->t; });
        if (f->regulator == model::Regulator::LRQ) {
            for (std::size_t n = 0; n + 1 < packets.size(); ++n) {
                Rational gap = ps_to_seconds(packets[n + 1]->t - packets[n]->t);
                Rational need = Rational(packets[n]->bits) / f->rate;
                if (gap < need)
                    fatal("flow " + flow_id + ": LRQ source spacing violated at t=" +
                          std::to_string(packets[n + 1]->t));
            }
        } else {
            Rational level = f->burst;
            SimTime prev = packets.empty() ? 0 : packets.front()->t;
            for (const Injection* p : packets) {
                level = min(f->burst, level + f->rate * ps_to_seconds(p->t - prev));
                prev = p->t;
                if (level < Rational(p->bits)) {
                    fatal("flow " + flow_id + ": LB source conformance violated at t=" +
                          std::to_string(p->t));
                    break;
                }
                level -= Rational(p->bits);
            }
        }
    }

    auto check_link_packets = [&](const std::vector<LinkPacket>& packets, const char* what) {
        for (const LinkPacket& p : packets) {
            const model::LinkDef* link = spec.find_link(p.from, p.to);
            if (!link) {
                fatal(std::string(what) + " packet on unknown link (" + p.from + ", " + p.to + ")");
                continue;
            }
            if (p.bits <= 0) fatal(std::string(what) + " packet with non-positive size");
            if (p.t < 0) fatal(std::string(what) + " packet with negative time");
            check_tx_integral(p.bits, *link, what);
        }
    };
    check_link_packets(scenario.cdt, "CDT");
    check_link_packets(scenario.be, "BE");

    for (const auto& [link, r] : scenario.var_delay)
        if (!spec.find_link(link.first, link.second))
            fatal("t_var realization for unknown link (" + link.first + ", " + link.second + ")");
    for (const auto& [link, r] : scenario.proc_delay)
        if (!spec.find_link(link.first, link.second))
            fatal("t_proc realization for unknown link (" + link.first + ", " + link.second + ")");

    return diags;
}

}  // namespace tsnbound::sim
