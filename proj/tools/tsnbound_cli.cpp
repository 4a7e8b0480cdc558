#include "CLI11.hpp"

#include "tsnbound/bounds.hpp"
#include "tsnbound/sim/adversarial.hpp"
#include "tsnbound/sim/checks.hpp"
#include "tsnbound/sim/engine.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <optional>

using namespace tsnbound;
using model::NetworkSpec;

namespace {

constexpr int EXIT_VIOLATION = 1;
constexpr int EXIT_INPUT = 2;

struct SpecArgs {
    std::string path;
};

NetworkSpec load_checked(const std::string& path, bool print_diags) {
    model::LoadResult lr = model::load_spec_file(path);
    auto diags = model::validate(lr.spec);
    for (const auto& d : lr.diagnostics)
        if (print_diags) std::cout << "notice: " << d.message << "\n";
    for (const auto& d : diags) {
        const char* tag = d.severity == model::Diagnostic::Severity::Fatal ? "error" : "warning";
        if (print_diags || d.severity == model::Diagnostic::Severity::Fatal)
            std::cout << tag << ": " << d.message << "\n";
    }
    if (model::has_fatal(diags)) throw tsn_error("spec failed validation: " + path);
    return lr.spec;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw tsn_error("cannot write " + path);
    out << content;
}

std::string percent(const Rational& observed, const Rational& bound) {
    if (bound.is_zero()) return "n/a";
    Rational permille = observed / bound * Rational(1000);
    long long rounded =
        ((Rational(2) * permille + Rational(1)) / Rational(2)).floor().convert_to<long long>();
    return std::to_string(rounded / 10) + "." + std::to_string(rounded % 10) + "%";
}

struct ScenarioArgs {
    std::string scenario_path;
    std::string adversarial;      // flow@i,j
    std::string adversarial_e2e;  // flow
    std::int64_t horizon = 0;

    bool any() const {
        return !scenario_path.empty() || !adversarial.empty() || !adversarial_e2e.empty();
    }
};

struct PreparedRun {
    sim::Scenario scenario;
    sim::SimTime horizon;
    std::vector<std::string> diagnostics;
};

PreparedRun prepare(const NetworkSpec& spec, const ScenarioArgs& args) {
    PreparedRun out;
    if (!args.scenario_path.empty()) {
        out.scenario = sim::load_scenario_file(args.scenario_path);
        sim::SimTime last = 0;
        for (const auto& p : out.scenario.injections) last = std::max(last, p.t);
        for (const auto& p : out.scenario.cdt) last = std::max(last, p.t);
        for (const auto& p : out.scenario.be) last = std::max(last, p.t);
        out.horizon = last + 10000000000;  // 10 ms past the last scripted event
    } else if (!args.adversarial.empty()) {
        auto at = args.adversarial.find('@');
        auto comma = args.adversarial.find(',', at);
        if (at == std::string::npos || comma == std::string::npos)
            throw tsn_error("--adversarial expects flow@from,to");
        sim::adversarial::Result adv = sim::adversarial::cbfs_tightness(
            spec, args.adversarial.substr(0, at), args.adversarial.substr(at + 1, comma - at - 1),
            args.adversarial.substr(comma + 1));
        out.scenario = std::move(adv.scenario);
        out.horizon = adv.horizon_hint;
        out.diagnostics = std::move(adv.diagnostics);
    } else if (!args.adversarial_e2e.empty()) {
        sim::adversarial::Result adv = sim::adversarial::e2e_tightness(spec, args.adversarial_e2e);
        out.scenario = std::move(adv.scenario);
        out.horizon = adv.horizon_hint;
        out.diagnostics = std::move(adv.diagnostics);
    } else {
        throw tsn_error("one of --scenario, --adversarial, --adversarial-e2e is required");
    }
    if (args.horizon > 0) out.horizon = args.horizon;
    return out;
}

struct Observation {
    std::string metric, flow, where;
    Rational observed, bound;
};

std::vector<Observation> observations(const sim::SimTrace& trace, const NetworkSpec& spec,
                                      const bounds::BoundsReport& report) {
    std::vector<Observation> out;
    for (const bounds::FlowBounds& f : report.flows) {
        bool any_packet = false;
        for (const auto& p : trace.packets) any_packet |= p.flow == f.flow;
        if (!any_packet) continue;
        for (const bounds::HopBound& h : f.hops) {
            try {
                out.push_back({"S", f.flow, h.from + "->" + h.to,
                               worst_observed(trace, spec, f.flow, sim::Metric::S, h.from, h.to),
                               h.s});
            } catch (const tsn_error&) {
            }
            if (h.h) {
                try {
                    out.push_back({"H", f.flow, h.from + "->" + h.to + "->" + h.next,
                                   worst_observed(trace, spec, f.flow, sim::Metric::H, h.from,
                                                  h.to, h.next),
                                   *h.h});
                } catch (const tsn_error&) {
                }
            }
        }
        try {
            out.push_back({"e2e", f.flow, "",
                           worst_observed(trace, spec, f.flow, sim::Metric::E2E), f.e2e});
        } catch (const tsn_error&) {
        }
    }
    for (const bounds::CbfsQueueBounds& q : report.cbfs) {
        std::string id = sim::cbfs_queue_id(model::to_string(q.cls), q.from, q.to);
        auto it = trace.backlog_max.find(id);
        if (it == trace.backlog_max.end()) continue;
        out.push_back({"backlog", "", id, Rational(it->second), q.backlog});
    }
    for (const bounds::IrQueueBounds& q : report.irs) {
        std::string id = sim::ir_queue_id(model::to_string(q.cls), q.from, q.to, q.next);
        auto it = trace.backlog_max.find(id);
        if (it == trace.backlog_max.end()) continue;
        out.push_back({"backlog", "", id, Rational(it->second), q.backlog});
    }
    return out;
}

std::string format_observation(const Observation& o) {
    std::string name = o.metric == "backlog" ? o.where : o.metric + "(" + o.flow +
                                                              (o.where.empty() ? "" : "," + o.where) +
                                                              ")";
    std::string value = o.metric == "backlog"
                            ? bounds::format_bits(o.observed) + " of " +
                                  bounds::format_bits(o.bound)
                            : bounds::format_duration(o.observed) + " of " +
                                  bounds::format_duration(o.bound);
    return name + ": " + value + " (" + percent(o.observed, o.bound) + ")";
}

std::string bounds_csv(const bounds::BoundsReport& report) {
    std::ostringstream os;
    os << "type,flow,class,from,to,next,value,num,den\n";
    auto row = [&](const std::string& type, const std::string& flow, const std::string& cls,
                   const std::string& from, const std::string& to, const std::string& next,
                   const Rational& v) {
        os << type << "," << flow << "," << cls << "," << from << "," << to << "," << next << ","
           << v.to_decimal_string() << "," << v.num().str() << "," << v.den().str() << "\n";
    };
    for (const bounds::FlowBounds& f : report.flows) {
        for (const bounds::HopBound& h : f.hops) {
            row("S_seconds", f.flow, model::to_string(f.cls), h.from, h.to, "", h.s);
            if (h.h)
                row("H_seconds", f.flow, model::to_string(f.cls), h.from, h.to, h.next, *h.h);
        }
        row("e2e_seconds", f.flow, model::to_string(f.cls), "", "", "", f.e2e);
        row("additive_seconds", f.flow, model::to_string(f.cls), "", "", "", f.additive);
    }
    for (const bounds::CbfsQueueBounds& q : report.cbfs)
        row("cbfs_backlog_bits", "", model::to_string(q.cls), q.from, q.to, "", q.backlog);
    for (const bounds::IrQueueBounds& q : report.irs)
        row("ir_backlog_bits", "", model::to_string(q.cls), q.from, q.to, q.next, q.backlog);
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Latency and backlog bounds for CBS networks with interleaved regulators"};
    app.require_subcommand(1);

    std::string spec_path, format = "table", out_path, scenario_out;
    ScenarioArgs sc_args;
    std::string tighten_flow, tighten_hop;

    auto add_spec = [&](CLI::App* cmd) {
        cmd->add_option("--spec", spec_path, "network spec (json)")->required();
    };
    auto add_scenario = [&](CLI::App* cmd) {
        cmd->add_option("--scenario", sc_args.scenario_path, "scenario file (json)");
        cmd->add_option("--adversarial", sc_args.adversarial,
                        "generate the worst-case pattern for flow@from,to");
        cmd->add_option("--adversarial-e2e", sc_args.adversarial_e2e,
                        "generate the end-to-end worst-case chain for a flow");
        cmd->add_option("--horizon", sc_args.horizon, "simulation horizon in picoseconds");
    };

    CLI::App* validate = app.add_subcommand("validate", "check a network spec");
    add_spec(validate);

    CLI::App* bounds_cmd = app.add_subcommand("bounds", "compute the bounds report");
    add_spec(bounds_cmd);
    bounds_cmd->add_option("--format", format)->check(CLI::IsMember({"table", "json", "csv"}));
    bounds_cmd->add_option("--out", out_path, "write the report here instead of stdout");

    CLI::App* simulate = app.add_subcommand("simulate", "run a packet-level simulation");
    add_spec(simulate);
    add_scenario(simulate);
    simulate->add_option("--out", out_path, "prefix for trace outputs");

    CLI::App* compare = app.add_subcommand("compare", "bounds versus observed values");
    add_spec(compare);
    add_scenario(compare);

    CLI::App* tighten = app.add_subcommand(
        "tighten", "drive a flow to its bound and report the achieved fraction");
    add_spec(tighten);
    tighten->add_option("--flow", tighten_flow, "target flow")->required();
    tighten->add_option("--hop", tighten_hop, "hop as from,to (defaults to end-to-end)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) {
            load_checked(spec_path, true);
            std::cout << "ok\n";
            return 0;
        }

        if (bounds_cmd->parsed()) {
            NetworkSpec spec = load_checked(spec_path, false);
            bounds::BoundsReport report = bounds::full_report(spec);
            std::string rendered;
            if (format == "json") rendered = bounds::to_json(report).dump(2) + "\n";
            else if (format == "csv") rendered = bounds_csv(report);
            else rendered = bounds::to_table(report);
            if (out_path.empty()) std::cout << rendered;
            else write_file(out_path, rendered);
            return 0;
        }

        if (simulate->parsed() || compare->parsed()) {
            NetworkSpec spec = load_checked(spec_path, false);
            PreparedRun pr = prepare(spec, sc_args);
            for (const std::string& d : pr.diagnostics) std::cout << "note: " << d << "\n";
            sim::SimTrace trace = sim::run(spec, pr.scenario, pr.horizon);
            bounds::BoundsReport report = bounds::full_report(spec);

            if (simulate->parsed() && !out_path.empty()) {
                write_file(out_path + ".events.txt", sim::to_event_lines(trace));
                write_file(out_path + ".trace.json", sim::to_json(trace).dump(2) + "\n");
                write_file(out_path + ".backlog.csv", sim::backlog_csv(trace));
                write_file(out_path + ".credit.csv", sim::credit_csv(trace));
                write_file(out_path + ".scenario.json",
                           sim::to_json(pr.scenario).dump(2) + "\n");
            }

            auto obs = observations(trace, spec, report);
            for (const Observation& o : obs) std::cout << format_observation(o) << "\n";

            if (compare->parsed()) {
                auto violations = sim::conformance_check(trace, spec, report);
                for (const auto& v : violations) std::cout << "VIOLATION " << v.describe() << "\n";
                std::cout << (violations.empty() ? "all observations within bounds"
                                                 : "bound violations found")
                          << "\n";
                return violations.empty() ? 0 : EXIT_VIOLATION;
            }
            return 0;
        }

        if (tighten->parsed()) {
            NetworkSpec spec = load_checked(spec_path, false);
            sim::adversarial::Result adv;
            if (tighten_hop.empty()) {
                adv = sim::adversarial::e2e_tightness(spec, tighten_flow);
            } else {
                auto comma = tighten_hop.find(',');
                if (comma == std::string::npos) throw tsn_error("--hop expects from,to");
                adv = sim::adversarial::cbfs_tightness(spec, tighten_flow,
                                                       tighten_hop.substr(0, comma),
                                                       tighten_hop.substr(comma + 1));
            }
            for (const std::string& d : adv.diagnostics) std::cout << "note: " << d << "\n";
            sim::SimTrace trace = sim::run(spec, adv.scenario, adv.horizon_hint);
            if (tighten_hop.empty()) {
                Rational bound = bounds::e2e_bound(spec, tighten_flow);
                Rational seen = worst_observed(trace, spec, tighten_flow, sim::Metric::E2E);
                std::cout << "e2e: achieved " << bounds::format_duration(seen) << " of "
                          << bounds::format_duration(bound) << " (" << percent(seen, bound)
                          << ")\n";
            } else {
                auto comma = tighten_hop.find(',');
                std::string from = tighten_hop.substr(0, comma);
                std::string to = tighten_hop.substr(comma + 1);
                Rational bound = bounds::cbfs_response_bound(spec, tighten_flow, from, to);
                Rational seen =
                    worst_observed(trace, spec, tighten_flow, sim::Metric::S, from, to);
                std::cout << "S: achieved " << bounds::format_duration(seen) << " of "
                          << bounds::format_duration(bound) << " (" << percent(seen, bound)
                          << ")\n";
            }
            auto violations = sim::conformance_check(trace, spec, bounds::full_report(spec));
            return violations.empty() ? 0 : EXIT_VIOLATION;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return EXIT_INPUT;
    }
    return 0;
}
