#include "tsnbound/sim/randomgen.hpp"

#include <algorithm>
#include <set>

namespace tsnbound::sim::randomgen {

using model::FlowSpec;
using model::LinkDef;
using model::NetworkSpec;
using model::Regulator;
using model::TrafficClass;

namespace {

std::int64_t pick(std::mt19937_64& rng, std::initializer_list<std::int64_t> values) {
    std::vector<std::int64_t> v(values);
    return v[rng() % v.size()];
}

std::int64_t uniform(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

}  // namespace

NetworkSpec random_spec(std::mt19937_64& rng) {
    for (int attempt = 0; attempt < 100; ++attempt) {
        NetworkSpec spec;
        int n_switches = static_cast<int>(uniform(rng, 1, 3));
        int n_hosts = static_cast<int>(uniform(rng, 2, std::min<std::int64_t>(4, 6 - n_switches)));
        for (int s = 0; s < n_switches; ++s)
            spec.nodes.push_back({"S" + std::to_string(s + 1), false});
        std::vector<int> host_attach;
        for (int h = 0; h < n_hosts; ++h) {
            spec.nodes.push_back({"H" + std::to_string(h + 1), true});
            host_attach.push_back(static_cast<int>(uniform(rng, 0, n_switches - 1)));
        }
        bool with_b = rng() % 3 == 0;

        auto add_link = [&](const std::string& from, const std::string& to) {
            LinkDef link;
            link.from = from;
            link.to = to;
            model::LinkParams& p = link.params;
            // Rates that divide one second in picoseconds keep every duration
            // integral.
            p.capacity = Rational(pick(rng, {50000000, 100000000, 200000000}));
            std::int64_t cdt_r = pick(rng, {0, 5000000, 10000000, 20000000});
            std::int64_t cdt_b = cdt_r == 0 ? 0 : pick(rng, {0, 1000, 2000, 4000});
            p.cdt = curves::TokenBucket{Rational(cdt_r), Rational(cdt_b)};
            p.be_max_packet = Rational(pick(rng, {1000, 1500, 2000}));
            std::int64_t var_max = pick(rng, {0, 0, 1000000, 2000000});   // ps
            std::int64_t proc_max = pick(rng, {0, 0, 500000, 1000000});
            p.t_var_min = ps_to_seconds(var_max > 0 ? uniform(rng, 0, var_max / 2) : 0);
            p.t_var_max = ps_to_seconds(var_max);
            p.t_proc_min = ps_to_seconds(proc_max > 0 ? uniform(rng, 0, proc_max / 2) : 0);
            p.t_proc_max = ps_to_seconds(proc_max);
            Rational idle_a = p.capacity * Rational(pick(rng, {1, 2, 2}), 4);
            p.cbs_a = model::CbsSlopes{idle_a, idle_a - p.capacity};
            if (with_b) {
                Rational idle_b = p.capacity / Rational(pick(rng, {4, 8}));
                p.cbs_b = model::CbsSlopes{idle_b, idle_b - p.capacity};
            }
            spec.links.push_back(std::move(link));
        };

        // Switch backbone (a line, both directions) and host access links.
        for (int s = 0; s + 1 < n_switches; ++s) {
            add_link("S" + std::to_string(s + 1), "S" + std::to_string(s + 2));
            add_link("S" + std::to_string(s + 2), "S" + std::to_string(s + 1));
        }
        for (int h = 0; h < n_hosts; ++h) {
            add_link("H" + std::to_string(h + 1), "S" + std::to_string(host_attach[h] + 1));
            add_link("S" + std::to_string(host_attach[h] + 1), "H" + std::to_string(h + 1));
        }
        spec.reindex();

        int n_flows = static_cast<int>(uniform(rng, 1, 8));
        for (int fi = 0; fi < n_flows; ++fi) {
            FlowSpec f;
            f.id = "f" + std::to_string(fi + 1);
            f.cls = with_b && rng() % 3 == 0 ? TrafficClass::B : TrafficClass::A;
            f.regulator = rng() % 2 == 0 ? Regulator::LRQ : Regulator::LB;
            int src = static_cast<int>(uniform(rng, 0, n_hosts - 1));
            int dst = static_cast<int>(uniform(rng, 0, n_hosts - 1));
            if (dst == src) dst = (src + 1) % n_hosts;
            f.path.push_back("H" + std::to_string(src + 1));
            int s_from = host_attach[src];
            int s_to = host_attach[dst];
            int step = s_from <= s_to ? 1 : -1;
            for (int s = s_from; s != s_to + step; s += step)
                f.path.push_back("S" + std::to_string(s + 1));
            f.path.push_back("H" + std::to_string(dst + 1));
            f.rate = Rational(pick(rng, {1000000, 2000000, 2500000, 4000000, 5000000}));
            std::int64_t max_packet = 100 * uniform(rng, 4, 20);
            f.max_packet = Rational(max_packet);
            f.min_packet = Rational(100 * uniform(rng, 1, max_packet / 100));
            f.burst = f.regulator == Regulator::LRQ
                          ? f.max_packet
                          : f.max_packet * Rational(uniform(rng, 1, 3));
            spec.flows.push_back(std::move(f));
        }
        spec.reindex();

        // Keep only strictly stable configurations.
        auto diags = model::validate(spec);
        bool ok = !model::has_fatal(diags);
        for (const auto& d : diags)
            if (d.severity == model::Diagnostic::Severity::Warning) ok = false;
        if (ok && !spec.flows.empty()) return spec;
    }
    throw tsn_error("random spec generation failed");
}

Scenario random_scenario(const NetworkSpec& spec, std::mt19937_64& rng, SimTime horizon) {
    Scenario sc;
    for (const FlowSpec& f : spec.flows) {
        SimTime t = uniform(rng, 0, horizon / 4);
        Rational level = f.burst;
        SimTime prev = t;
        int packets = 0;
        while (t < horizon && packets < 200) {
            std::int64_t lo = f.min_packet.to_int64();
            std::int64_t hi = f.max_packet.to_int64();
            std::int64_t bits = lo + 100 * uniform(rng, 0, (hi - lo) / 100);
            if (f.regulator == Regulator::LRQ) {
                sc.injections.push_back({t, f.id, bits});
                Rational gap = Rational(bits) / f.rate;
                SimTime gap_ps = (gap * Rational(ps_per_second())).ceil().convert_to<SimTime>();
                t += gap_ps + (rng() % 2 ? uniform(rng, 0, gap_ps) : 0);
            } else {
                level = min(f.burst, level + f.rate * ps_to_seconds(t - prev));
                prev = t;
                if (level < Rational(bits)) {
                    Rational wait = (Rational(bits) - level) / f.rate;
                    t += (wait * Rational(ps_per_second())).ceil().convert_to<SimTime>();
                    continue;
                }
                level -= Rational(bits);
                sc.injections.push_back({t, f.id, bits});
                t += uniform(rng, 100000, horizon / 8);
            }
            ++packets;
        }
    }

    for (const LinkDef& link : spec.links) {
        if (link.params.cdt.rate.sign() > 0) {
            Rational level = link.params.cdt.burst;
            SimTime t = uniform(rng, 0, horizon / 2);
            SimTime prev = t;
            int n = 0;
            while (t < horizon && n < 100) {
                level = min(link.params.cdt.burst,
                            level + link.params.cdt.rate * ps_to_seconds(t - prev));
                prev = t;
                std::int64_t avail = level.floor().convert_to<std::int64_t>();
                if (avail >= 100) {
                    std::int64_t bits = 100 * uniform(rng, 1, avail / 100);
                    level -= Rational(bits);
                    sc.cdt.push_back({t, link.from, link.to, bits});
                    ++n;
                }
                t += uniform(rng, 100000, horizon / 6);
            }
        }
        if (link.params.be_max_packet.sign() > 0 && rng() % 2) {
            SimTime t = uniform(rng, 0, horizon / 2);
            int n = 0;
            while (t < horizon && n < 50) {
                std::int64_t hi = link.params.be_max_packet.to_int64();
                sc.be.push_back({t, link.from, link.to, 100 * uniform(rng, 1, hi / 100)});
                t += uniform(rng, 200000, horizon / 4);
                ++n;
            }
        }
        sc.var_delay[{link.from, link.to}] =
            DelayRealization{DelayRealization::Mode::Seeded, 0, rng()};
        sc.proc_delay[{link.from, link.to}] =
            DelayRealization{DelayRealization::Mode::Seeded, 0, rng()};
    }
    return sc;
}

}  // namespace tsnbound::sim::randomgen
