#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tsnbound/bounds.hpp"
#include "tsnbound/sim/randomgen.hpp"

#include <nlohmann/json.hpp>

#include <random>

using namespace tsnbound;
using namespace tsnbound::sim;
using model::NetworkSpec;
using model::TrafficClass;

namespace {

std::vector<std::tuple<std::string, std::string, std::string, TrafficClass>> trios(
    const NetworkSpec& spec) {
    std::vector<std::tuple<std::string, std::string, std::string, TrafficClass>> out;
    for (const model::FlowSpec& f : spec.flows)
        for (std::size_t p = 0; p + 2 < f.path.size(); ++p)
            out.push_back({f.path[p], f.path[p + 1], f.path[p + 2], f.cls});
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

TEST_CASE("response bound strictly improves on the aggregate bound") {
    std::mt19937_64 rng(101);
    for (int i = 0; i < 40; ++i) {
        NetworkSpec spec = randomgen::random_spec(rng);
        for (const model::FlowSpec& f : spec.flows) {
            for (std::size_t p = 0; p + 1 < f.path.size(); ++p) {
                const std::string& a = f.path[p];
                const std::string& b = f.path[p + 1];
                bounds::CbsServiceCurve sc = bounds::cbs_service_curve(spec, a, b, f.cls);
                const model::LinkDef& link = spec.link_or_throw(a, b);
                REQUIRE(sc.curve.rate < link.params.capacity);
                model::LinkAggregates agg = spec.link_aggregates(a, b, f.cls);
                Rational classical = sc.curve.latency + agg.b_tot / sc.curve.rate +
                                     link.params.t_var_max;
                CHECK(bounds::cbfs_response_bound(spec, f.id, a, b) < classical);
            }
        }
    }
}

TEST_CASE("both forms of the combined bound agree on random specs") {
    // combined_bound throws when its algebraic and sup-of-response forms
    // disagree, so evaluating every trio is the property.
    std::mt19937_64 rng(202);
    for (int i = 0; i < 40; ++i) {
        NetworkSpec spec = randomgen::random_spec(rng);
        for (const auto& [a, b, c, cls] : trios(spec))
            CHECK_NOTHROW(bounds::combined_bound(spec, a, b, c, cls));
    }
}

TEST_CASE("the end-to-end bound never exceeds the additive one") {
    std::mt19937_64 rng(303);
    for (int i = 0; i < 40; ++i) {
        NetworkSpec spec = randomgen::random_spec(rng);
        for (const model::FlowSpec& f : spec.flows)
            CHECK(bounds::e2e_bound(spec, f.id) <= bounds::additive_e2e(spec, f.id));
    }
}

TEST_CASE("regulator backlog equals the curve-algebra deviation on random specs") {
    std::mt19937_64 rng(404);
    for (int i = 0; i < 40; ++i) {
        NetworkSpec spec = randomgen::random_spec(rng);
        for (const auto& [a, b, c, cls] : trios(spec)) {
            curves::CappedArrival arrival = bounds::ir_input_arrival(spec, a, b, c, cls);
            Rational d = bounds::ir_fifo_delay(spec, a, b, c, cls);
            Rational via_curves =
                curves::backlog_bound(curves::ArrivalCurve(arrival), curves::make_impulse(d));
            CHECK(bounds::ir_backlog(spec, a, b, c, cls).value == via_curves);
        }
    }
}

TEST_CASE("reports round-trip losslessly on random specs") {
    std::mt19937_64 rng(505);
    for (int i = 0; i < 10; ++i) {
        NetworkSpec spec = randomgen::random_spec(rng);
        bounds::BoundsReport report = bounds::full_report(spec);
        bounds::BoundsReport again = bounds::report_from_json(bounds::to_json(report));
        CHECK(bounds::to_json(again) == bounds::to_json(report));
    }
}

TEST_CASE("report queries are deterministic across shuffled flow order") {
    std::mt19937_64 rng(606);
    NetworkSpec spec = randomgen::random_spec(rng);
    nlohmann::json j = model::to_json(spec);
    nlohmann::json flows = j["flows"];
    std::reverse(flows.begin(), flows.end());
    j["flows"] = flows;
    NetworkSpec shuffled = model::load_spec(j).spec;
    bounds::BoundsReport a = bounds::full_report(spec);
    bounds::BoundsReport b = bounds::full_report(shuffled);
    REQUIRE(a.flows.size() == b.flows.size());
    for (std::size_t i = 0; i < a.flows.size(); ++i) {
        CHECK(a.flows[i].flow == b.flows[i].flow);
        CHECK(a.flows[i].e2e == b.flows[i].e2e);
        CHECK(a.flows[i].additive == b.flows[i].additive);
    }
}
