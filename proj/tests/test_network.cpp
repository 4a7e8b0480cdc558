#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tsnbound/network.hpp"

#include <nlohmann/json.hpp>

#include <set>

using namespace tsnbound;
using namespace tsnbound::model;

namespace {

LoadResult load_cs1() { return load_spec_file(std::string(TSNBOUND_CONFIG_DIR) + "/cs1.json"); }

std::set<std::string> ids(const std::vector<const FlowSpec*>& flows) {
    std::set<std::string> out;
    for (const FlowSpec* f : flows) out.insert(f->id);
    return out;
}

}  // namespace

TEST_CASE("cs1 loads and validates with only stability warnings") {
    LoadResult lr = load_cs1();
    CHECK(lr.diagnostics.empty());
    auto diags = validate(lr.spec);
    CHECK(!has_fatal(diags));
    bool nonstrict = false;
    for (const auto& d : diags) {
        CHECK(d.severity != Diagnostic::Severity::Fatal);
        if (d.message.find("non-strict stability") != std::string::npos) nonstrict = true;
    }
    CHECK(nonstrict);  // aggregate class-A rate equals the service rate
}

TEST_CASE("LRQ burst rewrite produces a notice") {
    nlohmann::json j = to_json(load_cs1().spec);
    j["flows"][0]["burst"] = 5000;
    LoadResult lr = load_spec(j);
    REQUIRE(lr.diagnostics.size() == 1);
    CHECK(lr.diagnostics[0].severity == Diagnostic::Severity::Notice);
    CHECK(lr.spec.flows[0].burst == lr.spec.flows[0].max_packet);
}

TEST_CASE("invariant violations are fatal") {
    nlohmann::json base = to_json(load_cs1().spec);

    SUBCASE("non-positive idle slope") {
        nlohmann::json j = base;
        j["links"][0]["cbs"]["A"]["idle_slope"] = 0;
        auto diags = validate(load_spec(j).spec);
        CHECK(has_fatal(diags));
    }
    SUBCASE("CDT saturating the link") {
        nlohmann::json j = base;
        j["links"][0]["cdt"]["rate"] = 100000000;
        CHECK(has_fatal(validate(load_spec(j).spec)));
    }
    SUBCASE("path through a missing link") {
        nlohmann::json j = base;
        j["flows"][0]["path"] = {"H1", "2", "3"};
        CHECK(has_fatal(validate(load_spec(j).spec)));
    }
    SUBCASE("switch as flow source") {
        nlohmann::json j = base;
        j["flows"][0]["path"] = {"1", "2", "3"};
        CHECK(has_fatal(validate(load_spec(j).spec)));
    }
    SUBCASE("min packet above max") {
        nlohmann::json j = base;
        j["flows"][0]["min_packet"] = 4000;
        CHECK(has_fatal(validate(load_spec(j).spec)));
    }
    SUBCASE("inverted delay range") {
        nlohmann::json j = base;
        j["links"][0]["t_var_min"] = 10;
        CHECK(has_fatal(validate(load_spec(j).spec)));
    }
}

TEST_CASE("flow sets on cs1") {
    NetworkSpec spec = load_cs1().spec;
    CHECK(ids(spec.flows_on_link("H1", "1", TrafficClass::A)) ==
          std::set<std::string>{"f1", "f2"});
    CHECK(spec.flows_on_link("H1", "1", TrafficClass::B).empty());
    CHECK(ids(spec.flows_on_link("4", "H4", TrafficClass::A)) ==
          std::set<std::string>{"f1", "f5"});
    CHECK(ids(spec.flows_through("H1", "1", "2", TrafficClass::A)) ==
          std::set<std::string>{"f1", "f2"});
    CHECK(spec.flows_through("H1", "1", "5", TrafficClass::A).empty());
    CHECK(ids(spec.flows_through("3", "4", "H4", TrafficClass::A)) ==
          std::set<std::string>{"f1"});
    CHECK_THROWS(spec.flows_on_link("H1", "nope", TrafficClass::A));
}

TEST_CASE("flows_through is a subset that covers continuing flows") {
    NetworkSpec spec = load_cs1().spec;
    for (const LinkDef& l : spec.links) {
        auto on_link = spec.flows_on_link(l.from, l.to, TrafficClass::A);
        std::size_t continuing = 0;
        std::size_t covered = 0;
        for (const FlowSpec* f : on_link)
            if (f->path.back() != l.to) ++continuing;
        for (const Node& n : spec.nodes) {
            auto through = spec.flows_through(l.from, l.to, n.id, TrafficClass::A);
            covered += through.size();
            for (const FlowSpec* f : through) {
                bool member = false;
                for (const FlowSpec* g : on_link) member |= g->id == f->id;
                CHECK(member);
            }
        }
        CHECK(covered == continuing);
    }
}

TEST_CASE("link aggregates") {
    NetworkSpec spec = load_cs1().spec;
    LinkAggregates agg = spec.link_aggregates("H1", "1", TrafficClass::A);
    CHECK(agg.b_tot == Rational(3000));
    CHECK(agg.r_tot == Rational(40000000));
    CHECK(agg.l_x == Rational(2000));
    CHECK(agg.lbar_a == Rational(2000));
    CHECK(agg.lbar == Rational(2000));

    // No class-B flows and no BE size: the empty max is zero.
    nlohmann::json j = to_json(spec);
    for (auto& l : j["links"]) l["be_max_packet"] = 0;
    NetworkSpec bare = load_spec(j).spec;
    CHECK(bare.link_aggregates("H1", "1", TrafficClass::A).lbar_a == Rational(0));

    LinkAggregates agg12 = spec.link_aggregates("1", "2", TrafficClass::A);
    CHECK(agg12.b_tot == Rational(3000));  // f1 + f2 continue on (1,2)
}

TEST_CASE("aggregates are independent of flow declaration order") {
    nlohmann::json j = to_json(load_cs1().spec);
    nlohmann::json flows = j["flows"];
    std::reverse(flows.begin(), flows.end());
    j["flows"] = flows;
    NetworkSpec reversed = load_spec(j).spec;
    NetworkSpec original = load_cs1().spec;
    for (const LinkDef& l : original.links) {
        LinkAggregates a = original.link_aggregates(l.from, l.to, TrafficClass::A);
        LinkAggregates b = reversed.link_aggregates(l.from, l.to, TrafficClass::A);
        CHECK(a.b_tot == b.b_tot);
        CHECK(a.r_tot == b.r_tot);
        CHECK(a.lbar == b.lbar);
    }
}

TEST_CASE("spec json round-trips") {
    NetworkSpec spec = load_cs1().spec;
    NetworkSpec again = load_spec(to_json(spec)).spec;
    CHECK(to_json(spec) == to_json(again));
    CHECK(spec_hash(spec) == spec_hash(again));
}
