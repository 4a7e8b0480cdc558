#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tsnbound/bounds.hpp"

#include <nlohmann/json.hpp>

using namespace tsnbound;
using namespace tsnbound::bounds;
using model::NetworkSpec;
using model::TrafficClass;

namespace {

Rational us(std::int64_t v) { return Rational(v, 1000000); }
Rational mbps(std::int64_t v) { return Rational(v) * Rational(1000000); }

NetworkSpec cs1() {
    return model::load_spec_file(std::string(TSNBOUND_CONFIG_DIR) + "/cs1.json").spec;
}
NetworkSpec cs2() {
    return model::load_spec_file(std::string(TSNBOUND_CONFIG_DIR) + "/cs2.json").spec;
}

}  // namespace

TEST_CASE("CBS service curve for class A on cs1") {
    NetworkSpec spec = cs1();
    CbsServiceCurve sc = cbs_service_curve(spec, "H1", "1", TrafficClass::A);
    CHECK(sc.curve.rate == mbps(40));
    CHECK(sc.curve.latency == us(80));
    CHECK(sc.credit_max == Rational(1000));
}

TEST_CASE("CBS service curve without CDT") {
    NetworkSpec spec = cs1();
    nlohmann::json j = model::to_json(spec);
    for (auto& l : j["links"]) l["cdt"] = {{"rate", 0}, {"burst", 0}};
    NetworkSpec no_cdt = model::load_spec(j).spec;
    CbsServiceCurve sc = cbs_service_curve(no_cdt, "H1", "1", TrafficClass::A);
    CHECK(sc.curve.rate == mbps(50));
    CHECK(sc.curve.latency == us(20));
}

TEST_CASE("CBS service curve for class B") {
    // One class-B flow beside the cs1-style class-A load; evaluated by hand:
    // T^B = (L^E + L^A - Lbar^A I^A/S^A + b + r Lbar/c) / (c - r)
    //     = (2000 + 2000 + 2000 + 4000 + 400) / 80e6 = 130 us,
    // R^B = 30e6 * 80e6 / 100e6 = 24 Mb/s,
    // V^B,max = (30e6/100e6) * 6000 = 1800 bits.
    NetworkSpec spec = cs1();
    nlohmann::json j = model::to_json(spec);
    for (auto& l : j["links"])
        l["cbs"]["B"] = {{"idle_slope", 30000000}, {"send_slope", -70000000}};
    j["flows"].push_back({{"id", "fb"},
                          {"class", "B"},
                          {"regulator", "LB"},
                          {"rate", 2000000},
                          {"burst", 3000},
                          {"max_packet", 1500},
                          {"min_packet", 500},
                          {"path", {"H1", "1", "2", "H2"}}});
    NetworkSpec with_b = model::load_spec(j).spec;
    CbsServiceCurve sc = cbs_service_curve(with_b, "H1", "1", TrafficClass::B);
    CHECK(sc.curve.rate == mbps(24));
    CHECK(sc.curve.latency == us(130));
    CHECK(sc.credit_max == Rational(1800));

    // The class-A curve is unchanged by the class-B flow (Lbar terms already
    // dominated by the BE packet).
    CbsServiceCurve a = cbs_service_curve(with_b, "H1", "1", TrafficClass::A);
    CHECK(a.curve.latency == us(80));

    SUBCASE("waiting and response for the LB flow use the minimum packet") {
        CHECK(cbfs_waiting_bound(with_b, "fb", "H1", "1") ==
              us(130) + (Rational(3000) - Rational(500)) / mbps(24));
        CHECK(cbfs_response_bound(with_b, "fb", "H1", "1") ==
              us(130) + Rational(2500) / mbps(24) + Rational(500) / mbps(100));
    }
}

TEST_CASE("CDT saturation is an error") {
    NetworkSpec spec = cs1();
    nlohmann::json j = model::to_json(spec);
    j["links"][0]["cdt"]["rate"] = 100000000;
    NetworkSpec bad = model::load_spec(j).spec;
    CHECK_THROWS(cbs_service_curve(bad, "H1", "1", TrafficClass::A));
}

TEST_CASE("waiting bounds on cs1") {
    NetworkSpec spec = cs1();
    CHECK(cbfs_waiting_bound(spec, "f1", "H1", "1") == us(130));
    CHECK(cbfs_waiting_bound(spec, "f2", "H1", "1") == us(105));
    // A flow alone on a link with LRQ waits exactly the latency.
    CHECK(cbfs_waiting_bound(spec, "f4", "H3", "3") == us(80));
    CHECK_THROWS(cbfs_waiting_bound(spec, "f1", "H3", "3"));
}

TEST_CASE("CBFS response bounds on cs1") {
    NetworkSpec spec = cs1();
    CHECK(cbfs_response_bound(spec, "f1", "H1", "1") == us(140));
    CHECK(cbfs_response_bound(spec, "f2", "H1", "1") == us(125));
    CHECK(cbfs_response_bound(spec, "f1", "4", "H4") == us(140));
}

TEST_CASE("combined bound on cs1") {
    NetworkSpec spec = cs1();
    CHECK(combined_bound(spec, "H1", "1", "2", TrafficClass::A) == us(140));
    CHECK(combined_bound(spec, "1", "2", "3", TrafficClass::A) == us(140));
    CHECK(combined_bound(spec, "2", "3", "4", TrafficClass::A) == us(140));
    CHECK(combined_bound(spec, "3", "4", "H4", TrafficClass::A) == us(140));
    CHECK_THROWS(combined_bound(spec, "H1", "1", "5", TrafficClass::A));
}

TEST_CASE("combined bound for a lone LRQ flow collapses to T + L/c") {
    // Single flow, zero variable and processing delays: C = T + L/c.
    NetworkSpec spec = cs1();
    nlohmann::json j = model::to_json(spec);
    j["flows"] = nlohmann::json::array();
    j["flows"].push_back({{"id", "solo"},
                          {"class", "A"},
                          {"regulator", "LRQ"},
                          {"rate", 20000000},
                          {"max_packet", 1000},
                          {"path", {"H1", "1", "2", "H2"}}});
    NetworkSpec solo = model::load_spec(j).spec;
    CbsServiceCurve sc = cbs_service_curve(solo, "H1", "1", TrafficClass::A);
    Rational expect = sc.curve.latency + Rational(1000) / mbps(100);
    CHECK(combined_bound(solo, "H1", "1", "2", TrafficClass::A) == expect);
}

TEST_CASE("regulator response bounds on cs1") {
    NetworkSpec spec = cs1();
    CHECK(ir_response_bound(spec, "f1", "H1", "1", "2").value == us(130));
    CHECK_FALSE(ir_response_bound(spec, "f1", "H1", "1", "2").clamped);
    CHECK(ir_response_bound(spec, "f2", "H1", "1", "2").value == us(120));
    CHECK(ir_fifo_delay(spec, "H1", "1", "2", TrafficClass::A) == us(130));
    CHECK_THROWS(ir_response_bound(spec, "f5", "H1", "1", "2"));
}

TEST_CASE("regulator bound is nonnegative under consistent timing") {
    // With 0 <= min <= max on every range the bound cannot go negative;
    // only an inconsistent min > max (rejected by validate) can force the
    // clamp, which then reports zero with a flag.
    NetworkSpec spec = cs1();
    nlohmann::json j = model::to_json(spec);
    j["links"][0]["t_var_min"] = 300000000;  // 300 us, above t_var_max
    j["links"][0]["t_var_max"] = 0;
    NetworkSpec weird = model::load_spec(j).spec;
    CHECK(model::has_fatal(model::validate(weird)));
    IrResponse h = ir_response_bound(weird, "f1", "H1", "1", "2");
    CHECK(h.value == Rational(0));
    CHECK(h.clamped);
}

TEST_CASE("end-to-end bounds on cs1") {
    NetworkSpec spec = cs1();
    CHECK(e2e_bound(spec, "f1") == us(700));
    CHECK(additive_e2e(spec, "f1") == us(1220));
    // Single-link flow: both bounds equal the one response bound.
    nlohmann::json j = model::to_json(spec);
    j["flows"].push_back({{"id", "short"},
                          {"class", "A"},
                          {"regulator", "LRQ"},
                          {"rate", 20000000},
                          {"max_packet", 1000},
                          {"path", {"H5", "5", "H5x"}}});
    j["nodes"].push_back({{"id", "H5x"}, {"role", "host"}});
    j["links"].push_back({{"from", "5"},
                          {"to", "H5x"},
                          {"capacity", 100000000},
                          {"be_max_packet", 2000},
                          {"cdt", {{"rate", 20000000}, {"burst", 4000}}},
                          {"cbs", {{"A", {{"idle_slope", 50000000}, {"send_slope", -50000000}}}}}});
    NetworkSpec ext = model::load_spec(j).spec;
    Rational expect = combined_bound(ext, "H5", "5", "H5x", TrafficClass::A) +
                      cbfs_response_bound(ext, "short", "5", "H5x");
    CHECK(e2e_bound(ext, "short") == expect);
}

TEST_CASE("end-to-end bound on cs2") {
    NetworkSpec spec = cs2();
    CHECK(e2e_bound(spec, "f1") == us(700));
    CHECK(additive_e2e(spec, "f1") == us(1220));
}

TEST_CASE("a two-node path collapses to the single response bound") {
    nlohmann::json j = model::to_json(cs1());
    j["nodes"].push_back({{"id", "Hd"}, {"role", "host"}});
    j["links"].push_back({{"from", "H1"},
                          {"to", "Hd"},
                          {"capacity", 100000000},
                          {"be_max_packet", 2000},
                          {"cdt", {{"rate", 20000000}, {"burst", 4000}}},
                          {"cbs", {{"A", {{"idle_slope", 50000000}, {"send_slope", -50000000}}}}}});
    j["flows"].push_back({{"id", "direct"},
                          {"class", "A"},
                          {"regulator", "LRQ"},
                          {"rate", 20000000},
                          {"max_packet", 1000},
                          {"path", {"H1", "Hd"}}});
    NetworkSpec spec = model::load_spec(j).spec;
    Rational s = cbfs_response_bound(spec, "direct", "H1", "Hd");
    CHECK(e2e_bound(spec, "direct") == s);
    CHECK(additive_e2e(spec, "direct") == s);
}

TEST_CASE("regulator backlog bound reproduces the case-study value") {
    NetworkSpec spec = cs1();
    IrBacklog b = ir_backlog(spec, "H1", "1", "2", TrafficClass::A);
    CHECK(b.value == Rational(11400));
    CHECK(b.b_w == Rational(0));
    CHECK_FALSE(b.bw_ambiguous);
    CHECK_THROWS(ir_backlog(spec, "H1", "1", "5", TrafficClass::A));
}

TEST_CASE("regulator backlog agrees with the curve-algebra deviation") {
    NetworkSpec spec = cs1();
    for (const auto& trio : {std::tuple{"H1", "1", "2"}, std::tuple{"1", "2", "3"},
                             std::tuple{"2", "3", "4"}, std::tuple{"3", "4", "H4"},
                             std::tuple{"H3", "3", "4"}, std::tuple{"H5", "5", "2"}}) {
        auto [i, j, k] = trio;
        curves::CappedArrival arrival = ir_input_arrival(spec, i, j, k, TrafficClass::A);
        Rational d = ir_fifo_delay(spec, i, j, k, TrafficClass::A);
        Rational via_curves =
            curves::backlog_bound(curves::ArrivalCurve(arrival), curves::make_impulse(d));
        CHECK(ir_backlog(spec, i, j, k, TrafficClass::A).value == via_curves);
    }
}

TEST_CASE("flows headed to other regulators join the competing burst") {
    NetworkSpec spec = cs1();
    nlohmann::json j = model::to_json(spec);
    j["flows"].push_back({{"id", "fside"},
                          {"class", "A"},
                          {"regulator", "LRQ"},
                          {"rate", 1000000},
                          {"max_packet", 500},
                          {"path", {"H1", "1", "H1x"}}});
    j["nodes"].push_back({{"id", "H1x"}, {"role", "host"}});
    j["links"].push_back({{"from", "1"},
                          {"to", "H1x"},
                          {"capacity", 100000000},
                          {"be_max_packet", 2000},
                          {"cdt", {{"rate", 20000000}, {"burst", 4000}}},
                          {"cbs", {{"A", {{"idle_slope", 50000000}, {"send_slope", -50000000}}}}}});
    NetworkSpec ext = model::load_spec(j).spec;
    IrBacklog b = ir_backlog(ext, "H1", "1", "2", TrafficClass::A);
    CHECK(b.b_w == Rational(500));
    CHECK_FALSE(b.bw_ambiguous);
}

TEST_CASE("flows terminating at the regulator's node flag the reading") {
    // Only a host can terminate a flow, so the ambiguity needs a flow that
    // transits a host where another one ends.
    nlohmann::json j;
    j["nodes"] = {{{"id", "Ha"}, {"role", "host"}},
                  {{"id", "Hm"}, {"role", "host"}},
                  {{"id", "Hb"}, {"role", "host"}}};
    nlohmann::json link_tpl = {{"capacity", 100000000},
                               {"be_max_packet", 2000},
                               {"cdt", {{"rate", 20000000}, {"burst", 4000}}},
                               {"cbs",
                                {{"A", {{"idle_slope", 50000000}, {"send_slope", -50000000}}}}}};
    nlohmann::json l1 = link_tpl, l2 = link_tpl;
    l1["from"] = "Ha";
    l1["to"] = "Hm";
    l2["from"] = "Hm";
    l2["to"] = "Hb";
    j["links"] = {l1, l2};
    j["flows"] = {{{"id", "g1"},
                   {"class", "A"},
                   {"regulator", "LRQ"},
                   {"rate", 20000000},
                   {"max_packet", 1000},
                   {"path", {"Ha", "Hm", "Hb"}}},
                  {{"id", "g2"},
                   {"class", "A"},
                   {"regulator", "LRQ"},
                   {"rate", 20000000},
                   {"max_packet", 2000},
                   {"path", {"Ha", "Hm"}}}};
    NetworkSpec spec = model::load_spec(j).spec;
    CHECK(!model::has_fatal(model::validate(spec)));
    IrBacklog b = ir_backlog(spec, "Ha", "Hm", "Hb", TrafficClass::A);
    CHECK(b.bw_ambiguous);
    CHECK(b.b_w == Rational(0));
}

TEST_CASE("competing burst takes flows headed to other regulators") {
    NetworkSpec spec = cs1();
    // On (5,2): f3 continues to 3, f4 continues to H2. For the regulator
    // (5,2,3), f4 is the competing flow.
    IrBacklog b = ir_backlog(spec, "5", "2", "3", TrafficClass::A);
    CHECK(b.b_w == Rational(2000));
    CHECK_FALSE(b.bw_ambiguous);
}

TEST_CASE("CBFS backlog bounds") {
    NetworkSpec spec = cs1();
    CHECK(cbfs_backlog(spec, "H1", "1", TrafficClass::A) == Rational(6200));
    CHECK(cbfs_backlog(spec, "1", "2", TrafficClass::A) == Rational(6200));
    // A link with no class flows has zero backlog bound.
    nlohmann::json j = model::to_json(spec);
    j["links"].push_back({{"from", "1"},
                          {"to", "H1x"},
                          {"capacity", 100000000},
                          {"be_max_packet", 2000},
                          {"cdt", {{"rate", 20000000}, {"burst", 4000}}},
                          {"cbs", {{"A", {{"idle_slope", 50000000}, {"send_slope", -50000000}}}}}});
    j["nodes"].push_back({{"id", "H1x"}, {"role", "host"}});
    NetworkSpec ext = model::load_spec(j).spec;
    CHECK(cbfs_backlog(ext, "1", "H1x", TrafficClass::A) == Rational(0));
}

TEST_CASE("full report carries the case-study numbers and round-trips") {
    NetworkSpec spec = cs1();
    BoundsReport report = full_report(spec);
    const FlowBounds* f1 = report.find_flow("f1");
    REQUIRE(f1);
    CHECK(f1->e2e == us(700));
    CHECK(f1->additive == us(1220));
    CHECK(f1->hops.front().s == us(140));
    REQUIRE(f1->hops.front().h.has_value());
    CHECK(*f1->hops.front().h == us(130));
    const IrQueueBounds* ir = report.find_ir("H1", "1", "2", TrafficClass::A);
    REQUIRE(ir);
    CHECK(ir->backlog == Rational(11400));
    CHECK(ir->c == us(140));
    CHECK(ir->d == us(130));
    const CbfsQueueBounds* q = report.find_cbfs("H1", "1", TrafficClass::A);
    REQUIRE(q);
    CHECK(q->backlog == Rational(6200));

    BoundsReport again = report_from_json(to_json(report));
    CHECK(to_json(again) == to_json(report));

    std::string table = to_table(report);
    CHECK(table.find("ratio=57%") != std::string::npos);
    CHECK(table.find("e2e=700 us") != std::string::npos);
}

TEST_CASE("tight bound never exceeds the additive bound on cs1/cs2") {
    for (NetworkSpec spec : {cs1(), cs2()}) {
        BoundsReport report = full_report(spec);
        for (const FlowBounds& f : report.flows) CHECK(f.e2e <= f.additive);
    }
}
