#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tsnbound/bounds.hpp"
#include "tsnbound/sim/checks.hpp"
#include "tsnbound/sim/engine.hpp"
#include "tsnbound/sim/randomgen.hpp"

#include <chrono>
#include <random>

using namespace tsnbound;
using namespace tsnbound::sim;
using model::NetworkSpec;

namespace {
constexpr SimTime HORIZON = 3000000000;  // 3 ms
}

TEST_CASE("bounds hold on a thousand randomized scenarios") {
    std::mt19937_64 rng(20240811);
    int specs = 20;
    int per_spec = 50;
    for (int s = 0; s < specs; ++s) {
        NetworkSpec spec = randomgen::random_spec(rng);
        bounds::BoundsReport report = bounds::full_report(spec);
        for (int r = 0; r < per_spec; ++r) {
            Scenario sc = randomgen::random_scenario(spec, rng, HORIZON);
            auto t0 = std::chrono::steady_clock::now();
            RunOptions opt;
            opt.record_events = false;
            SimTrace trace = run(spec, sc, HORIZON, opt);
            auto elapsed = std::chrono::steady_clock::now() - t0;
            CHECK(std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count() < 1000);

            auto conf = conformance_check(trace, spec, report);
            for (const auto& v : conf) MESSAGE("spec ", s, " run ", r, ": ", v.describe());
            CHECK(conf.empty());

            auto lemma2 = service_curve_check(trace, spec);
            for (const auto& v : lemma2) MESSAGE("spec ", s, " run ", r, ": ", v.describe());
            CHECK(lemma2.empty());

            CHECK(credit_ceiling_check(trace).empty());
            auto shaper = shaper_output_check(trace, spec);
            for (const auto& v : shaper) MESSAGE("spec ", s, " run ", r, ": ", v.describe());
            CHECK(shaper.empty());
            CHECK(fifo_order_check(trace, spec).empty());
        }
    }
}

TEST_CASE("randomized runs are reproducible") {
    std::mt19937_64 rng(7777);
    for (int s = 0; s < 3; ++s) {
        NetworkSpec spec = randomgen::random_spec(rng);
        Scenario sc = randomgen::random_scenario(spec, rng, HORIZON);
        SimTrace a = run(spec, sc, HORIZON);
        SimTrace b = run(spec, sc, HORIZON);
        CHECK(to_event_lines(a) == to_event_lines(b));
    }
}
