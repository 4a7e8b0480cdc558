#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tsnbound/curves.hpp"

#include <random>

using namespace tsnbound;
using namespace tsnbound::curves;

namespace {

Rational mbps(std::int64_t v) { return Rational(v) * Rational(1000000); }
Rational us(std::int64_t v) { return Rational(v, 1000000); }

// Numeric oracle: horizontal deviation by dense sampling of
// inf{d : alpha(t) <= beta(t + d)} = T + alpha(t)/R - t.
Rational sampled_delay(const ArrivalCurve& a, const RateLatency& s, int steps,
                       const Rational& t_max) {
    Rational best(0);
    for (int i = 0; i <= steps; ++i) {
        Rational t = t_max * Rational(i, steps);
        Rational d = s.latency + evaluate(a, t).value / s.rate - t;
        if (d > best) best = d;
    }
    return best;
}

// Numeric oracle: vertical deviation by dense sampling.
Rational sampled_backlog(const ArrivalCurve& a, const RateLatency& s, int steps,
                         const Rational& t_max) {
    Rational best(0);
    for (int i = 0; i <= steps; ++i) {
        Rational t = t_max * Rational(i, steps);
        Rational v = evaluate(a, t).value - evaluate(s, t).value;
        if (v > best) best = v;
    }
    return best;
}

}  // namespace

TEST_CASE("evaluate closed forms") {
    TokenBucket tb = make_token_bucket(mbps(20), Rational(3000));
    CHECK(evaluate(tb, Rational(0)).value == Rational(3000));

    RateLatency rl = make_rate_latency(mbps(40), us(80));
    CHECK(evaluate(rl, us(80)).value == Rational(0));
    CHECK(evaluate(rl, us(105)).value == Rational(1000));

    // min(100e6*t + 2000, 40e6*t + 6200) at 50 us -> min(7000, 8200).
    CappedArrival ca = make_capped_arrival(mbps(100), Rational(2000),
                                           make_token_bucket(mbps(40), Rational(6200)));
    CHECK(evaluate(ca, us(50)).value == Rational(7000));

    Impulse imp = make_impulse(us(130));
    CHECK(evaluate(imp, us(130)).value == Rational(0));
    CHECK(evaluate(imp, us(131)).infinite);
    CHECK_THROWS(evaluate(tb, Rational(-1)));
}

TEST_CASE("construction guards") {
    CHECK_THROWS(make_rate_latency(Rational(0), Rational(0)));
    CHECK_THROWS(make_token_bucket(Rational(-1), Rational(0)));
    CHECK_THROWS(make_capped_arrival(mbps(10), Rational(0),
                                     make_token_bucket(mbps(10), Rational(100))));
}

TEST_CASE("delay bound") {
    CHECK(delay_bound(make_token_bucket(mbps(20), Rational(3000)),
                      make_rate_latency(mbps(40), us(80))) == us(155));
    // Zero burst: the latency alone.
    CHECK(delay_bound(make_token_bucket(mbps(20), Rational(0)),
                      make_rate_latency(mbps(40), us(80))) == us(80));
    // Equal rates still bounded.
    CHECK(delay_bound(make_token_bucket(mbps(40), Rational(3000)),
                      make_rate_latency(mbps(40), us(80))) == us(155));
    CHECK_THROWS_AS(delay_bound(make_token_bucket(mbps(50), Rational(100)),
                                make_rate_latency(mbps(40), us(80))),
                    unbounded_error);
}

TEST_CASE("delay bound matches the sampled oracle") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 50; ++i) {
        Rational r = mbps(1 + static_cast<std::int64_t>(rng() % 40));
        Rational R = r + mbps(1 + static_cast<std::int64_t>(rng() % 60));
        TokenBucket tb = make_token_bucket(r, Rational(static_cast<std::int64_t>(rng() % 8000)));
        RateLatency rl = make_rate_latency(R, us(static_cast<std::int64_t>(rng() % 200)));
        Rational exact = delay_bound(tb, rl);
        Rational sampled = sampled_delay(tb, rl, 200, Rational(1, 100));
        CHECK(sampled <= exact);
        // Affine arrival: the sup sits at t=0, so sampling is exact.
        CHECK(sampled == exact);
    }
}

TEST_CASE("backlog bound") {
    // Paper case-study value via the impulse service curve.
    CappedArrival ca = make_capped_arrival(mbps(100), Rational(1000),
                                           make_token_bucket(mbps(40), Rational(6200)));
    CHECK(backlog_bound(ca, make_impulse(us(130))) == Rational(11400));
    CHECK(backlog_bound(make_token_bucket(mbps(20), Rational(4000)), make_impulse(Rational(0))) ==
          Rational(4000));
    CHECK(backlog_bound(make_token_bucket(mbps(40), Rational(3000)),
                        make_rate_latency(mbps(40), us(80))) == Rational(6200));
    CHECK_THROWS_AS(backlog_bound(make_token_bucket(mbps(50), Rational(100)),
                                  make_rate_latency(mbps(40), us(80))),
                    unbounded_error);
}

TEST_CASE("backlog impulse identity: bound equals the curve at the delay") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 100; ++i) {
        Rational line = mbps(50 + static_cast<std::int64_t>(rng() % 100));
        Rational r = mbps(1 + static_cast<std::int64_t>(rng() % 40));
        ArrivalCurve a;
        if (rng() % 2) {
            a = make_token_bucket(r, Rational(static_cast<std::int64_t>(rng() % 9000)));
        } else {
            a = make_capped_arrival(line, Rational(static_cast<std::int64_t>(rng() % 3000)),
                                    make_token_bucket(r, Rational(static_cast<std::int64_t>(
                                                             rng() % 9000))));
        }
        Rational d = us(static_cast<std::int64_t>(rng() % 500));
        CHECK(backlog_bound(a, make_impulse(d)) == evaluate(a, d).value);
    }
}

TEST_CASE("backlog bound matches the sampled oracle for capped arrivals") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 50; ++i) {
        Rational r = mbps(1 + static_cast<std::int64_t>(rng() % 30));
        Rational line = r + mbps(10 + static_cast<std::int64_t>(rng() % 100));
        Rational R = r + mbps(static_cast<std::int64_t>(rng() % 50));
        CappedArrival ca =
            make_capped_arrival(line, Rational(static_cast<std::int64_t>(rng() % 2000)),
                                make_token_bucket(r, Rational(static_cast<std::int64_t>(
                                                         rng() % 9000) + 1)));
        RateLatency rl = make_rate_latency(R, us(static_cast<std::int64_t>(rng() % 200)));
        Rational exact = backlog_bound(ArrivalCurve(ca), ServiceCurve(rl));
        Rational sampled = sampled_backlog(ArrivalCurve(ca), rl, 400, Rational(1, 50));
        CHECK(sampled <= exact);
        // The sampled sup can miss a kink by one grid step.
        Rational slack = line * Rational(1, 50) / Rational(400);
        CHECK(exact - sampled <= slack);
    }
}

TEST_CASE("deconvolution") {
    TokenBucket out = deconvolve_affine(make_token_bucket(mbps(20), Rational(4000)),
                                        make_rate_latency(mbps(100), us(20)));
    CHECK(out.rate == mbps(20));
    CHECK(out.burst == Rational(4400));
    // Zero latency and zero rate leave the curve unchanged.
    TokenBucket same = deconvolve_affine(make_token_bucket(mbps(20), Rational(4000)),
                                         make_rate_latency(mbps(100), Rational(0)));
    CHECK(same.burst == Rational(4000));
    TokenBucket zero = deconvolve_affine(make_token_bucket(Rational(0), Rational(4000)),
                                         make_rate_latency(mbps(100), us(20)));
    CHECK(zero.burst == Rational(4000));
}

TEST_CASE("deconvolution matches a grid sup of alpha(t+u) - beta(u)") {
    std::mt19937_64 rng(19);
    for (int i = 0; i < 30; ++i) {
        Rational r = mbps(1 + static_cast<std::int64_t>(rng() % 30));
        Rational R = r + mbps(1 + static_cast<std::int64_t>(rng() % 70));
        TokenBucket tb = make_token_bucket(r, Rational(static_cast<std::int64_t>(rng() % 5000)));
        RateLatency rl = make_rate_latency(R, us(static_cast<std::int64_t>(rng() % 100)));
        TokenBucket out = deconvolve_affine(tb, rl);
        for (int k = 0; k < 8; ++k) {
            Rational t = us(static_cast<std::int64_t>(rng() % 300));
            Rational grid(0);
            for (int s = 0; s <= 100; ++s) {
                Rational u = Rational(s, 100) * Rational(1, 1000);  // up to 1 ms
                Rational v = evaluate(tb, t + u).value - evaluate(rl, u).value;
                if (v > grid) grid = v;
            }
            Rational exact = evaluate(out, t).value;
            CHECK(grid <= exact);
            Rational slack = tb.rate * Rational(1, 100000);  // one grid step of 10 us
            CHECK(exact - grid <= slack);
        }
    }
}

TEST_CASE("upper pseudo-inverse") {
    CHECK(upper_pseudo_inverse(make_rate_latency(mbps(40), us(80)), Rational(2000)) == us(130));
    CHECK(upper_pseudo_inverse(make_rate_latency(mbps(40), us(80)), Rational(0)) == us(80));
    CHECK(upper_pseudo_inverse(make_rate_latency(mbps(100), Rational(0)), Rational(1000)) ==
          us(10));
    CHECK_THROWS(upper_pseudo_inverse(make_rate_latency(mbps(100), Rational(0)), Rational(-1)));
}

TEST_CASE("delay bound equals the pseudo-inverse of the burst") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 100; ++i) {
        Rational r = mbps(1 + static_cast<std::int64_t>(rng() % 50));
        Rational R = r + mbps(static_cast<std::int64_t>(rng() % 50));
        TokenBucket tb = make_token_bucket(r, Rational(static_cast<std::int64_t>(rng() % 9000)));
        RateLatency rl = make_rate_latency(R, us(static_cast<std::int64_t>(rng() % 300)));
        CHECK(delay_bound(tb, rl) == upper_pseudo_inverse(rl, tb.burst));
    }
}

TEST_CASE("output burst") {
    CHECK(output_burst(make_token_bucket(mbps(40), Rational(3000)), Rational(0),
                       make_rate_latency(mbps(40), us(80))) == Rational(6200));
    CHECK(output_burst(make_token_bucket(mbps(40), Rational(3000)), Rational(0),
                       make_rate_latency(mbps(40), Rational(0))) == Rational(3000));
    CHECK(output_burst(make_token_bucket(mbps(20), Rational(1000)), Rational(2000),
                       make_rate_latency(mbps(40), us(80))) == Rational(3600));
}

TEST_CASE("monotonicity of deviations") {
    std::mt19937_64 rng(29);
    for (int i = 0; i < 100; ++i) {
        Rational r = mbps(1 + static_cast<std::int64_t>(rng() % 30));
        Rational R = r + mbps(1 + static_cast<std::int64_t>(rng() % 50));
        Rational b(static_cast<std::int64_t>(rng() % 8000));
        Rational T = us(static_cast<std::int64_t>(rng() % 200));
        TokenBucket tb = make_token_bucket(r, b);
        RateLatency rl = make_rate_latency(R, T);
        TokenBucket bigger = make_token_bucket(r, b + Rational(500));
        RateLatency slower = make_rate_latency(R - r / Rational(2) - Rational(1), T);
        CHECK(delay_bound(bigger, rl) >= delay_bound(tb, rl));
        CHECK(backlog_bound(bigger, ServiceCurve(rl)) >= backlog_bound(tb, ServiceCurve(rl)));
        if (slower.rate >= tb.rate) {
            CHECK(delay_bound(tb, slower) >= delay_bound(tb, rl));
            CHECK(backlog_bound(tb, ServiceCurve(slower)) >= backlog_bound(tb, ServiceCurve(rl)));
        }
    }
}
