#pragma once

#include "tsnbound/rational.hpp"

#include <variant>

namespace tsnbound::curves {

/// Token-bucket arrival curve  r*t + b.
struct TokenBucket {
    Rational rate;   // bits/s, >= 0
    Rational burst;  // bits, >= 0
};

/// Rate-latency service curve  R*[t - T]^+.
struct RateLatency {
    Rational rate;     // bits/s, > 0
    Rational latency;  // s, >= 0
};

/// Impulse service curve delta_D: 0 up to D, +infinity after.
struct Impulse {
    Rational delay;  // s, >= 0
};

/// min(c*t + L, r*t + b) with c > r, the arrival curve seen at the input of
/// an interleaved regulator (line-rate cap over a token bucket).
struct CappedArrival {
    Rational line_rate;    // c, bits/s
    Rational line_offset;  // L, bits
    TokenBucket bucket;
};

using ArrivalCurve = std::variant<TokenBucket, CappedArrival>;
using ServiceCurve = std::variant<RateLatency, Impulse>;

/// Value of a curve at a point; impulse curves evaluate to a distinguished
/// +infinity past their delay.
struct CurveValue {
    bool infinite = false;
    Rational value;  // meaningful iff !infinite

    static CurveValue inf() { return CurveValue{true, Rational()}; }
    static CurveValue of(Rational v) { return CurveValue{false, std::move(v)}; }

    friend bool operator==(const CurveValue& a, const CurveValue& b) {
        return a.infinite == b.infinite && (a.infinite || a.value == b.value);
    }
};

TokenBucket make_token_bucket(Rational rate, Rational burst);
RateLatency make_rate_latency(Rational rate, Rational latency);
Impulse make_impulse(Rational delay);
CappedArrival make_capped_arrival(Rational line_rate, Rational line_offset, TokenBucket bucket);

CurveValue evaluate(const TokenBucket& c, const Rational& t);
CurveValue evaluate(const RateLatency& c, const Rational& t);
CurveValue evaluate(const Impulse& c, const Rational& t);
CurveValue evaluate(const CappedArrival& c, const Rational& t);
CurveValue evaluate(const ArrivalCurve& c, const Rational& t);
CurveValue evaluate(const ServiceCurve& c, const Rational& t);

/// Horizontal deviation sup_t { inf { d : arrival(t) <= service(t+d) } }.
/// Throws unbounded_error when service.rate < arrival long-term rate.
Rational delay_bound(const TokenBucket& arrival, const RateLatency& service);
Rational delay_bound(const CappedArrival& arrival, const RateLatency& service);
Rational delay_bound(const ArrivalCurve& arrival, const RateLatency& service);

/// Vertical deviation sup_t { arrival(t) - service(t) }.
Rational backlog_bound(const ArrivalCurve& arrival, const ServiceCurve& service);

/// Output arrival curve of a token bucket through a rate-latency server:
/// (r, b + r*T).
TokenBucket deconvolve_affine(const TokenBucket& arrival, const RateLatency& service);

/// beta^up(y) = T + y/R, the earliest time the service curve exceeds y bits.
Rational upper_pseudo_inverse(const RateLatency& service, const Rational& y);

/// Burst of the aggregate output of flows (r_s, b_s) sharing a rate-latency
/// server with competing burst b_w:  b_s + r_s*(T + b_w/R).
Rational output_burst(const TokenBucket& shared, const Rational& other_burst,
                      const RateLatency& service);

/// Long-term rate of an arrival curve (the bucket rate).
Rational arrival_rate(const ArrivalCurve& c);

}  // namespace tsnbound::curves
