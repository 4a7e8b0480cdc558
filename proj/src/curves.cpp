#include "tsnbound/curves.hpp"

namespace tsnbound::curves {

namespace {

void require_nonnegative(const Rational& v, const char* what) {
    if (v.is_negative()) throw tsn_error(std::string(what) + " must be >= 0");
}

}  // namespace

TokenBucket make_token_bucket(Rational rate, Rational burst) {
    require_nonnegative(rate, "token bucket rate");
    require_nonnegative(burst, "token bucket burst");
    return TokenBucket{std::move(rate), std::move(burst)};
}

RateLatency make_rate_latency(Rational rate, Rational latency) {
    if (rate.sign() <= 0) throw tsn_error("rate-latency rate must be > 0");
    require_nonnegative(latency, "rate-latency latency");
    return RateLatency{std::move(rate), std::move(latency)};
}

Impulse make_impulse(Rational delay) {
    require_nonnegative(delay, "impulse delay");
    return Impulse{std::move(delay)};
}

CappedArrival make_capped_arrival(Rational line_rate, Rational line_offset, TokenBucket bucket) {
    if (!(line_rate > bucket.rate))
        throw tsn_error("capped arrival requires line rate > bucket rate");
    require_nonnegative(line_offset, "capped arrival line offset");
    return CappedArrival{std::move(line_rate), std::move(line_offset), std::move(bucket)};
}

CurveValue evaluate(const TokenBucket& c, const Rational& t) {
    if (t.is_negative()) throw tsn_error("curve evaluated at negative time");
    return CurveValue::of(c.rate * t + c.burst);
}

CurveValue evaluate(const RateLatency& c, const Rational& t) {
    if (t.is_negative()) throw tsn_error("curve evaluated at negative time");
    if (t <= c.latency) return CurveValue::of(Rational(0));
    return CurveValue::of(c.rate * (t - c.latency));
}

CurveValue evaluate(const Impulse& c, const Rational& t) {
    if (t.is_negative()) throw tsn_error("curve evaluated at negative time");
    if (t <= c.delay) return CurveValue::of(Rational(0));
    return CurveValue::inf();
}

CurveValue evaluate(const CappedArrival& c, const Rational& t) {
    if (t.is_negative()) throw tsn_error("curve evaluated at negative time");
    Rational line = c.line_rate * t + c.line_offset;
    Rational bucket = c.bucket.rate * t + c.bucket.burst;
    return CurveValue::of(min(line, bucket));
}

CurveValue evaluate(const ArrivalCurve& c, const Rational& t) {
    return std::visit([&](const auto& v) { return evaluate(v, t); }, c);
}

CurveValue evaluate(const ServiceCurve& c, const Rational& t) {
    return std::visit([&](const auto& v) { return evaluate(v, t); }, c);
}

Rational arrival_rate(const ArrivalCurve& c) {
    return std::visit(
        [](const auto& v) -> Rational {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, TokenBucket>) return v.rate;
            else return v.bucket.rate;
        },
        c);
}

Rational delay_bound(const TokenBucket& arrival, const RateLatency& service) {
    if (service.rate < arrival.rate)
        throw unbounded_error("delay bound does not exist: service rate below arrival rate");
    return service.latency + arrival.burst / service.rate;
}

Rational delay_bound(const CappedArrival& arrival, const RateLatency& service) {
    if (service.rate < arrival.bucket.rate)
        throw unbounded_error("delay bound does not exist: service rate below arrival rate");
    // d(t) = T + alpha(t)/R - t is piecewise linear with a single concave
    // kink at t* = (b - L)/(c - r); the sup is at t=0 or at the kink.
    const Rational& c = arrival.line_rate;
    const Rational& L = arrival.line_offset;
    const Rational& r = arrival.bucket.rate;
    const Rational& b = arrival.bucket.burst;
    Rational d0 = service.latency + min(L, b) / service.rate;
    if (b <= L) return d0;  // bucket is the min everywhere
    Rational tk = (b - L) / (c - r);
    Rational alpha_k = c * tk + L;
    Rational dk = service.latency + alpha_k / service.rate - tk;
    return max(d0, dk);
}

Rational delay_bound(const ArrivalCurve& arrival, const RateLatency& service) {
    return std::visit([&](const auto& v) { return delay_bound(v, service); }, arrival);
}

namespace {

Rational backlog_vs_rate_latency(const ArrivalCurve& arrival, const RateLatency& service) {
    if (service.rate < arrival_rate(arrival))
        throw unbounded_error("backlog bound does not exist: service rate below arrival rate");
    // alpha is concave piecewise linear, beta convex; the sup of alpha-beta is
    // attained at t = T or at the kink of alpha past T.
    Rational best = evaluate(arrival, service.latency).value;
    if (const auto* ca = std::get_if<CappedArrival>(&arrival)) {
        if (ca->bucket.burst > ca->line_offset) {
            Rational tk = (ca->bucket.burst - ca->line_offset) / (ca->line_rate - ca->bucket.rate);
            if (tk > service.latency) {
                Rational v = evaluate(arrival, tk).value - service.rate * (tk - service.latency);
                best = max(best, v);
            }
        }
    }
    return best;
}

}  // namespace

Rational backlog_bound(const ArrivalCurve& arrival, const ServiceCurve& service) {
    if (const auto* imp = std::get_if<Impulse>(&service)) {
        // sup over t <= D of alpha(t) - 0; alpha nondecreasing, so alpha(D).
        return evaluate(arrival, imp->delay).value;
    }
    return backlog_vs_rate_latency(arrival, std::get<RateLatency>(service));
}

TokenBucket deconvolve_affine(const TokenBucket& arrival, const RateLatency& service) {
    if (service.rate < arrival.rate)
        throw unbounded_error("deconvolution does not exist: service rate below arrival rate");
    return TokenBucket{arrival.rate, arrival.burst + arrival.rate * service.latency};
}

Rational upper_pseudo_inverse(const RateLatency& service, const Rational& y) {
    if (y.is_negative()) throw tsn_error("pseudo-inverse of a negative amount");
    return service.latency + y / service.rate;
}

Rational output_burst(const TokenBucket& shared, const Rational& other_burst,
                      const RateLatency& service) {
    if (other_burst.is_negative()) throw tsn_error("competing burst must be >= 0");
    return shared.burst + shared.rate * (service.latency + other_burst / service.rate);
}

}  // namespace tsnbound::curves
