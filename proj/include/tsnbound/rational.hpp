#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>

namespace tsnbound {

using BigInt = boost::multiprecision::cpp_int;

struct tsn_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when a delay/backlog bound does not exist (service rate below
// arrival rate).
struct unbounded_error : tsn_error {
    using tsn_error::tsn_error;
};

/// Exact rational number. Denominator is always positive and the fraction is
/// kept in lowest terms, so equality is structural.
class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(std::int64_t v) : num_(v), den_(1) {}  // NOLINT: implicit by design
    Rational(BigInt v) : num_(std::move(v)), den_(1) {}
    Rational(BigInt num, BigInt den) : num_(std::move(num)), den_(std::move(den)) {
        if (den_ == 0) throw tsn_error("rational with zero denominator");
        normalize();
    }

    const BigInt& num() const { return num_; }
    const BigInt& den() const { return den_; }

    bool is_integer() const { return den_ == 1; }
    bool is_zero() const { return num_ == 0; }
    bool is_negative() const { return num_ < 0; }
    int sign() const { return num_ < 0 ? -1 : (num_ == 0 ? 0 : 1); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return Rational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return Rational(a.num_ * b.num_, a.den_ * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw tsn_error("rational division by zero");
        return Rational(a.num_ * b.den_, a.den_ * b.num_);
    }
    Rational operator-() const {
        Rational r;
        r.num_ = -num_;
        r.den_ = den_;
        return r;
    }
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return a.num_ * b.den_ < b.num_ * a.den_;
    }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

    /// Largest integer <= value.
    BigInt floor() const {
        BigInt q = num_ / den_;
        if (num_ < 0 && q * den_ != num_) --q;
        return q;
    }
    /// Smallest integer >= value.
    BigInt ceil() const {
        BigInt q = num_ / den_;
        if (num_ > 0 && q * den_ != num_) ++q;
        return q;
    }

    std::int64_t to_int64() const {
        if (den_ != 1) throw tsn_error("rational is not an integer: " + to_fraction_string());
        if (num_ > BigInt(INT64_MAX) || num_ < BigInt(INT64_MIN))
            throw tsn_error("rational out of int64 range: " + to_fraction_string());
        return static_cast<std::int64_t>(num_);
    }

    double to_double() const {
        return num_.convert_to<double>() / den_.convert_to<double>();
    }

    std::string to_fraction_string() const {
        if (den_ == 1) return num_.str();
        return num_.str() + "/" + den_.str();
    }

    /// Decimal rendering; exact when the denominator is 2^a*5^b, otherwise
    /// rounded to max_digits with a trailing '~'.
    std::string to_decimal_string(int max_digits = 12) const {
        BigInt ip = num_ < 0 ? BigInt(-num_) / den_ : num_ / den_;
        BigInt rem = (num_ < 0 ? BigInt(-num_) : num_) - ip * den_;
        std::string out = (num_ < 0 ? "-" : "") + ip.str();
        if (rem == 0) return out;
        out += ".";
        std::string digits;
        bool exact = false;
        for (int i = 0; i < max_digits; ++i) {
            rem *= 10;
            BigInt d = rem / den_;
            digits += static_cast<char>('0' + d.convert_to<int>());
            rem -= d * den_;
            if (rem == 0) {
                exact = true;
                break;
            }
        }
        while (digits.size() > 1 && digits.back() == '0') digits.pop_back();
        out += digits;
        if (!exact) out += "~";
        return out;
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) {
        return os << r.to_fraction_string();
    }

private:
    void normalize() {
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        BigInt g = boost::multiprecision::gcd(num_ < 0 ? BigInt(-num_) : num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
        if (num_ == 0) den_ = 1;
    }

    BigInt num_;
    BigInt den_;
};

inline Rational abs(const Rational& r) { return r.is_negative() ? -r : r; }
inline const Rational& max(const Rational& a, const Rational& b) { return a < b ? b : a; }
inline const Rational& min(const Rational& a, const Rational& b) { return b < a ? b : a; }

// Scale factors for the external picosecond-based formats.
inline const BigInt& ps_per_second() {
    static const BigInt v("1000000000000");
    return v;
}

/// Seconds -> integer picoseconds; errors when not integral.
inline std::int64_t seconds_to_ps(const Rational& seconds, const char* what = "duration") {
    Rational ps = seconds * Rational(ps_per_second());
    if (!ps.is_integer())
        throw tsn_error(std::string(what) + " is not an integral number of picoseconds: " +
                        ps.to_fraction_string() + " ps");
    return ps.to_int64();
}

inline Rational ps_to_seconds(std::int64_t ps) {
    return Rational(BigInt(ps), ps_per_second());
}

}  // namespace tsnbound
