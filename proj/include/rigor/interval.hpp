// Closed intervals with decimal endpoints and outward-rounded arithmetic.
#pragma once

#include "rigor/numeric.hpp"

#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

namespace rigor {

/// Raised by partial interval operations whose argument leaves the domain.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct DivByZeroInterval : std::domain_error {
    DivByZeroInterval() : std::domain_error("interval division by an interval containing zero") {}
};

class Interval {
public:
    Interval() = default;
    Interval(Decimal point) : lo_(point), hi_(std::move(point)) {} // NOLINT(google-explicit-constructor)
    Interval(Decimal lo, Decimal hi) : lo_(std::move(lo)), hi_(std::move(hi))
    {
        if (hi_ < lo_) throw std::invalid_argument("interval with lo > hi: [" + lo_.to_string() + ", " + hi_.to_string() + "]");
    }

    /// Outward enclosure of an exact rational.
    static Interval enclose(const Rational& r, Precision p)
    {
        return {round_dir(r, p, Round::down), round_dir(r, p, Round::up)};
    }

    const Decimal& lo() const { return lo_; }
    const Decimal& hi() const { return hi_; }

    bool contains(const Decimal& x) const { return lo_ <= x && x <= hi_; }
    bool contains(const Interval& other) const { return lo_ <= other.lo_ && other.hi_ <= hi_; }
    bool contains_zero() const { return lo_.sign() <= 0 && hi_.sign() >= 0; }
    bool is_point() const { return lo_ == hi_; }
    Decimal width() const { return hi_ - lo_; }

    friend bool operator==(const Interval&, const Interval&) = default;

    std::string to_string() const { return "[" + lo_.to_string() + ", " + hi_.to_string() + "]"; }
    friend std::ostream& operator<<(std::ostream& os, const Interval& i) { return os << i.to_string(); }

private:
    Decimal lo_;
    Decimal hi_;
};

/// Outward rounding of both endpoints to p digits.
inline Interval round_out(const Interval& x, Precision p)
{
    return {round(x.lo(), p, Round::down), round(x.hi(), p, Round::up)};
}

inline Interval hull(const Interval& a, const Interval& b) { return {min(a.lo(), b.lo()), max(a.hi(), b.hi())}; }

inline std::optional<Interval> intersect(const Interval& a, const Interval& b)
{
    auto lo = max(a.lo(), b.lo());
    auto hi = min(a.hi(), b.hi());
    if (hi < lo) return std::nullopt;
    return Interval(std::move(lo), std::move(hi));
}

inline Interval iadd(const Interval& a, const Interval& b, Precision p)
{
    return {add(a.lo(), b.lo(), p, Round::down), add(a.hi(), b.hi(), p, Round::up)};
}

inline Interval isub(const Interval& a, const Interval& b, Precision p)
{
    return {sub(a.lo(), b.hi(), p, Round::down), sub(a.hi(), b.lo(), p, Round::up)};
}

inline Interval ineg(const Interval& a) { return {-a.hi(), -a.lo()}; }

inline Interval imul(const Interval& a, const Interval& b, Precision p)
{
    // Sign-case analysis keeps the common cases to two products.
    const int al = a.lo().sign();
    const int ah = a.hi().sign();
    const int bl = b.lo().sign();
    const int bh = b.hi().sign();
    if (al >= 0 && bl >= 0) return {mul(a.lo(), b.lo(), p, Round::down), mul(a.hi(), b.hi(), p, Round::up)};
    if (ah <= 0 && bh <= 0) return {mul(a.hi(), b.hi(), p, Round::down), mul(a.lo(), b.lo(), p, Round::up)};
    if (al >= 0 && bh <= 0) return {mul(a.hi(), b.lo(), p, Round::down), mul(a.lo(), b.hi(), p, Round::up)};
    if (ah <= 0 && bl >= 0) return {mul(a.lo(), b.hi(), p, Round::down), mul(a.hi(), b.lo(), p, Round::up)};
    const Decimal c1 = a.lo() * b.lo();
    const Decimal c2 = a.lo() * b.hi();
    const Decimal c3 = a.hi() * b.lo();
    const Decimal c4 = a.hi() * b.hi();
    return {round(min(min(c1, c2), min(c3, c4)), p, Round::down), round(max(max(c1, c2), max(c3, c4)), p, Round::up)};
}

inline Interval idiv(const Interval& a, const Interval& b, Precision p)
{
    if (b.contains_zero()) throw DivByZeroInterval();
    // b has a fixed sign; the extremes sit at endpoint quotients.
    const Decimal* num_lo;
    const Decimal* num_hi;
    const Decimal* den_lo;
    const Decimal* den_hi;
    if (b.lo().sign() > 0) {
        num_lo = &a.lo();
        num_hi = &a.hi();
        den_lo = a.lo().sign() >= 0 ? &b.hi() : &b.lo();
        den_hi = a.hi().sign() >= 0 ? &b.lo() : &b.hi();
    } else {
        num_lo = &a.hi();
        num_hi = &a.lo();
        den_lo = a.hi().sign() >= 0 ? &b.hi() : &b.lo();
        den_hi = a.lo().sign() >= 0 ? &b.lo() : &b.hi();
    }
    return {div(*num_lo, *den_lo, p, Round::down), div(*num_hi, *den_hi, p, Round::up)};
}

/// Integer power as a single monotone/even-power operation.
inline Interval ipow(const Interval& a, unsigned n, Precision p)
{
    if (n == 0) return Interval(Decimal(1));
    auto power = [n](const Decimal& x) {
        Decimal r = 1;
        Decimal base = x;
        for (unsigned k = n;;) {
            if (k & 1U) r = r * base;
            k >>= 1U;
            if (k == 0) break;
            base = base * base;
        }
        return r;
    };
    if (n % 2 == 1 || a.lo().sign() >= 0) return {round(power(a.lo()), p, Round::down), round(power(a.hi()), p, Round::up)};
    if (a.hi().sign() <= 0) return {round(power(a.hi()), p, Round::down), round(power(a.lo()), p, Round::up)};
    return {Decimal(), round(power(max(-a.lo(), a.hi())), p, Round::up)};
}

inline Interval isqrt(const Interval& a, Precision p)
{
    if (a.lo().sign() < 0) throw DomainError("interval square root of " + a.to_string());
    return {sqrt(a.lo(), p, Round::down), sqrt(a.hi(), p, Round::up)};
}

/// iabs([c,d]) = max(|c|, |d|); exact.
inline Decimal iabs(const Interval& a) { return max(abs(a.lo()), abs(a.hi())); }

/// Image of |x| over the interval; exact.
inline Interval abs_image(const Interval& a)
{
    if (a.lo().sign() >= 0) return a;
    if (a.hi().sign() <= 0) return ineg(a);
    return {Decimal(), iabs(a)};
}

} // namespace rigor
