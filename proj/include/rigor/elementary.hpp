// Interval extensions of the elementary functions: pi, sin, cos, atan, asin,
// acos and atn(x) = atan(sqrt x)/sqrt x continued to x > -1.
//
// Point values are computed at a working precision a few digits above the
// requested one, by argument reduction and power series whose truncation
// error is added outward, then rounded outward to the caller's precision.
#pragma once

#include "rigor/interval.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace rigor {

namespace detail {

inline Precision working(Precision p) { return Precision(p.digits + 8); }

inline Decimal pow10_decimal(std::int64_t e) { return Decimal::from_parts(1, e); }

inline Interval widen(const Interval& x, const Decimal& r, Precision q)
{
    return {sub(x.lo(), r, q, Round::down), add(x.hi(), r, q, Round::up)};
}

inline Interval scale_exact(const Interval& x, const Decimal& c)
{
    if (c.sign() >= 0) return {x.lo() * c, x.hi() * c};
    return {x.hi() * c, x.lo() * c};
}

// atan(x) = sum (-1)^k x^(2k+1)/(2k+1) for |x| <= 1/2; alternating tail.
inline Interval atan_series(const Interval& x, Precision q)
{
    const Decimal b = iabs(x);
    if (b.is_zero()) return Interval(Decimal());
    const Interval x2 = ipow(x, 2, q);
    const Decimal b2 = mul(b, b, q, Round::up);
    const Decimal eps = b * pow10_decimal(-(q.digits + 2));
    Interval power = x;
    Interval sum = x;
    Decimal mag = b;
    for (int k = 1;; ++k) {
        mag = mul(mag, b2, q, Round::up);
        if (mag < eps) return widen(sum, div(mag, Decimal(2 * k + 1), q, Round::up), q);
        power = imul(power, x2, q);
        const Interval term = idiv(power, Interval(Decimal(2 * k + 1)), q);
        sum = (k % 2 == 1) ? isub(sum, term, q) : iadd(sum, term, q);
    }
}

// artanh(x) = sum x^(2k+1)/(2k+1) for |x| <= 1/4; geometric tail bound.
inline Interval artanh_series(const Interval& x, Precision q)
{
    const Decimal b = iabs(x);
    if (b.is_zero()) return Interval(Decimal());
    const Interval x2 = ipow(x, 2, q);
    const Decimal b2 = mul(b, b, q, Round::up);
    const Decimal eps = b * pow10_decimal(-(q.digits + 2));
    const Decimal tail_factor = Decimal::from_parts(107, -2); // >= 1/(1 - 1/16)
    Interval power = x;
    Interval sum = x;
    Decimal mag = b;
    for (int k = 1;; ++k) {
        mag = mul(mag, b2, q, Round::up);
        if (mag < eps) return widen(sum, div(mul(mag, tail_factor, q, Round::up), Decimal(2 * k + 1), q, Round::up), q);
        power = imul(power, x2, q);
        sum = iadd(sum, idiv(power, Interval(Decimal(2 * k + 1)), q), q);
    }
}

} // namespace detail

/// Enclosure of pi at q digits (Machin's formula); cached per precision.
inline Interval pi_interval(Precision q)
{
    static std::mutex mutex;
    static std::map<int, Interval> cache;
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(q.digits); it != cache.end()) return it->second;
    }
    const Precision w(q.digits + 4);
    const Interval a = detail::atan_series(Interval(Decimal::from_parts(2, -1)), w);
    const Interval b = detail::atan_series(Interval::enclose(Rational(1, 239), w), w);
    const Interval pi = round_out(isub(detail::scale_exact(a, 16), detail::scale_exact(b, 4), w), q);
    std::lock_guard lock(mutex);
    cache.emplace(q.digits, pi);
    return pi;
}

inline Interval half_pi_interval(Precision q)
{
    return round_out(detail::scale_exact(pi_interval(Precision(q.digits + 1)), Decimal::from_parts(5, -1)), q);
}

namespace detail {

// Unreduced sum of (-1)^i / (2i+1) for i in [first, last), by binary splitting.
inline std::pair<BigInt, BigInt> leibniz_sum(unsigned first, unsigned last)
{
    if (last - first == 1) {
        const BigInt sign = first % 2 == 0 ? 1 : -1;
        return {sign, BigInt(2 * first + 1)};
    }
    const unsigned mid = first + (last - first) / 2;
    auto [ln, ld] = leibniz_sum(first, mid);
    auto [rn, rd] = leibniz_sum(mid, last);
    return {ln * rd + rn * ld, ld * rd};
}

inline Decimal round_fraction(const BigInt& num, const BigInt& den, Precision p, Round dir)
{
    if (num.is_zero()) return {};
    return round_quotient(num.sign(), boost::multiprecision::abs(num), den, 0, p.digits, dir);
}

} // namespace detail

/// Leibniz enclosure 4 * (S_n -+ 1/(2n+3)) with S_n the exact partial sum
/// of (-1)^i/(2i+1), rounded outward to p digits.
inline Interval pi_enclosure(unsigned n, Precision p = Precision(20))
{
    const auto [num, den] = detail::leibniz_sum(0, n + 1);
    // 4 * (num/den -+ 1/m) = 4 * (num*m -+ den) / (den*m)
    const BigInt m = 2 * BigInt(n) + 3;
    const BigInt scaled_den = den * m;
    return {detail::round_fraction(4 * (num * m - den), scaled_den, p, Round::down),
            detail::round_fraction(4 * (num * m + den), scaled_den, p, Round::up)};
}

namespace detail {

inline Interval atan_point(const Interval& x, Precision q)
{
    const Decimal two = 2;
    if (x.lo() > two) {
        const Interval inv = idiv(Interval(Decimal(1)), x, q);
        return isub(half_pi_interval(q), atan_point(inv, q), q);
    }
    if (x.hi() < -two) return ineg(atan_point(ineg(x), q));
    const Decimal quarter = Decimal::from_parts(25, -2);
    const Interval one(Decimal(1));
    Interval y = x;
    int halvings = 0;
    while (iabs(y) > quarter && halvings < 8) {
        const Interval root = isqrt(iadd(one, ipow(y, 2, q), q), q);
        y = idiv(y, iadd(one, root, q), q);
        ++halvings;
    }
    return scale_exact(atan_series(y, q), Decimal(1LL << halvings));
}

inline Interval artanh_point(const Interval& x, Precision q)
{
    const Decimal quarter = Decimal::from_parts(25, -2);
    const Interval one(Decimal(1));
    Interval y = x;
    int halvings = 0;
    while (iabs(y) > quarter) {
        const Interval gap = isub(one, ipow(y, 2, q), q);
        if (gap.lo().sign() <= 0 || halvings > 60) throw DomainError("artanh argument too close to 1 for working precision");
        y = idiv(y, iadd(one, isqrt(gap, q), q), q);
        ++halvings;
    }
    return scale_exact(artanh_series(y, q), Decimal(1LL << halvings));
}

// Taylor series of sin / cos at a reduced argument, with Lagrange remainder.
inline Interval sin_series(const Interval& r, Precision q)
{
    const Decimal b = iabs(r);
    if (b.is_zero()) return Interval(Decimal());
    const Interval r2 = ipow(r, 2, q);
    const Decimal b2 = mul(b, b, q, Round::up);
    const Decimal eps = b * pow10_decimal(-(q.digits + 2));
    Interval term = r;
    Interval sum = r;
    Decimal mag = b;
    for (int k = 1;; ++k) {
        const Decimal fact(static_cast<long long>(2 * k) * (2 * k + 1));
        mag = div(mul(mag, b2, q, Round::up), fact, q, Round::up);
        if (mag < eps) return widen(sum, mag, q);
        term = idiv(imul(term, r2, q), Interval(fact), q);
        sum = (k % 2 == 1) ? isub(sum, term, q) : iadd(sum, term, q);
    }
}

inline Interval cos_series(const Interval& r, Precision q)
{
    const Decimal b = iabs(r);
    const Interval one(Decimal(1));
    if (b.is_zero()) return one;
    const Interval r2 = ipow(r, 2, q);
    const Decimal b2 = mul(b, b, q, Round::up);
    const Decimal eps = pow10_decimal(-(q.digits + 2));
    Interval term = one;
    Interval sum = one;
    Decimal mag = 1;
    for (int k = 1;; ++k) {
        const Decimal fact(static_cast<long long>(2 * k - 1) * (2 * k));
        mag = div(mul(mag, b2, q, Round::up), fact, q, Round::up);
        if (mag < eps) return widen(sum, mag, q);
        term = idiv(imul(term, r2, q), Interval(fact), q);
        sum = (k % 2 == 1) ? isub(sum, term, q) : iadd(sum, term, q);
    }
}

inline Interval clamp_unit(const Interval& x)
{
    const Decimal one = 1;
    return {max(x.lo(), -one), min(x.hi(), one)};
}

// sin (or cos) of a narrow interval: reduce by the nearest multiple of pi/2.
inline Interval sin_point(const Interval& x, Precision q, bool cosine)
{
    const double approx = x.lo().to_double();
    if (!std::isfinite(approx) || std::fabs(approx) > 1e15) return {Decimal(-1), Decimal(1)};
    const auto k = static_cast<long long>(std::llround(approx / 1.5707963267948966));
    const auto extra = static_cast<int>(Decimal(k).top()) + 2;
    const Precision qr(q.digits + std::max(extra, 2));
    const Interval r = isub(x, imul(Interval(Decimal(k)), half_pi_interval(qr), qr), qr);
    auto quadrant = static_cast<int>(((k % 4) + 4) % 4);
    if (cosine) quadrant = (quadrant + 1) % 4;
    switch (quadrant) {
    case 0: return clamp_unit(sin_series(r, q));
    case 1: return clamp_unit(cos_series(r, q));
    case 2: return clamp_unit(ineg(sin_series(r, q)));
    default: return clamp_unit(ineg(cos_series(r, q)));
    }
}

// Whether some critical point (half_turns / 2 + 2j) * pi may lie in x.
inline bool may_contain_critical(const Interval& x, int half_turns, Precision q)
{
    const Interval pi = pi_interval(q);
    const double offset = half_turns / 2.0;
    const double lo = x.lo().to_double() / std::numbers::pi;
    const double hi = x.hi().to_double() / std::numbers::pi;
    const auto jlo = static_cast<long long>(std::floor((lo - offset) / 2.0)) - 1;
    const auto jhi = static_cast<long long>(std::ceil((hi - offset) / 2.0)) + 1;
    const Decimal off = Decimal(half_turns) * Decimal::from_parts(5, -1);
    for (long long j = jlo; j <= jhi; ++j) {
        const Interval c = round_out(scale_exact(pi, off + Decimal(2 * j)), q);
        if (c.lo() <= x.hi() && x.lo() <= c.hi()) return true;
    }
    return false;
}

inline Interval periodic_image(const Interval& x, Precision p, bool cosine)
{
    const Precision q = working(p);
    const Decimal seven = 7;
    if (x.width() > seven) return {Decimal(-1), Decimal(1)};
    Interval image = hull(sin_point(Interval(x.lo()), q, cosine), sin_point(Interval(x.hi()), q, cosine));
    const int max_at = cosine ? 0 : 1;
    const int min_at = cosine ? 2 : 3;
    Decimal lo = may_contain_critical(x, min_at, q) ? Decimal(-1) : image.lo();
    Decimal hi = may_contain_critical(x, max_at, q) ? Decimal(1) : image.hi();
    return round_out(Interval(std::move(lo), std::move(hi)), p);
}

inline Interval asin_point(const Interval& x, Precision q)
{
    const Interval one(Decimal(1));
    Interval gap = isub(one, ipow(x, 2, q), q);
    if (gap.lo().sign() < 0) gap = Interval(Decimal(), max(gap.hi(), Decimal()));
    const Interval y = idiv(x, iadd(one, isqrt(gap, q), q), q);
    return scale_exact(atan_point(y, q), Decimal(2));
}

inline Interval atn_point(const Interval& x, Precision q)
{
    const Decimal quarter = Decimal::from_parts(25, -2);
    if (iabs(x) <= quarter) {
        // sum (-x)^k / (2k+1); the tail is at most 4/3 of its first term.
        const Interval negx = ineg(x);
        const Decimal b = iabs(x);
        const Decimal eps = pow10_decimal(-(q.digits + 2));
        const Decimal tail_factor = Decimal::from_parts(134, -2);
        Interval power(Decimal(1));
        Interval sum(Decimal(1));
        Decimal mag = 1;
        for (int k = 1;; ++k) {
            mag = mul(mag, b, q, Round::up);
            if (mag < eps) return widen(sum, div(mul(mag, tail_factor, q, Round::up), Decimal(2 * k + 1), q, Round::up), q);
            power = imul(power, negx, q);
            sum = iadd(sum, idiv(power, Interval(Decimal(2 * k + 1)), q), q);
        }
    }
    if (x.lo().sign() > 0) {
        const Interval s = isqrt(x, q);
        return idiv(atan_point(s, q), s, q);
    }
    if (x.hi().sign() < 0) {
        const Interval s = isqrt(ineg(x), q);
        return idiv(artanh_point(s, q), s, q);
    }
    throw std::logic_error("atn point evaluation on a wide interval");
}

} // namespace detail

inline Interval iatan(const Interval& x, Precision p)
{
    const Precision q = detail::working(p);
    return {round(detail::atan_point(Interval(x.lo()), q).lo(), p, Round::down),
            round(detail::atan_point(Interval(x.hi()), q).hi(), p, Round::up)};
}

inline Interval isin(const Interval& x, Precision p) { return detail::periodic_image(x, p, false); }

inline Interval icos(const Interval& x, Precision p) { return detail::periodic_image(x, p, true); }

inline Interval iasin(const Interval& x, Precision p)
{
    const Decimal one = 1;
    if (x.lo() < -one || x.hi() > one) throw DomainError("asin argument outside [-1, 1]: " + x.to_string());
    const Precision q = detail::working(p);
    return {round(detail::asin_point(Interval(x.lo()), q).lo(), p, Round::down),
            round(detail::asin_point(Interval(x.hi()), q).hi(), p, Round::up)};
}

inline Interval iacos(const Interval& x, Precision p)
{
    const Decimal one = 1;
    if (x.lo() < -one || x.hi() > one) throw DomainError("acos argument outside [-1, 1]: " + x.to_string());
    const Precision q = detail::working(p);
    const Interval half_pi = half_pi_interval(q);
    return {round(isub(half_pi, detail::asin_point(Interval(x.hi()), q), q).lo(), p, Round::down),
            round(isub(half_pi, detail::asin_point(Interval(x.lo()), q), q).hi(), p, Round::up)};
}

/// atn is decreasing on (-1, inf): the image is [atn(hi), atn(lo)].
inline Interval iatn(const Interval& x, Precision p)
{
    const Decimal one = 1;
    if (x.lo() <= -one) throw DomainError("atn argument must exceed -1: " + x.to_string());
    const Precision q = detail::working(p);
    return {round(detail::atn_point(Interval(x.hi()), q).lo(), p, Round::down),
            round(detail::atn_point(Interval(x.lo()), q).hi(), p, Round::up)};
}

} // namespace rigor
