// Arbitrary-precision decimal scalars with directed rounding.
//
// A Decimal is sign * mantissa * 10^exponent with an unbounded mantissa.
// Exact operations (+, -, *) never round; the free functions taking a
// Precision round the exact result to that many significant digits in the
// requested direction, always to the tightest such decimal.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rigor {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

enum class Round { down, up };

/// Number of significant decimal digits kept by rounded operations.
struct Precision {
    int digits = 10;

    constexpr Precision() = default;
    constexpr explicit Precision(int d) : digits(d)
    {
        if (d < 1) throw std::invalid_argument("precision must be at least one digit");
    }
    friend constexpr auto operator<=>(Precision, Precision) = default;
};

namespace detail {

inline constexpr int kPow10TableSize = 1024;

inline const std::vector<BigInt>& pow10_table()
{
    static const std::vector<BigInt> table = [] {
        std::vector<BigInt> t(kPow10TableSize);
        t[0] = 1;
        for (int i = 1; i < kPow10TableSize; ++i) t[i] = t[i - 1] * 10;
        return t;
    }();
    return table;
}

inline BigInt pow10(std::int64_t k)
{
    if (k < 0) throw std::invalid_argument("negative power of ten");
    const auto& t = pow10_table();
    if (k < kPow10TableSize) return t[static_cast<std::size_t>(k)];
    BigInt r = t[kPow10TableSize - 1];
    k -= kPow10TableSize - 1;
    while (k >= kPow10TableSize) {
        r *= t[kPow10TableSize - 1];
        k -= kPow10TableSize - 1;
    }
    return r * t[static_cast<std::size_t>(k)];
}

inline void scale10(BigInt& m, std::int64_t k)
{
    if (k <= 0) return;
    const auto& t = pow10_table();
    if (k < kPow10TableSize) {
        m *= t[static_cast<std::size_t>(k)];
        return;
    }
    m *= pow10(k);
}

/// Number of decimal digits of a positive integer.
inline std::int64_t digit_count(const BigInt& m)
{
    if (m == 0) return 1;
    const auto bits = static_cast<std::int64_t>(boost::multiprecision::msb(m)) + 1;
    const auto d = static_cast<std::int64_t>(static_cast<double>(bits) * 0.30102999566398120);
    return (m >= pow10(d)) ? d + 1 : d;
}

} // namespace detail

class Decimal {
public:
    Decimal() = default;
    Decimal(long long v) : mantissa_(v) { normalize(); } // NOLINT(google-explicit-constructor)
    Decimal(int v) : Decimal(static_cast<long long>(v)) {} // NOLINT(google-explicit-constructor)

    /// value = mantissa * 10^exponent (mantissa carries the sign).
    static Decimal from_parts(BigInt mantissa, std::int64_t exponent)
    {
        Decimal d;
        d.mantissa_ = std::move(mantissa);
        d.exponent_ = exponent;
        d.normalize();
        return d;
    }

    /// Parses `[+-]digits[.digits][e[+-]digits]` exactly.
    static Decimal parse(std::string_view text)
    {
        std::size_t i = 0;
        bool negative = false;
        if (i < text.size() && (text[i] == '+' || text[i] == '-')) negative = text[i++] == '-';
        std::string digits;
        std::int64_t exponent = 0;
        bool any = false;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
            digits += text[i++];
            any = true;
        }
        if (i < text.size() && text[i] == '.') {
            ++i;
            while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
                digits += text[i++];
                --exponent;
                any = true;
            }
        }
        if (!any) throw std::invalid_argument("malformed decimal literal '" + std::string(text) + "'");
        if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
            ++i;
            bool eneg = false;
            if (i < text.size() && (text[i] == '+' || text[i] == '-')) eneg = text[i++] == '-';
            std::int64_t e = 0;
            bool edigits = false;
            while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
                e = e * 10 + (text[i++] - '0');
                edigits = true;
                if (e > 1'000'000'000) throw std::invalid_argument("decimal exponent out of range");
            }
            if (!edigits) throw std::invalid_argument("malformed decimal exponent in '" + std::string(text) + "'");
            exponent += eneg ? -e : e;
        }
        if (i != text.size()) throw std::invalid_argument("trailing characters in decimal literal '" + std::string(text) + "'");
        // cpp_int reads a leading zero as an octal prefix
        const auto first = digits.find_first_not_of('0');
        BigInt m = first == std::string::npos ? BigInt(0) : BigInt(digits.substr(first));
        if (negative) m = -m;
        return from_parts(std::move(m), exponent);
    }

    int sign() const { return mantissa_.sign(); }
    bool is_zero() const { return mantissa_.is_zero(); }
    const BigInt& mantissa() const { return mantissa_; }
    BigInt magnitude() const { return boost::multiprecision::abs(mantissa_); }
    std::int64_t exponent() const { return exponent_; }
    std::int64_t digits() const { return detail::digit_count(magnitude()); }
    /// Exponent of the position just above the leading digit: |x| < 10^top().
    std::int64_t top() const { return exponent_ + digits(); }

    Rational to_rational() const
    {
        if (exponent_ >= 0) {
            BigInt m = mantissa_;
            detail::scale10(m, exponent_);
            return Rational(m);
        }
        return Rational(mantissa_, detail::pow10(-exponent_));
    }

    double to_double() const { return std::stod(to_scientific()); }

    std::string to_string() const
    {
        if (is_zero()) return "0";
        std::string mag = magnitude().str();
        const auto n = static_cast<std::int64_t>(mag.size());
        const std::int64_t point = n + exponent_; // digits before the decimal point
        std::string out = sign() < 0 ? "-" : "";
        if (point > 30 || point < -30) return out + scientific_body(mag);
        if (exponent_ >= 0) return out + mag + std::string(static_cast<std::size_t>(exponent_), '0');
        if (point > 0) return out + mag.substr(0, static_cast<std::size_t>(point)) + "." + mag.substr(static_cast<std::size_t>(point));
        return out + "0." + std::string(static_cast<std::size_t>(-point), '0') + mag;
    }

    Decimal operator-() const
    {
        Decimal d = *this;
        d.mantissa_ = -d.mantissa_;
        return d;
    }

    friend Decimal abs(const Decimal& x) { return x.sign() < 0 ? -x : x; }

    friend Decimal operator+(const Decimal& a, const Decimal& b)
    {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        const auto e = std::min(a.exponent_, b.exponent_);
        BigInt ma = a.mantissa_;
        BigInt mb = b.mantissa_;
        detail::scale10(ma, a.exponent_ - e);
        detail::scale10(mb, b.exponent_ - e);
        return from_parts(ma + mb, e);
    }
    friend Decimal operator-(const Decimal& a, const Decimal& b) { return a + (-b); }
    friend Decimal operator*(const Decimal& a, const Decimal& b)
    {
        return from_parts(a.mantissa_ * b.mantissa_, a.exponent_ + b.exponent_);
    }

    friend bool operator==(const Decimal& a, const Decimal& b)
    {
        return a.exponent_ == b.exponent_ && a.mantissa_ == b.mantissa_;
    }

    friend std::strong_ordering operator<=>(const Decimal& a, const Decimal& b)
    {
        const int sa = a.sign();
        const int sb = b.sign();
        if (sa != sb) return sa <=> sb;
        if (sa == 0) return std::strong_ordering::equal;
        const auto mag = compare_magnitude(a, b);
        return sa > 0 ? mag : 0 <=> mag;
    }

private:
    static std::strong_ordering compare_magnitude(const Decimal& a, const Decimal& b)
    {
        const auto ta = a.top();
        const auto tb = b.top();
        if (ta != tb) return ta <=> tb;
        const auto e = std::min(a.exponent_, b.exponent_);
        BigInt ma = a.magnitude();
        BigInt mb = b.magnitude();
        detail::scale10(ma, a.exponent_ - e);
        detail::scale10(mb, b.exponent_ - e);
        if (ma == mb) return std::strong_ordering::equal;
        return ma < mb ? std::strong_ordering::less : std::strong_ordering::greater;
    }

    std::string to_scientific() const
    {
        if (is_zero()) return "0";
        return (sign() < 0 ? "-" : "") + scientific_body(magnitude().str());
    }

    std::string scientific_body(const std::string& mag) const
    {
        const auto n = static_cast<std::int64_t>(mag.size());
        std::string body = mag.substr(0, 1);
        if (n > 1) body += "." + mag.substr(1);
        return body + "e" + std::to_string(exponent_ + n - 1);
    }

    void normalize()
    {
        if (mantissa_.is_zero()) {
            exponent_ = 0;
            return;
        }
        if (boost::multiprecision::bit_test(mantissa_, 0)) return;
        BigInt q;
        BigInt r;
        for (;;) {
            boost::multiprecision::divide_qr(mantissa_, BigInt(10), q, r);
            if (!r.is_zero()) break;
            mantissa_.swap(q);
            ++exponent_;
        }
    }

    BigInt mantissa_;
    std::int64_t exponent_ = 0;
};

namespace detail {

inline bool away_from_zero(int sign, Round dir)
{
    return (dir == Round::up && sign > 0) || (dir == Round::down && sign < 0);
}

// Rounds sign * (mag + sticky) * 10^exp to p digits. `sticky` marks a
// discarded nonzero tail below the last digit of mag; callers that set it
// must supply mag with more than p digits.
inline Decimal round_magnitude(int sign, BigInt mag, std::int64_t exp, bool sticky, int p, Round dir)
{
    const auto d = digit_count(mag);
    if (d > p) {
        const auto k = d - p;
        BigInt q;
        BigInt r;
        boost::multiprecision::divide_qr(mag, pow10(k), q, r);
        if (!r.is_zero()) sticky = true;
        mag.swap(q);
        exp += k;
    }
    if (sticky && away_from_zero(sign, dir)) mag += 1;
    if (sign < 0) mag = -mag;
    return Decimal::from_parts(std::move(mag), exp);
}

// mag_num / mag_den * 10^exp rounded to p digits; both magnitudes positive.
inline Decimal round_quotient(int sign, const BigInt& num, const BigInt& den, std::int64_t exp, int p, Round dir)
{
    const auto shift = std::max<std::int64_t>(0, p + 1 + digit_count(den) - digit_count(num));
    BigInt scaled = num;
    scale10(scaled, shift);
    BigInt q;
    BigInt r;
    boost::multiprecision::divide_qr(scaled, den, q, r);
    return round_magnitude(sign, std::move(q), exp - shift, !r.is_zero(), p, dir);
}

} // namespace detail

/// Rounds x to p significant digits in direction dir.
inline Decimal round(const Decimal& x, Precision p, Round dir)
{
    if (x.is_zero() || x.digits() <= p.digits) return x;
    return detail::round_magnitude(x.sign(), x.magnitude(), x.exponent(), false, p.digits, dir);
}

/// The tightest p-digit decimal on the dir side of the rational x.
inline Decimal round_dir(const Rational& x, Precision p, Round dir)
{
    const BigInt& num = boost::multiprecision::numerator(x);
    const BigInt& den = boost::multiprecision::denominator(x);
    if (num.is_zero()) return {};
    return detail::round_quotient(num.sign(), boost::multiprecision::abs(num), den, 0, p.digits, dir);
}

/// Rounds x to a multiple of 10^-places in direction dir.
inline Decimal round_to_places(const Decimal& x, int places, Round dir)
{
    if (x.is_zero() || x.exponent() >= -places) return x;
    const auto k = -places - x.exponent();
    BigInt q;
    BigInt r;
    boost::multiprecision::divide_qr(x.magnitude(), detail::pow10(k), q, r);
    if (!r.is_zero() && detail::away_from_zero(x.sign(), dir)) q += 1;
    if (x.sign() < 0) q = -q;
    return Decimal::from_parts(std::move(q), -places);
}

inline Decimal add(const Decimal& a, const Decimal& b, Precision p, Round dir)
{
    if (a.is_zero()) return round(b, p, dir);
    if (b.is_zero()) return round(a, p, dir);
    const bool a_big = a.top() >= b.top();
    const Decimal& big = a_big ? a : b;
    const Decimal& small = a_big ? b : a;
    // When the small operand lies entirely below the rounding cell of the
    // big one, any nonzero value of the same sign rounds identically.
    const auto lowest = std::min(big.exponent(), big.top() - (p.digits + 2));
    if (small.top() <= lowest - 1) {
        const auto tiny = Decimal::from_parts(BigInt(small.sign()), lowest - 1);
        return round(big + tiny, p, dir);
    }
    return round(a + b, p, dir);
}

inline Decimal sub(const Decimal& a, const Decimal& b, Precision p, Round dir) { return add(a, -b, p, dir); }

inline Decimal mul(const Decimal& a, const Decimal& b, Precision p, Round dir) { return round(a * b, p, dir); }

inline Decimal div(const Decimal& a, const Decimal& b, Precision p, Round dir)
{
    if (b.is_zero()) throw std::domain_error("decimal division by zero");
    if (a.is_zero()) return {};
    return detail::round_quotient(a.sign() * b.sign(), a.magnitude(), b.magnitude(), a.exponent() - b.exponent(),
                                  p.digits, dir);
}

inline Decimal sqrt(const Decimal& a, Precision p, Round dir)
{
    if (a.sign() < 0) throw std::domain_error("square root of a negative decimal");
    if (a.is_zero()) return {};
    BigInt m = a.magnitude();
    auto k = std::max<std::int64_t>(0, 2 * p.digits + 2 - a.digits());
    if ((a.exponent() - k) % 2 != 0) ++k;
    detail::scale10(m, k);
    BigInt s = boost::multiprecision::sqrt(m);
    const bool exact = s * s == m;
    return detail::round_magnitude(1, std::move(s), (a.exponent() - k) / 2, !exact, p.digits, dir);
}

/// Exact midpoint (a+b)/2.
inline Decimal midpoint(const Decimal& a, const Decimal& b) { return (a + b) * Decimal::from_parts(5, -1); }

inline Decimal min(const Decimal& a, const Decimal& b) { return b < a ? b : a; }
inline Decimal max(const Decimal& a, const Decimal& b) { return a < b ? b : a; }

inline std::string to_string(const Rational& r)
{
    return r.str();
}

/// Exact square root of a nonnegative rational, or nullopt when r is not a
/// rational square.
inline std::optional<Rational> rational_sqrt_exact(const Rational& r)
{
    if (r < 0) throw std::domain_error("square root of a negative rational");
    const BigInt& num = boost::multiprecision::numerator(r);
    const BigInt& den = boost::multiprecision::denominator(r);
    BigInt sn = boost::multiprecision::sqrt(num);
    BigInt sd = boost::multiprecision::sqrt(den);
    if (sn * sn != num || sd * sd != den) return std::nullopt;
    return Rational(sn, sd);
}

/// Exact decimal value of a rational whose denominator divides a power of ten.
inline std::optional<Decimal> exact_decimal(const Rational& r)
{
    BigInt den = boost::multiprecision::denominator(r);
    std::int64_t twos = 0;
    std::int64_t fives = 0;
    while (!boost::multiprecision::bit_test(den, 0)) {
        den >>= 1;
        ++twos;
    }
    while (den % 5 == 0) {
        den /= 5;
        ++fives;
    }
    if (den != 1) return std::nullopt;
    const auto k = std::max(twos, fives);
    BigInt scaled = boost::multiprecision::numerator(r) * detail::pow10(k) / boost::multiprecision::denominator(r);
    return Decimal::from_parts(std::move(scaled), -k);
}

} // namespace rigor
