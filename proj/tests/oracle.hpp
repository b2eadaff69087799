// Test oracles independent of the decimal interval code: 50-digit binary
// floating point evaluation and random generators.
#pragma once

#include "rigor/expr.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <random>
#include <sstream>

namespace oracle {

using Big = boost::multiprecision::cpp_bin_float_50;
using rigor::Decimal;
using rigor::Expr;
using rigor::Interval;
using rigor::Op;

inline Big big(const Decimal& d) { return Big(d.to_string()); }

inline Big big(const rigor::Rational& r) { return Big(boost::multiprecision::numerator(r)) / Big(boost::multiprecision::denominator(r)); }

inline const Big& pi() { return boost::math::constants::pi<Big>(); }

/// Slack absorbing the oracle's own rounding (about 1e-49 relative).
inline Big slack(const Big& v) { return Big("1e-40") * std::max(Big(1), abs(v)); }

inline bool encloses(const Interval& x, const Big& v) { return big(x.lo()) <= v + slack(v) && v - slack(v) <= big(x.hi()); }

inline Big atn(const Big& u)
{
    if (u == 0) return 1;
    if (u > 0) {
        const Big s = sqrt(u);
        return atan(s) / s;
    }
    const Big s = sqrt(-u);
    return log((1 + s) / (1 - s)) / (2 * s);
}

/// Point value, or nullopt where the expression is undefined.
inline std::optional<Big> eval(const Expr& e, const std::vector<Big>& x)
{
    switch (e.op()) {
    case Op::var: return x.at(static_cast<std::size_t>(e.index()));
    case Op::constant: return big(e.value());
    case Op::pi: return pi();
    default: break;
    }
    const auto a = eval(e.lhs(), x);
    if (!a) return std::nullopt;
    if (rigor::is_binary(e.op())) {
        const auto b = eval(e.rhs(), x);
        if (!b) return std::nullopt;
        switch (e.op()) {
        case Op::add: return *a + *b;
        case Op::sub: return *a - *b;
        case Op::mul: return *a * *b;
        default:
            if (*b == 0) return std::nullopt;
            return *a / *b;
        }
    }
    switch (e.op()) {
    case Op::neg: return -*a;
    case Op::pow: return Big(pow(*a, static_cast<int>(e.exponent())));
    case Op::sqrt:
        if (*a < 0) return std::nullopt;
        return sqrt(*a);
    case Op::sin: return sin(*a);
    case Op::cos: return cos(*a);
    case Op::atan: return atan(*a);
    case Op::asin:
        if (abs(*a) > 1) return std::nullopt;
        return asin(*a);
    case Op::acos:
        if (abs(*a) > 1) return std::nullopt;
        return acos(*a);
    case Op::atn:
        if (*a <= -1) return std::nullopt;
        return atn(*a);
    case Op::abs: return abs(*a);
    default: return std::nullopt;
    }
}

/// Random decimal in [lo, hi] with the given number of fractional digits.
inline Decimal random_decimal(std::mt19937_64& rng, double lo, double hi, int places)
{
    std::uniform_real_distribution<double> u(lo, hi);
    std::ostringstream s;
    s.precision(places);
    s << std::fixed << u(rng);
    return Decimal::parse(s.str());
}

inline Interval random_interval(std::mt19937_64& rng, double lo, double hi, int places)
{
    Decimal a = random_decimal(rng, lo, hi, places);
    Decimal b = random_decimal(rng, lo, hi, places);
    if (b < a) std::swap(a, b);
    return {a, b};
}

/// A point of the box with coordinates drawn as 50-digit values.
inline std::vector<Big> random_point(std::mt19937_64& rng, const rigor::Box& box)
{
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<Big> x;
    for (const auto& e : box) {
        const Big lo = big(e.lo());
        const Big hi = big(e.hi());
        Big v = lo + (hi - lo) * Big(u(rng));
        x.push_back(v < lo ? lo : (v > hi ? hi : v));
    }
    return x;
}

/// Random smooth expression in `vars` variables.
inline Expr random_expr(std::mt19937_64& rng, int vars, int depth)
{
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 11);
    const int k = pick(rng);
    if (k == 0) return Expr::var(std::uniform_int_distribution<int>(0, vars - 1)(rng));
    if (k == 1) return Expr::constant(random_decimal(rng, -2, 2, 2));
    const Expr a = random_expr(rng, vars, depth - 1);
    switch (k) {
    case 2: return Expr::binary(Op::add, a, random_expr(rng, vars, depth - 1));
    case 3: return Expr::binary(Op::sub, a, random_expr(rng, vars, depth - 1));
    case 4: return Expr::binary(Op::mul, a, random_expr(rng, vars, depth - 1));
    case 5: return Expr::binary(Op::div, a, Expr::binary(Op::add, Expr::constant(3), Expr::unary(Op::sin, random_expr(rng, vars, depth - 1))));
    case 6: return Expr::pow(a, std::uniform_int_distribution<unsigned>(2, 3)(rng));
    case 7: return Expr::unary(Op::sin, a);
    case 8: return Expr::unary(Op::cos, a);
    case 9: return Expr::unary(Op::atan, a);
    case 10: return Expr::unary(Op::sqrt, Expr::binary(Op::add, Expr::constant(1), Expr::pow(a, 2)));
    default: return Expr::unary(Op::neg, a);
    }
}

} // namespace oracle
