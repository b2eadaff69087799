// Linear-program infeasibility certificates.
//
// A system is a list of rows c.x <= b plus finite bounds 0 <= l_j <= u_j.
// Normalized rows are the plain rows followed by, for each variable j,
// -x_j <= -l_j and x_j <= u_j. A Farkas certificate is a vector of
// nonnegative multipliers, one per normalized row, whose weighted sum has
// all-zero coefficients and a negative right-hand side.
#pragma once

#include "rigor/cert.hpp"
#include "rigor/spec.hpp"

#include <cassert>
#include <cmath>
#include <map>
#include <set>

namespace rigor {

struct LinearRow {
    std::vector<Rational> coeffs;
    Rational rhs;
    friend bool operator==(const LinearRow&, const LinearRow&) = default;
};

struct LinearSystem {
    std::size_t num_vars = 0;
    std::vector<LinearRow> rows;
    std::vector<Rational> lower;
    std::vector<Rational> upper;

    /// Rows followed by the bound rows (-x_j <= -l_j, x_j <= u_j) per variable.
    std::vector<LinearRow> normalized_rows() const
    {
        std::vector<LinearRow> out = rows;
        for (std::size_t j = 0; j < num_vars; ++j) {
            LinearRow lo{std::vector<Rational>(num_vars, Rational(0)), -lower[j]};
            lo.coeffs[j] = -1;
            LinearRow hi{std::vector<Rational>(num_vars, Rational(0)), upper[j]};
            hi.coeffs[j] = 1;
            out.push_back(std::move(lo));
            out.push_back(std::move(hi));
        }
        return out;
    }

    std::size_t normalized_count() const { return rows.size() + 2 * num_vars; }

    void validate() const
    {
        if (lower.size() != num_vars || upper.size() != num_vars) throw std::invalid_argument("every variable needs a lower and an upper bound");
        for (std::size_t j = 0; j < num_vars; ++j) {
            if (lower[j] < 0 || upper[j] < lower[j]) throw std::invalid_argument("bounds must satisfy 0 <= lower <= upper");
        }
        for (const auto& r : rows) {
            if (r.coeffs.size() != num_vars) throw std::invalid_argument("row has the wrong number of coefficients");
        }
    }
};

struct UnboundedVariable : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct MissingBoundCertificate : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A constant such as 2, -sqrt(2) or pi, kept with its source text.
struct SymbolicConstant {
    std::string source;
    Expr value;
};

struct SymbolicRow {
    std::vector<SymbolicConstant> coeffs;
    SymbolicConstant rhs;
    /// Overrides the system-wide decimal places for this row.
    std::optional<int> digits;
};

struct SymbolicSystem {
    std::string id;
    std::size_t num_vars = 0;
    std::vector<std::optional<std::pair<Decimal, Decimal>>> bounds;
    std::vector<SymbolicRow> rows;
};

inline Interval enclose_constant(const SymbolicConstant& c, int digits)
{
    const Box none;
    const auto r = eval_natural(c.value, none, Precision(std::max(20, digits + 20)));
    if (!r) throw std::invalid_argument("constant '" + c.source + "' is undefined");
    return *r;
}

/// Safe relaxation: coefficients rounded down and right-hand sides rounded up
/// to `digits` decimal places, so every solution of the symbolic system
/// solves the relaxed one.
inline LinearSystem relax(const SymbolicSystem& sym, int digits)
{
    LinearSystem sys;
    sys.num_vars = sym.num_vars;
    for (std::size_t j = 0; j < sym.num_vars; ++j) {
        if (j >= sym.bounds.size() || !sym.bounds[j]) throw UnboundedVariable("variable " + std::to_string(j + 1) + " has no bound");
        sys.lower.push_back(sym.bounds[j]->first.to_rational());
        sys.upper.push_back(sym.bounds[j]->second.to_rational());
    }
    for (const auto& row : sym.rows) {
        const int k = row.digits.value_or(digits);
        LinearRow r;
        for (const auto& c : row.coeffs) r.coeffs.push_back(round_to_places(enclose_constant(c, k).lo(), k, Round::down).to_rational());
        r.rhs = round_to_places(enclose_constant(row.rhs, k).hi(), k, Round::up).to_rational();
        sys.rows.push_back(std::move(r));
    }
    sys.validate();
    return sys;
}

// ---------------------------------------------------------------------------
// Exact checking

struct DualCertificate {
    std::vector<Rational> multipliers;
    /// Power of 10 (or, failing that, the denominator lcm) making S*lambda integral.
    BigInt scale = 1;
};

namespace detail {

inline BigInt lcm_denominators(const std::vector<Rational>& v)
{
    BigInt l = 1;
    for (const auto& x : v) l = boost::multiprecision::lcm(l, BigInt(boost::multiprecision::denominator(x)));
    return l;
}

// Smallest power of 10 that is a multiple of d, or d itself when d has
// prime factors other than 2 and 5.
inline BigInt decimal_scale(const BigInt& d)
{
    BigInt rest = d;
    unsigned twos = 0;
    unsigned fives = 0;
    while (rest % 2 == 0) {
        rest /= 2;
        ++twos;
    }
    while (rest % 5 == 0) {
        rest /= 5;
        ++fives;
    }
    if (rest != 1) return d;
    return pow10(std::max(twos, fives));
}

inline BigInt scale_for(const std::vector<Rational>& v) { return decimal_scale(lcm_denominators(v)); }

} // namespace detail

inline DualCertificate make_dual(std::vector<Rational> multipliers)
{
    DualCertificate d;
    d.scale = detail::scale_for(multipliers);
    d.multipliers = std::move(multipliers);
    return d;
}

enum class LpRejection { length_mismatch, negative_multiplier, nonzero_coefficient, nonnegative_rhs, record_mismatch };

inline const char* to_string(LpRejection r)
{
    switch (r) {
    case LpRejection::length_mismatch: return "length_mismatch";
    case LpRejection::negative_multiplier: return "negative_multiplier";
    case LpRejection::nonzero_coefficient: return "nonzero_coefficient";
    case LpRejection::nonnegative_rhs: return "nonnegative_rhs";
    case LpRejection::record_mismatch: return "record_mismatch";
    }
    return "unknown";
}

struct LpVerdict {
    bool certified = false;
    LpRejection reason = LpRejection::nonnegative_rhs;
    std::size_t index = 0; // offending row or variable, 0-based
    /// Exact weighted sum: coefficients and right-hand side.
    std::vector<Rational> summed_coeffs;
    Rational summed_rhs;
    /// The same sum in integers, scaled by scale * rowscale.
    BigInt scale = 1;
    BigInt rowscale = 1;
    std::vector<BigInt> scaled_multipliers;
    BigInt scaled_rhs;
};

/// Exact replay of a Farkas certificate in integer arithmetic.
inline LpVerdict check_infeasible(const LinearSystem& sys, const DualCertificate& dual)
{
    LpVerdict v;
    const auto rows = sys.normalized_rows();
    if (dual.multipliers.size() != rows.size()) {
        v.reason = LpRejection::length_mismatch;
        return v;
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (dual.multipliers[i] < 0) {
            v.reason = LpRejection::negative_multiplier;
            v.index = i;
            return v;
        }
    }
    std::vector<Rational> entries;
    for (const auto& r : rows) {
        entries.insert(entries.end(), r.coeffs.begin(), r.coeffs.end());
        entries.push_back(r.rhs);
    }
    v.rowscale = detail::scale_for(entries);
    v.scale = dual.scale;
    for (const auto& m : dual.multipliers) {
        const Rational s = m * Rational(v.scale);
        if (boost::multiprecision::denominator(s) != 1) throw std::invalid_argument("dual scale does not clear the multiplier denominators");
        v.scaled_multipliers.push_back(boost::multiprecision::numerator(s));
    }
    const auto integer = [&](const Rational& x) { return BigInt(boost::multiprecision::numerator(x * Rational(v.rowscale))); };
    std::vector<BigInt> sum(sys.num_vars, BigInt(0));
    BigInt rhs = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const BigInt& m = v.scaled_multipliers[i];
        if (m == 0) continue;
        for (std::size_t j = 0; j < sys.num_vars; ++j) sum[j] += m * integer(rows[i].coeffs[j]);
        rhs += m * integer(rows[i].rhs);
    }
    const Rational denom = Rational(v.scale * v.rowscale);
    for (const auto& s : sum) v.summed_coeffs.push_back(Rational(s) / denom);
    v.summed_rhs = Rational(rhs) / denom;
    v.scaled_rhs = rhs;
    for (std::size_t j = 0; j < sys.num_vars; ++j) {
        if (sum[j] != 0) {
            v.reason = LpRejection::nonzero_coefficient;
            v.index = j;
            return v;
        }
    }
    if (rhs >= 0) {
        v.reason = LpRejection::nonnegative_rhs;
        return v;
    }
    v.certified = true;
    return v;
}

/// Repairs approximate multipliers for the plain rows: negative entries are
/// clamped to 0 and each residual coefficient r_j is cancelled on a bound
/// row. Returns nullopt (Hopeless) unless the repaired sum is negative.
inline std::optional<DualCertificate> modify_dual(const LinearSystem& sys, const std::vector<Decimal>& approx)
{
    if (approx.size() != sys.rows.size()) throw std::invalid_argument("approximate dual must have one entry per non-bound row");
    std::vector<Rational> lambda;
    for (const auto& a : approx) lambda.push_back(a.sign() < 0 ? Rational(0) : a.to_rational());
    std::vector<Rational> residual(sys.num_vars, Rational(0));
    for (std::size_t i = 0; i < sys.rows.size(); ++i) {
        for (std::size_t j = 0; j < sys.num_vars; ++j) residual[j] += lambda[i] * sys.rows[i].coeffs[j];
    }
    for (std::size_t j = 0; j < sys.num_vars; ++j) {
        const Rational& r = residual[j];
        lambda.push_back(r > 0 ? r : Rational(0));
        lambda.push_back(r < 0 ? Rational(-r) : Rational(0));
    }
    DualCertificate d = make_dual(std::move(lambda));
    const LpVerdict v = check_infeasible(sys, d);
    assert(v.reason != LpRejection::nonzero_coefficient);
    if (!v.certified) return std::nullopt;
    return d;
}

// ---------------------------------------------------------------------------
// Untrusted approximate dual

namespace detail {

// Dense tableau simplex for min c.x subject to A x = b, x >= 0, started from
// a given feasible basis. Bland's rule; returns false if unbounded.
struct Tableau {
    std::vector<std::vector<double>> a; // rows: constraints, last column rhs
    std::vector<double> cost;
    std::vector<std::size_t> basis;

    bool solve()
    {
        const std::size_t m = a.size();
        const std::size_t n = cost.size();
        constexpr double eps = 1e-12;
        for (int iter = 0; iter < 10000; ++iter) {
            // Reduced costs c_j - c_B B^-1 A_j with the tableau already in canonical form.
            std::size_t enter = n;
            for (std::size_t j = 0; j < n && enter == n; ++j) {
                double rc = cost[j];
                for (std::size_t i = 0; i < m; ++i) rc -= cost[basis[i]] * a[i][j];
                if (rc < -1e-10) enter = j;
            }
            if (enter == n) return true;
            std::size_t leave = m;
            double best = 0;
            for (std::size_t i = 0; i < m; ++i) {
                if (a[i][enter] <= eps) continue;
                const double ratio = a[i][n] / a[i][enter];
                if (leave == m || ratio < best - 1e-15 || (std::abs(ratio - best) <= 1e-15 && basis[i] < basis[leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave == m) return false;
            const double piv = a[leave][enter];
            for (auto& x : a[leave]) x /= piv;
            for (std::size_t i = 0; i < m; ++i) {
                if (i == leave || a[i][enter] == 0) continue;
                const double f = a[i][enter];
                for (std::size_t j = 0; j <= n; ++j) a[i][j] -= f * a[leave][j];
            }
            basis[leave] = enter;
        }
        return false;
    }
};

inline Decimal decimal_from_double(double x, int places)
{
    std::ostringstream s;
    s.precision(places);
    s << std::fixed << x;
    return Decimal::parse(s.str());
}

} // namespace detail

/// Multipliers for the plain rows from a floating-point LP:
///   min sum_i lambda_i b_i - sum_j l_j p_j + sum_j u_j q_j
///   s.t. sum_i lambda_i a_ij - p_j + q_j = 0, 0 <= lambda_i <= 1, p, q >= 0,
/// the dual of minimizing total slack. nullopt (NoCertificateFound) when the
/// optimum is not clearly negative.
inline std::optional<std::vector<Decimal>> find_dual_approx(const LinearSystem& sys)
{
    const std::size_t m = sys.rows.size();
    const std::size_t n = sys.num_vars;
    if (m == 0) return std::nullopt;
    // Columns: lambda (m), p (n), q (n), w (m, slack of lambda <= 1).
    const std::size_t cols = 2 * m + 2 * n;
    detail::Tableau t;
    t.cost.assign(cols, 0.0);
    for (std::size_t i = 0; i < m; ++i) t.cost[i] = sys.rows[i].rhs.convert_to<double>();
    for (std::size_t j = 0; j < n; ++j) {
        t.cost[m + j] = -sys.lower[j].convert_to<double>();
        t.cost[m + n + j] = sys.upper[j].convert_to<double>();
    }
    // Equality rows; p_j starts basic at 0 after negating the row.
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> row(cols + 1, 0.0);
        for (std::size_t i = 0; i < m; ++i) row[i] = -sys.rows[i].coeffs[j].convert_to<double>();
        row[m + j] = 1;
        row[m + n + j] = -1;
        t.a.push_back(std::move(row));
        t.basis.push_back(m + j);
    }
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<double> row(cols + 1, 0.0);
        row[i] = 1;
        row[m + 2 * n + i] = 1;
        row[cols] = 1;
        t.a.push_back(std::move(row));
        t.basis.push_back(m + 2 * n + i);
    }
    if (!t.solve()) return std::nullopt;
    std::vector<double> x(cols, 0.0);
    for (std::size_t i = 0; i < t.basis.size(); ++i) x[t.basis[i]] = t.a[i][cols];
    double objective = 0;
    for (std::size_t j = 0; j < cols; ++j) objective += t.cost[j] * x[j];
    if (objective > -1e-9) return std::nullopt;
    std::vector<Decimal> out;
    for (std::size_t i = 0; i < m; ++i) out.push_back(detail::decimal_from_double(std::clamp(x[i], 0.0, 1.0), 12));
    return out;
}

// ---------------------------------------------------------------------------
// Text formats

namespace detail {

inline SymbolicConstant parse_lp_term(Lexer& lex)
{
    std::string source;
    bool negative = false;
    if (lex.peek().kind == Tok::punct && lex.peek().text == "-") {
        lex.next();
        negative = true;
        source = "-";
    }
    Expr e;
    const Token t = lex.next();
    if (t.kind == Tok::number) {
        try {
            e = Expr::constant(Decimal::parse(t.text));
        } catch (const std::invalid_argument& ex) {
            lex.fail(ex.what(), t);
        }
        source += t.text;
    } else if (t.kind == Tok::ident && t.text == "pi") {
        e = Expr::pi();
        source += "pi";
    } else if (t.kind == Tok::ident && t.text == "sqrt") {
        lex.expect_punct("(");
        const Token arg = lex.next();
        if (arg.kind != Tok::number) lex.fail("sqrt takes a decimal literal", arg);
        lex.expect_punct(")");
        e = Expr::unary(Op::sqrt, Expr::constant(Decimal::parse(arg.text)));
        source += "sqrt(" + arg.text + ")";
    } else {
        lex.fail("expected a decimal, sqrt(DECIMAL) or pi, found '" + t.text + "'", t);
    }
    if (negative) e = Expr::unary(Op::neg, e);
    return {source, e};
}

inline std::size_t parse_count(Lexer& lex, std::size_t min, std::size_t max, const char* what)
{
    const Token t = lex.next();
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (t.kind != Tok::number || ec != std::errc() || ptr != t.text.data() + t.text.size() || v < min || v > max) {
        lex.fail(std::string("expected ") + what, t);
    }
    return v;
}

inline std::string parse_id(Lexer& lex)
{
    const Token id = lex.next();
    if (id.kind != Tok::string || !valid_identifier_token(id.text)) lex.fail("expected a quoted id of letters, digits, '_', '-' and '.'", id);
    return id.text;
}

} // namespace detail

/// Parses `lp "<id>" vars n; bound j lo hi; ... row c1 .. cn <= b [digits K]; ...`.
/// Several systems may share one file.
inline std::vector<SymbolicSystem> parse_lp_systems(std::string_view text)
{
    detail::Lexer lex(text);
    std::vector<SymbolicSystem> out;
    std::set<std::string> ids;
    while (lex.peek().kind != detail::Tok::end) {
        const detail::Token start = lex.peek();
        lex.expect_keyword("lp");
        SymbolicSystem s;
        s.id = detail::parse_id(lex);
        if (!ids.insert(s.id).second) throw DuplicateId("duplicate system id '" + s.id + "'", start.line, start.column);
        lex.expect_keyword("vars");
        s.num_vars = detail::parse_count(lex, 1, 64, "a variable count between 1 and 64");
        lex.expect_punct(";");
        s.bounds.assign(s.num_vars, std::nullopt);
        while (lex.at_keyword("bound") || lex.at_keyword("row")) {
            if (lex.at_keyword("bound")) {
                const detail::Token kw = lex.next();
                const std::size_t j = detail::parse_count(lex, 1, s.num_vars, "a variable index");
                Decimal lo = lex.expect_decimal();
                Decimal hi = lex.expect_decimal();
                if (lo.sign() < 0) lex.fail("variables must be nonnegative", kw);
                if (hi < lo) lex.fail("empty bound range", kw);
                if (s.bounds[j - 1]) lex.fail("duplicate bound", kw);
                s.bounds[j - 1] = std::pair{std::move(lo), std::move(hi)};
                lex.expect_punct(";");
            } else {
                lex.next();
                SymbolicRow row;
                for (std::size_t j = 0; j < s.num_vars; ++j) row.coeffs.push_back(detail::parse_lp_term(lex));
                lex.expect_punct("<=");
                row.rhs = detail::parse_lp_term(lex);
                if (lex.at_keyword("digits")) {
                    lex.next();
                    row.digits = static_cast<int>(detail::parse_count(lex, 0, 30, "a digit count between 0 and 30"));
                }
                lex.expect_punct(";");
                s.rows.push_back(std::move(row));
            }
        }
        out.push_back(std::move(s));
    }
    if (out.empty()) throw ParseError("no linear systems found", 1, 1);
    return out;
}

/// Parses `dual "<id>" l1 .. lm;` entries.
inline std::map<std::string, std::vector<Decimal>> parse_dual_hints(std::string_view text)
{
    detail::Lexer lex(text);
    std::map<std::string, std::vector<Decimal>> out;
    while (lex.peek().kind != detail::Tok::end) {
        const detail::Token start = lex.peek();
        lex.expect_keyword("dual");
        const std::string id = detail::parse_id(lex);
        std::vector<Decimal> v;
        while (!lex.accept_punct(";")) v.push_back(lex.expect_decimal());
        if (!out.emplace(id, std::move(v)).second) throw DuplicateId("duplicate dual hint '" + id + "'", start.line, start.column);
    }
    return out;
}

struct LpCertificate {
    std::string id;
    int digits = 2;
    BigInt scale = 1;
    BigInt rowscale = 1;
    std::vector<BigInt> multipliers; // scale * lambda
    std::vector<BigInt> contradiction; // summed coefficients, all 0
    BigInt contradiction_rhs;
    friend bool operator==(const LpCertificate&, const LpCertificate&) = default;
};

inline LpCertificate make_lp_certificate(const std::string& id, int digits, const LpVerdict& v)
{
    LpCertificate c{id, digits, v.scale, v.rowscale, v.scaled_multipliers, {}, v.scaled_rhs};
    c.contradiction.assign(v.summed_coeffs.size(), BigInt(0));
    return c;
}

inline std::string serialize(const LpCertificate& c)
{
    std::string out = "lpcert v1 " + c.id + "\n";
    out += "digits " + std::to_string(c.digits) + "\n";
    out += "scale " + c.scale.str() + "\n";
    out += "rowscale " + c.rowscale.str() + "\n";
    out += "multipliers";
    for (const auto& m : c.multipliers) out += ' ' + m.str();
    out += "\ncontradiction";
    for (const auto& m : c.contradiction) out += ' ' + m.str();
    out += " <= " + c.contradiction_rhs.str() + "\n";
    return out;
}

inline LpCertificate deserialize_lp_certificate(std::string_view text)
{
    std::istringstream in{std::string(text)};
    std::string line;
    const auto next_line = [&](const std::string& key) {
        if (!std::getline(in, line)) throw FormatError("truncated lp certificate");
        std::istringstream ls(line);
        std::string k;
        ls >> k;
        if (k != key) throw FormatError("expected '" + key + "' line");
        std::vector<std::string> words;
        for (std::string w; ls >> w;) words.push_back(w);
        return words;
    };
    const auto integer = [](const std::string& w) {
        const std::size_t start = !w.empty() && w[0] == '-' ? 1 : 0;
        if (w.size() == start || w.find_first_not_of("0123456789", start) != std::string::npos) throw FormatError("malformed integer '" + w + "'");
        std::string digits = w.substr(start);
        digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
        const BigInt v(digits);
        return start ? BigInt(-v) : v;
    };
    LpCertificate c;
    const auto header = next_line("lpcert");
    if (header.size() != 2) throw FormatError("malformed lp certificate header");
    if (header[0] != "v1") throw FormatError("unsupported lp certificate version '" + header[0] + "'");
    c.id = header[1];
    const auto one = [&](const std::string& key) {
        const auto w = next_line(key);
        if (w.size() != 1) throw FormatError("malformed '" + key + "' line");
        return integer(w[0]);
    };
    const BigInt digits = one("digits");
    if (digits < 0 || digits > 30) throw FormatError("digits out of range");
    c.digits = digits.convert_to<int>();
    c.scale = one("scale");
    c.rowscale = one("rowscale");
    if (c.scale <= 0 || c.rowscale <= 0) throw FormatError("scales must be positive");
    for (const auto& w : next_line("multipliers")) c.multipliers.push_back(integer(w));
    auto contra = next_line("contradiction");
    if (contra.size() < 2 || contra[contra.size() - 2] != "<=") throw FormatError("malformed contradiction line");
    c.contradiction_rhs = integer(contra.back());
    contra.resize(contra.size() - 2);
    for (const auto& w : contra) c.contradiction.push_back(integer(w));
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") != std::string::npos) throw FormatError("trailing content in lp certificate");
    }
    return c;
}

/// Replays an lp certificate: the multipliers are rescaled and checked
/// exactly; the recorded contradiction must match the recomputed sum.
inline LpVerdict check_lp_certificate(const LinearSystem& sys, const LpCertificate& c)
{
    std::vector<Rational> lambda;
    for (const auto& m : c.multipliers) lambda.push_back(Rational(m) / Rational(c.scale));
    DualCertificate d{std::move(lambda), c.scale};
    LpVerdict v = check_infeasible(sys, d);
    if (v.certified && (v.scaled_rhs != c.contradiction_rhs || v.rowscale != c.rowscale || c.contradiction != std::vector<BigInt>(sys.num_vars, BigInt(0)))) {
        v.certified = false;
        v.reason = LpRejection::record_mismatch;
    }
    return v;
}

// ---------------------------------------------------------------------------
// Nonlinear to linear

/// lhs <= rhs
struct NonlinearConstraint {
    Expr lhs;
    Decimal rhs;
};

struct NonlinearSystem {
    std::vector<std::string> names;
    Box domain; // bounds of the original variables
    std::vector<NonlinearConstraint> constraints;
};

struct BoundProof {
    InequalitySpec spec;
    Certificate cert;
};

/// Replace `subterm` by a fresh variable t with lo <= t <= hi. The bounds
/// need proofs of lo - subterm <= 0 and subterm - hi <= 0 on the domain.
struct Substitution {
    Expr subterm;
    std::string name;
    Decimal lo;
    Decimal hi;
    std::optional<BoundProof> lower_proof;
    std::optional<BoundProof> upper_proof;
};

namespace detail {

inline Expr substitute(const Expr& e, const Expr& pattern, const Expr& replacement)
{
    if (same(e, pattern)) return replacement;
    switch (e.op()) {
    case Op::var:
    case Op::constant:
    case Op::pi: return e;
    case Op::pow: return Expr::pow(substitute(e.lhs(), pattern, replacement), e.exponent());
    default:
        if (is_binary(e.op())) return Expr::binary(e.op(), substitute(e.lhs(), pattern, replacement), substitute(e.rhs(), pattern, replacement));
        return Expr::unary(e.op(), substitute(e.lhs(), pattern, replacement));
    }
}

// Coefficients and constant term of a linear expression, or nullopt.
struct Affine {
    std::vector<Rational> coeffs;
    Rational constant;
};

inline std::optional<Affine> affine(const Expr& e, std::size_t n)
{
    Affine a{std::vector<Rational>(n, Rational(0)), 0};
    switch (e.op()) {
    case Op::var: a.coeffs.at(static_cast<std::size_t>(e.index())) = 1; return a;
    case Op::constant: a.constant = e.value().to_rational(); return a;
    case Op::neg: {
        auto x = affine(e.lhs(), n);
        if (!x) return std::nullopt;
        for (auto& c : x->coeffs) c = -c;
        x->constant = -x->constant;
        return x;
    }
    case Op::add:
    case Op::sub: {
        auto x = affine(e.lhs(), n);
        auto y = affine(e.rhs(), n);
        if (!x || !y) return std::nullopt;
        const Rational s = e.op() == Op::add ? 1 : -1;
        for (std::size_t j = 0; j < n; ++j) x->coeffs[j] += s * y->coeffs[j];
        x->constant += s * y->constant;
        return x;
    }
    case Op::mul:
    case Op::div: {
        auto x = affine(e.lhs(), n);
        auto y = affine(e.rhs(), n);
        if (!x || !y) return std::nullopt;
        const auto is_const = [](const Affine& z) { return std::all_of(z.coeffs.begin(), z.coeffs.end(), [](const Rational& c) { return c == 0; }); };
        if (e.op() == Op::div) {
            if (!is_const(*y) || y->constant == 0) return std::nullopt;
            for (auto& c : x->coeffs) c /= y->constant;
            x->constant /= y->constant;
            return x;
        }
        if (!is_const(*x)) std::swap(x, y);
        if (!is_const(*x)) return std::nullopt;
        for (auto& c : y->coeffs) c *= x->constant;
        y->constant *= x->constant;
        return y;
    }
    default: return std::nullopt;
    }
}

inline void require_bound_proof(const std::optional<BoundProof>& proof, const NonlinearSystem& sys, const Expr& expected, const std::string& what)
{
    if (!proof) throw MissingBoundCertificate("no certificate for " + what);
    const auto& spec = proof->spec;
    if (spec.claims.size() != 1 || !same(spec.claims[0], expected)) throw MissingBoundCertificate("certificate for " + what + " proves a different claim");
    if (spec.domain.size() != sys.domain.size()) throw MissingBoundCertificate("certificate for " + what + " has the wrong domain");
    for (std::size_t i = 0; i < spec.domain.size(); ++i) {
        if (spec.domain[i].lo() != sys.domain[i].lo() || spec.domain[i].hi() != sys.domain[i].hi()) throw MissingBoundCertificate("certificate for " + what + " has the wrong domain");
    }
    if (const auto v = check(spec, proof->cert); !is_verified(v)) {
        const auto& r = std::get<Rejected>(v);
        throw MissingBoundCertificate("certificate for " + what + " is rejected at " + r.path + ": " + r.reason);
    }
}

} // namespace detail

/// Substitutes each subterm by a fresh bounded variable and extracts the
/// resulting linear system. Every substitution bound must carry a verified
/// certificate.
inline LinearSystem linearize_demo(const NonlinearSystem& sys, const std::vector<Substitution>& subs)
{
    const std::size_t n0 = sys.domain.size();
    const std::size_t n = n0 + subs.size();
    if (n > static_cast<std::size_t>(kMaxVariables)) throw std::invalid_argument("too many variables after substitution");
    LinearSystem out;
    out.num_vars = n;
    for (const auto& e : sys.domain) {
        out.lower.push_back(e.lo().to_rational());
        out.upper.push_back(e.hi().to_rational());
    }
    for (const auto& s : subs) {
        detail::require_bound_proof(s.lower_proof, sys, build::sub(Expr::constant(s.lo), s.subterm), s.name + " >= " + s.lo.to_string());
        detail::require_bound_proof(s.upper_proof, sys, build::sub(s.subterm, Expr::constant(s.hi)), s.name + " <= " + s.hi.to_string());
        out.lower.push_back(s.lo.to_rational());
        out.upper.push_back(s.hi.to_rational());
    }
    for (const auto& c : sys.constraints) {
        Expr e = c.lhs;
        for (std::size_t k = 0; k < subs.size(); ++k) e = detail::substitute(e, subs[k].subterm, Expr::var(static_cast<int>(n0 + k)));
        const auto a = detail::affine(e, n);
        if (!a) throw std::invalid_argument("constraint is not linear after substitution");
        out.rows.push_back({a->coeffs, c.rhs.to_rational() - a->constant});
    }
    out.validate();
    return out;
}

} // namespace rigor
