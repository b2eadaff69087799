// Expression trees for inequality bodies: construction, printing, symbolic
// differentiation, natural interval evaluation and exact rational evaluation.
#pragma once

#include "rigor/elementary.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace rigor {

enum class Op { var, constant, pi, add, sub, mul, div, neg, pow, sqrt, sin, cos, atan, asin, acos, atn, abs };

inline constexpr int kMaxVariables = 6;

struct NotDifferentiable : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Division by zero or a square root of a negative number at an exact point.
struct UndefinedPoint : std::domain_error {
    using std::domain_error::domain_error;
};

struct ExprNode;

/// Immutable expression handle; copies share the underlying tree.
class Expr {
public:
    Expr() = default;

    static Expr var(int index);
    static Expr constant(Decimal value);
    static Expr pi();
    static Expr unary(Op op, Expr arg);
    static Expr binary(Op op, Expr lhs, Expr rhs);
    static Expr pow(Expr base, unsigned exponent);

    Op op() const;
    int index() const;
    const Decimal& value() const;
    unsigned exponent() const;
    const Expr& lhs() const;
    const Expr& rhs() const;
    const Expr& arg() const { return lhs(); }
    const ExprNode* node() const { return node_.get(); }
    explicit operator bool() const { return static_cast<bool>(node_); }

    /// Number of distinct nodes reachable from this one.
    std::size_t size() const;

private:
    explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}
    std::shared_ptr<const ExprNode> node_;
};

struct ExprNode {
    Op op = Op::constant;
    int index = 0;
    unsigned exponent = 0;
    Decimal value;
    Expr lhs;
    Expr rhs;
};

inline Expr Expr::var(int index)
{
    if (index < 0 || index >= kMaxVariables) throw std::invalid_argument("variable index out of range");
    auto n = std::make_shared<ExprNode>();
    n->op = Op::var;
    n->index = index;
    return Expr(std::move(n));
}

inline Expr Expr::constant(Decimal value)
{
    auto n = std::make_shared<ExprNode>();
    n->op = Op::constant;
    n->value = std::move(value);
    return Expr(std::move(n));
}

inline Expr Expr::pi()
{
    auto n = std::make_shared<ExprNode>();
    n->op = Op::pi;
    return Expr(std::move(n));
}

inline Expr Expr::unary(Op op, Expr arg)
{
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->lhs = std::move(arg);
    return Expr(std::move(n));
}

inline Expr Expr::binary(Op op, Expr lhs, Expr rhs)
{
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return Expr(std::move(n));
}

inline Expr Expr::pow(Expr base, unsigned exponent)
{
    auto n = std::make_shared<ExprNode>();
    n->op = Op::pow;
    n->exponent = exponent;
    n->lhs = std::move(base);
    return Expr(std::move(n));
}

inline Op Expr::op() const { return node_->op; }
inline int Expr::index() const { return node_->index; }
inline const Decimal& Expr::value() const { return node_->value; }
inline unsigned Expr::exponent() const { return node_->exponent; }
inline const Expr& Expr::lhs() const { return node_->lhs; }
inline const Expr& Expr::rhs() const { return node_->rhs; }

inline bool is_unary(Op op)
{
    switch (op) {
    case Op::neg:
    case Op::pow:
    case Op::sqrt:
    case Op::sin:
    case Op::cos:
    case Op::atan:
    case Op::asin:
    case Op::acos:
    case Op::atn:
    case Op::abs: return true;
    default: return false;
    }
}

inline bool is_binary(Op op) { return op == Op::add || op == Op::sub || op == Op::mul || op == Op::div; }

inline std::size_t Expr::size() const
{
    std::unordered_map<const ExprNode*, bool> seen;
    std::function<void(const Expr&)> walk = [&](const Expr& e) {
        if (!seen.emplace(e.node(), true).second) return;
        if (is_unary(e.op())) walk(e.lhs());
        if (is_binary(e.op())) {
            walk(e.lhs());
            walk(e.rhs());
        }
    };
    walk(*this);
    return seen.size();
}

/// Structural equality.
inline bool same(const Expr& a, const Expr& b)
{
    if (a.node() == b.node()) return true;
    if (a.op() != b.op()) return false;
    switch (a.op()) {
    case Op::var: return a.index() == b.index();
    case Op::constant: return a.value() == b.value();
    case Op::pi: return true;
    case Op::pow: return a.exponent() == b.exponent() && same(a.lhs(), b.lhs());
    default:
        if (is_binary(a.op())) return same(a.lhs(), b.lhs()) && same(a.rhs(), b.rhs());
        return same(a.lhs(), b.lhs());
    }
}

inline int max_variable(const Expr& e)
{
    switch (e.op()) {
    case Op::var: return e.index();
    case Op::constant:
    case Op::pi: return -1;
    default:
        if (is_binary(e.op())) return std::max(max_variable(e.lhs()), max_variable(e.rhs()));
        return max_variable(e.lhs());
    }
}

// ---------------------------------------------------------------------------
// Printing

inline const char* function_name(Op op)
{
    switch (op) {
    case Op::sqrt: return "sqrt";
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::atan: return "atan";
    case Op::asin: return "asin";
    case Op::acos: return "acos";
    case Op::atn: return "atn";
    case Op::abs: return "abs";
    default: return nullptr;
    }
}

namespace detail {

// Binding strength: sums 1, products 2, unary minus 3, powers 4, atoms 5.
inline int precedence(const Expr& e)
{
    switch (e.op()) {
    case Op::add:
    case Op::sub: return 1;
    case Op::mul:
    case Op::div: return 2;
    case Op::neg: return 3;
    case Op::constant: return e.value().sign() < 0 ? 3 : 5;
    case Op::pow: return 4;
    default: return 5;
    }
}

inline void print(const Expr& e, std::span<const std::string> names, std::string& out);

inline void print_wrapped(const Expr& e, int min_prec, std::span<const std::string> names, std::string& out)
{
    const bool wrap = precedence(e) < min_prec;
    if (wrap) out += '(';
    print(e, names, out);
    if (wrap) out += ')';
}

inline void print(const Expr& e, std::span<const std::string> names, std::string& out)
{
    switch (e.op()) {
    case Op::var:
        out += static_cast<std::size_t>(e.index()) < names.size() ? names[static_cast<std::size_t>(e.index())]
                                                                   : "x" + std::to_string(e.index() + 1);
        return;
    case Op::constant: out += e.value().to_string(); return;
    case Op::pi: out += "pi"; return;
    case Op::add:
    case Op::sub:
        print_wrapped(e.lhs(), 1, names, out);
        out += e.op() == Op::add ? " + " : " - ";
        print_wrapped(e.rhs(), 2, names, out);
        return;
    case Op::mul:
    case Op::div:
        print_wrapped(e.lhs(), 2, names, out);
        out += e.op() == Op::mul ? " * " : " / ";
        print_wrapped(e.rhs(), 3, names, out);
        return;
    case Op::neg:
        out += '-';
        // A bare literal after '-' would read back as a negative constant.
        print_wrapped(e.lhs(), e.lhs().op() == Op::constant && e.lhs().value().sign() > 0 ? 6 : 3, names, out);
        return;
    case Op::pow:
        print_wrapped(e.lhs(), 5, names, out);
        out += "^" + std::to_string(e.exponent());
        return;
    default:
        out += function_name(e.op());
        out += '(';
        print(e.lhs(), names, out);
        out += ')';
        return;
    }
}

} // namespace detail

inline std::string to_string(const Expr& e, std::span<const std::string> names = {})
{
    std::string out;
    detail::print(e, names, out);
    return out;
}

// ---------------------------------------------------------------------------
// Simplifying constructors: neutral-element and zero rules only.

namespace build {

inline bool is_const(const Expr& e, int v) { return e.op() == Op::constant && e.value() == Decimal(v); }

inline Expr num(long long v) { return Expr::constant(Decimal(v)); }

inline Expr neg(const Expr& a)
{
    if (is_const(a, 0)) return a;
    if (a.op() == Op::neg) return a.lhs();
    return Expr::unary(Op::neg, a);
}

inline Expr add(const Expr& a, const Expr& b)
{
    if (is_const(a, 0)) return b;
    if (is_const(b, 0)) return a;
    return Expr::binary(Op::add, a, b);
}

inline Expr sub(const Expr& a, const Expr& b)
{
    if (is_const(b, 0)) return a;
    if (is_const(a, 0)) return neg(b);
    return Expr::binary(Op::sub, a, b);
}

inline Expr mul(const Expr& a, const Expr& b)
{
    if (is_const(a, 0) || is_const(b, 0)) return num(0);
    if (is_const(a, 1)) return b;
    if (is_const(b, 1)) return a;
    return Expr::binary(Op::mul, a, b);
}

inline Expr div(const Expr& a, const Expr& b)
{
    if (is_const(b, 1)) return a;
    if (is_const(a, 0)) return a;
    return Expr::binary(Op::div, a, b);
}

inline Expr pow(const Expr& a, unsigned n)
{
    if (n == 0) return num(1);
    if (n == 1) return a;
    return Expr::pow(a, n);
}

} // namespace build

// ---------------------------------------------------------------------------
// Symbolic differentiation

namespace detail {

struct Differentiator {
    int var;
    std::unordered_map<const ExprNode*, Expr> memo;

    Expr operator()(const Expr& e)
    {
        if (auto it = memo.find(e.node()); it != memo.end()) return it->second;
        Expr d = derive(e);
        memo.emplace(e.node(), d);
        return d;
    }

    Expr derive(const Expr& e)
    {
        using namespace build;
        switch (e.op()) {
        case Op::var: return num(e.index() == var ? 1 : 0);
        case Op::constant:
        case Op::pi: return num(0);
        case Op::add: return add((*this)(e.lhs()), (*this)(e.rhs()));
        case Op::sub: return sub((*this)(e.lhs()), (*this)(e.rhs()));
        case Op::mul: return add(mul((*this)(e.lhs()), e.rhs()), mul(e.lhs(), (*this)(e.rhs())));
        case Op::div: {
            const Expr du = (*this)(e.lhs());
            const Expr dv = (*this)(e.rhs());
            if (is_const(dv, 0)) return div(du, e.rhs());
            return div(sub(mul(du, e.rhs()), mul(e.lhs(), dv)), pow(e.rhs(), 2));
        }
        case Op::neg: return neg((*this)(e.lhs()));
        case Op::pow: {
            const Expr du = (*this)(e.lhs());
            if (e.exponent() == 0 || is_const(du, 0)) return num(0);
            const auto n = static_cast<long long>(e.exponent());
            return mul(mul(num(n), pow(e.lhs(), e.exponent() - 1)), du);
        }
        default: break;
        }
        const Expr& u = e.lhs();
        const Expr du = (*this)(u);
        if (e.op() == Op::abs) throw NotDifferentiable("abs is not differentiated");
        if (is_const(du, 0)) return num(0);
        switch (e.op()) {
        case Op::sqrt: return div(du, mul(num(2), e));
        case Op::sin: return mul(Expr::unary(Op::cos, u), du);
        case Op::cos: return neg(mul(Expr::unary(Op::sin, u), du));
        case Op::atan: return div(du, add(num(1), pow(u, 2)));
        case Op::asin: return div(du, Expr::unary(Op::sqrt, sub(num(1), pow(u, 2))));
        case Op::acos: return neg(div(du, Expr::unary(Op::sqrt, sub(num(1), pow(u, 2)))));
        case Op::atn:
            // d/du atn(u) = (1/(1+u) - atn(u)) / (2u)
            return mul(div(sub(div(num(1), add(num(1), u)), e), mul(num(2), u)), du);
        default: throw std::logic_error("unhandled operator in differentiate");
        }
    }
};

} // namespace detail

/// Partial derivative with respect to variable `var` (0-based).
inline Expr differentiate(const Expr& f, int var)
{
    detail::Differentiator d{var, {}};
    return d(f);
}

// ---------------------------------------------------------------------------
// Natural interval evaluation

using Box = std::vector<Interval>;

/// Enclosure of the image, or nullopt when f may be undefined somewhere on
/// the box.
using EvalOutcome = std::optional<Interval>;

namespace detail {

struct NaturalEvaluator {
    const Box& box;
    Precision p;
    std::unordered_map<const ExprNode*, EvalOutcome> memo;

    EvalOutcome operator()(const Expr& e)
    {
        if (auto it = memo.find(e.node()); it != memo.end()) return it->second;
        EvalOutcome r = eval(e);
        memo.emplace(e.node(), r);
        return r;
    }

    EvalOutcome eval(const Expr& e)
    {
        switch (e.op()) {
        case Op::var:
            if (static_cast<std::size_t>(e.index()) >= box.size()) throw std::out_of_range("variable outside box");
            return box[static_cast<std::size_t>(e.index())];
        case Op::constant: return round_out(Interval(e.value()), p);
        case Op::pi: return pi_interval(p);
        default: break;
        }
        const EvalOutcome a = (*this)(e.lhs());
        if (!a) return std::nullopt;
        if (is_binary(e.op())) {
            const EvalOutcome b = (*this)(e.rhs());
            if (!b) return std::nullopt;
            switch (e.op()) {
            case Op::add: return iadd(*a, *b, p);
            case Op::sub: return isub(*a, *b, p);
            case Op::mul: return imul(*a, *b, p);
            default:
                if (b->contains_zero()) return std::nullopt;
                return idiv(*a, *b, p);
            }
        }
        const Decimal one = 1;
        switch (e.op()) {
        case Op::neg: return ineg(*a);
        case Op::pow: return ipow(*a, e.exponent(), p);
        case Op::sqrt:
            if (a->lo().sign() < 0) return std::nullopt;
            return isqrt(*a, p);
        case Op::sin: return isin(*a, p);
        case Op::cos: return icos(*a, p);
        case Op::atan: return iatan(*a, p);
        case Op::asin:
            if (a->lo() < -one || a->hi() > one) return std::nullopt;
            return iasin(*a, p);
        case Op::acos:
            if (a->lo() < -one || a->hi() > one) return std::nullopt;
            return iacos(*a, p);
        case Op::atn:
            if (a->lo() <= -one) return std::nullopt;
            return iatn(*a, p);
        case Op::abs: return abs_image(*a);
        default: throw std::logic_error("unhandled operator in eval_natural");
        }
    }
};

} // namespace detail

inline EvalOutcome eval_natural(const Expr& f, const Box& box, Precision p)
{
    detail::NaturalEvaluator ev{box, p, {}};
    return ev(f);
}

// ---------------------------------------------------------------------------
// Exact rational evaluation

/// Exact value of f at a rational point, or nullopt when the value is not
/// rational by construction (transcendental subterms, irrational roots).
inline std::optional<Rational> eval_exact(const Expr& f, std::span<const Rational> point)
{
    using R = std::optional<Rational>;
    switch (f.op()) {
    case Op::var: return point[static_cast<std::size_t>(f.index())];
    case Op::constant: return f.value().to_rational();
    case Op::pi: return std::nullopt;
    default: break;
    }
    const R a = eval_exact(f.lhs(), point);
    if (is_binary(f.op())) {
        const R b = eval_exact(f.rhs(), point);
        if (f.op() == Op::div && b && *b == 0) throw UndefinedPoint("division by zero at an exact point");
        if (!a || !b) return std::nullopt;
        switch (f.op()) {
        case Op::add: return *a + *b;
        case Op::sub: return *a - *b;
        case Op::mul: return *a * *b;
        default: return *a / *b;
        }
    }
    if (!a) return std::nullopt;
    switch (f.op()) {
    case Op::neg: return -*a;
    case Op::pow: {
        Rational r = 1;
        for (unsigned k = 0; k < f.exponent(); ++k) r *= *a;
        return r;
    }
    case Op::sqrt:
        if (*a < 0) throw UndefinedPoint("square root of a negative number at an exact point");
        return rational_sqrt_exact(*a);
    case Op::abs: return *a < 0 ? Rational(-*a) : *a;
    case Op::sin:
    case Op::atan:
    case Op::asin:
        if (*a == 0) return Rational(0);
        if (f.op() == Op::asin && (*a > 1 || *a < -1)) throw UndefinedPoint("asin argument outside [-1, 1]");
        return std::nullopt;
    case Op::cos:
        if (*a == 0) return Rational(1);
        return std::nullopt;
    case Op::acos:
        if (*a > 1 || *a < -1) throw UndefinedPoint("acos argument outside [-1, 1]");
        if (*a == 1) return Rational(0);
        return std::nullopt;
    case Op::atn:
        if (*a <= -1) throw UndefinedPoint("atn argument must exceed -1");
        if (*a == 0) return Rational(1);
        return std::nullopt;
    default: throw std::logic_error("unhandled operator in eval_exact");
    }
}

} // namespace rigor
