// Second-order Taylor enclosures and monotonicity detection.
//
// For a box B with center y and half widths w (w_i >= max(y_i - a_i, b_i - y_i)):
//
//   f(x) in f([y,y]) + [-e, e],
//   e >= sum_i iabs(df/dx_i([y,y])) w_i + 1/2 sum_ij iabs(d2f/dx_i dx_j(B)) w_i w_j.
#pragma once

#include "rigor/expr.hpp"

#include <algorithm>
#include <map>
#include <mutex>

namespace rigor {

/// Partial derivatives of one expression, built on first use and shared
/// between threads. Keys are sorted variable multi-indices.
class DerivativeTable {
public:
    explicit DerivativeTable(Expr f) : f_(std::move(f)) {}
    DerivativeTable(const DerivativeTable&) = delete;
    DerivativeTable& operator=(const DerivativeTable&) = delete;

    const Expr& function() const { return f_; }

    /// nullopt when some step hits a non-differentiable node.
    std::optional<Expr> partial(std::vector<int> index) const
    {
        if (index.empty()) return f_;
        std::sort(index.begin(), index.end());
        {
            std::lock_guard lock(mutex_);
            if (auto it = cache_.find(index); it != cache_.end()) return it->second;
        }
        std::vector<int> parent_index(index.begin(), index.end() - 1);
        const auto parent = partial(parent_index);
        std::optional<Expr> d;
        if (parent) {
            try {
                d = differentiate(*parent, index.back());
            } catch (const NotDifferentiable&) {
                d = std::nullopt;
            }
        }
        std::lock_guard lock(mutex_);
        return cache_.emplace(std::move(index), std::move(d)).first->second;
    }

private:
    Expr f_;
    mutable std::mutex mutex_;
    mutable std::map<std::vector<int>, std::optional<Expr>> cache_;
};

struct TaylorApprox {
    std::vector<Decimal> center;
    std::vector<Decimal> half_widths;
    Interval value_at_center;
    /// Entries for variables of zero width are not evaluated and hold 0.
    std::vector<Interval> gradient_at_center;
    std::vector<std::vector<Interval>> hessian_over_box;
    Decimal error_bound;
    Interval enclosure;
};


/// Midpoint of each edge rounded to p digits (exact midpoint if rounding
/// leaves the edge).
inline std::vector<Decimal> taylor_center(const Box& box, Precision p)
{
    std::vector<Decimal> y;
    y.reserve(box.size());
    for (const auto& edge : box) {
        const Decimal mid = midpoint(edge.lo(), edge.hi());
        Decimal r = round(mid, p, Round::down);
        y.push_back(edge.contains(r) ? std::move(r) : mid);
    }
    return y;
}

namespace detail {

inline Box point_box(const std::vector<Decimal>& y)
{
    Box b;
    b.reserve(y.size());
    for (const auto& v : y) b.emplace_back(v);
    return b;
}

// Sign of h over the box: +1 or -1 when fixed, 0 otherwise. Falls back to
// splitting the single free edge into `pieces` parts.
inline int fixed_sign(const Expr& h, const Box& box, Precision p, int free_var, unsigned pieces)
{
    const auto sign_of = [](const EvalOutcome& r) {
        if (!r) return 0;
        if (r->lo().sign() >= 0) return 1;
        if (r->hi().sign() <= 0) return -1;
        return 0;
    };
    if (const int s = sign_of(eval_natural(h, box, p)); s != 0) return s;
    const Interval edge = box[static_cast<std::size_t>(free_var)];
    const Rational lo = edge.lo().to_rational();
    const Rational step = (edge.hi().to_rational() - lo) / pieces;
    int common = 0;
    Decimal left = edge.lo();
    for (unsigned k = 1; k <= pieces; ++k) {
        const Decimal right = k == pieces ? edge.hi() : round_dir(lo + step * k, p, Round::down);
        if (right <= left) continue;
        Box sub = box;
        sub[static_cast<std::size_t>(free_var)] = Interval(left, right);
        const int s = sign_of(eval_natural(h, sub, p));
        if (s == 0 || (common != 0 && s != common)) return 0;
        common = s;
        left = right;
    }
    return common;
}

// Enclosure of h over a box with one free edge, tightened by the sign of
// dh/dx: when fixed, the extremes of h lie at the edge endpoints.
inline EvalOutcome eval_refined(const DerivativeTable& table, const std::vector<int>& index, const Box& box, Precision p, int free_var)
{
    const auto h = table.partial(index);
    if (!h) return std::nullopt;
    const EvalOutcome plain = eval_natural(*h, box, p);
    if (!plain) return std::nullopt;
    std::vector<int> next = index;
    next.push_back(free_var);
    const auto dh = table.partial(next);
    if (!dh) return plain;
    const int s = fixed_sign(*dh, box, p, free_var, 4);
    if (s == 0) return plain;
    Box low = box;
    Box high = box;
    const Interval edge = box[static_cast<std::size_t>(free_var)];
    low[static_cast<std::size_t>(free_var)] = Interval(s > 0 ? edge.lo() : edge.hi());
    high[static_cast<std::size_t>(free_var)] = Interval(s > 0 ? edge.hi() : edge.lo());
    const EvalOutcome at_low = eval_natural(*h, low, p);
    const EvalOutcome at_high = eval_natural(*h, high, p);
    if (!at_low || !at_high) return plain;
    return Interval(max(plain->lo(), at_low->lo()), min(plain->hi(), at_high->hi()));
}

} // namespace detail

/// Taylor enclosure of the partial derivative `base` of the table's function
/// (the function itself when base is empty). Returns nullopt when the
/// function or a needed derivative is undefined on the box.
inline std::optional<TaylorApprox> taylor_enclose(const DerivativeTable& table, const Box& box, Precision p,
                                                  std::optional<std::vector<Decimal>> center = std::nullopt,
                                                  const std::vector<int>& base = {})
{
    const std::size_t n = box.size();
    const auto f = table.partial(base);
    if (!f) return std::nullopt;
    TaylorApprox t;
    t.center = center ? std::move(*center) : taylor_center(box, p);
    if (t.center.size() != n) throw std::invalid_argument("Taylor center has the wrong dimension");
    for (std::size_t i = 0; i < n; ++i) {
        if (!box[i].contains(t.center[i])) throw std::invalid_argument("Taylor center lies outside the box");
    }
    if (!eval_natural(*f, box, p)) return std::nullopt;

    const Box y = detail::point_box(t.center);
    const EvalOutcome value = eval_natural(*f, y, p);
    if (!value) return std::nullopt;
    t.value_at_center = *value;

    t.half_widths.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        t.half_widths[i] = round(max(t.center[i] - box[i].lo(), box[i].hi() - t.center[i]), p, Round::up);
    }

    // With a single free edge the hessian is refined by monotonicity.
    int free_var = -1;
    int free_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!t.half_widths[i].is_zero()) {
            free_var = static_cast<int>(i);
            ++free_count;
        }
    }
    const bool refine = base.empty() && free_count == 1;
    Decimal e;
    t.gradient_at_center.assign(n, Interval(Decimal()));
    t.hessian_over_box.assign(n, std::vector<Interval>(n, Interval(Decimal())));
    for (std::size_t i = 0; i < n; ++i) {
        if (t.half_widths[i].is_zero()) continue;
        std::vector<int> gi = base;
        gi.push_back(static_cast<int>(i));
        const auto g = table.partial(gi);
        if (!g) return std::nullopt;
        const EvalOutcome grad = eval_natural(*g, y, p);
        if (!grad) return std::nullopt;
        t.gradient_at_center[i] = *grad;
        e = add(e, mul(iabs(*grad), t.half_widths[i], p, Round::up), p, Round::up);
    }
    const Decimal half = Decimal::from_parts(5, -1);
    for (std::size_t i = 0; i < n; ++i) {
        if (t.half_widths[i].is_zero()) continue;
        for (std::size_t j = i; j < n; ++j) {
            if (t.half_widths[j].is_zero()) continue;
            std::vector<int> hij = base;
            hij.push_back(static_cast<int>(i));
            hij.push_back(static_cast<int>(j));
            EvalOutcome h;
            if (refine) {
                h = detail::eval_refined(table, hij, box, p, free_var);
            } else if (const auto expr = table.partial(hij)) {
                h = eval_natural(*expr, box, p);
            }
            if (!h) return std::nullopt;
            t.hessian_over_box[i][j] = *h;
            t.hessian_over_box[j][i] = *h;
            // Off-diagonal pairs appear twice in the full double sum.
            const Decimal weight = i == j ? half : Decimal(1);
            const Decimal ww = mul(t.half_widths[i], t.half_widths[j], p, Round::up);
            e = add(e, mul(mul(iabs(*h), ww, p, Round::up), weight, p, Round::up), p, Round::up);
        }
    }
    t.error_bound = e;
    t.enclosure = Interval(sub(t.value_at_center.lo(), e, p, Round::down), add(t.value_at_center.hi(), e, p, Round::up));
    return t;
}

inline std::optional<TaylorApprox> taylor_enclose(const Expr& f, const Box& box, Precision p)
{
    const DerivativeTable table(f);
    return taylor_enclose(table, box, p);
}

/// Enclosure of df/dx_var over the box: natural extension first, then a
/// Taylor enclosure of the derivative when the natural one straddles 0.
inline EvalOutcome derivative_enclosure(const DerivativeTable& table, int var, const Box& box, Precision p)
{
    const auto d = table.partial({var});
    if (!d) return std::nullopt;
    const EvalOutcome natural = eval_natural(*d, box, p);
    if (natural && (natural->lo().sign() >= 0 || natural->hi().sign() <= 0)) return natural;
    const auto taylor = taylor_enclose(table, box, p, std::nullopt, {var});
    if (!taylor) return natural;
    if (!natural) return taylor->enclosure;
    return intersect(*natural, taylor->enclosure);
}

struct MonotoneDirection {
    int var;
    int sign; // +1 nondecreasing, -1 nonincreasing
    friend bool operator==(const MonotoneDirection&, const MonotoneDirection&) = default;
};

/// Variables of positive width in which f is monotone on the box.
inline std::vector<MonotoneDirection> monotone_directions(const DerivativeTable& table, const Box& box, Precision p)
{
    std::vector<MonotoneDirection> out;
    for (std::size_t i = 0; i < box.size(); ++i) {
        if (box[i].is_point()) continue;
        const EvalOutcome d = derivative_enclosure(table, static_cast<int>(i), box, p);
        if (!d) continue;
        if (d->lo().sign() >= 0) out.push_back({static_cast<int>(i), +1});
        else if (d->hi().sign() <= 0) out.push_back({static_cast<int>(i), -1});
    }
    return out;
}

inline std::vector<MonotoneDirection> monotone_directions(const Expr& f, const Box& box, Precision p)
{
    const DerivativeTable table(f);
    return monotone_directions(table, box, p);
}

} // namespace rigor
