// Untrusted search: adaptive subdivision producing a certificate.
#pragma once

#include "rigor/cert.hpp"

#include <atomic>
#include <chrono>
#include <future>
#include <thread>

namespace rigor {

struct ProverConfig {
    Precision base_precision{10};
    Precision max_precision{40};
    unsigned max_depth = 40;
    unsigned workers = 1;
    bool enable_taylor = true;
    bool enable_monotone = true;

    void validate() const
    {
        if (base_precision.digits > max_precision.digits) throw std::invalid_argument("base precision exceeds max precision");
        if (max_depth < 1) throw std::invalid_argument("max depth must be at least 1");
    }
};

struct SearchStats {
    std::uint64_t cells_processed = 0;
    std::uint64_t cells_verified_natural = 0;
    std::uint64_t cells_verified_taylor = 0;
    std::uint64_t cells_reduced_monotone = 0;
    unsigned max_depth_reached = 0;
    double wall_time = 0; // seconds

    void merge(const SearchStats& o)
    {
        cells_processed += o.cells_processed;
        cells_verified_natural += o.cells_verified_natural;
        cells_verified_taylor += o.cells_verified_taylor;
        cells_reduced_monotone += o.cells_reduced_monotone;
        max_depth_reached = std::max(max_depth_reached, o.max_depth_reached);
    }
};

enum class FailureReason { depth_exhausted, all_disjuncts_undefined, inconclusive, corner_not_zero, corner_not_exact, sign_obligation_failed };

inline const char* to_string(FailureReason r)
{
    switch (r) {
    case FailureReason::depth_exhausted: return "depth_exhausted";
    case FailureReason::all_disjuncts_undefined: return "all_disjuncts_undefined";
    case FailureReason::inconclusive: return "inconclusive";
    case FailureReason::corner_not_zero: return "CornerNotZero";
    case FailureReason::corner_not_exact: return "CornerNotExact";
    case FailureReason::sign_obligation_failed: return "SignObligationFailed";
    }
    return "unknown";
}

struct Failure {
    Box cell;
    FailureReason reason;
    std::string detail;
};

struct ProofResult {
    std::variant<Certificate, Failure> outcome;
    SearchStats stats;

    bool proved() const { return std::holds_alternative<Certificate>(outcome); }
    const Certificate& certificate() const { return std::get<Certificate>(outcome); }
    const Failure& failure() const { return std::get<Failure>(outcome); }
};

namespace detail {

// Position of the leading digit: 10^order <= |x| < 10^(order+1).
inline std::int64_t order_of(const Decimal& x) { return x.top() - 1; }

// Digits needed to resolve the narrowest edge relative to its magnitude.
inline int digits_for_box(const Box& box)
{
    std::int64_t need = 1;
    for (const auto& e : box) {
        if (e.is_point()) continue;
        const Decimal m = max(abs(e.lo()), abs(e.hi()));
        need = std::max(need, order_of(m) - order_of(e.hi() - e.lo()) + 3);
    }
    return static_cast<int>(std::min<std::int64_t>(need, 1000));
}

// Split point near the middle with few digits, strictly inside the edge.
inline Decimal split_point(const Interval& edge, int p)
{
    const Decimal mid = midpoint(edge.lo(), edge.hi());
    const Decimal width = edge.hi() - edge.lo();
    for (int q = p; q < p + 40; ++q) {
        const Decimal r = round(mid, Precision(q), Round::down);
        if (edge.lo() < r && (mid - r) * Decimal(16) <= width) return r;
    }
    return mid;
}

inline int split_variable(const Box& box)
{
    int best = -1;
    Rational best_w = -1;
    for (std::size_t i = 0; i < box.size(); ++i) {
        if (box[i].is_point()) continue;
        const Rational den = std::max(Rational(1), (abs(box[i].lo()) + abs(box[i].hi())).to_rational());
        const Rational w = (box[i].hi() - box[i].lo()).to_rational() / den;
        if (w > best_w) {
            best_w = w;
            best = static_cast<int>(i);
        }
    }
    return best;
}

struct Search {
    const InequalitySpec& spec;
    const ClaimTables& tables;
    const ProverConfig& cfg;
    unsigned parallel_depth;

    using Outcome = std::variant<CertNode, Failure>;

    Outcome run(const Box& box, const std::vector<int>& allowed, unsigned depth, SearchStats& stats) const
    {
        ++stats.cells_processed;
        stats.max_depth_reached = std::max(stats.max_depth_reached, depth);

        int p = std::clamp(digits_for_box(box), cfg.base_precision.digits, cfg.max_precision.digits);
        std::vector<std::pair<int, EvalOutcome>> natural;
        for (;;) {
            const Precision prec(p);
            natural.clear();
            for (const int d : allowed) natural.emplace_back(d, eval_natural(spec.claims[static_cast<std::size_t>(d)], box, prec));
            // Most negative midpoint first; undefined disjuncts last.
            std::stable_sort(natural.begin(), natural.end(), [](const auto& a, const auto& b) {
                if (!a.second || !b.second) return a.second.has_value() && !b.second.has_value();
                return (a.second->lo() + a.second->hi()) < (b.second->lo() + b.second->hi());
            });
            std::optional<Decimal> best_hi;
            std::optional<Decimal> scale;
            for (const auto& [d, r] : natural) {
                if (!r) continue;
                if (r->hi().sign() < 0) {
                    ++stats.cells_verified_natural;
                    return CertNode{NaturalLeaf{d, p}};
                }
                if (!best_hi || r->hi() < *best_hi) best_hi = r->hi();
                const Decimal mag = max(abs(r->lo()), abs(r->hi()));
                if (!scale || *scale < mag) scale = mag;
            }
            if (cfg.enable_taylor) {
                for (const auto& [d, r] : natural) {
                    if (!r) continue;
                    const auto t = taylor_enclose(tables[static_cast<std::size_t>(d)], box, prec);
                    if (!t) continue;
                    if (t->enclosure.hi().sign() < 0) {
                        ++stats.cells_verified_taylor;
                        return CertNode{TaylorLeaf{d, p, t->center}};
                    }
                    if (t->enclosure.hi() < *best_hi) best_hi = t->enclosure.hi();
                }
            }
            // Escalate when the best bound misses by rounding-level noise.
            if (!best_hi || p >= cfg.max_precision.digits) break;
            const Decimal tol = mul(Decimal::from_parts(1, 2 - p), max(Decimal(1), *scale), Precision(4), Round::up);
            if (*best_hi > tol) break;
            p = std::min(2 * p, cfg.max_precision.digits);
        }
        const Precision prec(p);

        // A point where every disjunct is rigorously >= 0 refutes the claim.
        const Box center = point_box(taylor_center(box, prec));
        bool refuted = true;
        for (const int d : allowed) {
            const EvalOutcome v = eval_natural(spec.claims[static_cast<std::size_t>(d)], center, prec);
            if (!v || v->lo().sign() < 0) {
                refuted = false;
                break;
            }
        }
        if (refuted) {
            std::string at;
            for (const auto& c : center) at += (at.empty() ? "" : ", ") + c.lo().to_string();
            return Failure{box, FailureReason::inconclusive, "every allowed disjunct is >= 0 at (" + at + ")"};
        }

        if (cfg.enable_monotone && depth < cfg.max_depth) {
            for (const auto& [d, r] : natural) {
                if (!r) continue;
                const auto dirs = monotone_directions(tables[static_cast<std::size_t>(d)], box, prec);
                if (dirs.empty()) continue;
                const auto dir = dirs.front();
                SearchStats sub;
                Outcome o = run(facet_box(box, dir.var, dir.sign), {d}, depth + 1, sub);
                if (auto* node = std::get_if<CertNode>(&o)) {
                    stats.merge(sub);
                    ++stats.cells_reduced_monotone;
                    return CertNode{MonotoneNode{d, dir.var, dir.sign, p, {std::move(*node)}}};
                }
                // The facet is part of the box; a refutation there is final.
                if (allowed.size() == 1 && std::get<Failure>(o).reason == FailureReason::inconclusive) {
                    stats.merge(sub);
                    return o;
                }
                break;
            }
        }

        const bool all_undefined = std::none_of(natural.begin(), natural.end(), [](const auto& n) { return n.second.has_value(); });
        const int var = split_variable(box);
        if (depth >= cfg.max_depth || var < 0) {
            return Failure{box, all_undefined ? FailureReason::all_disjuncts_undefined : FailureReason::depth_exhausted,
                           var < 0 ? "box is a single point" : "maximum depth reached"};
        }
        const Decimal mid = split_point(box[static_cast<std::size_t>(var)], p);
        const auto [left, right] = split_box(box, var, mid);
        SearchStats right_stats;
        Outcome l;
        Outcome r;
        if (depth < parallel_depth) {
            auto fut = std::async(std::launch::async, [&, rb = right] { return run(rb, allowed, depth + 1, right_stats); });
            l = run(left, allowed, depth + 1, stats);
            r = fut.get();
        } else {
            l = run(left, allowed, depth + 1, stats);
            if (std::holds_alternative<Failure>(l)) return l;
            r = run(right, allowed, depth + 1, right_stats);
        }
        stats.merge(right_stats);
        if (std::holds_alternative<Failure>(l)) return l;
        if (std::holds_alternative<Failure>(r)) return r;
        return CertNode{SplitNode{var, mid, {std::move(std::get<CertNode>(l)), std::move(std::get<CertNode>(r))}}};
    }
};

inline unsigned parallel_levels(unsigned workers)
{
    unsigned levels = 0;
    while (workers > 1u << levels) ++levels;
    return levels;
}

inline std::vector<int> all_disjuncts(const InequalitySpec& spec)
{
    std::vector<int> v(spec.claims.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<int>(i);
    return v;
}

} // namespace detail

/// Sharp corner proof: exact zero at the corner, signed partials on a corner
/// neighborhood U, and strict proofs on the complement of U.
inline ProofResult prove_sharp(const InequalitySpec& spec, const ProverConfig& cfg)
{
    cfg.validate();
    if (!spec.sharp_corner) throw std::invalid_argument("spec has no sharp corner");
    if (spec.claims.size() != 1) throw std::invalid_argument("sharp spec must have exactly one disjunct");
    const auto start = std::chrono::steady_clock::now();
    ProofResult result;
    const auto finish = [&](auto outcome) {
        result.outcome = std::move(outcome);
        result.stats.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return result;
    };
    std::optional<Rational> value;
    try {
        value = eval_exact(spec.claims[0], corner_point(spec));
    } catch (const UndefinedPoint& e) {
        return finish(Failure{spec.domain, FailureReason::corner_not_exact, e.what()});
    }
    if (!value) return finish(Failure{spec.domain, FailureReason::corner_not_exact, "corner value is not exactly computable"});
    if (*value != 0) return finish(Failure{spec.domain, FailureReason::corner_not_zero, "corner value is not zero"});

    const ClaimTables tables(spec);
    const auto& table = tables[0];
    std::optional<SharpRoot> root;
    Decimal phi = 1;
    for (int k = 1; k <= 6 && !root; ++k) {
        phi = phi * Decimal::from_parts(25, -2);
        SharpRoot s;
        s.fractions.assign(spec.arity(), phi);
        const SharpGeometry g = sharp_geometry(spec, s.fractions);
        bool ok = true;
        for (const int var : g.free_vars) {
            const int want = (*spec.sharp_corner)[static_cast<std::size_t>(var)] ? 1 : -1;
            bool found = false;
            for (int p = cfg.base_precision.digits;; p = std::min(2 * p, cfg.max_precision.digits)) {
                const Precision prec(p);
                if (eval_natural(table.function(), g.neighborhood, prec)) {
                    const EvalOutcome d = derivative_enclosure(table, var, g.neighborhood, prec);
                    if (d && (want > 0 ? d->lo().sign() >= 0 : d->hi().sign() <= 0)) {
                        s.signs.push_back({var, want, p});
                        found = true;
                        break;
                    }
                }
                if (p >= cfg.max_precision.digits) break;
            }
            if (!found) {
                ok = false;
                break;
            }
        }
        if (ok) root = std::move(s);
    }
    if (!root) return finish(Failure{spec.domain, FailureReason::sign_obligation_failed, "no corner neighborhood has signed partial derivatives"});

    const detail::Search search{spec, tables, cfg, detail::parallel_levels(cfg.workers)};
    const SharpGeometry g = sharp_geometry(spec, root->fractions);
    for (const auto& box : g.complements) {
        auto o = search.run(box, {0}, 1, result.stats);
        if (auto* f = std::get_if<Failure>(&o)) return finish(std::move(*f));
        root->children.push_back(std::move(std::get<CertNode>(o)));
    }
    return finish(Certificate{spec.id, spec_digest(spec), CertNode{std::move(*root)}});
}

inline ProofResult prove(const InequalitySpec& spec, const ProverConfig& cfg)
{
    cfg.validate();
    if (spec.sharp_corner) return prove_sharp(spec, cfg);
    const auto start = std::chrono::steady_clock::now();
    const ClaimTables tables(spec);
    const detail::Search search{spec, tables, cfg, detail::parallel_levels(cfg.workers)};
    ProofResult result;
    auto o = search.run(spec.domain, detail::all_disjuncts(spec), 0, result.stats);
    if (auto* node = std::get_if<CertNode>(&o)) {
        result.outcome = Certificate{spec.id, spec_digest(spec), std::move(*node)};
    } else {
        result.outcome = std::move(std::get<Failure>(o));
    }
    result.stats.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

/// Proves every spec using up to cfg.workers threads. Results are in input
/// order and independent of the worker count.
inline std::vector<ProofResult> batch_prove(const std::vector<InequalitySpec>& specs, const ProverConfig& cfg)
{
    cfg.validate();
    std::vector<ProofResult> results(specs.size());
    ProverConfig single = cfg;
    single.workers = 1;
    const unsigned threads = std::max(1u, std::min<unsigned>(cfg.workers, static_cast<unsigned>(specs.size())));
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t i; (i = next++) < specs.size();) results[i] = prove(specs[i], single);
    };
    if (threads <= 1) {
        work();
        return results;
    }
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    return results;
}

} // namespace rigor
