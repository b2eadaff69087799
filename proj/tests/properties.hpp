// Randomized property checks shared by the unit tests (small counts) and
// the acceptance binary (full counts).
#pragma once

#include "lp_oracle.hpp"
#include "oracle.hpp"
#include "rigor/prover.hpp"

#include <fstream>
#include <sstream>

namespace props {

using namespace rigor;
using oracle::Big;

struct Outcome {
    bool ok = true;
    std::string detail;
};

inline std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

// ---------------------------------------------------------------------------

/// One random elementary operation on random intervals per trial; a random
/// point image must lie in the result.
inline Outcome interval_containment(int trials, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    const auto sample = [&](const Interval& x) {
        const Big t = Big(static_cast<double>(rng() % 100001) / 100000);
        return oracle::big(x.lo()) + (oracle::big(x.hi()) - oracle::big(x.lo())) * t;
    };
    for (int i = 0; i < trials; ++i) {
        const Precision p(static_cast<int>(rng() % 20) + 1);
        const int op = static_cast<int>(rng() % 12);
        const Interval a = oracle::random_interval(rng, -10, 10, static_cast<int>(rng() % 6) + 1);
        const Interval b = oracle::random_interval(rng, -10, 10, static_cast<int>(rng() % 6) + 1);
        const Big x = sample(a);
        const Big y = sample(b);
        Interval r;
        Big v;
        switch (op) {
        case 0: r = iadd(a, b, p), v = x + y; break;
        case 1: r = isub(a, b, p), v = x - y; break;
        case 2: r = imul(a, b, p), v = x * y; break;
        case 3:
            if (b.contains_zero()) continue;
            r = idiv(a, b, p), v = x / y;
            break;
        case 4: {
            const unsigned n = static_cast<unsigned>(rng() % 5);
            r = ipow(a, n, p), v = pow(x, static_cast<int>(n));
            break;
        }
        case 5: r = isqrt(abs_image(a), p), v = sqrt(abs(x)); break;
        case 6: r = isin(a, p), v = sin(x); break;
        case 7: r = icos(a, p), v = cos(x); break;
        case 8: r = iatan(a, p), v = atan(x); break;
        case 9: {
            const Interval u = oracle::random_interval(rng, -1, 1, 4);
            const Big w = sample(u);
            r = iasin(u, p), v = asin(w);
            break;
        }
        case 10: {
            const Interval u = oracle::random_interval(rng, -1, 1, 4);
            const Big w = sample(u);
            r = iacos(u, p), v = acos(w);
            break;
        }
        default: {
            const Interval u = oracle::random_interval(rng, -0.9, 10, 4);
            const Big w = sample(u);
            r = iatn(u, p), v = oracle::atn(w);
            break;
        }
        }
        if (!oracle::encloses(r, v)) return {false, "op " + std::to_string(op) + " on " + a.to_string() + ", " + b.to_string() + " gave " + r.to_string()};
    }
    return {};
}

/// Taylor enclosures of random expressions contain sampled values.
inline Outcome taylor_containment(int trials, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    int done = 0;
    while (done < trials) {
        const int n = static_cast<int>(rng() % 3) + 1;
        const Expr f = oracle::random_expr(rng, n, 3);
        Box box;
        for (int k = 0; k < n; ++k) box.push_back(oracle::random_interval(rng, -2, 2, 3));
        const auto t = taylor_enclose(f, box, Precision(static_cast<int>(rng() % 15) + 3));
        if (!t) continue;
        ++done;
        const auto v = oracle::eval(f, oracle::random_point(rng, box));
        if (!v) return {false, "oracle undefined for " + to_string(f)};
        if (!oracle::encloses(t->enclosure, *v)) return {false, to_string(f) + " enclosure " + t->enclosure.to_string()};
    }
    return {};
}

/// Symbolic derivatives against central differences with step h.
inline Outcome derivative_vs_difference(int trials, std::uint64_t seed, const char* step, const char* tolerance)
{
    std::mt19937_64 rng(seed);
    const Big h(step);
    const Big tol(tolerance);
    for (int i = 0; i < trials; ++i) {
        const int n = static_cast<int>(rng() % 3) + 1;
        const Expr f = oracle::random_expr(rng, n, 3);
        const int var = static_cast<int>(rng() % static_cast<unsigned>(n));
        const Expr d = differentiate(f, var);
        Box box(static_cast<std::size_t>(n), Interval(Decimal(-1), Decimal(1)));
        auto x = oracle::random_point(rng, box);
        auto xp = x, xm = x;
        xp[static_cast<std::size_t>(var)] += h;
        xm[static_cast<std::size_t>(var)] -= h;
        const Big fd = (*oracle::eval(f, xp) - *oracle::eval(f, xm)) / (2 * h);
        const Big exact = *oracle::eval(d, x);
        // Central differences carry h^2 f'''/6 error; the curvature of the
        // random expressions stays small on [-1, 1].
        if (abs(fd - exact) > tol * std::max(Big(1), abs(exact))) return {false, to_string(f) + " d/dx" + std::to_string(var + 1)};
    }
    return {};
}

// ---------------------------------------------------------------------------
// Certificate tampering

struct Located {
    CertNode* node;
    Box box;
};

inline void collect(CertNode& n, const Box& box, std::vector<Located>& out)
{
    out.push_back({&n, box});
    if (auto* s = std::get_if<SplitNode>(&n.node)) {
        if (s->children.size() == 2) {
            const auto [l, r] = split_box(box, s->var, s->midpoint);
            collect(s->children[0], l, out);
            collect(s->children[1], r, out);
        }
    } else if (auto* m = std::get_if<MonotoneNode>(&n.node)) {
        collect(m->children[0], facet_box(box, m->var, m->sign), out);
    }
}

/// Mutable fields of a certificate: tree nodes plus sharp sign obligations.
inline std::vector<Located> targets(const InequalitySpec& spec, Certificate& c)
{
    std::vector<Located> nodes;
    if (auto* sharp = std::get_if<SharpRoot>(&c.root.node)) {
        const auto g = sharp_geometry(spec, sharp->fractions);
        for (std::size_t k = 0; k < sharp->children.size(); ++k) collect(sharp->children[k], g.complements[k], nodes);
        for (std::size_t k = 0; k < sharp->signs.size(); ++k) nodes.push_back({&c.root, g.neighborhood});
    } else {
        collect(c.root, spec.domain, nodes);
    }
    return nodes;
}

/// One single-field edit of target `pick`: shift a split point by 0.1,
/// swap a disjunct index, cut a precision to 1 digit, or flip a sign.
inline void tamper(const InequalitySpec& spec, Certificate& c, std::size_t pick, std::mt19937_64& rng)
{
    auto nodes = targets(spec, c);
    const int claims = static_cast<int>(spec.claims.size());
    const auto swap_disjunct = [&](int& d) { d = claims > 1 ? (d + 1 + static_cast<int>(rng() % static_cast<unsigned>(claims - 1))) % claims : d + 1; };
    const bool coin = rng() % 2 == 0;
    std::visit(
        [&](auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, SplitNode>) {
                v.midpoint = v.midpoint + Decimal::parse("0.1");
            } else if constexpr (std::is_same_v<T, NaturalLeaf> || std::is_same_v<T, TaylorLeaf>) {
                if (coin) swap_disjunct(v.disjunct);
                else v.precision = 1;
            } else if constexpr (std::is_same_v<T, MonotoneNode>) {
                const int which = static_cast<int>(rng() % 3);
                if (which == 0) v.sign = -v.sign;
                else if (which == 1) swap_disjunct(v.disjunct);
                else v.precision = 1;
            } else {
                // Sharp root entries past the subtree nodes are its obligations.
                const std::size_t first = nodes.size() - v.signs.size();
                auto& o = v.signs[pick - first];
                if (coin) o.sign = -o.sign;
                else o.precision = 1;
            }
        },
        nodes[pick].node->node);
}

/// Dense sampling of the claim itself.
inline bool claim_holds_on_samples(const InequalitySpec& spec, int samples, std::mt19937_64& rng)
{
    for (int i = 0; i < samples; ++i) {
        const auto x = oracle::random_point(rng, spec.domain);
        bool any = false;
        for (const auto& c : spec.claims) {
            const auto v = oracle::eval(c, x);
            if (v && (spec.strict ? *v < 0 : *v <= 0)) any = true;
        }
        if (!any) return false;
    }
    return true;
}

struct TamperOutcome {
    int rejected = 0;
    int survived_sound = 0;
    int survived_unsound = 0;
};

inline TamperOutcome tamper_trials(const std::vector<InequalitySpec>& specs, const std::vector<Certificate>& certs, int trials, int samples,
                                   std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    TamperOutcome out;
    // Fields are drawn uniformly over all certificates together.
    std::vector<std::pair<std::size_t, std::size_t>> fields;
    for (std::size_t k = 0; k < specs.size(); ++k) {
        Certificate c = certs[k];
        for (std::size_t f = 0; f < targets(specs[k], c).size(); ++f) fields.emplace_back(k, f);
    }
    for (int i = 0; i < trials; ++i) {
        const auto [k, f] = fields[rng() % fields.size()];
        Certificate c = certs[k];
        tamper(specs[k], c, f, rng);
        // Edits go through the text form, as a hand-edited file would.
        bool accepted = false;
        try {
            accepted = is_verified(check(specs[k], deserialize(serialize(c))));
        } catch (const FormatError&) {
        }
        if (!accepted) ++out.rejected;
        else if (claim_holds_on_samples(specs[k], samples, rng)) ++out.survived_sound;
        else ++out.survived_unsound;
    }
    return out;
}

// ---------------------------------------------------------------------------

struct LpOutcome {
    int systems = 0;
    int infeasible = 0;
    int certified = 0;
    int unsound = 0;
};

/// The full untrusted pipeline (float LP, repair, exact check) against
/// exact vertex enumeration.
inline LpOutcome lp_vs_enumeration(int systems, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    LpOutcome out;
    for (int i = 0; i < systems; ++i) {
        const auto sys = oracle::random_system(rng, 2 + static_cast<std::size_t>(rng() % 2), 2 + static_cast<std::size_t>(rng() % 4));
        const bool feasible = oracle::feasible(sys);
        const auto approx = find_dual_approx(sys);
        const auto d = approx ? modify_dual(sys, *approx) : std::nullopt;
        const bool cert = d && check_infeasible(sys, *d).certified;
        ++out.systems;
        out.infeasible += feasible ? 0 : 1;
        out.certified += cert ? 1 : 0;
        out.unsound += cert && feasible ? 1 : 0;
    }
    return out;
}

/// Certificate text per spec, for comparing worker counts.
inline std::vector<std::string> batch_texts(const std::vector<InequalitySpec>& specs, unsigned workers)
{
    ProverConfig cfg;
    cfg.workers = workers;
    std::vector<std::string> out;
    for (const auto& r : batch_prove(specs, cfg)) out.push_back(r.proved() ? serialize(r.certificate()) : std::string("failed: ") + to_string(r.failure().reason));
    return out;
}

} // namespace props
