// Proof certificates: node tree, text format and the replay checker.
//
// File layout:
//
//   rigorcert v1 <spec-id> <sha256 of the canonical spec text>
//   (split 1 1.5
//     (natural 1 10)
//     (taylor 1 10 (1.75)))
//
// Variable and disjunct indices are 1-based in the file and 0-based in memory.
#pragma once

#include "rigor/spec.hpp"
#include "rigor/taylor.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <sstream>
#include <variant>

namespace rigor {

struct CertNode;

struct SplitNode {
    int var = 0;
    Decimal midpoint;
    std::vector<CertNode> children; // left, right
    friend bool operator==(const SplitNode&, const SplitNode&) = default;
};

struct NaturalLeaf {
    int disjunct = 0;
    int precision = 1;
    friend bool operator==(const NaturalLeaf&, const NaturalLeaf&) = default;
};

struct TaylorLeaf {
    int disjunct = 0;
    int precision = 1;
    std::vector<Decimal> center;
    friend bool operator==(const TaylorLeaf&, const TaylorLeaf&) = default;
};

struct MonotoneNode {
    int disjunct = 0;
    int var = 0;
    int sign = 1;
    int precision = 1;
    std::vector<CertNode> children; // the facet subtree
    friend bool operator==(const MonotoneNode&, const MonotoneNode&) = default;
};

struct SignObligation {
    int var = 0;
    int sign = -1;
    int precision = 1;
    friend bool operator==(const SignObligation&, const SignObligation&) = default;
};

/// Corner neighborhood U has side fractions[i] * (b_i - a_i) at the sharp
/// corner. Children prove f < 0 on the complement boxes, in order.
struct SharpRoot {
    std::vector<Decimal> fractions;
    std::vector<SignObligation> signs;
    std::vector<CertNode> children;
    friend bool operator==(const SharpRoot&, const SharpRoot&) = default;
};

struct CertNode {
    std::variant<SplitNode, NaturalLeaf, TaylorLeaf, MonotoneNode, SharpRoot> node;
    friend bool operator==(const CertNode&, const CertNode&) = default;
};

struct Certificate {
    std::string spec_id;
    std::string spec_digest;
    CertNode root;
    friend bool operator==(const Certificate&, const Certificate&) = default;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string sha256_hex(std::string_view data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) throw std::runtime_error("SHA-256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

inline std::string spec_digest(const InequalitySpec& spec) { return sha256_hex(to_string(spec)); }

/// One derivative table per disjunct, shared by prover and checker.
class ClaimTables {
public:
    explicit ClaimTables(const InequalitySpec& spec)
    {
        for (const auto& c : spec.claims) tables_.push_back(std::make_unique<DerivativeTable>(c));
    }
    const DerivativeTable& operator[](std::size_t i) const { return *tables_.at(i); }
    std::size_t size() const { return tables_.size(); }

private:
    std::vector<std::unique_ptr<DerivativeTable>> tables_;
};

// ---------------------------------------------------------------------------
// Box geometry shared by prover and checker

inline std::pair<Box, Box> split_box(const Box& box, int var, const Decimal& mid)
{
    Box left = box;
    Box right = box;
    const auto i = static_cast<std::size_t>(var);
    left[i] = Interval(box[i].lo(), mid);
    right[i] = Interval(mid, box[i].hi());
    return {std::move(left), std::move(right)};
}

/// Facet where f is largest: x_var = hi for sign +1, lo for sign -1.
inline Box facet_box(const Box& box, int var, int sign)
{
    Box f = box;
    const auto i = static_cast<std::size_t>(var);
    f[i] = Interval(sign > 0 ? box[i].hi() : box[i].lo());
    return f;
}

/// Corner value as exact rationals.
inline std::vector<Rational> corner_point(const InequalitySpec& spec)
{
    std::vector<Rational> x;
    for (std::size_t i = 0; i < spec.arity(); ++i) {
        x.push_back(((*spec.sharp_corner)[i] ? spec.domain[i].hi() : spec.domain[i].lo()).to_rational());
    }
    return x;
}

/// The neighborhood U and its complement boxes. Only edges of positive
/// length contribute complement boxes; box k keeps U on the earlier edges,
/// takes the complement on edge k and the full range after it.
struct SharpGeometry {
    Box neighborhood;
    std::vector<int> free_vars;
    std::vector<Box> complements;
};

inline SharpGeometry sharp_geometry(const InequalitySpec& spec, const std::vector<Decimal>& fractions)
{
    const auto& corner = *spec.sharp_corner;
    const Box& d = spec.domain;
    SharpGeometry g;
    g.neighborhood = d;
    Box outside = d;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const Decimal len = d[i].hi() - d[i].lo();
        if (len.is_zero()) continue;
        g.free_vars.push_back(static_cast<int>(i));
        const Decimal side = fractions[i] * len;
        if (corner[i]) {
            const Decimal cut = d[i].hi() - side;
            g.neighborhood[i] = Interval(cut, d[i].hi());
            outside[i] = Interval(d[i].lo(), cut);
        } else {
            const Decimal cut = d[i].lo() + side;
            g.neighborhood[i] = Interval(d[i].lo(), cut);
            outside[i] = Interval(cut, d[i].hi());
        }
    }
    for (std::size_t k = 0; k < g.free_vars.size(); ++k) {
        Box b = d;
        for (std::size_t m = 0; m < k; ++m) {
            const auto j = static_cast<std::size_t>(g.free_vars[m]);
            b[j] = g.neighborhood[j];
        }
        const auto i = static_cast<std::size_t>(g.free_vars[k]);
        b[i] = outside[i];
        g.complements.push_back(std::move(b));
    }
    return g;
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

inline void write_decimals(const std::vector<Decimal>& v, std::string& out)
{
    out += '(';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ' ';
        out += v[i].to_string();
    }
    out += ')';
}

inline void write_node(const CertNode& n, int depth, std::string& out)
{
    out.append(static_cast<std::size_t>(2 * depth), ' ');
    const auto children = [&](const std::vector<CertNode>& kids) {
        for (const auto& c : kids) {
            out += '\n';
            write_node(c, depth + 1, out);
        }
    };
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, SplitNode>) {
                out += "(split " + std::to_string(v.var + 1) + ' ' + v.midpoint.to_string();
                children(v.children);
            } else if constexpr (std::is_same_v<T, NaturalLeaf>) {
                out += "(natural " + std::to_string(v.disjunct + 1) + ' ' + std::to_string(v.precision);
            } else if constexpr (std::is_same_v<T, TaylorLeaf>) {
                out += "(taylor " + std::to_string(v.disjunct + 1) + ' ' + std::to_string(v.precision) + ' ';
                write_decimals(v.center, out);
            } else if constexpr (std::is_same_v<T, MonotoneNode>) {
                out += "(monotone " + std::to_string(v.disjunct + 1) + ' ' + std::to_string(v.var + 1) + ' ' + (v.sign > 0 ? '+' : '-') +
                       ' ' + std::to_string(v.precision);
                children(v.children);
            } else {
                out += "(sharp ";
                write_decimals(v.fractions, out);
                out += " (";
                for (std::size_t i = 0; i < v.signs.size(); ++i) {
                    if (i) out += ' ';
                    out += '(' + std::to_string(v.signs[i].var + 1) + ' ' + (v.signs[i].sign > 0 ? '+' : '-') + ' ' +
                           std::to_string(v.signs[i].precision) + ')';
                }
                out += ')';
                children(v.children);
            }
        },
        n.node);
    out += ')';
}

// Minimal s-expression reader over the node tree.
class CertReader {
public:
    explicit CertReader(std::string_view text) : text_(text) {}

    CertNode node()
    {
        open();
        const std::string head = atom();
        CertNode n;
        if (head == "split") {
            SplitNode s;
            s.var = index();
            s.midpoint = decimal();
            s.children.push_back(node());
            s.children.push_back(node());
            n.node = std::move(s);
        } else if (head == "natural") {
            NaturalLeaf l;
            l.disjunct = index();
            l.precision = precision();
            n.node = l;
        } else if (head == "taylor") {
            TaylorLeaf l;
            l.disjunct = index();
            l.precision = precision();
            l.center = decimals();
            n.node = std::move(l);
        } else if (head == "monotone") {
            MonotoneNode m;
            m.disjunct = index();
            m.var = index();
            m.sign = sign();
            m.precision = precision();
            m.children.push_back(node());
            n.node = std::move(m);
        } else if (head == "sharp") {
            SharpRoot s;
            s.fractions = decimals();
            open();
            while (!at_close()) {
                open();
                SignObligation o;
                o.var = index();
                o.sign = sign();
                o.precision = precision();
                close();
                s.signs.push_back(o);
            }
            close();
            while (!at_close()) s.children.push_back(node());
            n.node = std::move(s);
        } else {
            throw FormatError("unknown certificate node '" + head + "'");
        }
        close();
        return n;
    }

    void finish()
    {
        skip();
        if (pos_ != text_.size()) throw FormatError("trailing content after certificate tree");
    }

private:
    void skip()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    void open()
    {
        skip();
        if (pos_ >= text_.size()) throw FormatError("truncated certificate");
        if (text_[pos_] != '(') throw FormatError("expected '('");
        ++pos_;
    }

    void close()
    {
        skip();
        if (pos_ >= text_.size()) throw FormatError("truncated certificate");
        if (text_[pos_] != ')') throw FormatError("expected ')'");
        ++pos_;
    }

    bool at_close()
    {
        skip();
        if (pos_ >= text_.size()) throw FormatError("truncated certificate");
        return text_[pos_] == ')';
    }

    std::string atom()
    {
        skip();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != '(' && text_[pos_] != ')') ++pos_;
        if (pos_ == start) throw FormatError(pos_ >= text_.size() ? "truncated certificate" : "expected an atom");
        return std::string(text_.substr(start, pos_ - start));
    }

    int natural(int min)
    {
        const std::string a = atom();
        int v = 0;
        const auto [ptr, ec] = std::from_chars(a.data(), a.data() + a.size(), v);
        if (ec != std::errc() || ptr != a.data() + a.size() || v < min) throw FormatError("expected an integer >= " + std::to_string(min) + ", found '" + a + "'");
        return v;
    }

    int index() { return natural(1) - 1; }
    int precision() { return natural(1); }

    int sign()
    {
        const std::string a = atom();
        if (a == "+") return 1;
        if (a == "-") return -1;
        throw FormatError("expected '+' or '-', found '" + a + "'");
    }

    Decimal decimal()
    {
        const std::string a = atom();
        try {
            return Decimal::parse(a);
        } catch (const std::invalid_argument&) {
            throw FormatError("malformed decimal '" + a + "'");
        }
    }

    std::vector<Decimal> decimals()
    {
        open();
        std::vector<Decimal> v;
        while (!at_close()) v.push_back(decimal());
        close();
        return v;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline std::string serialize(const Certificate& cert)
{
    std::string out = "rigorcert v1 " + cert.spec_id + ' ' + cert.spec_digest + '\n';
    detail::write_node(cert.root, 0, out);
    out += '\n';
    return out;
}

inline Certificate deserialize(std::string_view text)
{
    const std::size_t eol = text.find('\n');
    if (eol == std::string_view::npos) throw FormatError("truncated certificate header");
    std::istringstream header{std::string(text.substr(0, eol))};
    std::string magic, version, id, digest, extra;
    header >> magic >> version >> id >> digest;
    if (magic != "rigorcert") throw FormatError("not a certificate file");
    if (version != "v1") throw FormatError("unsupported certificate version '" + version + "'");
    if (id.empty() || digest.empty() || (header >> extra)) throw FormatError("malformed certificate header");
    Certificate c;
    c.spec_id = id;
    c.spec_digest = digest;
    detail::CertReader reader(text.substr(eol + 1));
    c.root = reader.node();
    reader.finish();
    return c;
}

// ---------------------------------------------------------------------------
// Checker

struct Verified {};

struct Rejected {
    std::string path;
    std::string reason;
};

using CheckResult = std::variant<Verified, Rejected>;

namespace detail {

struct Checker {
    const InequalitySpec& spec;
    const ClaimTables& tables;

    static std::string join(const std::string& path, const std::string& step) { return path.empty() ? step : path + '/' + step; }

    [[noreturn]] static void reject(const std::string& path, const std::string& reason) { throw Rejected{path.empty() ? "root" : path, reason}; }

    void check_disjunct(int d, std::optional<int> only, const std::string& path) const
    {
        if (d < 0 || static_cast<std::size_t>(d) >= spec.claims.size()) reject(path, "malformed: disjunct " + std::to_string(d + 1) + " does not exist");
        if (only && *only != d) reject(path, "malformed: subtree must use disjunct " + std::to_string(*only + 1));
    }

    static Precision precision(int p, const std::string& path)
    {
        if (p < 1) reject(path, "malformed: precision must be positive");
        return Precision(p);
    }

    void check_var(int v, const std::string& path) const
    {
        if (v < 0 || static_cast<std::size_t>(v) >= spec.arity()) reject(path, "malformed: variable " + std::to_string(v + 1) + " does not exist");
    }

    static void demand_negative(const EvalOutcome& r, const std::string& what, const std::string& path)
    {
        if (!r) reject(path, what + " is undefined on the box");
        if (r->hi().sign() >= 0) reject(path, what + " upper bound " + r->hi().to_string() + " is not negative");
    }

    void run(const CertNode& n, const Box& box, std::optional<int> only, const std::string& path) const
    {
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, SplitNode>) {
                    check_var(v.var, path);
                    const Interval& edge = box[static_cast<std::size_t>(v.var)];
                    if (!(edge.lo() < v.midpoint && v.midpoint < edge.hi())) reject(path, "split point " + v.midpoint.to_string() + " is not strictly inside " + edge.to_string());
                    if (v.children.size() != 2) reject(path, "malformed: split needs two children");
                    const auto [left, right] = split_box(box, v.var, v.midpoint);
                    run(v.children[0], left, only, join(path, "L"));
                    run(v.children[1], right, only, join(path, "R"));
                } else if constexpr (std::is_same_v<T, NaturalLeaf>) {
                    check_disjunct(v.disjunct, only, path);
                    const Precision p = precision(v.precision, path);
                    demand_negative(eval_natural(spec.claims[static_cast<std::size_t>(v.disjunct)], box, p), "natural enclosure", path);
                } else if constexpr (std::is_same_v<T, TaylorLeaf>) {
                    check_disjunct(v.disjunct, only, path);
                    const Precision p = precision(v.precision, path);
                    if (v.center.size() != box.size()) reject(path, "malformed: Taylor center has the wrong dimension");
                    for (std::size_t i = 0; i < box.size(); ++i) {
                        if (!box[i].contains(v.center[i])) reject(path, "Taylor center lies outside the box");
                    }
                    const auto t = taylor_enclose(tables[static_cast<std::size_t>(v.disjunct)], box, p, v.center);
                    demand_negative(t ? EvalOutcome(t->enclosure) : std::nullopt, "Taylor enclosure", path);
                } else if constexpr (std::is_same_v<T, MonotoneNode>) {
                    check_disjunct(v.disjunct, only, path);
                    check_var(v.var, path);
                    const Precision p = precision(v.precision, path);
                    if (v.sign != 1 && v.sign != -1) reject(path, "malformed: monotone sign");
                    if (v.children.size() != 1) reject(path, "malformed: monotone node needs one child");
                    const auto& table = tables[static_cast<std::size_t>(v.disjunct)];
                    if (!eval_natural(table.function(), box, p)) reject(path, "function is undefined on the box");
                    const EvalOutcome d = derivative_enclosure(table, v.var, box, p);
                    if (!d) reject(path, "partial derivative is undefined on the box");
                    if (v.sign > 0 ? d->lo().sign() < 0 : d->hi().sign() > 0) reject(path, "partial derivative enclosure " + d->to_string() + " does not have the claimed sign");
                    run(v.children[0], facet_box(box, v.var, v.sign), v.disjunct, join(path, "facet"));
                } else {
                    reject(path, "malformed: sharp node below the root");
                }
            },
            n.node);
    }

    void run_sharp(const SharpRoot& s) const
    {
        const std::string path = "sharp";
        if (!spec.sharp_corner) reject(path, "malformed: spec has no sharp corner");
        if (spec.claims.size() != 1) reject(path, "malformed: sharp spec must have one disjunct");
        if (s.fractions.size() != spec.arity()) reject(path, "malformed: fraction count");
        for (const auto& f : s.fractions) {
            if (f.sign() <= 0 || f >= Decimal(1)) reject(path, "neighborhood fraction " + f.to_string() + " is not in (0, 1)");
        }
        std::optional<Rational> value;
        try {
            value = eval_exact(spec.claims[0], corner_point(spec));
        } catch (const UndefinedPoint& e) {
            reject(path, std::string("corner value undefined: ") + e.what());
        }
        if (!value) reject(path, "corner value is not exactly computable");
        if (*value != 0) reject(path, "corner value is not zero");

        const SharpGeometry g = sharp_geometry(spec, s.fractions);
        if (s.signs.size() != g.free_vars.size()) reject(path, "malformed: one sign obligation per free variable required");
        const auto& table = tables[0];
        for (std::size_t k = 0; k < s.signs.size(); ++k) {
            const auto& o = s.signs[k];
            const std::string here = join(path, "sign[" + std::to_string(k + 1) + "]");
            if (o.var != g.free_vars[k]) reject(here, "malformed: sign obligations must follow variable order");
            const int want = (*spec.sharp_corner)[static_cast<std::size_t>(o.var)] ? 1 : -1;
            if (o.sign != want) reject(here, "sign does not point toward the corner");
            const Precision p = precision(o.precision, here);
            if (!eval_natural(table.function(), g.neighborhood, p)) reject(here, "function is undefined on the neighborhood");
            const EvalOutcome d = derivative_enclosure(table, o.var, g.neighborhood, p);
            if (!d) reject(here, "partial derivative is undefined on the neighborhood");
            if (want > 0 ? d->lo().sign() < 0 : d->hi().sign() > 0) reject(here, "partial derivative enclosure " + d->to_string() + " does not have the required sign");
        }
        if (s.children.size() != g.complements.size()) reject(path, "malformed: one child per complement box required");
        for (std::size_t k = 0; k < s.children.size(); ++k) {
            run(s.children[k], g.complements[k], 0, join(path, "complement[" + std::to_string(k + 1) + "]"));
        }
    }
};

} // namespace detail

/// Replays the certificate against the spec. Performs no search.
inline CheckResult check(const InequalitySpec& spec, const Certificate& cert, const ClaimTables& tables)
{
    if (cert.spec_id != spec.id) return Rejected{"root", "certificate is for '" + cert.spec_id + "', not '" + spec.id + "'"};
    if (cert.spec_digest != spec_digest(spec)) return Rejected{"root", "spec digest mismatch"};
    const detail::Checker c{spec, tables};
    try {
        if (const auto* s = std::get_if<SharpRoot>(&cert.root.node)) {
            c.run_sharp(*s);
        } else {
            c.run(cert.root, spec.domain, std::nullopt, "");
        }
    } catch (Rejected& r) {
        return std::move(r);
    }
    return Verified{};
}

inline CheckResult check(const InequalitySpec& spec, const Certificate& cert)
{
    const ClaimTables tables(spec);
    return check(spec, cert, tables);
}

inline bool is_verified(const CheckResult& r) { return std::holds_alternative<Verified>(r); }

} // namespace rigor
