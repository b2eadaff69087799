// Inequality specifications and their text format.
//
//   file    := spec+
//   spec    := 'ineq' STRING 'vars' varbind (',' varbind)* ';'
//              'claims' claim ('\/' claim)* ';' attrs?
//   varbind := IDENT 'in' '[' DECIMAL ',' DECIMAL ']'
//   claim   := expr '<' '0' | expr '<=' '0'
//   attrs   := 'sharp' 'at' ('lo'|'hi')+ ';'
//
// `#` starts a line comment.
#pragma once

#include "rigor/expr.hpp"

#include <cctype>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace rigor {

/// forall x in domain: claims[0](x) < 0 \/ ... \/ claims[k-1](x) < 0
/// (or claims[0](x) <= 0 when strict is false).
struct InequalitySpec {
    std::string id;
    std::vector<std::string> names;
    Box domain;
    std::vector<Expr> claims;
    bool strict = true;
    /// Per variable: false = lower end, true = upper end.
    std::optional<std::vector<bool>> sharp_corner;

    std::size_t arity() const { return domain.size(); }
};

struct ParseError : std::runtime_error {
    int line;
    int column;
    ParseError(const std::string& what, int line_, int column_)
        : std::runtime_error(std::to_string(line_) + ":" + std::to_string(column_) + ": " + what), line(line_), column(column_)
    {
    }
};

struct DuplicateId : ParseError {
    using ParseError::ParseError;
};

inline bool valid_identifier_token(std::string_view id)
{
    if (id.empty()) return false;
    for (const char c : id) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
    }
    return id != "." && id != "..";
}

namespace detail {

enum class Tok { ident, number, string, punct, end };

struct Token {
    Tok kind = Tok::end;
    std::string text;
    int line = 1;
    int column = 1;
};

/// Tokenizer shared by the inequality and LP formats.
class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) { advance(); }

    const Token& peek() const { return current_; }

    Token next()
    {
        Token t = current_;
        advance();
        return t;
    }

    [[noreturn]] void fail(const std::string& what, const Token& at) const { throw ParseError(what, at.line, at.column); }

    Token expect_punct(std::string_view p)
    {
        if (current_.kind != Tok::punct || current_.text != p) fail("expected '" + std::string(p) + "', found '" + current_.text + "'", current_);
        return next();
    }

    Token expect_keyword(std::string_view k)
    {
        if (current_.kind != Tok::ident || current_.text != k) fail("expected '" + std::string(k) + "', found '" + current_.text + "'", current_);
        return next();
    }

    bool accept_punct(std::string_view p)
    {
        if (current_.kind == Tok::punct && current_.text == p) {
            advance();
            return true;
        }
        return false;
    }

    bool at_keyword(std::string_view k) const { return current_.kind == Tok::ident && current_.text == k; }

    Decimal expect_decimal()
    {
        bool negative = false;
        if (current_.kind == Tok::punct && (current_.text == "-" || current_.text == "+")) negative = next().text == "-";
        if (current_.kind != Tok::number) fail("expected a decimal number, found '" + current_.text + "'", current_);
        const Token t = next();
        try {
            const Decimal d = Decimal::parse(t.text);
            return negative ? -d : d;
        } catch (const std::invalid_argument& e) {
            fail(e.what(), t);
        }
    }

private:
    void advance()
    {
        skip_space();
        current_ = Token{};
        current_.line = line_;
        current_.column = column_;
        if (pos_ >= text_.size()) return;
        const char c = text_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) take();
            current_.kind = Tok::ident;
        } else if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && pos_ + 1 < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
            while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) take();
            if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
                const std::size_t save = pos_;
                std::size_t look = pos_ + 1;
                if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
                if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
                    while (pos_ < look) take();
                    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) take();
                } else {
                    pos_ = save;
                }
            }
            current_.kind = Tok::number;
        } else if (c == '"') {
            take();
            while (pos_ < text_.size() && text_[pos_] != '"' && text_[pos_] != '\n') take();
            if (pos_ >= text_.size() || text_[pos_] != '"') throw ParseError("unterminated string", current_.line, current_.column);
            pos_++;
            column_++;
            current_.text.erase(0, 1);
            current_.kind = Tok::string;
        } else {
            current_.kind = Tok::punct;
            const std::string_view two = text_.substr(pos_, 2);
            if (two == "<=" || two == "\\/") {
                take();
                take();
            } else {
                take();
            }
        }
    }

    void take()
    {
        current_.text += text_[pos_++];
        ++column_;
    }

    void skip_space()
    {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else if (c == '\n') {
                ++pos_;
                ++line_;
                column_ = 1;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
                ++column_;
            } else {
                return;
            }
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
    Token current_;
};

inline const std::set<std::string, std::less<>>& reserved_words()
{
    static const std::set<std::string, std::less<>> words = {"ineq", "vars", "in", "claims", "sharp", "at", "lo", "hi",
                                                              "pi", "sqrt", "sin", "cos", "atan", "asin", "acos", "atn", "abs"};
    return words;
}

inline std::optional<Op> function_op(std::string_view name)
{
    static const std::pair<std::string_view, Op> table[] = {{"sqrt", Op::sqrt}, {"sin", Op::sin},   {"cos", Op::cos},
                                                            {"atan", Op::atan}, {"asin", Op::asin}, {"acos", Op::acos},
                                                            {"atn", Op::atn},   {"abs", Op::abs}};
    for (const auto& [n, op] : table) {
        if (n == name) return op;
    }
    return std::nullopt;
}

/// Recursive-descent expression parser over a shared lexer.
class ExprParser {
public:
    ExprParser(Lexer& lex, const std::vector<std::string>& names) : lex_(lex), names_(names) {}

    Expr expression()
    {
        Expr e = term();
        for (;;) {
            if (lex_.accept_punct("+")) e = Expr::binary(Op::add, e, term());
            else if (lex_.accept_punct("-")) e = Expr::binary(Op::sub, e, term());
            else return e;
        }
    }

private:
    Expr term()
    {
        Expr e = unary();
        for (;;) {
            if (lex_.accept_punct("*")) e = Expr::binary(Op::mul, e, unary());
            else if (lex_.accept_punct("/")) e = Expr::binary(Op::div, e, unary());
            else return e;
        }
    }

    Expr unary()
    {
        if (lex_.accept_punct("-")) {
            const bool literal = lex_.peek().kind == Tok::number;
            Expr operand = unary();
            if (literal && operand.op() == Op::constant && operand.value().sign() > 0) return Expr::constant(-operand.value());
            return Expr::unary(Op::neg, operand);
        }
        return power();
    }

    Expr power()
    {
        Expr base = primary();
        while (lex_.accept_punct("^")) {
            const Token t = lex_.peek();
            if (t.kind != Tok::number || t.text.find_first_not_of("0123456789") != std::string::npos)
                lex_.fail("exponent must be a natural number", t);
            lex_.next();
            if (t.text.size() > 6) lex_.fail("exponent too large", t);
            base = Expr::pow(base, static_cast<unsigned>(std::stoul(t.text)));
        }
        return base;
    }

    Expr primary()
    {
        const Token t = lex_.peek();
        if (t.kind == Tok::number) {
            lex_.next();
            try {
                return Expr::constant(Decimal::parse(t.text));
            } catch (const std::invalid_argument& e) {
                lex_.fail(e.what(), t);
            }
        }
        if (lex_.accept_punct("(")) {
            Expr e = expression();
            lex_.expect_punct(")");
            return e;
        }
        if (t.kind == Tok::ident) {
            lex_.next();
            if (t.text == "pi") return Expr::pi();
            if (const auto op = function_op(t.text)) {
                lex_.expect_punct("(");
                Expr arg = expression();
                lex_.expect_punct(")");
                return Expr::unary(*op, arg);
            }
            for (std::size_t i = 0; i < names_.size(); ++i) {
                if (names_[i] == t.text) return Expr::var(static_cast<int>(i));
            }
            lex_.fail("unknown identifier '" + t.text + "'", t);
        }
        lex_.fail("unexpected '" + t.text + "' in expression", t);
    }

    Lexer& lex_;
    const std::vector<std::string>& names_;
};

inline InequalitySpec parse_one(Lexer& lex)
{
    InequalitySpec spec;
    lex.expect_keyword("ineq");
    const Token id = lex.next();
    if (id.kind != Tok::string) lex.fail("expected a quoted inequality id", id);
    if (!valid_identifier_token(id.text)) lex.fail("inequality id may only contain letters, digits, '_', '-' and '.'", id);
    spec.id = id.text;

    lex.expect_keyword("vars");
    do {
        const Token name = lex.next();
        if (name.kind != Tok::ident || reserved_words().count(name.text) != 0) lex.fail("expected a variable name", name);
        for (const auto& n : spec.names) {
            if (n == name.text) lex.fail("duplicate variable '" + name.text + "'", name);
        }
        lex.expect_keyword("in");
        const Token open = lex.expect_punct("[");
        Decimal lo = lex.expect_decimal();
        lex.expect_punct(",");
        Decimal hi = lex.expect_decimal();
        lex.expect_punct("]");
        if (hi < lo) lex.fail("empty variable range", open);
        spec.names.push_back(name.text);
        spec.domain.emplace_back(std::move(lo), std::move(hi));
        if (spec.names.size() > static_cast<std::size_t>(kMaxVariables)) lex.fail("at most six variables are supported", name);
    } while (lex.accept_punct(","));
    lex.expect_punct(";");

    const Token claims_at = lex.expect_keyword("claims");
    bool any_nonstrict = false;
    do {
        ExprParser parser(lex, spec.names);
        spec.claims.push_back(parser.expression());
        const Token rel = lex.next();
        if (rel.kind != Tok::punct || (rel.text != "<" && rel.text != "<=")) lex.fail("expected '<' or '<='", rel);
        if (rel.text == "<=") any_nonstrict = true;
        const Token zero = lex.next();
        if (zero.kind != Tok::number || Decimal::parse(zero.text) != Decimal()) lex.fail("claims must compare against 0", zero);
    } while (lex.accept_punct("\\/"));
    lex.expect_punct(";");
    if (any_nonstrict && spec.claims.size() > 1) lex.fail("a disjunction must consist of strict claims", claims_at);
    spec.strict = !any_nonstrict;

    if (lex.at_keyword("sharp")) {
        const Token sharp = lex.next();
        lex.expect_keyword("at");
        std::vector<bool> corner;
        while (lex.at_keyword("lo") || lex.at_keyword("hi")) corner.push_back(lex.next().text == "hi");
        lex.expect_punct(";");
        if (spec.strict) lex.fail("a sharp corner requires a single non-strict claim", sharp);
        if (corner.size() != spec.arity()) lex.fail("sharp corner needs one lo/hi per variable", sharp);
        spec.sharp_corner = std::move(corner);
    }
    return spec;
}

} // namespace detail

inline std::vector<InequalitySpec> parse_specs(std::string_view text)
{
    detail::Lexer lex(text);
    std::vector<InequalitySpec> specs;
    std::set<std::string, std::less<>> ids;
    while (lex.peek().kind != detail::Tok::end) {
        const detail::Token start = lex.peek();
        InequalitySpec spec = detail::parse_one(lex);
        if (!ids.insert(spec.id).second) throw DuplicateId("duplicate inequality id '" + spec.id + "'", start.line, start.column);
        specs.push_back(std::move(spec));
    }
    if (specs.empty()) throw ParseError("no inequalities in input", 1, 1);
    return specs;
}

/// Parses a standalone expression over the given variable names.
inline Expr parse_expr(std::string_view text, const std::vector<std::string>& names)
{
    detail::Lexer lex(text);
    detail::ExprParser parser(lex, names);
    Expr e = parser.expression();
    if (lex.peek().kind != detail::Tok::end) lex.fail("trailing input after expression", lex.peek());
    return e;
}

/// Canonical single-line rendering; parse(to_string(s)) reproduces s.
inline std::string to_string(const InequalitySpec& spec)
{
    std::string out = "ineq \"" + spec.id + "\" vars ";
    for (std::size_t i = 0; i < spec.arity(); ++i) {
        if (i > 0) out += ", ";
        out += spec.names[i] + " in [" + spec.domain[i].lo().to_string() + ", " + spec.domain[i].hi().to_string() + "]";
    }
    out += "; claims ";
    for (std::size_t i = 0; i < spec.claims.size(); ++i) {
        if (i > 0) out += " \\/ ";
        out += to_string(spec.claims[i], spec.names) + (spec.strict ? " < 0" : " <= 0");
    }
    out += ";";
    if (spec.sharp_corner) {
        out += " sharp at";
        for (const bool hi : *spec.sharp_corner) out += hi ? " hi" : " lo";
        out += ";";
    }
    return out;
}

} // namespace rigor
