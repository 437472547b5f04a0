#pragma once

// Norm formulas: a conjunction of participation patterns with constraints on
// the left of the turnstile, and either `false` or an existentially quantified
// conjunction of patterns on the right.
//
//   name: Delivers[s, b, d] |- exists p: Pays[b, s, p] where p.amount = d.price and d before p
//
// A pattern `Role[x1, ..., xk, v]` binds the role's positional attributes to
// x1..xk and the participation itself to v. `_` matches anything.

#include <pgc/core/value.hpp>

#include <cctype>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace pgc::norms {

struct Operand {
    enum class Kind { attribute, variable, integer, text };
    Kind kind = Kind::variable;
    std::string var;   // attribute, variable
    std::string attr;  // attribute
    std::int64_t number = 0;
    std::string literal;

    friend bool operator==(const Operand&, const Operand&) = default;
};

enum class Op { eq, ne, lt, le, gt, ge, before, after, concurrent };

inline const char* to_string(Op op) {
    switch (op) {
        case Op::eq: return "=";
        case Op::ne: return "!=";
        case Op::lt: return "<";
        case Op::le: return "<=";
        case Op::gt: return ">";
        case Op::ge: return ">=";
        case Op::before: return "before";
        case Op::after: return "after";
        case Op::concurrent: return "concurrent";
    }
    return "?";
}

inline bool is_ordering(Op op) { return op == Op::before || op == Op::after || op == Op::concurrent; }

struct Constraint {
    Operand lhs;
    Op op = Op::eq;
    Operand rhs;

    friend bool operator==(const Constraint&, const Constraint&) = default;
};

struct Pattern {
    std::string role;
    std::vector<std::string> args;  // positional attribute bindings; "_" = wildcard
    std::string var;                // the participation itself

    friend bool operator==(const Pattern&, const Pattern&) = default;
};

struct NormFormula {
    std::string name;
    std::vector<Pattern> antecedent;
    std::vector<Constraint> antecedent_where;
    bool consequent_false = false;
    std::vector<std::string> exists;
    std::vector<Pattern> consequent;
    std::vector<Constraint> consequent_where;

    friend bool operator==(const NormFormula&, const NormFormula&) = default;
};

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

inline std::string quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'' || c == '\\') out += '\\';
        out += c;
    }
    return out + "'";
}

inline std::string to_string(const Operand& o) {
    switch (o.kind) {
        case Operand::Kind::attribute: return o.var + "." + o.attr;
        case Operand::Kind::variable: return o.var;
        case Operand::Kind::integer: return std::to_string(o.number);
        case Operand::Kind::text: return quote(o.literal);
    }
    return "?";
}

inline std::string to_string(const Constraint& c) { return to_string(c.lhs) + " " + to_string(c.op) + " " + to_string(c.rhs); }

inline std::string to_string(const Pattern& p) {
    std::string out = p.role + "[";
    for (const auto& a : p.args) out += a + ", ";
    return out + p.var + "]";
}

namespace detail {

template <class T>
std::string join(const std::vector<T>& xs, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i > 0) out += sep;
        if constexpr (std::is_same_v<T, std::string>) {
            out += xs[i];
        } else {
            out += to_string(xs[i]);
        }
    }
    return out;
}

}  // namespace detail

/// Canonical surface form; parse(print(n)) == n.
inline std::string print(const NormFormula& n) {
    std::string out;
    if (!n.name.empty()) out += n.name + ": ";
    out += detail::join(n.antecedent, ", ");
    if (!n.antecedent_where.empty()) out += " where " + detail::join(n.antecedent_where, " and ");
    out += " |- ";
    if (n.consequent_false) return out + "false";
    if (!n.exists.empty()) out += "exists " + detail::join(n.exists, ", ") + ": ";
    out += detail::join(n.consequent, ", ");
    if (!n.consequent_where.empty()) out += " where " + detail::join(n.consequent_where, " and ");
    return out;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace detail {

struct Token {
    enum class Kind { ident, integer, text, punct, end };
    Kind kind = Kind::end;
    std::string text;
    std::size_t pos = 0;
};

inline bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

inline std::vector<Token> tokenize(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (ident_start(c)) {
            std::size_t j = i + 1;
            while (j < s.size() && ident_char(s[j])) ++j;
            out.push_back({Token::Kind::ident, std::string(s.substr(i, j - i)), i});
            i = j;
        } else if (std::isdigit(static_cast<unsigned char>(c)) || (c == '-' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
            std::size_t j = i + 1;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            out.push_back({Token::Kind::integer, std::string(s.substr(i, j - i)), i});
            i = j;
        } else if (c == '\'') {
            std::string lit;
            std::size_t j = i + 1;
            for (;; ++j) {
                if (j >= s.size()) throw ParseError("unterminated string", i);
                if (s[j] == '\\' && j + 1 < s.size()) {
                    lit += s[++j];
                } else if (s[j] == '\'') {
                    break;
                } else {
                    lit += s[j];
                }
            }
            out.push_back({Token::Kind::text, lit, i});
            i = j + 1;
        } else {
            static const char* two[] = {"|-", "!=", "<=", ">="};
            bool matched = false;
            for (const char* t : two) {
                if (s.substr(i, 2) == t) {
                    out.push_back({Token::Kind::punct, t, i});
                    i += 2;
                    matched = true;
                    break;
                }
            }
            if (matched) continue;
            if (std::string_view("[],:.=<>").find(c) == std::string_view::npos) {
                throw ParseError(std::string("unexpected character '") + c + "'", i);
            }
            out.push_back({Token::Kind::punct, std::string(1, c), i});
            ++i;
        }
    }
    out.push_back({Token::Kind::end, "", s.size()});
    return out;
}

class Parser {
public:
    explicit Parser(std::string_view text) : tokens_(tokenize(text)) {}

    NormFormula parse() {
        NormFormula n;
        if (peek().kind == Token::Kind::end) throw ParseError("empty norm", 0);
        // optional name: ident ('.' ident)* ':'
        if (peek().kind == Token::Kind::ident && peek().text != "exists") {
            std::size_t k = 1;
            while (peek(k).text == "." && peek(k + 1).kind == Token::Kind::ident) k += 2;
            if (peek(k).kind == Token::Kind::punct && peek(k).text == ":") {
                for (std::size_t i = 0; i < k; ++i) n.name += next().text;
                next();
            }
        }
        n.antecedent = patterns();
        if (accept_word("where")) n.antecedent_where = constraints();
        expect("|-");
        if (accept_word("false")) {
            n.consequent_false = true;
        } else {
            if (accept_word("exists")) {
                n.exists.push_back(variable("variable"));
                while (accept(",")) n.exists.push_back(variable("variable"));
                expect(":");
            }
            n.consequent = patterns();
            if (accept_word("where")) n.consequent_where = constraints();
        }
        if (peek().kind != Token::Kind::end) throw ParseError("unexpected '" + peek().text + "'", peek().pos);
        return n;
    }

    std::size_t position() const { return peek().pos; }

private:
    const Token& peek(std::size_t k = 0) const { return tokens_[std::min(at_ + k, tokens_.size() - 1)]; }
    const Token& next() {
        const Token& t = tokens_[at_];
        if (at_ + 1 < tokens_.size()) ++at_;
        return t;
    }
    bool accept(const char* punct) {
        if (peek().kind == Token::Kind::punct && peek().text == punct) {
            next();
            return true;
        }
        return false;
    }
    bool accept_word(const char* word) {
        if (peek().kind == Token::Kind::ident && peek().text == word) {
            next();
            return true;
        }
        return false;
    }
    void expect(const char* punct) {
        if (!accept(punct)) throw ParseError(std::string("expected '") + punct + "'" + found(), peek().pos);
    }
    std::string found() const {
        return peek().kind == Token::Kind::end ? " but the norm ended" : " but found '" + peek().text + "'";
    }

    static bool reserved(const std::string& w) {
        static const std::set<std::string> words{"where", "and", "exists", "false", "before", "after", "concurrent"};
        return words.count(w) > 0;
    }

    std::string variable(const char* what) {
        if (peek().kind != Token::Kind::ident || reserved(peek().text)) throw ParseError(std::string("expected ") + what + found(), peek().pos);
        return next().text;
    }

    std::vector<Pattern> patterns() {
        std::vector<Pattern> out{pattern()};
        while (accept(",")) out.push_back(pattern());
        return out;
    }

    Pattern pattern() {
        Pattern p;
        p.role = variable("role name");
        expect("[");
        std::vector<std::string> args{variable("variable")};
        while (accept(",")) args.push_back(variable("variable"));
        expect("]");
        p.var = args.back();
        args.pop_back();
        p.args = std::move(args);
        return p;
    }

    std::vector<Constraint> constraints() {
        std::vector<Constraint> out{constraint()};
        while (accept_word("and")) out.push_back(constraint());
        return out;
    }

    Constraint constraint() {
        Constraint c;
        c.lhs = operand();
        const Token& t = peek();
        static const std::pair<const char*, Op> ops[] = {
            {"=", Op::eq}, {"!=", Op::ne}, {"<", Op::lt}, {"<=", Op::le}, {">", Op::gt}, {">=", Op::ge},
            {"before", Op::before}, {"after", Op::after}, {"concurrent", Op::concurrent}};
        bool found_op = false;
        for (const auto& [text, op] : ops) {
            if (t.text == text && t.kind != Token::Kind::text && t.kind != Token::Kind::end) {
                c.op = op;
                found_op = true;
                break;
            }
        }
        if (!found_op) throw ParseError("expected a comparison" + found(), t.pos);
        next();
        c.rhs = operand();
        if (is_ordering(c.op) && (c.lhs.kind != Operand::Kind::variable || c.rhs.kind != Operand::Kind::variable)) {
            throw ParseError(std::string("'") + to_string(c.op) + "' relates participation variables", t.pos);
        }
        return c;
    }

    Operand operand() {
        const Token& t = peek();
        Operand o;
        if (t.kind == Token::Kind::integer) {
            o.kind = Operand::Kind::integer;
            try {
                o.number = std::stoll(t.text);
            } catch (const std::out_of_range&) {
                throw ParseError("integer out of range", t.pos);
            }
            next();
        } else if (t.kind == Token::Kind::text) {
            o.kind = Operand::Kind::text;
            o.literal = t.text;
            next();
        } else {
            o.var = variable("operand");
            if (o.var == "_") throw ParseError("'_' cannot appear in a constraint", t.pos);
            if (accept(".")) {
                o.kind = Operand::Kind::attribute;
                o.attr = variable("attribute name");
            }
        }
        return o;
    }

    std::vector<Token> tokens_;
    std::size_t at_ = 0;
};

/// Scoping rules: antecedent variables are introduced freely; consequent
/// variables must come from the antecedent or the `exists` list; every
/// participation variable is introduced once.
inline void check_scopes(const NormFormula& n, std::string_view text) {
    auto fail = [&](const std::string& msg, const std::string& token) {
        auto at = text.find(token);
        throw ParseError(msg, at == std::string_view::npos ? 0 : at);
    };
    std::set<std::string> values;
    std::set<std::string> parts;
    auto introduce = [&](const Pattern& p, std::set<std::string>& scope_parts, std::set<std::string>& scope_values) {
        if (p.var == "_") fail("participation variable of " + p.role + " cannot be '_'", p.role);
        if (scope_parts.count(p.var) || scope_values.count(p.var)) fail("variable '" + p.var + "' bound twice", p.var);
        scope_parts.insert(p.var);
        for (const auto& a : p.args) {
            if (a == "_") continue;
            if (scope_parts.count(a)) fail("participation variable '" + a + "' used as an attribute", a);
            scope_values.insert(a);
        }
    };
    auto check_constraints = [&](const std::vector<Constraint>& cs, const std::set<std::string>& ps, const std::set<std::string>& vs) {
        for (const auto& c : cs) {
            for (const Operand* o : {&c.lhs, &c.rhs}) {
                if (o->kind == Operand::Kind::attribute && !ps.count(o->var)) fail("unbound participation variable '" + o->var + "'", o->var);
                if (o->kind == Operand::Kind::variable && !ps.count(o->var) && !vs.count(o->var)) fail("unbound variable '" + o->var + "'", o->var);
                if (is_ordering(c.op) && o->kind == Operand::Kind::variable && !ps.count(o->var)) {
                    fail("'" + o->var + "' is not a participation variable", o->var);
                }
            }
        }
    };

    for (const auto& p : n.antecedent) introduce(p, parts, values);
    check_constraints(n.antecedent_where, parts, values);
    if (n.consequent_false) return;

    std::set<std::string> declared(n.exists.begin(), n.exists.end());
    if (declared.size() != n.exists.size()) fail("duplicate variable in exists", "exists");
    for (const auto& v : n.exists) {
        if (parts.count(v) || values.count(v)) fail("exists variable '" + v + "' shadows an antecedent variable", v);
    }
    std::set<std::string> used;
    for (const auto& p : n.consequent) {
        if (!declared.count(p.var)) fail("unbound variable '" + p.var + "' in consequent (add it to exists)", p.var);
        for (const auto& a : p.args) {
            if (a != "_" && !values.count(a) && !declared.count(a)) fail("unbound variable '" + a + "' in consequent (add it to exists)", a);
            used.insert(a);
        }
        used.insert(p.var);
    }
    auto ps = parts;
    auto vs = values;
    for (const auto& p : n.consequent) {
        if (ps.count(p.var)) fail("variable '" + p.var + "' bound twice", p.var);
        ps.insert(p.var);
        for (const auto& a : p.args) {
            if (a == "_") continue;
            if (ps.count(a)) fail("participation variable '" + a + "' used as an attribute", a);
            vs.insert(a);
        }
    }
    for (const auto& v : n.exists) {
        if (!used.count(v)) fail("exists variable '" + v + "' does not occur in a consequent pattern", v);
    }
    check_constraints(n.consequent_where, ps, vs);
}

}  // namespace detail

inline NormFormula parse_norm(std::string_view text) {
    detail::Parser p(text);
    NormFormula n = p.parse();
    detail::check_scopes(n, text);
    return n;
}

inline std::string normalize(std::string_view text) { return print(parse_norm(text)); }

/// One norm per stanza; stanzas are separated by blank lines and `#` starts a
/// comment. Unnamed norms are called norm1, norm2, ... by position.
inline std::vector<NormFormula> parse_norm_file(std::string_view text) {
    std::vector<NormFormula> out;
    std::string stanza;
    std::size_t stanza_line = 0;
    std::size_t line_no = 0;
    auto flush = [&] {
        bool blank = std::all_of(stanza.begin(), stanza.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
        if (!blank) {
            try {
                NormFormula n = parse_norm(stanza);
                if (n.name.empty()) n.name = "norm" + std::to_string(out.size() + 1);
                out.push_back(std::move(n));
            } catch (const ParseError& e) {
                throw ParseError("norm starting on line " + std::to_string(stanza_line) + ": " + e.what(), e.position());
            }
        }
        stanza.clear();
    };
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string line(text.substr(start, end - start));
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        bool blank = std::all_of(line.begin(), line.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
        if (blank) {
            flush();
        } else {
            if (stanza.empty()) stanza_line = line_no;
            stanza += line + "\n";
        }
        start = end + 1;
    }
    flush();
    return out;
}

}  // namespace pgc::norms
