#pragma once

// Terms, propositions and sequents of the direct-inference kernel, with a
// line-oriented text format:
//
//   1) p, action: CanResult[Do[p, action], Rich[p]] |-ThePrince Do[p, action]
//   8) |-Catch-22 P(Sane[Yossarian]) ~= 1
//
// ASCII operators: `~` not, `&` and, `<=`, `~=` (approximately equal),
// `<~` (approximately at most). The Unicode forms ¬ ∧ ≤ ≅ ≲ ℙ are accepted too.

#include <pgc/core/value.hpp>

#include <boost/rational.hpp>

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace pgc::logic {

using Rational = boost::rational<std::int64_t>;

inline std::string to_string(const Rational& r) {
    if (r.denominator() == 1) return std::to_string(r.numerator());
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

struct Term {
    enum class Kind { constant, variable, application };
    Kind kind = Kind::constant;
    std::string name;
    std::vector<Term> args;

    static Term constant(std::string n) { return Term{Kind::constant, std::move(n), {}}; }
    static Term variable(std::string n) { return Term{Kind::variable, std::move(n), {}}; }
    static Term apply(std::string head, std::vector<Term> a) { return Term{Kind::application, std::move(head), std::move(a)}; }

    friend bool operator==(const Term&, const Term&) = default;
};

enum class Rel { le, approx, approx_le };

struct Prop;
struct PExpr;

struct PExpr {
    enum class Kind { prob, complement, constant };
    Kind kind = Kind::constant;
    std::shared_ptr<const Prop> prop;    // prob
    std::shared_ptr<const PExpr> inner;  // complement: 1 - inner
    Rational value;
};

struct Prop {
    enum class Kind { atom, negation, conjunction, comparison };
    Kind kind = Kind::atom;
    Term atom;
    std::vector<Prop> parts;  // negation: 1, conjunction: 2
    std::shared_ptr<const PExpr> lhs;
    std::shared_ptr<const PExpr> rhs;
    Rel rel = Rel::le;

    static Prop make_atom(Term t) {
        Prop p;
        p.kind = Kind::atom;
        p.atom = std::move(t);
        return p;
    }
    static Prop negate(Prop a) {
        Prop p;
        p.kind = Kind::negation;
        p.parts.push_back(std::move(a));
        return p;
    }
    static Prop conjoin(Prop a, Prop b) {
        Prop p;
        p.kind = Kind::conjunction;
        p.parts.push_back(std::move(a));
        p.parts.push_back(std::move(b));
        return p;
    }
    static Prop compare(PExpr l, Rel r, PExpr rr) {
        Prop p;
        p.kind = Kind::comparison;
        p.lhs = std::make_shared<const PExpr>(std::move(l));
        p.rhs = std::make_shared<const PExpr>(std::move(rr));
        p.rel = r;
        return p;
    }
};

inline PExpr prob(Prop p) { return PExpr{PExpr::Kind::prob, std::make_shared<const Prop>(std::move(p)), nullptr, Rational(0)}; }
inline PExpr complement(PExpr e) { return PExpr{PExpr::Kind::complement, nullptr, std::make_shared<const PExpr>(std::move(e)), Rational(0)}; }
inline PExpr constant(Rational r) { return PExpr{PExpr::Kind::constant, nullptr, nullptr, r}; }

struct Sequent {
    std::string label;
    std::string theory;
    std::vector<std::string> vars;
    std::vector<Prop> antecedents;
    Prop consequent;
};

struct Microtheory {
    std::string name;
    std::vector<Sequent> axioms;
};

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

enum class Style { ascii, unicode };

inline std::string to_string(const Term& t) {
    if (t.kind != Term::Kind::application) return t.name;
    std::string out = t.name + "[";
    for (std::size_t i = 0; i < t.args.size(); ++i) {
        if (i > 0) out += ", ";
        out += to_string(t.args[i]);
    }
    return out + "]";
}

inline const char* symbol(Rel r, Style s) {
    switch (r) {
        case Rel::le: return s == Style::ascii ? "<=" : "≤";
        case Rel::approx: return s == Style::ascii ? "~=" : "≅";
        case Rel::approx_le: return s == Style::ascii ? "<~" : "≲";
    }
    return "?";
}

inline std::string to_string(const Prop& p, Style s = Style::ascii);

inline std::string to_string(const PExpr& e, Style s = Style::ascii) {
    switch (e.kind) {
        case PExpr::Kind::prob: return std::string(s == Style::ascii ? "P(" : "ℙ(") + to_string(*e.prop, s) + ")";
        case PExpr::Kind::complement: return std::string("1 ") + (s == Style::ascii ? "-" : "−") + " " + to_string(*e.inner, s);
        case PExpr::Kind::constant: return to_string(e.value);
    }
    return "?";
}

inline std::string to_string(const Prop& p, Style s) {
    switch (p.kind) {
        case Prop::Kind::atom: return to_string(p.atom);
        case Prop::Kind::negation: {
            const Prop& a = p.parts[0];
            std::string inner = to_string(a, s);
            if (a.kind == Prop::Kind::conjunction || a.kind == Prop::Kind::comparison) inner = "(" + inner + ")";
            return (s == Style::ascii ? "~" : "¬") + inner;
        }
        case Prop::Kind::conjunction: {
            auto side = [&](const Prop& x) {
                std::string t = to_string(x, s);
                return x.kind == Prop::Kind::comparison ? "(" + t + ")" : t;
            };
            return side(p.parts[0]) + (s == Style::ascii ? " & " : " ∧ ") + side(p.parts[1]);
        }
        case Prop::Kind::comparison: return to_string(*p.lhs, s) + " " + symbol(p.rel, s) + " " + to_string(*p.rhs, s);
    }
    return "?";
}

inline std::string to_string(const Sequent& q, Style s = Style::ascii) {
    std::string out;
    if (!q.label.empty()) out += q.label + ") ";
    if (!q.vars.empty()) {
        for (std::size_t i = 0; i < q.vars.size(); ++i) out += (i > 0 ? ", " : "") + q.vars[i];
        out += ": ";
    }
    for (std::size_t i = 0; i < q.antecedents.size(); ++i) out += (i > 0 ? ", " : "") + to_string(q.antecedents[i], s);
    if (!q.antecedents.empty()) out += " ";
    out += (s == Style::ascii ? "|-" : "⊢") + q.theory + " " + to_string(q.consequent, s);
    return out;
}

inline bool operator==(const Prop& a, const Prop& b) { return to_string(a) == to_string(b); }
inline bool operator==(const PExpr& a, const PExpr& b) { return to_string(a) == to_string(b); }

// ---------------------------------------------------------------------------
// Substitution and normalization
// ---------------------------------------------------------------------------

using Substitution = std::map<std::string, Term>;

inline Term substitute(const Term& t, const Substitution& s) {
    if (t.kind == Term::Kind::variable) {
        auto it = s.find(t.name);
        return it == s.end() ? t : it->second;
    }
    Term out = t;
    for (auto& a : out.args) a = substitute(a, s);
    return out;
}

inline Prop substitute(const Prop& p, const Substitution& s);

inline PExpr substitute(const PExpr& e, const Substitution& s) {
    switch (e.kind) {
        case PExpr::Kind::prob: return prob(substitute(*e.prop, s));
        case PExpr::Kind::complement: return complement(substitute(*e.inner, s));
        case PExpr::Kind::constant: return e;
    }
    return e;
}

inline Prop substitute(const Prop& p, const Substitution& s) {
    switch (p.kind) {
        case Prop::Kind::atom: return Prop::make_atom(substitute(p.atom, s));
        case Prop::Kind::negation: return Prop::negate(substitute(p.parts[0], s));
        case Prop::Kind::conjunction: return Prop::conjoin(substitute(p.parts[0], s), substitute(p.parts[1], s));
        case Prop::Kind::comparison: return Prop::compare(substitute(*p.lhs, s), p.rel, substitute(*p.rhs, s));
    }
    return p;
}

inline bool ground(const Term& t) {
    if (t.kind == Term::Kind::variable) return false;
    for (const auto& a : t.args) {
        if (!ground(a)) return false;
    }
    return true;
}

inline bool ground(const Prop& p);

inline bool ground(const PExpr& e) {
    switch (e.kind) {
        case PExpr::Kind::prob: return ground(*e.prop);
        case PExpr::Kind::complement: return ground(*e.inner);
        case PExpr::Kind::constant: return true;
    }
    return true;
}

inline bool ground(const Prop& p) {
    switch (p.kind) {
        case Prop::Kind::atom: return ground(p.atom);
        case Prop::Kind::negation:
        case Prop::Kind::conjunction:
            for (const auto& x : p.parts) {
                if (!ground(x)) return false;
            }
            return true;
        case Prop::Kind::comparison: return ground(*p.lhs) && ground(*p.rhs);
    }
    return true;
}

/// ¬¬A is A.
inline Prop negation_of(const Prop& p) {
    if (p.kind == Prop::Kind::negation) return p.parts[0];
    return Prop::negate(p);
}

inline void collect_constants(const Term& t, bool as_arg, std::set<std::string>& out) {
    if (t.kind == Term::Kind::constant && as_arg) out.insert(t.name);
    for (const auto& a : t.args) collect_constants(a, true, out);
}

inline void collect_constants(const Prop& p, std::set<std::string>& out);

inline void collect_constants(const PExpr& e, std::set<std::string>& out) {
    if (e.kind == PExpr::Kind::prob) collect_constants(*e.prop, out);
    if (e.kind == PExpr::Kind::complement) collect_constants(*e.inner, out);
}

inline void collect_constants(const Prop& p, std::set<std::string>& out) {
    switch (p.kind) {
        case Prop::Kind::atom: collect_constants(p.atom, false, out); break;
        case Prop::Kind::negation:
        case Prop::Kind::conjunction:
            for (const auto& x : p.parts) collect_constants(x, out);
            break;
        case Prop::Kind::comparison:
            collect_constants(*p.lhs, out);
            collect_constants(*p.rhs, out);
            break;
    }
}

/// Constants that occur as arguments anywhere in the theory: the individuals
/// quantified axioms are instantiated with.
inline std::vector<std::string> instantiation_domain(const Microtheory& th) {
    std::set<std::string> out;
    for (const auto& ax : th.axioms) {
        for (const auto& a : ax.antecedents) collect_constants(a, out);
        collect_constants(ax.consequent, out);
    }
    return {out.begin(), out.end()};
}

/// Every ground instance of an axiom over the domain, in lexicographic order
/// of the substitution.
inline std::vector<std::pair<Substitution, Sequent>> instances(const Sequent& ax, const std::vector<std::string>& domain) {
    std::vector<std::pair<Substitution, Sequent>> out;
    if (!ax.vars.empty() && domain.empty()) return out;
    std::vector<std::size_t> pick(ax.vars.size(), 0);
    for (;;) {
        Substitution s;
        for (std::size_t i = 0; i < ax.vars.size(); ++i) s[ax.vars[i]] = Term::constant(domain[pick[i]]);
        Sequent g = ax;
        g.vars.clear();
        for (auto& a : g.antecedents) a = substitute(a, s);
        g.consequent = substitute(ax.consequent, s);
        out.emplace_back(std::move(s), std::move(g));
        std::size_t k = ax.vars.size();
        while (k > 0) {
            --k;
            if (++pick[k] < domain.size()) break;
            pick[k] = 0;
            if (k == 0) return out;
        }
        if (ax.vars.empty()) return out;
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace detail {

class LineParser {
public:
    LineParser(std::string_view text, std::set<std::string> vars) : s_(text), vars_(std::move(vars)) {}

    void skip() {
        while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t' || s_[i_] == '\r')) ++i_;
    }
    bool at_end() {
        skip();
        return i_ >= s_.size();
    }
    bool eat(std::string_view tok) {
        skip();
        if (s_.substr(i_, tok.size()) == tok) {
            i_ += tok.size();
            return true;
        }
        return false;
    }
    void expect(std::string_view tok) {
        if (!eat(tok)) throw ParseError("expected '" + std::string(tok) + "'", i_);
    }
    std::size_t pos() const { return i_; }

    std::string ident() {
        skip();
        std::size_t j = i_;
        auto ok = [&](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; };
        if (j >= s_.size() || !(std::isalpha(static_cast<unsigned char>(s_[j])) || s_[j] == '_')) throw ParseError("expected a name", i_);
        while (j < s_.size() && ok(s_[j])) {
            // stop before a minus that begins "- P(" style arithmetic
            if (s_[j] == '-' && (j + 1 >= s_.size() || !std::isalnum(static_cast<unsigned char>(s_[j + 1])))) break;
            ++j;
        }
        std::string out(s_.substr(i_, j - i_));
        i_ = j;
        return out;
    }

    Term term() {
        std::string name = ident();
        if (eat("[")) {
            std::vector<Term> args{term()};
            while (eat(",")) args.push_back(term());
            expect("]");
            return Term::apply(std::move(name), std::move(args));
        }
        return vars_.count(name) ? Term::variable(std::move(name)) : Term::constant(std::move(name));
    }

    bool starts_pexpr() {
        skip();
        if (i_ >= s_.size()) return false;
        if (std::isdigit(static_cast<unsigned char>(s_[i_]))) return true;
        if (s_.substr(i_, 3) == "ℙ") return true;
        return s_.substr(i_, 2) == "P(";
    }

    PExpr pexpr() {
        skip();
        if (eat("P(") || eat("ℙ(")) {
            Prop p = conj();
            expect(")");
            return prob(std::move(p));
        }
        if (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) {
            Rational r = number();
            if (eat("-") || eat("−")) {
                if (r != Rational(1)) throw ParseError("only 1 - ... is supported", i_);
                return complement(pexpr());
            }
            return constant(r);
        }
        throw ParseError("expected a probability expression", i_);
    }

    Rational number() {
        skip();
        std::size_t j = i_;
        while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
        std::int64_t num = std::stoll(std::string(s_.substr(i_, j - i_)));
        std::int64_t den = 1;
        i_ = j;
        if (i_ < s_.size() && s_[i_] == '/') {
            ++i_;
            j = i_;
            while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
            if (j == i_) throw ParseError("expected a denominator", i_);
            den = std::stoll(std::string(s_.substr(i_, j - i_)));
            if (den == 0) throw ParseError("zero denominator", i_);
            i_ = j;
        }
        return Rational(num, den);
    }

    Rel relation() {
        if (eat("<=") || eat("≤")) return Rel::le;
        if (eat("~=") || eat("≅")) return Rel::approx;
        if (eat("<~") || eat("≲")) return Rel::approx_le;
        throw ParseError("expected <=, ~= or <~", i_);
    }

    Prop proposition() {
        if (starts_pexpr()) {
            PExpr l = pexpr();
            Rel r = relation();
            PExpr rr = pexpr();
            return Prop::compare(std::move(l), r, std::move(rr));
        }
        return conj();
    }

    Prop conj() {
        Prop p = unary();
        while (eat("&") || eat("∧")) p = Prop::conjoin(std::move(p), unary());
        return p;
    }

    Prop unary() {
        skip();
        if (s_.substr(i_, 2) != "~=" && (eat("~") || eat("¬"))) return Prop::negate(unary());
        if (eat("(")) {
            Prop p = conj();
            expect(")");
            return p;
        }
        return Prop::make_atom(term());
    }

private:
    std::string_view s_;
    std::set<std::string> vars_;
    std::size_t i_ = 0;
};

inline std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace detail

/// Parses `[label)] [vars:] antecedents |-Theory consequent`.
inline Sequent parse_sequent(std::string_view line) {
    Sequent q;
    std::string text = detail::trim(line);
    std::size_t offset = 0;

    // label: leading token ending in ')' before anything else, e.g. "2')" or "5'')"
    if (auto close = text.find(')'); close != std::string::npos) {
        auto head = text.substr(0, close);
        bool label = !head.empty() && std::all_of(head.begin(), head.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '\'' || c == '_' || c == '.';
        });
        if (label) {
            q.label = head;
            offset = close + 1;
        }
    }

    std::size_t turnstile = text.find("|-", offset);
    std::size_t turn_len = 2;
    if (turnstile == std::string::npos) {
        turnstile = text.find("⊢", offset);
        turn_len = std::string_view("⊢").size();
    }
    if (turnstile == std::string::npos) throw ParseError("missing turnstile", text.size());

    std::string left = text.substr(offset, turnstile - offset);
    std::size_t left_at = offset;
    if (auto colon = left.find(':'); colon != std::string::npos) {
        std::string vars = left.substr(0, colon);
        std::size_t start = 0;
        while (start <= vars.size()) {
            auto comma = vars.find(',', start);
            if (comma == std::string::npos) comma = vars.size();
            std::string v = detail::trim(std::string_view(vars).substr(start, comma - start));
            if (v.empty()) throw ParseError("empty variable name", offset + start);
            q.vars.push_back(v);
            start = comma + 1;
        }
        left_at += colon + 1;
        left = left.substr(colon + 1);
    }
    std::set<std::string> vars(q.vars.begin(), q.vars.end());
    if (vars.size() != q.vars.size()) throw ParseError("variable quantified twice", offset);

    auto sub_error = [&](const ParseError& e, std::size_t base) { return ParseError(std::string(e.what()).substr(0, std::string(e.what()).rfind(" at position")), base + e.position()); };

    if (!detail::trim(left).empty()) {
        detail::LineParser p(left, vars);
        try {
            q.antecedents.push_back(p.proposition());
            while (p.eat(",")) q.antecedents.push_back(p.proposition());
            if (!p.at_end()) throw ParseError("unexpected text in antecedents", p.pos());
        } catch (const ParseError& e) {
            throw sub_error(e, left_at);
        }
    }

    std::size_t rest = turnstile + turn_len;
    std::size_t name_end = rest;
    while (name_end < text.size() && !std::isspace(static_cast<unsigned char>(text[name_end]))) ++name_end;
    q.theory = text.substr(rest, name_end - rest);
    if (q.theory.empty()) throw ParseError("turnstile without a theory name", rest);

    detail::LineParser p(std::string_view(text).substr(name_end), vars);
    try {
        q.consequent = p.proposition();
        if (!p.at_end()) throw ParseError("unexpected text after consequent", p.pos());
    } catch (const ParseError& e) {
        throw sub_error(e, name_end);
    }
    return q;
}

/// One sequent per line; blank lines and `#` comments are ignored. Every
/// sequent must name the same theory.
inline Microtheory parse_microtheory(std::string_view text) {
    Microtheory th;
    std::size_t start = 0;
    std::size_t line_no = 0;
    std::size_t unlabeled = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string line(text.substr(start, end - start));
        ++line_no;
        start = end + 1;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (detail::trim(line).empty()) continue;
        Sequent q;
        try {
            q = parse_sequent(line);
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what(), e.position());
        }
        if (q.label.empty()) q.label = "a" + std::to_string(++unlabeled);
        if (th.name.empty()) th.name = q.theory;
        if (q.theory != th.name) throw ParseError("line " + std::to_string(line_no) + ": theory " + q.theory + " differs from " + th.name, 0);
        for (const auto& ax : th.axioms) {
            if (ax.label == q.label) throw ParseError("line " + std::to_string(line_no) + ": duplicate label " + q.label, 0);
        }
        th.axioms.push_back(std::move(q));
    }
    return th;
}

}  // namespace pgc::logic
