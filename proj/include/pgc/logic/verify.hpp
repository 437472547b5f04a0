#pragma once

// Step-by-step checker for derivations. It re-derives every conclusion from
// its premises using only the rule definitions and shares nothing with the
// search beyond the syntax types.

#include <pgc/logic/derive.hpp>

#include <set>
#include <string>

namespace pgc::logic {

namespace detail {

inline std::set<std::string> as_set(const std::vector<Prop>& ps) {
    std::set<std::string> out;
    for (const auto& p : ps) out.insert(to_string(p));
    return out;
}

// ¬¬A is A
inline std::string negated(const Prop& p) {
    if (p.kind == Prop::Kind::negation) return to_string(p.parts[0]);
    Prop n;
    n.kind = Prop::Kind::negation;
    n.parts.push_back(p);
    return to_string(n);
}

inline bool fail(std::string* why, const std::string& msg) {
    if (why != nullptr) *why = msg;
    return false;
}

}  // namespace detail

/// True iff every step of `d` is a correct application of its rule in `mode`.
/// On failure `why` describes the first bad step.
inline bool verify(const Derivation& d, const Microtheory& theory, Mode mode, std::string* why = nullptr) {
    const auto& c = d.conclusion;
    if (c.theory != theory.name) return detail::fail(why, "conclusion is about theory " + c.theory);
    for (const auto& p : d.premises) {
        if (!verify(p, theory, mode, why)) return false;
    }
    const auto concl_ante = detail::as_set(c.antecedents);
    const std::string concl = to_string(c.consequent);

    if (d.rule == "axiom") {
        if (!d.premises.empty()) return detail::fail(why, "axiom step with premises");
        const Sequent* ax = nullptr;
        for (const auto& a : theory.axioms) {
            if (a.label == d.axiom) ax = &a;
        }
        if (ax == nullptr) return detail::fail(why, "no axiom labelled " + d.axiom);
        if (d.substitution.size() != ax->vars.size()) return detail::fail(why, "substitution does not cover axiom " + d.axiom);
        for (const auto& v : ax->vars) {
            auto it = d.substitution.find(v);
            if (it == d.substitution.end() || !ground(it->second)) return detail::fail(why, "variable " + v + " of axiom " + d.axiom + " not grounded");
        }
        std::vector<Prop> ante;
        for (const auto& a : ax->antecedents) ante.push_back(substitute(a, d.substitution));
        if (detail::as_set(ante) != concl_ante || to_string(substitute(ax->consequent, d.substitution)) != concl) {
            return detail::fail(why, "conclusion is not an instance of axiom " + d.axiom);
        }
        return true;
    }

    if (d.rule == "chain") {
        if (d.premises.size() != 2) return detail::fail(why, "chain needs two premises");
        const auto& first = d.premises[0].conclusion;
        const auto& second = d.premises[1].conclusion;
        const std::string phi = to_string(first.consequent);
        auto rest = detail::as_set(second.antecedents);
        if (!rest.count(phi)) return detail::fail(why, "chain: " + phi + " is not an antecedent of the second premise");
        rest.erase(phi);
        for (const auto& g : detail::as_set(first.antecedents)) rest.insert(g);
        if (rest != concl_ante || to_string(second.consequent) != concl) return detail::fail(why, "chain: conclusion does not follow");
        return true;
    }

    if (d.rule == "and-intro") {
        if (d.premises.size() != 2) return detail::fail(why, "and-intro needs two premises");
        const auto& a = d.premises[0].conclusion;
        const auto& b = d.premises[1].conclusion;
        auto ante = detail::as_set(a.antecedents);
        for (const auto& g : detail::as_set(b.antecedents)) ante.insert(g);
        if (c.consequent.kind != Prop::Kind::conjunction || to_string(c.consequent.parts[0]) != to_string(a.consequent) ||
            to_string(c.consequent.parts[1]) != to_string(b.consequent) || ante != concl_ante) {
            return detail::fail(why, "and-intro: conclusion does not follow");
        }
        return true;
    }

    if (d.rule == "and-elim") {
        if (d.premises.size() != 1) return detail::fail(why, "and-elim needs one premise");
        const auto& p = d.premises[0].conclusion;
        if (p.consequent.kind != Prop::Kind::conjunction) return detail::fail(why, "and-elim from a non-conjunction");
        const bool part = to_string(p.consequent.parts[0]) == concl || to_string(p.consequent.parts[1]) == concl;
        if (!part || detail::as_set(p.antecedents) != concl_ante) return detail::fail(why, "and-elim: conclusion does not follow");
        return true;
    }

    if (d.rule == "contraposition") {
        if (mode != Mode::classical) return detail::fail(why, "contraposition is not a direct inference");
        if (d.premises.size() != 2) return detail::fail(why, "contraposition needs two premises");
        const auto& imp = d.premises[0].conclusion;  // Γ, φ ⊢ ψ
        const auto& neg = d.premises[1].conclusion;  // Δ ⊢ ¬ψ
        if (detail::negated(imp.consequent) != to_string(neg.consequent)) return detail::fail(why, "contraposition: second premise is not the negated consequent");
        // the conclusion is ¬φ for some antecedent φ
        for (const auto& phi : imp.antecedents) {
            if (detail::negated(phi) != concl) continue;
            auto ante = detail::as_set(imp.antecedents);
            ante.erase(to_string(phi));
            for (const auto& g : detail::as_set(neg.antecedents)) ante.insert(g);
            if (ante == concl_ante) return true;
        }
        return detail::fail(why, "contraposition: conclusion does not follow");
    }

    return detail::fail(why, "unknown rule " + d.rule);
}

}  // namespace pgc::logic
