#pragma once

// Depth-bounded forward saturation over ground instances of a microtheory's
// axioms. Direct mode chains sequents and introduces/eliminates conjunctions;
// classical mode additionally contraposes. No rule concludes an arbitrary
// proposition from a contradiction, so an inconsistent theory stays
// informative.

#include <pgc/logic/syntax.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace pgc::logic {

enum class Mode { direct, classical };

inline const char* to_string(Mode m) { return m == Mode::direct ? "direct" : "classical"; }

inline Mode parse_mode(const std::string& s) {
    if (s == "direct") return Mode::direct;
    if (s == "classical") return Mode::classical;
    throw UsageError("unknown mode '" + s + "' (expected direct or classical)");
}

struct Derivation {
    Sequent conclusion;  // ground, no variables
    std::string rule;    // axiom, chain, and-intro, and-elim, contraposition
    std::string axiom;   // label, for rule == axiom
    Substitution substitution;
    std::vector<Derivation> premises;

    /// Number of inference steps above the axioms on the longest branch.
    std::size_t height() const {
        std::size_t h = 0;
        for (const auto& p : premises) h = std::max(h, p.height() + 1);
        return h;
    }
};

class UnknownTheory : public Error {
public:
    using Error::Error;
};

namespace detail {

struct Fact {
    std::vector<Prop> antecedents;  // sorted by key, unique
    Prop consequent;
    std::string key;
    std::string rule;
    std::string axiom;
    Substitution substitution;
    std::vector<std::size_t> premises;
    std::size_t height = 0;
};

inline std::vector<Prop> canonical(std::vector<Prop> ps) {
    std::sort(ps.begin(), ps.end(), [](const Prop& a, const Prop& b) { return to_string(a) < to_string(b); });
    ps.erase(std::unique(ps.begin(), ps.end(), [](const Prop& a, const Prop& b) { return to_string(a) == to_string(b); }), ps.end());
    return ps;
}

inline std::string fact_key(const std::vector<Prop>& ante, const Prop& c) {
    std::string k;
    for (const auto& a : ante) k += to_string(a) + " , ";
    return k + "|- " + to_string(c);
}

inline void conjunctions(const Prop& p, std::set<std::string>& out) {
    if (p.kind == Prop::Kind::conjunction) out.insert(to_string(p));
    if (p.kind == Prop::Kind::negation || p.kind == Prop::Kind::conjunction) {
        for (const auto& x : p.parts) conjunctions(x, out);
    }
}

}  // namespace detail

/// Facts derivable within a depth, indexed for derivation extraction.
class Saturation {
public:
    Saturation(const Microtheory& theory, Mode mode, std::vector<Prop> extra_relevant = {}) : theory_(theory), mode_(mode) {
        const auto domain = instantiation_domain(theory);
        for (const auto& ax : theory.axioms) {
            for (auto& [subst, inst] : instances(ax, domain)) {
                for (const auto& a : inst.antecedents) detail::conjunctions(a, relevant_);
                add(inst.antecedents, inst.consequent, "axiom", ax.label, subst, {}, 0);
            }
        }
        for (const auto& p : extra_relevant) detail::conjunctions(p, relevant_);
    }

    /// Runs rounds until `depth` or a fixpoint. Returns the rounds performed.
    std::size_t run(std::size_t depth, const std::function<bool()>& stop = {}) {
        while (round_ < depth) {
            if (stop && stop()) break;
            if (!step()) break;
        }
        return round_;
    }

    std::size_t rounds() const noexcept { return round_; }

    /// Lowest-height fact whose conclusion is `goal` and whose antecedents are
    /// among the goal's.
    std::optional<std::size_t> find(const Sequent& goal) const {
        std::set<std::string> allowed;
        for (const auto& a : goal.antecedents) allowed.insert(to_string(a));
        auto it = by_consequent_.find(to_string(goal.consequent));
        if (it == by_consequent_.end()) return std::nullopt;
        std::optional<std::size_t> best;
        for (std::size_t i : it->second) {
            const auto& f = facts_[i];
            bool inside = std::all_of(f.antecedents.begin(), f.antecedents.end(), [&](const Prop& a) { return allowed.count(to_string(a)) > 0; });
            if (inside && (!best || f.height < facts_[*best].height)) best = i;
        }
        return best;
    }

    std::optional<std::size_t> find(const Prop& goal) const {
        Sequent g;
        g.consequent = goal;
        return find(g);
    }

    Derivation derivation(std::size_t i) const {
        const auto& f = facts_[i];
        Derivation d;
        d.conclusion.theory = theory_.name;
        d.conclusion.antecedents = f.antecedents;
        d.conclusion.consequent = f.consequent;
        d.rule = f.rule;
        d.axiom = f.axiom;
        d.substitution = f.substitution;
        for (std::size_t p : f.premises) d.premises.push_back(derivation(p));
        return d;
    }

    /// Unconditional facts (no antecedents), in insertion order.
    std::vector<std::size_t> theorems() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < facts_.size(); ++i) {
            if (facts_[i].antecedents.empty()) out.push_back(i);
        }
        return out;
    }

    const std::vector<detail::Fact>& facts() const noexcept { return facts_; }

private:
    bool add(std::vector<Prop> ante, Prop c, std::string rule, std::string axiom, Substitution subst, std::vector<std::size_t> premises,
             std::size_t height) {
        ante = detail::canonical(std::move(ante));
        std::string key = detail::fact_key(ante, c);
        if (keys_.count(key)) return false;
        keys_.insert(key);
        const std::size_t id = facts_.size();
        by_consequent_[to_string(c)].push_back(id);
        for (const auto& a : ante) by_antecedent_[to_string(a)].push_back(id);
        facts_.push_back(detail::Fact{std::move(ante), std::move(c), std::move(key), std::move(rule), std::move(axiom), std::move(subst),
                                      std::move(premises), height});
        return true;
    }

    bool step() {
        const std::size_t previous = round_;
        const std::size_t h = round_ + 1;
        const std::size_t limit = facts_.size();
        bool grew = false;
        auto fresh = [&](std::size_t i) { return facts_[i].height == previous; };

        for (std::size_t i = 0; i < limit; ++i) {
            // copies: add() may reallocate facts_
            const detail::Fact fi = facts_[i];

            // chain: Γ ⊢ φ  and  φ, Δ ⊢ ψ  give  Γ, Δ ⊢ ψ
            const std::string phi = to_string(fi.consequent);
            if (auto users = by_antecedent_.find(phi); users != by_antecedent_.end()) {
                const auto targets = users->second;
                for (std::size_t j : targets) {
                    if (j >= limit || (!fresh(i) && !fresh(j))) continue;
                    std::vector<Prop> ante = fi.antecedents;
                    for (const auto& a : facts_[j].antecedents) {
                        if (to_string(a) != phi) ante.push_back(a);
                    }
                    Prop psi = facts_[j].consequent;
                    grew |= add(std::move(ante), std::move(psi), "chain", "", {}, {i, j}, h);
                }
            }

            // conjunction elimination
            if (fresh(i) && fi.consequent.kind == Prop::Kind::conjunction) {
                for (const auto& part : fi.consequent.parts) grew |= add(fi.antecedents, part, "and-elim", "", {}, {i}, h);
            }

            for (std::size_t j = 0; j < limit; ++j) {
                if (!fresh(i) && !fresh(j)) continue;
                const Prop cj = facts_[j].consequent;
                const std::vector<Prop> dj = facts_[j].antecedents;
                // conjunction introduction, only for conjunctions the theory mentions
                Prop both = Prop::conjoin(fi.consequent, cj);
                if (relevant_.count(to_string(both))) {
                    std::vector<Prop> ante = fi.antecedents;
                    ante.insert(ante.end(), dj.begin(), dj.end());
                    grew |= add(std::move(ante), std::move(both), "and-intro", "", {}, {i, j}, h);
                }
                // contraposition: Γ, φ ⊢ ψ  and  Δ ⊢ ¬ψ  give  Γ, Δ ⊢ ¬φ
                if (mode_ == Mode::classical && to_string(cj) == to_string(negation_of(fi.consequent))) {
                    const auto& gi = fi.antecedents;
                    for (std::size_t k = 0; k < gi.size(); ++k) {
                        if (gi[k].kind == Prop::Kind::comparison) continue;
                        std::vector<Prop> ante;
                        for (std::size_t m = 0; m < gi.size(); ++m) {
                            if (m != k) ante.push_back(gi[m]);
                        }
                        ante.insert(ante.end(), dj.begin(), dj.end());
                        grew |= add(std::move(ante), negation_of(gi[k]), "contraposition", "", {}, {i, j}, h);
                    }
                }
            }
        }
        round_ = h;
        return grew;
    }

    const Microtheory& theory_;
    Mode mode_;
    std::vector<detail::Fact> facts_;
    std::set<std::string> keys_;
    std::map<std::string, std::vector<std::size_t>> by_consequent_;
    std::map<std::string, std::vector<std::size_t>> by_antecedent_;
    std::set<std::string> relevant_;
    std::size_t round_ = 0;
};

/// Searches for `goal` using at most `depth` inference steps on any branch.
inline std::optional<Derivation> derive(const Microtheory& theory, const Sequent& goal, std::size_t depth, Mode mode) {
    if (!goal.theory.empty() && goal.theory != theory.name) throw UnknownTheory("unknown theory " + goal.theory);
    std::vector<Prop> mentioned = goal.antecedents;
    mentioned.push_back(goal.consequent);
    Saturation sat(theory, mode, mentioned);
    if (auto hit = sat.find(goal)) return sat.derivation(*hit);
    while (sat.rounds() < depth) {
        const std::size_t before = sat.facts().size();
        sat.run(sat.rounds() + 1);
        if (auto hit = sat.find(goal)) return sat.derivation(*hit);
        if (sat.facts().size() == before) break;
    }
    return std::nullopt;
}

inline std::optional<Derivation> derive(const Microtheory& theory, const Prop& goal, std::size_t depth, Mode mode) {
    Sequent g;
    g.theory = theory.name;
    g.consequent = goal;
    return derive(theory, g, depth, mode);
}

/// A contradiction P / ¬P between two unconditional theorems.
struct PropositionalConflict {
    Prop atom;
    Derivation positive;
    Derivation negative;
};

inline std::vector<PropositionalConflict> find_propositional_conflicts(const Microtheory& theory, std::size_t depth, Mode mode = Mode::direct) {
    Saturation sat(theory, mode);
    sat.run(depth);
    std::map<std::string, PropositionalConflict> found;
    for (std::size_t i : sat.theorems()) {
        const auto& f = sat.facts()[i];
        if (f.consequent.kind != Prop::Kind::atom) continue;
        const std::string key = to_string(f.consequent);
        if (found.count(key)) continue;
        auto neg = sat.find(Prop::negate(f.consequent));
        if (!neg) continue;
        auto pos = sat.find(f.consequent);
        found.emplace(key, PropositionalConflict{f.consequent, sat.derivation(*pos), sat.derivation(*neg)});
    }
    std::vector<PropositionalConflict> out;
    for (auto& [k, c] : found) out.push_back(std::move(c));
    return out;
}

/// Flattens a derivation into numbered lines, premises before conclusions.
inline std::vector<std::string> render(const Derivation& d, Style style = Style::unicode) {
    std::vector<std::string> lines;
    std::map<std::string, std::string> named;  // conclusion key -> label
    std::size_t counter = 0;
    auto go = [&](const Derivation& x, auto&& self) -> std::string {
        std::vector<std::string> from;
        for (const auto& p : x.premises) from.push_back(self(p, self));
        Sequent shown = x.conclusion;
        const std::string key = to_string(shown);
        if (auto it = named.find(key); it != named.end()) return it->second;
        std::string label;
        std::string why;
        if (x.rule == "axiom") {
            label = x.axiom;
            why = "axiom " + x.axiom;
            if (!x.substitution.empty()) {
                why += " with ";
                bool first = true;
                for (const auto& [v, t] : x.substitution) {
                    why += (first ? "" : ", ") + v + " := " + to_string(t);
                    first = false;
                }
            }
        } else {
            label = "s" + std::to_string(++counter);
            why = x.rule + " from ";
            for (std::size_t i = 0; i < from.size(); ++i) why += (i == 0 ? "" : i + 1 == from.size() ? " and " : ", ") + from[i];
        }
        shown.label = label;
        lines.push_back(to_string(shown, style) + "    [" + why + "]");
        named.emplace(key, label);
        return label;
    };
    go(d, go);
    return lines;
}

}  // namespace pgc::logic
