#pragma once

// Interval propagation over probability comparisons. Every unconditional
// comparison axiom is instantiated over the theory's individuals and applied
// until nothing tightens:
//
//   a <= b, a <~ b   raise the lower bound of b (and cap a when b is constant)
//   a ~= b           both directions, within eps
//   P(~A)            is 1 - P(A)
//   P(A & B)         is at least lo(A) + lo(B) - 1 and at most min(hi(A), hi(B))
//
// Each tightening that reads another bound is recorded as a numbered step
// (k' for axiom k); rewriting a bound on 1 - P(A) or P(~A) into a bound on
// P(A) is a further step k''. Bounds read straight off a constant comparison
// are attributed to the axiom itself.

#include <pgc/logic/syntax.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace pgc::logic {

struct AtomBounds {
    Prop prop;
    Rational lo{0};
    Rational hi{1};
    std::vector<std::string> lo_from;  // step or axiom labels
    std::vector<std::string> hi_from;
};

struct BoundStep {
    std::string label;
    Prop statement;
    std::vector<std::string> from;
    bool reformulation = false;
};

struct BoundConflict {
    Prop atom;
    Rational lower;
    Rational upper;
    std::vector<BoundStep> lower_chain;  // steps in derivation order
    std::vector<BoundStep> upper_chain;
    std::vector<std::string> lower_from;  // last step or axiom behind each bound
    std::vector<std::string> upper_from;
};

struct BoundsResult {
    std::map<std::string, AtomBounds> bounds;  // keyed by the printed proposition
    std::vector<BoundStep> steps;
    std::vector<BoundConflict> conflicts;
};

class NonGroundComparison : public Error {
public:
    using Error::Error;
};

namespace detail {

class Propagator {
public:
    explicit Propagator(Rational eps) : eps_(eps) {}

    void node(const Prop& p) {
        if (p.kind == Prop::Kind::negation) return node(p.parts[0]);
        if (p.kind == Prop::Kind::comparison) throw NonGroundComparison("nested comparison inside P(...)");
        if (!ground(p)) throw NonGroundComparison("non-ground proposition " + to_string(p));
        const std::string key = to_string(p);
        if (!nodes_.count(key)) nodes_.emplace(key, AtomBounds{p, Rational(0), Rational(1), {}, {}});
        if (p.kind == Prop::Kind::conjunction) {
            node(p.parts[0]);
            node(p.parts[1]);
        }
    }

    void node(const PExpr& e) {
        if (e.kind == PExpr::Kind::prob) node(*e.prop);
        if (e.kind == PExpr::Kind::complement) node(*e.inner);
    }

    struct Val {
        Rational v;
        std::vector<std::string> from;
    };

    Val lo(const Prop& p) const {
        if (p.kind == Prop::Kind::negation) {
            Val h = hi(p.parts[0]);
            return {Rational(1) - h.v, h.from};
        }
        const auto& n = nodes_.at(to_string(p));
        Val out{n.lo, n.lo_from};
        if (p.kind == Prop::Kind::conjunction) {
            Val a = lo(p.parts[0]);
            Val b = lo(p.parts[1]);
            Rational d = std::max(Rational(0), a.v + b.v - Rational(1));
            if (d > out.v) {
                out.v = d;
                out.from = merged(a.from, b.from);
            }
        }
        return out;
    }

    Val hi(const Prop& p) const {
        if (p.kind == Prop::Kind::negation) {
            Val l = lo(p.parts[0]);
            return {Rational(1) - l.v, l.from};
        }
        const auto& n = nodes_.at(to_string(p));
        Val out{n.hi, n.hi_from};
        if (p.kind == Prop::Kind::conjunction) {
            for (const auto& part : p.parts) {
                Val x = hi(part);
                if (x.v < out.v) out = x;
            }
        }
        return out;
    }

    Val lo(const PExpr& e) const {
        switch (e.kind) {
            case PExpr::Kind::prob: return lo(*e.prop);
            case PExpr::Kind::complement: {
                Val h = hi(*e.inner);
                return {Rational(1) - h.v, h.from};
            }
            case PExpr::Kind::constant: return {e.value, {}};
        }
        return {Rational(0), {}};
    }

    Val hi(const PExpr& e) const {
        switch (e.kind) {
            case PExpr::Kind::prob: return hi(*e.prop);
            case PExpr::Kind::complement: {
                Val l = lo(*e.inner);
                return {Rational(1) - l.v, l.from};
            }
            case PExpr::Kind::constant: return {e.value, {}};
        }
        return {Rational(1), {}};
    }

    /// Applies one ground comparison. Returns whether any bound tightened.
    bool apply(const Prop& cmp, const std::string& label) {
        const PExpr& l = *cmp.lhs;
        const PExpr& r = *cmp.rhs;
        const Rational slack = cmp.rel == Rel::le ? Rational(0) : eps_;
        bool changed = false;
        changed |= flow(l, r, true, slack, label);
        if (cmp.rel == Rel::approx) {
            changed |= flow(l, r, false, slack, label);
            changed |= flow(r, l, true, slack, label);
            changed |= flow(r, l, false, slack, label);
        } else if (r.kind == PExpr::Kind::constant) {
            changed |= flow(r, l, false, slack, label);
        }
        return changed;
    }

    const std::map<std::string, AtomBounds>& nodes() const { return nodes_; }
    const std::vector<BoundStep>& steps() const { return steps_; }

    /// Steps behind the given labels, in the order they were made.
    std::vector<BoundStep> chain(const std::vector<std::string>& from) const {
        std::set<std::size_t> seen;
        std::vector<std::string> todo = from;
        while (!todo.empty()) {
            std::string x = todo.back();
            todo.pop_back();
            auto it = index_.find(x);
            if (it == index_.end() || !seen.insert(it->second).second) continue;
            for (const auto& y : steps_[it->second].from) todo.push_back(y);
        }
        std::vector<BoundStep> out;
        for (std::size_t i : seen) out.push_back(steps_[i]);
        return out;
    }

private:
    static std::vector<std::string> merged(std::vector<std::string> a, const std::vector<std::string>& b) {
        for (const auto& x : b) {
            if (std::find(a.begin(), a.end(), x) == a.end()) a.push_back(x);
        }
        return a;
    }

    static Rational clamp(Rational v) { return std::min(Rational(1), std::max(Rational(0), v)); }

    // Rewrites a bound on `e` into a bound on a stored proposition: the node,
    // whether the bound is a lower one, and the value.
    struct Target {
        Prop prop;
        bool lower;
        Rational value;
        bool rewritten;
    };

    static Target resolve(const PExpr& e, bool lower, Rational v) {
        bool rewritten = false;
        const PExpr* x = &e;
        while (x->kind == PExpr::Kind::complement) {
            lower = !lower;
            v = Rational(1) - v;
            rewritten = true;
            x = x->inner.get();
        }
        Prop p = *x->prop;
        while (p.kind == Prop::Kind::negation) {
            Prop inner = p.parts[0];
            p = std::move(inner);
            lower = !lower;
            v = Rational(1) - v;
            rewritten = true;
        }
        return {std::move(p), lower, v, rewritten};
    }

    // ℙ(¬A) is shown as 1 − ℙ(A)
    static PExpr shown(const PExpr& e) {
        if (e.kind == PExpr::Kind::prob && e.prop->kind == Prop::Kind::negation) return complement(shown(prob(e.prop->parts[0])));
        if (e.kind == PExpr::Kind::complement) return complement(shown(*e.inner));
        return e;
    }

    static Prop statement(const PExpr& e, bool lower, Rational v) {
        const bool plain = e.kind == PExpr::Kind::prob && e.prop->kind != Prop::Kind::negation;
        if (lower) return Prop::compare(constant(v), plain && v == Rational(1) ? Rel::approx : Rel::approx_le, shown(e));
        return Prop::compare(shown(e), plain && v == Rational(0) ? Rel::approx : Rel::approx_le, constant(v));
    }

    std::string fresh(const std::string& base) {
        std::string label = base;
        for (int n = 2; index_.count(label); ++n) label = base + "(" + std::to_string(n) + ")";
        return label;
    }

    void record(BoundStep s) {
        index_.emplace(s.label, steps_.size());
        steps_.push_back(std::move(s));
    }

    // Moves the lower (or upper) bound of `from` onto `to`.
    bool flow(const PExpr& from, const PExpr& to, bool lower, Rational slack, const std::string& label) {
        if (to.kind == PExpr::Kind::constant) return false;
        Val src = lower ? lo(from) : hi(from);
        const Rational v = clamp(lower ? src.v - slack : src.v + slack);
        const Val cur = lower ? lo(to) : hi(to);
        if (lower ? v <= cur.v : v >= cur.v) return false;

        Target t = resolve(to, lower, v);
        std::vector<std::string> why;
        if (from.kind == PExpr::Kind::constant) {
            why = {label};
        } else {
            BoundStep s{fresh(label + "'"), statement(to, lower, v), merged({label}, src.from), false};
            why = {s.label};
            if (t.rewritten) {
                BoundStep r{fresh(s.label + "'"), statement(prob(t.prop), t.lower, t.value), {s.label}, true};
                record(std::move(s));
                why = {r.label};
                record(std::move(r));
            } else {
                record(std::move(s));
            }
        }
        auto& n = nodes_.at(to_string(t.prop));
        if (t.lower && t.value > n.lo) {
            n.lo = t.value;
            n.lo_from = why;
        } else if (!t.lower && t.value < n.hi) {
            n.hi = t.value;
            n.hi_from = why;
        }
        return true;
    }

    Rational eps_;
    std::map<std::string, AtomBounds> nodes_;
    std::vector<BoundStep> steps_;
    std::map<std::string, std::size_t> index_;
};

}  // namespace detail

/// Fixpoint of the propagation rules over the theory's unconditional
/// comparison axioms. Atoms whose lower bound exceeds the upper bound by more
/// than 2 eps are reported as conflicts, sorted by atom.
inline BoundsResult propagate_bounds(const Microtheory& theory, Rational eps = Rational(0)) {
    if (eps < Rational(0)) throw UsageError("eps must be non-negative");
    const auto domain = instantiation_domain(theory);
    std::vector<std::pair<std::string, Prop>> ground_axioms;
    for (const auto& ax : theory.axioms) {
        if (!ax.antecedents.empty() || ax.consequent.kind != Prop::Kind::comparison) continue;
        auto inst = instances(ax, domain);
        if (inst.empty()) throw NonGroundComparison("axiom " + ax.label + " has no ground instances");
        for (auto& [subst, q] : inst) {
            if (!ground(q.consequent)) throw NonGroundComparison("axiom " + ax.label + " is not ground after instantiation");
            ground_axioms.emplace_back(ax.label, q.consequent);
        }
    }

    detail::Propagator prop(eps);
    for (const auto& [label, c] : ground_axioms) {
        prop.node(*c.lhs);
        prop.node(*c.rhs);
    }
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& [label, c] : ground_axioms) changed |= prop.apply(c, label);
    }

    BoundsResult out;
    out.steps = prop.steps();
    for (const auto& [key, n] : prop.nodes()) {
        AtomBounds b = n;
        auto l = prop.lo(n.prop);
        auto h = prop.hi(n.prop);
        b.lo = l.v;
        b.lo_from = l.from;
        b.hi = h.v;
        b.hi_from = h.from;
        if (n.prop.kind == Prop::Kind::atom && b.lo > b.hi + Rational(2) * eps) {
            out.conflicts.push_back(BoundConflict{n.prop, b.lo, b.hi, prop.chain(b.lo_from), prop.chain(b.hi_from), b.lo_from, b.hi_from});
        }
        out.bounds.emplace(key, std::move(b));
    }
    return out;
}

/// "2') |-Catch-22 1 ~= P(Obligated[Yossarian, Fly])    [from 2, 8]"
inline std::string render(const BoundStep& s, const std::string& theory, Style style = Style::unicode) {
    Sequent q;
    q.label = s.label;
    q.theory = theory;
    q.consequent = s.statement;
    std::string why = s.reformulation ? "reformulation of " : "from ";
    for (std::size_t i = 0; i < s.from.size(); ++i) why += (i > 0 ? ", " : "") + s.from[i];
    return to_string(q, style) + "    [" + why + "]";
}

}  // namespace pgc::logic
