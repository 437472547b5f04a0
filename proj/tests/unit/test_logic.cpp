#include <pgc/logic/bounds.hpp>
#include <pgc/logic/derive.hpp>
#include <pgc/logic/fixtures.hpp>
#include <pgc/logic/fuzzy.hpp>
#include <pgc/logic/inconsistency.hpp>
#include <pgc/logic/verify.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace pgc;
using namespace pgc::logic;

namespace {

Prop prop(const std::string& theory, const std::string& text) { return parse_sequent("|-" + theory + " " + text).consequent; }

void expect_verifies(const std::optional<Derivation>& d, const Microtheory& th, Mode mode) {
    ASSERT_TRUE(d);
    std::string why;
    EXPECT_TRUE(verify(*d, th, mode, &why)) << why;
}

}  // namespace

TEST(Syntax, FixturesPrintAndReparse) {
    for (const auto& name : fixture_names()) {
        const auto th = fixture(name);
        std::string text;
        for (const auto& ax : th.axioms) text += to_string(ax) + "\n";
        const auto again = parse_microtheory(text);
        ASSERT_EQ(again.axioms.size(), th.axioms.size()) << name;
        for (std::size_t i = 0; i < th.axioms.size(); ++i) EXPECT_EQ(to_string(again.axioms[i]), to_string(th.axioms[i]));
        std::string uni;
        for (const auto& ax : th.axioms) uni += to_string(ax, Style::unicode) + "\n";
        const auto from_unicode = parse_microtheory(uni);
        for (std::size_t i = 0; i < th.axioms.size(); ++i) EXPECT_EQ(to_string(from_unicode.axioms[i]), to_string(th.axioms[i]));
    }
    EXPECT_EQ(fixture("prince").name, "ThePrince");
    EXPECT_EQ(fixture("catch22").name, "Catch-22");
    EXPECT_EQ(fixture("catch22").axioms[3].vars, std::vector<std::string>{"x"});
}

TEST(Syntax, Errors) {
    EXPECT_THROW(parse_sequent("A B"), ParseError);
    EXPECT_THROW(parse_sequent("A |- B"), ParseError);
    EXPECT_THROW(parse_sequent("x, x: A[x] |-T B"), ParseError);
    EXPECT_THROW(parse_sequent("|-T P(A) <= "), ParseError);
    EXPECT_THROW(parse_sequent("|-T 2 - P(A) <= 1"), ParseError);
    EXPECT_THROW(parse_sequent("|-T A B"), ParseError);
    EXPECT_THROW(parse_microtheory("1) |-T A\n1) |-T B\n"), ParseError);
    EXPECT_THROW(parse_microtheory("1) |-T A\n2) |-U B\n"), ParseError);
    EXPECT_THROW(fixture("hamlet"), UsageError);
    try {
        parse_microtheory("1) |-T A\n\n2) |-T P(A) <= \n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(Syntax, NegationOfStripsOrAdds) {
    const auto a = prop("T", "A[x]");
    EXPECT_EQ(to_string(negation_of(a)), "~A[x]");
    EXPECT_EQ(to_string(negation_of(negation_of(a))), "A[x]");
}

// ---------------------------------------------------------------------------
// Derivations
// ---------------------------------------------------------------------------

TEST(Derive, BostonNeedsContraposition) {
    const auto th = fixture("boston");
    const auto goal = prop("Boston", "~WeekdayAt5PM");
    EXPECT_FALSE(derive(th, goal, 10, Mode::direct));
    const auto d = derive(th, goal, 2, Mode::classical);
    expect_verifies(d, th, Mode::classical);
    EXPECT_LE(d->height(), 2u);
    EXPECT_EQ(d->rule, "contraposition");
    // the same derivation is rejected as a direct one
    std::string why;
    EXPECT_FALSE(verify(*d, th, Mode::direct, &why));
    EXPECT_NE(why.find("contraposition"), std::string::npos);
}

TEST(Derive, PrinceHasOneContradictionAndNoExplosion) {
    const auto th = fixture("prince");
    const auto reports = find_inconsistencies(th, 3);
    ASSERT_EQ(reports.size(), 1u);
    EXPECT_EQ(to_string(reports[0].atom), "Do[Machiavelli, Collude]");
    expect_verifies(reports[0].positive, th, Mode::direct);
    expect_verifies(reports[0].negative, th, Mode::direct);
    EXPECT_EQ(to_string(reports[0].negative->conclusion.consequent), "~Do[Machiavelli, Collude]");
    for (const auto mode : {Mode::direct, Mode::classical}) {
        EXPECT_FALSE(derive(th, prop("ThePrince", "Q"), 10, mode));
        EXPECT_FALSE(derive(th, prop("ThePrince", "Rich[Machiavelli]"), 10, mode));
    }
}

TEST(Derive, ChainFromHypotheses) {
    const auto th = parse_microtheory("1) A |-T B\n2) B, C |-T D\n");
    const auto d = derive(th, parse_sequent("A, C |-T D"), 4, Mode::direct);
    expect_verifies(d, th, Mode::direct);
    EXPECT_FALSE(derive(th, parse_sequent("A |-T D"), 6, Mode::direct));
    EXPECT_THROW(derive(th, parse_sequent("A |-U D"), 4, Mode::direct), UnknownTheory);
    const auto lines = render(*d, Style::ascii);
    EXPECT_FALSE(lines.empty());
    EXPECT_NE(lines.back().find("|-T D"), std::string::npos) << lines.back();
}

TEST(Derive, DirectIsContainedInClassicalOnRandomTheories) {
    const std::vector<std::string> atoms = {"A", "B", "C", "D"};
    std::mt19937 rng(20);
    auto literal = [&] {
        std::string a = atoms[rng() % atoms.size()];
        return rng() % 3 == 0 ? "~" + a : a;
    };
    std::size_t direct_hits = 0;
    std::size_t classical_only = 0;
    for (int round = 0; round < 40; ++round) {
        std::string text;
        const int n = 2 + static_cast<int>(rng() % 4);
        for (int i = 1; i <= n; ++i) {
            std::string ante;
            const int k = static_cast<int>(rng() % 3);
            for (int j = 0; j < k; ++j) ante += (j ? ", " : "") + literal();
            text += std::to_string(i) + ") " + ante + (ante.empty() ? "" : " ") + "|-T " + literal() + "\n";
        }
        const auto th = parse_microtheory(text);
        for (const auto& a : atoms) {
            for (const std::string& goal : {a, "~" + a}) {
                const auto d = derive(th, prop("T", goal), 5, Mode::direct);
                const auto c = derive(th, prop("T", goal), 5, Mode::classical);
                if (d) {
                    ++direct_hits;
                    expect_verifies(d, th, Mode::direct);
                    EXPECT_TRUE(c) << text << goal;
                }
                if (c) {
                    expect_verifies(c, th, Mode::classical);
                    if (!d) ++classical_only;
                }
            }
        }
    }
    EXPECT_GT(direct_hits, 0u);
    EXPECT_GT(classical_only, 0u);
}

// ---------------------------------------------------------------------------
// Probability bounds
// ---------------------------------------------------------------------------

TEST(Bounds, Catch22StepsAndConflicts) {
    const auto r = propagate_bounds(fixture("catch22"));
    std::vector<std::string> shown;
    for (const auto& s : r.steps) shown.push_back(render(s, "Catch-22", Style::ascii));
    const std::vector<std::string> expected = {
        "2') |-Catch-22 1 ~= P(Obligated[Yossarian, Fly])    [from 2, 8]",
        "3') |-Catch-22 1 ~= P(Fly[Yossarian])    [from 3, 8, 2']",
        "4') |-Catch-22 1 ~= P(Crazy[Yossarian])    [from 4, 3']",
        "5') |-Catch-22 1 <~ 1 - P(Obligated[Yossarian, Fly])    [from 5, 4']",
        "5'') |-Catch-22 P(Obligated[Yossarian, Fly]) ~= 0    [reformulation of 5']",
        "6') |-Catch-22 1 <~ 1 - P(Fly[Yossarian])    [from 6, 8, 5'']",
        "6'') |-Catch-22 P(Fly[Yossarian]) ~= 0    [reformulation of 6']",
    };
    EXPECT_EQ(shown, expected);

    ASSERT_EQ(r.conflicts.size(), 2u);
    auto labels = [](const std::vector<BoundStep>& chain) {
        std::vector<std::string> out;
        for (const auto& s : chain) out.push_back(s.label);
        return out;
    };
    const auto& fly = r.conflicts[0];
    EXPECT_EQ(to_string(fly.atom), "Fly[Yossarian]");
    EXPECT_EQ(fly.lower, Rational(1));
    EXPECT_EQ(fly.upper, Rational(0));
    EXPECT_EQ(labels(fly.lower_chain).back(), "3'");
    EXPECT_EQ(labels(fly.upper_chain), (std::vector<std::string>{"2'", "3'", "4'", "5'", "5''", "6'", "6''"}));
    const auto& obligated = r.conflicts[1];
    EXPECT_EQ(to_string(obligated.atom), "Obligated[Yossarian, Fly]");
    EXPECT_EQ(labels(obligated.lower_chain), std::vector<std::string>{"2'"});
    EXPECT_EQ(labels(obligated.upper_chain).back(), "5''");
    EXPECT_EQ(obligated.lower_from, std::vector<std::string>{"2'"});
    EXPECT_EQ(obligated.upper_from, std::vector<std::string>{"5''"});
    EXPECT_EQ(fly.upper_from, std::vector<std::string>{"6''"});
    EXPECT_EQ(reports(r).size(), 2u);
}

TEST(Bounds, SmallExamples) {
    auto r = propagate_bounds(parse_microtheory("1) |-T P(A) <= 1/3\n2) |-T P(B) <= P(A)\n3) |-T 1/4 <= P(B)\n"));
    EXPECT_EQ(r.bounds.at("B").lo, Rational(1, 4));
    EXPECT_EQ(r.bounds.at("A").lo, Rational(1, 4));
    EXPECT_EQ(r.bounds.at("A").hi, Rational(1, 3));
    // bounds flow left to right only, so A's ceiling does not reach B
    EXPECT_EQ(r.bounds.at("B").hi, Rational(1));
    EXPECT_TRUE(r.conflicts.empty());

    r = propagate_bounds(parse_microtheory("1) |-T P(~A) ~= 3/4\n2) |-T P(A & B) ~= 1/2\n"));
    EXPECT_EQ(r.bounds.at("A").hi, Rational(1, 4));
    ASSERT_EQ(r.conflicts.size(), 0u);
    // the conjunction's bound exceeds its conjunct's but only atoms are reported
    EXPECT_GT(r.bounds.at("A & B").lo, r.bounds.at("A & B").hi);

    // tolerance widens approximate comparisons
    const auto close = parse_microtheory("1) |-T P(A) ~= 1\n2) |-T P(A) <~ 9/10\n");
    ASSERT_EQ(propagate_bounds(close).conflicts.size(), 1u);
    // both bounds come straight from axioms, so there is no chain of steps
    EXPECT_TRUE(propagate_bounds(close).conflicts[0].lower_chain.empty());
    EXPECT_EQ(propagate_bounds(close).conflicts[0].upper_from, std::vector<std::string>{"2"});
    EXPECT_TRUE(propagate_bounds(close, Rational(1, 10)).conflicts.empty());
    EXPECT_THROW(propagate_bounds(close, Rational(-1)), UsageError);
    EXPECT_THROW(propagate_bounds(parse_microtheory("1) x: |-T P(A[x]) <= 1/2\n")), NonGroundComparison);
}

namespace {

// Probability of a ground proposition over worlds indexed by a bitmask of atoms.
Rational probability(const Prop& p, const std::vector<std::string>& atoms, const std::vector<Rational>& weight) {
    auto holds = [&](const Prop& q, unsigned world, auto&& self) -> bool {
        switch (q.kind) {
            case Prop::Kind::atom: {
                const auto at = std::find(atoms.begin(), atoms.end(), to_string(q));
                return (world >> (at - atoms.begin())) & 1u;
            }
            case Prop::Kind::negation: return !self(q.parts[0], world, self);
            case Prop::Kind::conjunction: return self(q.parts[0], world, self) && self(q.parts[1], world, self);
            case Prop::Kind::comparison: break;
        }
        throw std::logic_error("comparison inside P(...)");
    };
    Rational sum(0);
    for (unsigned w = 0; w < weight.size(); ++w) {
        if (holds(p, w, holds)) sum += weight[w];
    }
    return sum;
}

Rational value(const PExpr& e, const std::vector<std::string>& atoms, const std::vector<Rational>& weight) {
    switch (e.kind) {
        case PExpr::Kind::prob: return probability(*e.prop, atoms, weight);
        case PExpr::Kind::complement: return Rational(1) - value(*e.inner, atoms, weight);
        case PExpr::Kind::constant: return e.value;
    }
    return Rational(0);
}

// Every distribution over the worlds with weights in multiples of 1/steps.
template <class F>
void each_distribution(std::size_t worlds, int steps, F&& f) {
    std::vector<Rational> weight(worlds, Rational(0));
    auto go = [&](std::size_t i, int left, auto&& self) -> void {
        if (i + 1 == worlds) {
            weight[i] = Rational(left, steps);
            f(weight);
            return;
        }
        for (int k = 0; k <= left; ++k) {
            weight[i] = Rational(k, steps);
            self(i + 1, left - k, self);
        }
    };
    go(0, steps, go);
}

}  // namespace

// Any distribution that satisfies every axiom gives each proposition a
// probability inside the propagated interval.
TEST(Bounds, SoundAgainstAGridOfDistributions) {
    const std::vector<std::string> atoms = {"A", "B", "C"};
    const std::vector<std::string> props = {"A", "B", "C", "~A", "~C", "A & B", "B & ~C", "~A & C"};
    const std::vector<std::string> consts = {"0", "1/4", "1/2", "3/4", "1"};
    const std::vector<std::string> rels = {"<=", "~=", "<~"};
    std::mt19937 rng(7);
    auto side = [&]() -> std::string {
        switch (rng() % 4) {
            case 0: return consts[rng() % consts.size()];
            case 1: return "1 - P(" + props[rng() % props.size()] + ")";
            default: return "P(" + props[rng() % props.size()] + ")";
        }
    };
    std::size_t satisfied = 0;
    for (int round = 0; round < 60; ++round) {
        std::string text;
        const int n = 1 + static_cast<int>(rng() % 3);
        for (int i = 1; i <= n; ++i) {
            std::string l = side();
            std::string r = side();
            if (l.find('P') == std::string::npos && r.find('P') == std::string::npos) r = "P(" + props[rng() % props.size()] + ")";
            text += std::to_string(i) + ") |-T " + l + " " + rels[rng() % rels.size()] + " " + r + "\n";
        }
        const auto th = parse_microtheory(text);
        const auto result = propagate_bounds(th);
        each_distribution(8, 4, [&](const std::vector<Rational>& w) {
            for (const auto& ax : th.axioms) {
                const auto& c = ax.consequent;
                const Rational l = value(*c.lhs, atoms, w);
                const Rational r = value(*c.rhs, atoms, w);
                if (c.rel == Rel::approx ? l != r : l > r) return;
            }
            ++satisfied;
            for (const auto& [key, b] : result.bounds) {
                const Rational p = probability(b.prop, atoms, w);
                EXPECT_GE(p, b.lo) << text << key;
                EXPECT_LE(p, b.hi) << text << key;
            }
        });
    }
    EXPECT_GT(satisfied, 0u);
}

// ---------------------------------------------------------------------------
// Fuzzy contraposition
// ---------------------------------------------------------------------------

TEST(Fuzzy, ClassicalInfersZeroDirectRefuses) {
    const auto classical = fuzzy_contraposition_demo(Mode::classical);
    EXPECT_EQ(classical.outcome, FuzzyReport::Outcome::value);
    ASSERT_TRUE(classical.weekday);
    EXPECT_EQ(*classical.weekday, Rational(0));

    const auto direct = fuzzy_contraposition_demo(Mode::direct);
    EXPECT_EQ(direct.outcome, FuzzyReport::Outcome::undefined);
    EXPECT_FALSE(direct.weekday);
    bool zero_division = false;
    for (const auto& line : direct.explanation) zero_division |= line.find("division by a zero probability") != std::string::npos;
    EXPECT_TRUE(zero_division);
}

TEST(Fuzzy, OtherInputs) {
    const FuzzyInputs loose{Rational(1, 2), Rational(1, 5)};
    EXPECT_EQ(fuzzy_contraposition_demo(Mode::classical, loose).outcome, FuzzyReport::Outcome::insufficient);
    EXPECT_EQ(fuzzy_contraposition_demo(Mode::direct, loose).outcome, FuzzyReport::Outcome::insufficient);
    const FuzzyInputs never{Rational(0), Rational(0)};
    EXPECT_EQ(fuzzy_contraposition_demo(Mode::classical, never).outcome, FuzzyReport::Outcome::undefined);
    EXPECT_THROW(fuzzy_contraposition_demo(Mode::direct, FuzzyInputs{Rational(3, 2), Rational(0)}), UsageError);
}
