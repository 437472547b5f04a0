#pragma once

// The traffic-jam example read probabilistically. From
//   P(TrafficJam | WeekdayAt5PM) = c   and   P(TrafficJam) = t
// the classical calculation is
//   P(WeekdayAt5PM) = P(WeekdayAt5PM & TrafficJam) / c
// with the numerator bounded by t. Direct mode first asks whether the
// conditional is defined at all: it is a quotient by P(WeekdayAt5PM), and
// when the inputs force that probability to 0 the quotient is refused.

#include <pgc/logic/derive.hpp>

#include <optional>
#include <string>
#include <vector>

namespace pgc::logic {

struct FuzzyInputs {
    Rational jam_given_weekday{1};  // P(TrafficJam | WeekdayAt5PM)
    Rational jam{0};                // P(TrafficJam)
};

struct FuzzyReport {
    enum class Outcome { value, undefined, insufficient };
    Mode mode = Mode::classical;
    Outcome outcome = Outcome::insufficient;
    std::optional<Rational> weekday;  // P(WeekdayAt5PM), for Outcome::value
    std::vector<std::string> explanation;
};

inline const char* to_string(FuzzyReport::Outcome o) {
    switch (o) {
        case FuzzyReport::Outcome::value: return "value";
        case FuzzyReport::Outcome::undefined: return "undefined";
        case FuzzyReport::Outcome::insufficient: return "insufficient constraints";
    }
    return "?";
}

inline FuzzyReport fuzzy_contraposition_demo(Mode mode, const FuzzyInputs& in = {}) {
    auto in_unit = [](Rational r) { return r >= Rational(0) && r <= Rational(1); };
    if (!in_unit(in.jam_given_weekday) || !in_unit(in.jam)) throw UsageError("probabilities must lie in [0, 1]");
    const std::string c = to_string(in.jam_given_weekday);
    const std::string t = to_string(in.jam);

    FuzzyReport r;
    r.mode = mode;
    r.explanation.push_back("given P(TrafficJam | WeekdayAt5PM) = " + c + " and P(TrafficJam) = " + t);
    r.explanation.push_back("P(WeekdayAt5PM & TrafficJam) <= P(TrafficJam) = " + t);

    if (in.jam_given_weekday == Rational(0)) {
        r.outcome = FuzzyReport::Outcome::undefined;
        r.explanation.push_back("P(WeekdayAt5PM) = P(WeekdayAt5PM & TrafficJam) / " + c + " divides by zero");
        return r;
    }

    if (mode == Mode::classical) {
        if (in.jam == Rational(0)) {
            r.outcome = FuzzyReport::Outcome::value;
            r.weekday = Rational(0);
            r.explanation.push_back("P(WeekdayAt5PM) = P(WeekdayAt5PM & TrafficJam) / P(TrafficJam | WeekdayAt5PM) = 0 / " + c + " = 0");
        } else {
            r.explanation.push_back("P(WeekdayAt5PM) = P(WeekdayAt5PM & TrafficJam) / " + c + " with the numerator anywhere in [0, " + t + "]");
        }
        return r;
    }

    // the conditional is P(WeekdayAt5PM & TrafficJam) / P(WeekdayAt5PM); it
    // makes P(WeekdayAt5PM) = P(WeekdayAt5PM & TrafficJam) / c <= t / c
    if (in.jam == Rational(0)) {
        r.outcome = FuzzyReport::Outcome::undefined;
        r.explanation.push_back("P(TrafficJam | WeekdayAt5PM) = P(WeekdayAt5PM & TrafficJam) / P(WeekdayAt5PM) needs P(WeekdayAt5PM) > 0");
        r.explanation.push_back("the inputs force P(WeekdayAt5PM) <= " + t + " / " + c + " = 0, a division by a zero probability");
        r.explanation.push_back("the quotient is refused, so P(WeekdayAt5PM) is undefined rather than inferred to be 0");
    } else {
        r.explanation.push_back("P(WeekdayAt5PM) <= " + t + " / " + c + " and nothing bounds it from below");
    }
    return r;
}

}  // namespace pgc::logic
