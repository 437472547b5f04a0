#pragma once

// One report type for both kinds of contradiction a microtheory can contain.

#include <pgc/logic/bounds.hpp>
#include <pgc/logic/derive.hpp>

#include <optional>
#include <string>
#include <vector>

namespace pgc::logic {

struct InconsistencyReport {
    enum class Kind { propositional, bound_conflict };
    Kind kind = Kind::propositional;
    Prop atom;
    // propositional
    std::optional<Derivation> positive;
    std::optional<Derivation> negative;
    // bound_conflict
    Rational lower{0};
    Rational upper{1};
    std::vector<BoundStep> lower_chain;
    std::vector<BoundStep> upper_chain;
    std::vector<std::string> lower_from;
    std::vector<std::string> upper_from;
};

/// Every atom P with both P and ~P derivable within `depth`, sorted by atom.
inline std::vector<InconsistencyReport> find_inconsistencies(const Microtheory& theory, std::size_t depth, Mode mode = Mode::direct) {
    std::vector<InconsistencyReport> out;
    for (auto& c : find_propositional_conflicts(theory, depth, mode)) {
        InconsistencyReport r;
        r.kind = InconsistencyReport::Kind::propositional;
        r.atom = std::move(c.atom);
        r.positive = std::move(c.positive);
        r.negative = std::move(c.negative);
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<InconsistencyReport> reports(const BoundsResult& b) {
    std::vector<InconsistencyReport> out;
    for (const auto& c : b.conflicts) {
        InconsistencyReport r;
        r.kind = InconsistencyReport::Kind::bound_conflict;
        r.atom = c.atom;
        r.lower = c.lower;
        r.upper = c.upper;
        r.lower_chain = c.lower_chain;
        r.upper_chain = c.upper_chain;
        r.lower_from = c.lower_from;
        r.upper_from = c.upper_from;
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace pgc::logic
