#pragma once

// Built-in FishMarket norms over the roles the fishmarket annotation rule
// derives.

#include <pgc/norms/norm.hpp>

#include <map>
#include <string>
#include <vector>

namespace pgc::fishmarket {

struct BuiltinNorm {
    std::string group;
    std::string text;
};

/// Norm texts by group; `fig5` expands to several formulas.
inline const std::vector<BuiltinNorm>& builtin_norm_texts() {
    static const std::vector<BuiltinNorm> all{
        // a bid that arrives after the alarm is answered with TooLate
        {"fig4", "fig4: Alarm[au, a], BidArrival[b, x] where a before x |- exists t: TooLate[b, t] where x before t and t.amount = x.amount"},
        // the alarm closes the auction exactly once and everything after it is outcome processing
        {"fig5", "fig5.single-alarm: Alarm[_, a1], Alarm[_, a2] where a1 != a2 |- false"},
        {"fig5", "fig5.alarm-present: Start[au, s] |- exists a: Alarm[au, a] where s before a"},
        {"fig5", "fig5.outcome-after-alarm: Outcome[b, o] |- exists a: Alarm[_, a] where a before o"},
        {"fig5", "fig5.no-late-acceptance: Alarm[_, a], Accept[b, x] where a before x |- false"},
        // deliveries are paid at the agreed price, after the delivery
        {"pays",
         "pays: Delivers[s, b, d] |- exists w, p: Outcome[b, w], Pays[b, s, p] where w.result = 'won' and p.amount = w.amount and d before p"},
        // every acceptance is followed by an announcement of a higher minimum
        {"announce", "announce: Accept[b, x] |- exists b2, n: NewMinimum[b2, n] where x before n and n.amount > x.amount"},
        // of two equal bids the earlier arrival wins
        {"tiebreak", "tiebreak: Accept[b, x], BidArrival[b2, y] where y before x and y.amount = x.amount and b != b2 |- false"},
    };
    return all;
}

inline bool is_builtin_norm(const std::string& name) {
    for (const auto& n : builtin_norm_texts()) {
        if (n.group == name) return true;
    }
    return false;
}

inline std::vector<std::string> builtin_norm_groups() {
    std::vector<std::string> out;
    for (const auto& n : builtin_norm_texts()) {
        if (out.empty() || out.back() != n.group) out.push_back(n.group);
    }
    return out;
}

inline std::vector<norms::NormFormula> builtin_norms(const std::string& group) {
    std::vector<norms::NormFormula> out;
    for (const auto& n : builtin_norm_texts()) {
        if (n.group == group) out.push_back(norms::parse_norm(n.text));
    }
    if (out.empty()) throw UsageError("unknown built-in norm '" + group + "'");
    return out;
}

}  // namespace pgc::fishmarket
