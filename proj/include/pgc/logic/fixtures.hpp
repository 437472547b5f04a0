#pragma once

// The three example theories, in the microtheory text format.

#include <pgc/logic/syntax.hpp>

#include <string>
#include <vector>

namespace pgc::logic {

inline const char* boston_text() {
    return "1) WeekdayAt5PM |-Boston TrafficJam\n"
           "2) |-Boston ~TrafficJam\n";
}

inline const char* prince_text() {
    return "1) p, action: CanResult[Do[p, action], Rich[p]] |-ThePrince Do[p, action]\n"
           "2) |-ThePrince CanResult[Do[Machiavelli, Collude], Rich[Machiavelli]]\n"
           "2') Do[Machiavelli, Collude] |-ThePrince CanResult[Rich[Machiavelli]]\n"
           "4) p, action: CanResult[Do[p, action], Ruined[p]] |-ThePrince ~Do[p, action]\n"
           "5) |-ThePrince CanResult[Do[Machiavelli, Collude], Ruined[Machiavelli]]\n"
           "5') Do[Machiavelli, Collude] |-ThePrince CanResult[Ruined[Machiavelli]]\n";
}

inline const char* catch22_text() {
    return "1) x: |-Catch-22 P(Able[x, Fly] & ~Fly[x]) <= P(Sane[x])\n"
           "2) x: |-Catch-22 P(Sane[x]) <= P(Obligated[x, Fly])\n"
           "3) x: |-Catch-22 P(Sane[x] & Obligated[x, Fly]) <= P(Fly[x])\n"
           "4) x: |-Catch-22 P(Fly[x]) <= P(Crazy[x])\n"
           "5) x: |-Catch-22 P(Crazy[x]) <= P(~Obligated[x, Fly])\n"
           "6) p: |-Catch-22 P(Sane[p] & ~Obligated[p, Fly]) <= P(~Fly[p])\n"
           "7) |-Catch-22 P(Able[Yossarian, Fly]) ~= 1\n"
           "8) |-Catch-22 P(Sane[Yossarian]) ~= 1\n";
}

inline std::vector<std::string> fixture_names() { return {"boston", "prince", "catch22"}; }

inline Microtheory fixture(const std::string& name) {
    if (name == "boston") return parse_microtheory(boston_text());
    if (name == "prince") return parse_microtheory(prince_text());
    if (name == "catch22") return parse_microtheory(catch22_text());
    throw UsageError("unknown theory fixture '" + name + "' (expected boston, prince or catch22)");
}

}  // namespace pgc::logic
