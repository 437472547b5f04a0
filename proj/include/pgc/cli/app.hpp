#pragma once

// The pgc command line. `run` is the whole program minus process plumbing so
// tests can drive it with string streams.
//
// Exit codes: 0 all norms hold or the result matches expectation, 1 a
// violation or an unexpected inconsistency, 2 a usage or configuration error.

#include <pgc/cli/report.hpp>
#include <pgc/logic/fixtures.hpp>
#include <pgc/logic/fuzzy.hpp>
#include <pgc/logic/inconsistency.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace pgc::cli {

inline constexpr const char* kSeedVariable = "PGC_SEED";

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        auto b = cur.find_first_not_of(" \t");
        auto e = cur.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
    }
    return out;
}

inline std::int64_t to_integer(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        auto v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::logic_error&) {
        throw UsageError("malformed " + what + " '" + s + "'");
    }
}

/// "3", "1/10" or "0.25".
inline logic::Rational parse_rational(const std::string& s) {
    if (auto slash = s.find('/'); slash != std::string::npos) {
        auto den = to_integer(s.substr(slash + 1), "rational");
        if (den == 0) throw UsageError("zero denominator in '" + s + "'");
        return logic::Rational(to_integer(s.substr(0, slash), "rational"), den);
    }
    if (auto dot = s.find('.'); dot != std::string::npos) {
        const std::string frac = s.substr(dot + 1);
        if (frac.empty() || frac.size() > 12) throw UsageError("malformed rational '" + s + "'");
        std::int64_t den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
        const std::string whole = s.substr(0, dot).empty() ? "0" : s.substr(0, dot);
        return logic::Rational(to_integer(whole, "rational")) + logic::Rational(to_integer(frac, "rational"), den);
    }
    return logic::Rational(to_integer(s, "rational"));
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read '" + path + "'");
    std::stringstream text;
    text << in.rdbuf();
    return text.str();
}

/// Fixture name or theory file.
inline logic::Microtheory load_theory(const std::string& name) {
    for (const auto& f : logic::fixture_names()) {
        if (f == name) return logic::fixture(name);
    }
    try {
        return logic::parse_microtheory(read_file(name));
    } catch (const ParseError& e) {
        throw UsageError(name + ": " + e.what());
    }
}

struct ScenarioFlags {
    std::string file;
    std::string bidders;
    fishmarket::Currency reserve = 0;
    fishmarket::Currency increment = 1;
    std::string mutant;
    std::string honesty;
    std::string norms;
    std::size_t bound = 0;
    std::string strategy;
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    unsigned jobs = 1;
    std::size_t limit = ReportOptions{}.limit;
    std::size_t excerpt = 20;
    std::size_t witnesses = 20;
    bool json = false;
    bool xml = false;
    bool full_trace = false;

    CLI::Option* o_bidders = nullptr;
    CLI::Option* o_reserve = nullptr;
    CLI::Option* o_increment = nullptr;
    CLI::Option* o_mutant = nullptr;
    CLI::Option* o_honesty = nullptr;
    CLI::Option* o_norms = nullptr;
    CLI::Option* o_bound = nullptr;
    CLI::Option* o_strategy = nullptr;
    CLI::Option* o_seed = nullptr;
    CLI::Option* o_samples = nullptr;
    CLI::Option* o_jobs = nullptr;

    void add(CLI::App& app, bool exploring) {
        app.add_option("--scenario", file, "Scenario JSON file; flags override its fields");
        o_bidders = app.add_option("--bidders", bidders, "Bidder maxima, e.g. 10,20 or alice:10,bob:20");
        o_reserve = app.add_option("--reserve", reserve, "Reserve price");
        o_increment = app.add_option("--increment", increment, "Minimum raise over the current bid");
        o_mutant = app.add_option("--mutant", mutant, "Auction variant: none, late-accept, no-announce");
        o_honesty = app.add_option("--honesty", honesty, "Settlement per winner: deadbeat, or b1=deadbeat,b2=short-payer");
        o_norms = app.add_option("--norms", norms, "Comma-separated built-in norm names or norm files");
        o_bound = app.add_option("--bound", bound, "Maximum deliveries per schedule");
        o_seed = app.add_option("--seed", seed, std::string("Random seed (default from ") + kSeedVariable + ")");
        app.add_option("--excerpt", excerpt, "Events shown per witness excerpt");
        app.add_flag("--json", json, "Emit one JSON document");
        if (exploring) {
            o_strategy = app.add_option("--strategy", strategy, "exhaustive or random");
            o_samples = app.add_option("--samples", samples, "Schedules sampled by the random strategy");
            o_jobs = app.add_option("--jobs", jobs, "Worker threads; results do not depend on it");
            app.add_option("--limit", limit, "Abort after this many schedules (0 = no limit)");
            app.add_option("--witnesses", witnesses, "Witnesses kept per norm (0 = all)");
            app.add_flag("--full-trace", full_trace, "Replay and print the whole trace of every witness");
        } else {
            app.add_flag("--xml", xml, "Print the trace as XML");
        }
    }

    fishmarket::ScenarioSpec spec() const {
        fishmarket::ScenarioSpec s;
        if (!file.empty()) {
            try {
                s = fishmarket::spec_from_json(nlohmann::json::parse(read_file(file)));
            } catch (const nlohmann::json::parse_error& e) {
                throw UsageError(file + ": " + e.what());
            }
        }
        if (o_bidders->count() > 0) {
            s.bidders.clear();
            std::size_t k = 0;
            for (const auto& item : split(bidders, ',')) {
                ++k;
                auto colon = item.find(':');
                std::string name = colon == std::string::npos ? "b" + std::to_string(k) : item.substr(0, colon);
                std::string max = colon == std::string::npos ? item : item.substr(colon + 1);
                s.bidders.push_back(fishmarket::BidderSpec{name, to_integer(max, "maximum bid"), fishmarket::Honesty::honest});
            }
        }
        if (s.bidders.empty()) throw UsageError("no bidders (use --bidders or --scenario)");
        if (o_reserve->count() > 0) s.reserve = reserve;
        if (o_increment->count() > 0) s.increment = increment;
        if (o_mutant->count() > 0) s.mutant = fishmarket::parse_mutant(mutant);
        if (o_honesty->count() > 0) {
            for (const auto& item : split(honesty, ',')) {
                auto eq = item.find('=');
                if (eq == std::string::npos) {
                    for (auto& b : s.bidders) b.honesty = fishmarket::parse_honesty(item);
                    continue;
                }
                const std::string who = item.substr(0, eq);
                auto it = std::find_if(s.bidders.begin(), s.bidders.end(), [&](const auto& b) { return b.name == who; });
                if (it == s.bidders.end()) throw UsageError("--honesty names unknown bidder '" + who + "'");
                it->honesty = fishmarket::parse_honesty(item.substr(eq + 1));
            }
        }
        if (o_norms->count() > 0) s.norms = split(norms, ',');
        if (o_bound->count() > 0) s.exploration.bound = bound;
        if (o_seed->count() > 0) {
            s.exploration.seed = seed;
        } else if (const char* env = std::getenv(kSeedVariable); env != nullptr && *env != '\0') {
            s.exploration.seed = static_cast<std::uint64_t>(to_integer(env, kSeedVariable));
        }
        if (o_strategy != nullptr && o_strategy->count() > 0) s.exploration.strategy = strategy;
        if (o_samples != nullptr && o_samples->count() > 0) s.exploration.samples = samples;
        if (o_jobs != nullptr && o_jobs->count() > 0) s.exploration.jobs = jobs;
        if (s.exploration.jobs == 0) throw UsageError("--jobs must be at least 1");
        fishmarket::validate(s);
        return s;
    }
};

inline void print_derivation(std::ostream& out, const logic::Derivation& d, logic::Style style, const std::string& indent = "  ") {
    for (const auto& line : logic::render(d, style)) out << indent << line << "\n";
}

inline void print_report(std::ostream& out, const logic::InconsistencyReport& r, const std::string& theory, logic::Style style) {
    if (r.kind == logic::InconsistencyReport::Kind::propositional) {
        out << "inconsistency " << logic::to_string(r.atom, style) << " vs " << logic::to_string(logic::Prop::negate(r.atom), style) << "\n";
        out << " derivation of " << logic::to_string(r.atom, style) << "\n";
        print_derivation(out, *r.positive, style);
        out << " derivation of " << logic::to_string(logic::Prop::negate(r.atom), style) << "\n";
        print_derivation(out, *r.negative, style);
        return;
    }
    out << "bound conflict " << logic::to_string(logic::prob(r.atom), style) << " lower=" << logic::to_string(r.lower) << " upper=" << logic::to_string(r.upper)
        << "\n";
    out << " lower bound from " << join(r.lower_from, ", ") << "\n";
    for (const auto& s : r.lower_chain) out << "  " << logic::render(s, theory, style) << "\n";
    out << " upper bound from " << join(r.upper_from, ", ") << "\n";
    for (const auto& s : r.upper_chain) out << "  " << logic::render(s, theory, style) << "\n";
}

inline void print_bounds(std::ostream& out, const logic::BoundsResult& b, const std::string& theory, logic::Style style) {
    for (const auto& s : b.steps) out << logic::render(s, theory, style) << "\n";
    for (const auto& [key, v] : b.bounds) {
        if (v.lo == logic::Rational(0) && v.hi == logic::Rational(1)) continue;
        out << "bound " << logic::to_string(logic::prob(v.prop), style) << " in [" << logic::to_string(v.lo) << ", " << logic::to_string(v.hi) << "]\n";
    }
    for (const auto& r : logic::reports(b)) print_report(out, r, theory, style);
}

inline logic::Prop prop_atom(const std::string& text, const std::string& theory) {
    return logic::parse_sequent("|-" + theory + " " + text).consequent;
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

inline int auction_run(const ScenarioFlags& f, std::ostream& out) {
    auto spec = f.spec();
    const auto formulas = resolve_norms(spec.norms);
    spec.exploration.strategy = "random";
    spec.exploration.samples = 1;
    const auto sc = fishmarket::build_scenario(spec);
    auto opt = explore_options(spec, 0);
    opt.jobs = 1;
    auto result = progression::explore_traces(sc.system, opt);
    const trace::Trace& t = result.traces.at(0);

    norms::CheckOptions co;
    co.excerpt_limit = f.excerpt;
    bool violated = false;
    std::vector<norms::Verdict> verdicts;
    for (const auto& n : formulas) {
        verdicts.push_back(norms::check(t, n, co));
        violated |= verdicts.back().status == norms::Status::violated;
    }

    if (f.xml) {
        out << trace::to_xml(t);
    } else if (f.json) {
        json d;
        d["scenario"] = fishmarket::spec_to_json(spec);
        d["trace"] = trace::to_json(t);
        d["norms"] = json::array();
        for (std::size_t k = 0; k < formulas.size(); ++k) {
            json n{{"name", formulas[k].name}, {"status", norms::to_string(verdicts[k].status)}, {"matches", verdicts[k].matches}};
            n["witnesses"] = json::array();
            for (const auto& w : verdicts[k].witnesses) n["witnesses"].push_back(witness_json(w));
            d["norms"].push_back(std::move(n));
        }
        d["result"] = violated ? "violation" : "ok";
        out << d.dump(2) << "\n";
    } else {
        out << "schedule " << join(schedule_json(t.schedule), " ") << (t.truncated ? " (truncated)" : "") << "\n";
        for (const auto& line : trace_lines(t)) out << line << "\n";
        for (std::size_t k = 0; k < formulas.size(); ++k) {
            out << "norm " << formulas[k].name << " status=" << norms::to_string(verdicts[k].status) << " matches=" << verdicts[k].matches << "\n";
            for (const auto& w : verdicts[k].witnesses) {
                out << "  witness binding " << binding_text(binding_json(w.binding)) << "\n";
                for (const auto& e : w.excerpt) out << "    excerpt " << e << "\n";
            }
        }
        out << "result " << (violated ? "violation" : "ok") << "\n";
    }
    return violated ? 1 : 0;
}

inline int auction_explore(const ScenarioFlags& f, std::ostream& out) {
    const auto spec = f.spec();
    const auto formulas = resolve_norms(spec.norms);
    ReportOptions ro;
    ro.excerpt_limit = f.excerpt;
    ro.witness_limit = f.witnesses;
    ro.limit = f.limit;
    ro.full_trace = f.full_trace;
    Report r;
    try {
        r = explore_report(spec, formulas, ro);
    } catch (const progression::ExplorationLimit& e) {
        throw UsageError(std::string(e.what()) +
                         "; lower --bound, sample with --strategy random --samples N, or raise --limit (0 removes it)");
    }
    if (f.json) {
        out << r.document.dump(2) << "\n";
    } else {
        out << render_text(r.document);
    }
    return r.exit_code;
}

inline int norms_check(const std::vector<std::string>& trace_files, const std::string& norm_list, std::size_t excerpt, bool as_json, std::ostream& out) {
    const auto formulas = resolve_norms(split(norm_list, ','));
    norms::CheckOptions co;
    co.excerpt_limit = excerpt;
    std::vector<norms::NormSummary> summaries;
    for (const auto& n : formulas) {
        norms::NormSummary s;
        s.norm = n.name;
        summaries.push_back(std::move(s));
    }
    for (std::size_t i = 0; i < trace_files.size(); ++i) {
        trace::Trace t;
        try {
            t = trace::from_json(nlohmann::json::parse(read_file(trace_files[i])));
        } catch (const nlohmann::json::parse_error& e) {
            throw UsageError(trace_files[i] + ": " + e.what());
        } catch (const trace::InvalidTrace& e) {
            throw UsageError(trace_files[i] + ": " + e.what());
        }
        for (std::size_t k = 0; k < formulas.size(); ++k) summaries[k].add(norms::check(t, formulas[k], co, i));
    }
    bool violated = false;
    json d;
    d["traces"] = trace_files;
    d["norms"] = json::array();
    for (std::size_t k = 0; k < formulas.size(); ++k) {
        const auto& s = summaries[k];
        json n{{"name", s.norm},        {"formula", norms::print(formulas[k])}, {"status", norms::to_string(s.status())}, {"traces", s.traces},
               {"holds", s.holds},      {"violated", s.violated},               {"vacuous", s.vacuous},                   {"inconclusive", s.inconclusive}};
        n["witnesses"] = json::array();
        for (const auto& w : s.witnesses) n["witnesses"].push_back(witness_json(w));
        violated |= s.violated > 0;
        d["norms"].push_back(std::move(n));
    }
    d["result"] = violated ? "violation" : "ok";
    if (as_json) {
        out << d.dump(2) << "\n";
    } else {
        for (const auto& n : d["norms"]) {
            out << "norm " << n["name"].get<std::string>() << " status=" << n["status"].get<std::string>() << " traces=" << n["traces"]
                << " violated=" << n["violated"] << "\n";
            for (const auto& w : n["witnesses"]) {
                out << "  witness " << trace_files.at(w["trace"].get<std::size_t>()) << " binding " << binding_text(w["binding"]) << "\n";
                for (const auto& e : w["excerpt"]) out << "    excerpt " << e.get<std::string>() << "\n";
            }
        }
        out << "result " << d["result"].get<std::string>() << "\n";
    }
    return violated ? 1 : 0;
}

inline int demo(const std::string& which, logic::Style style, std::ostream& out) {
    using namespace logic;
    if (which == "boston") {
        const auto th = fixture("boston");
        const Prop goal = prop_atom("~WeekdayAt5PM", th.name);
        auto direct = derive(th, goal, 10, Mode::direct);
        auto classical = derive(th, goal, 10, Mode::classical);
        for (const auto& ax : th.axioms) out << to_string(ax, style) << "\n";
        out << "direct: " << (direct ? "derived" : "not derivable within depth 10") << " " << to_string(goal, style) << "\n";
        if (direct) print_derivation(out, *direct, style);
        out << "classical: " << (classical ? "derived" : "not derivable") << " " << to_string(goal, style) << "\n";
        if (classical) print_derivation(out, *classical, style);
        const bool expected = !direct && classical;
        out << "result " << (expected ? "as expected" : "unexpected") << "\n";
        return expected ? 0 : 1;
    }
    if (which == "prince") {
        const auto th = fixture("prince");
        for (const auto& ax : th.axioms) out << to_string(ax, style) << "\n";
        const auto found = find_inconsistencies(th, 3);
        for (const auto& r : found) print_report(out, r, th.name, style);
        const Prop q = prop_atom("Q", th.name);
        const bool explodes = derive(th, q, 10, Mode::direct).has_value();
        out << "fresh atom Q " << (explodes ? "derivable" : "not derivable within depth 10") << "\n";
        const bool expected = found.size() == 1 && !explodes;
        out << "result " << (expected ? "as expected" : "unexpected") << "\n";
        return expected ? 0 : 1;
    }
    if (which == "catch22") {
        const auto th = fixture("catch22");
        for (const auto& ax : th.axioms) out << to_string(ax, style) << "\n";
        const auto b = propagate_bounds(th);
        print_bounds(out, b, th.name, style);
        const bool expected = b.conflicts.size() == 2;
        out << "result " << (expected ? "as expected" : "unexpected") << "\n";
        return expected ? 0 : 1;
    }
    if (which == "fuzzy") {
        bool expected = true;
        for (Mode m : {Mode::classical, Mode::direct}) {
            const auto r = fuzzy_contraposition_demo(m);
            out << to_string(m) << ": P(WeekdayAt5PM) " << (r.weekday ? "= " + to_string(*r.weekday) : std::string(to_string(r.outcome))) << "\n";
            for (const auto& line : r.explanation) out << "  " << line << "\n";
            expected &= m == Mode::classical ? r.weekday == Rational(0) : r.outcome == FuzzyReport::Outcome::undefined;
        }
        out << "result " << (expected ? "as expected" : "unexpected") << "\n";
        return expected ? 0 : 1;
    }
    throw UsageError("unknown demo '" + which + "' (expected boston, prince, catch22 or fuzzy)");
}

}  // namespace detail

/// Runs the program on `args` (without the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Actor-model auctions, norm checking and direct inference", "pgc"};
    app.require_subcommand(1);

    auto* auction = app.add_subcommand("auction", "Run or explore an English auction");
    auction->require_subcommand(1);
    detail::ScenarioFlags run_flags;
    auto* a_run = auction->add_subcommand("run", "Execute one schedule chosen by the seed");
    run_flags.add(*a_run, false);
    detail::ScenarioFlags explore_flags;
    auto* a_explore = auction->add_subcommand("explore", "Explore schedules and check norms on each");
    explore_flags.add(*a_explore, true);

    auto* norms_cmd = app.add_subcommand("norms", "Norm files and checking");
    norms_cmd->require_subcommand(1);
    std::vector<std::string> trace_files;
    std::string check_norms;
    std::size_t check_excerpt = 20;
    bool check_json = false;
    auto* n_check = norms_cmd->add_subcommand("check", "Check norms against exported traces");
    n_check->add_option("--norms", check_norms, "Comma-separated built-in norm names or norm files")->required();
    n_check->add_option("--trace", trace_files, "Trace JSON files")->required();
    n_check->add_option("--excerpt", check_excerpt, "Events shown per witness excerpt");
    n_check->add_flag("--json", check_json, "Emit one JSON document");
    std::string show_norms;
    auto* n_show = norms_cmd->add_subcommand("show", "Print norms in canonical form");
    n_show->add_option("norms", show_norms, "Comma-separated built-in norm names or norm files")->required();

    auto* logic_cmd = app.add_subcommand("logic", "Direct inference over microtheories");
    logic_cmd->require_subcommand(1);
    std::string theory;
    std::string goal;
    std::size_t depth = 10;
    std::string mode = "direct";
    std::string eps = "0";
    bool ascii = false;
    auto* l_derive = logic_cmd->add_subcommand("derive", "Search for a derivation");
    auto* l_incons = logic_cmd->add_subcommand("inconsistencies", "Report P / not-P pairs");
    auto* l_bounds = logic_cmd->add_subcommand("bounds", "Propagate probability bounds");
    for (auto* c : {l_derive, l_incons, l_bounds}) {
        c->add_option("--theory", theory, "Theory file, or boston, prince, catch22")->required();
        c->add_flag("--ascii", ascii, "ASCII operators instead of Unicode");
    }
    l_derive->add_option("--goal", goal, "Proposition or sequent to derive")->required();
    for (auto* c : {l_derive, l_incons}) {
        c->add_option("--depth", depth, "Maximum inference steps on any branch");
        c->add_option("--mode", mode, "direct or classical");
    }
    l_bounds->add_option("--eps", eps, "Tolerance of ~= and <~, e.g. 0 or 1/100");

    std::string which;
    auto* demo_cmd = app.add_subcommand("demo", "Built-in examples: boston, prince, catch22, fuzzy");
    demo_cmd->add_option("name", which, "boston, prince, catch22 or fuzzy")->required();
    demo_cmd->add_flag("--ascii", ascii, "ASCII operators instead of Unicode");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    const logic::Style style = ascii ? logic::Style::ascii : logic::Style::unicode;
    try {
        if (a_run->parsed()) return detail::auction_run(run_flags, out);
        if (a_explore->parsed()) return detail::auction_explore(explore_flags, out);
        if (n_check->parsed()) return detail::norms_check(trace_files, check_norms, check_excerpt, check_json, out);
        if (n_show->parsed()) {
            for (const auto& n : resolve_norms(detail::split(show_norms, ','))) out << norms::print(n) << "\n";
            return 0;
        }
        if (l_derive->parsed() || l_incons->parsed() || l_bounds->parsed()) {
            const auto th = detail::load_theory(theory);
            if (l_bounds->parsed()) {
                const auto b = logic::propagate_bounds(th, detail::parse_rational(eps));
                detail::print_bounds(out, b, th.name, style);
                return b.conflicts.empty() ? 0 : 1;
            }
            const auto m = logic::parse_mode(mode);
            if (l_incons->parsed()) {
                const auto found = logic::find_inconsistencies(th, depth, m);
                for (const auto& r : found) detail::print_report(out, r, th.name, style);
                out << found.size() << " inconsistenc" << (found.size() == 1 ? "y" : "ies") << " within depth " << depth << "\n";
                return found.empty() ? 0 : 1;
            }
            logic::Sequent g;
            try {
                g = goal.find("|-") != std::string::npos || goal.find("⊢") != std::string::npos ? logic::parse_sequent(goal)
                                                                                                  : logic::parse_sequent("|-" + th.name + " " + goal);
            } catch (const ParseError& e) {
                throw UsageError(std::string("goal: ") + e.what());
            }
            auto d = logic::derive(th, g, depth, m);
            if (!d) {
                out << "not derivable within depth " << depth << " (" << logic::to_string(m) << ")\n";
                return 1;
            }
            detail::print_derivation(out, *d, style, "");
            return 0;
        }
        if (demo_cmd->parsed()) return detail::demo(which, style, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const norms::UnknownRole& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const logic::UnknownTheory& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const logic::NonGroundComparison& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    err << "error: no command\n";
    return 2;
}

}  // namespace pgc::cli
