#pragma once

// Exploration reports: explore a scenario, check norms on every leaf, and
// summarize. The JSON document is the source of truth; the text report is
// rendered from it line by line.

#include <pgc/fishmarket/norms.hpp>
#include <pgc/fishmarket/scenario.hpp>
#include <pgc/norms/check.hpp>
#include <pgc/progression/progression.hpp>
#include <pgc/trace/export.hpp>
#include <pgc/trace/from_execution.hpp>

#include <json.hpp>

#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace pgc::cli {

using nlohmann::json;

struct ReportOptions {
    std::size_t excerpt_limit = 20;
    std::size_t witness_limit = 20;
    std::size_t limit = 2'000'000;  // schedules; 0 = unlimited
    bool full_trace = false;
};

/// Built-in group names expand to their norms; anything else is read as a
/// norm file.
inline std::vector<norms::NormFormula> resolve_norms(const std::vector<std::string>& names) {
    std::vector<norms::NormFormula> out;
    for (const auto& name : names) {
        if (fishmarket::is_builtin_norm(name)) {
            for (auto& n : fishmarket::builtin_norms(name)) out.push_back(std::move(n));
            continue;
        }
        std::ifstream in(name);
        if (!in) throw UsageError("unknown norm '" + name + "' (not a built-in name or a readable file)");
        std::stringstream text;
        text << in.rdbuf();
        try {
            for (auto& n : norms::parse_norm_file(text.str())) out.push_back(std::move(n));
        } catch (const ParseError& e) {
            throw UsageError(name + ": " + e.what());
        }
    }
    std::map<std::string, trace::RoleSchema> roles;
    for (const auto& r : fishmarket::role_schemas()) roles.emplace(r.role, r);
    for (const auto& n : out) norms::require_roles(n, roles);
    return out;
}

inline progression::ExploreOptions explore_options(const fishmarket::ScenarioSpec& spec, std::size_t limit) {
    progression::ExploreOptions o;
    o.bound = spec.exploration.bound.value_or(fishmarket::termination_bound(spec));
    o.strategy = spec.exploration.strategy == "random" ? progression::Strategy::random : progression::Strategy::exhaustive;
    o.seed = spec.exploration.seed;
    o.samples = spec.exploration.samples;
    o.jobs = spec.exploration.jobs;
    o.limit = limit;
    return o;
}

/// Checks every norm on every leaf; one instance per explored subtree.
struct NormSink {
    std::shared_ptr<const std::vector<norms::NormFormula>> formulas;
    norms::CheckOptions options;
    std::vector<norms::NormSummary> summaries;
    std::size_t seen = 0;

    NormSink(std::shared_ptr<const std::vector<norms::NormFormula>> f, norms::CheckOptions o, std::size_t witness_limit)
        : formulas(std::move(f)), options(o) {
        for (const auto& n : *formulas) {
            norms::NormSummary s;
            s.norm = n.name;
            s.witness_limit = witness_limit;
            summaries.push_back(std::move(s));
        }
    }

    template <class S>
    void visit(const progression::Leaf<S>& leaf) {
        for (std::size_t k = 0; k < formulas->size(); ++k) summaries[k].add(norms::check(leaf.trace(), (*formulas)[k], options, seen));
        ++seen;
    }

    void merge(NormSink&& later) {
        for (std::size_t k = 0; k < summaries.size(); ++k) summaries[k].merge(std::move(later.summaries[k]));
        seen += later.seen;
    }
};

inline json binding_json(const norms::Binding& b) {
    json out = json::array();
    for (const auto& [k, v] : b) out.push_back({k, v});
    return out;
}

inline json schedule_json(const std::vector<EnvelopeId>& s) {
    json out = json::array();
    for (const auto& id : s) out.push_back(pgc::to_string(id));
    return out;
}

inline json witness_json(const norms::Witness& w) {
    json j{{"trace", w.trace_id}, {"truncated", w.truncated}, {"binding", binding_json(w.binding)}, {"schedule", schedule_json(w.schedule)},
           {"excerpt", w.excerpt}};
    if (w.near_miss) {
        json failed = json::array();
        for (const auto& f : w.near_miss->failed) failed.push_back({{"constraint", f.constraint}, {"lhs", f.lhs}, {"rhs", f.rhs}});
        j["near_miss"] = {{"binding", binding_json(w.near_miss->binding)}, {"failed", failed}, {"note", w.near_miss->note}};
    } else {
        j["near_miss"] = nullptr;
    }
    return j;
}

struct Report {
    json document;
    int exit_code = 0;
};

/// Runs the explore, annotate, check pipeline. Throws ExplorationLimit when
/// the schedule limit is exceeded.
inline Report explore_report(const fishmarket::ScenarioSpec& spec, const std::vector<norms::NormFormula>& formulas, const ReportOptions& ro = {}) {
    const auto sc = fishmarket::build_scenario(spec);
    const auto opt = explore_options(spec, ro.limit);
    norms::CheckOptions co;
    co.excerpt_limit = ro.excerpt_limit;
    auto shared = std::make_shared<const std::vector<norms::NormFormula>>(formulas);
    auto result = progression::explore(sc.system, opt, NormSink(shared, co, ro.witness_limit));

    Report r;
    json& d = r.document;
    d["scenario"] = fishmarket::spec_to_json(spec);
    d["exploration"] = {{"strategy", spec.exploration.strategy}, {"bound", opt.bound}, {"seed", opt.seed}, {"samples", opt.samples}};
    d["schedules"] = {{"total", result.stats.schedules}, {"complete", result.stats.complete}, {"truncated", result.stats.truncated}};
    d["norms"] = json::array();
    bool violated = false;
    for (std::size_t k = 0; k < formulas.size(); ++k) {
        const auto& s = result.sink.summaries[k];
        json n{{"name", s.norm},
               {"formula", norms::print(formulas[k])},
               {"status", norms::to_string(s.status())},
               {"traces", s.traces},
               {"holds", s.holds},
               {"violated", s.violated},
               {"vacuous", s.vacuous},
               {"inconclusive", s.inconclusive}};
        n["witnesses"] = json::array();
        for (const auto& w : s.witnesses) {
            json wj = witness_json(w);
            if (ro.full_trace) {
                auto config = progression::replay(sc.system, w.schedule);
                wj["full_trace"] = trace::to_json(trace::from_execution(config, sc.system, w.truncated));
            }
            n["witnesses"].push_back(std::move(wj));
        }
        violated |= s.violated > 0;
        d["norms"].push_back(std::move(n));
    }
    d["result"] = violated ? "violation" : "ok";
    r.exit_code = violated ? 1 : 0;
    return r;
}

inline std::string join(const json& arr, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < arr.size(); ++i) out += (i > 0 ? sep : "") + arr[i].get<std::string>();
    return out;
}

inline std::string binding_text(const json& b) {
    std::string out;
    for (std::size_t i = 0; i < b.size(); ++i) out += (i > 0 ? ", " : "") + b[i][0].get<std::string>() + "=" + b[i][1].get<std::string>();
    return out;
}

/// One line per event of a trace, then one per participation.
inline std::vector<std::string> trace_lines(const trace::Trace& t) {
    std::vector<std::string> out;
    for (const auto& a : t.actors) {
        for (const auto& e : t.timeline(a.id)) {
            std::string line = a.name + "#" + std::to_string(e.index) + " " + trace::to_string(e.kind) + " " + pgc::to_string(e.payload);
            if (e.kind == trace::EventKind::receive) {
                line += " from " + (e.peer.is_external() ? std::string("outside") : t.actors.at(e.peer.value).name);
            } else if (e.kind == trace::EventKind::send) {
                line += " to " + t.actors.at(e.peer.value).name;
            }
            if (e.envelope) line += " [" + pgc::to_string(*e.envelope) + "]";
            out.push_back(std::move(line));
        }
    }
    for (const auto& p : t.participations) {
        std::string line = "participation " + p.role;
        for (const auto& r : p.regions) {
            line += " " + t.actors.at(r.actor.value).name + "#" + std::to_string(r.begin) + ".." + (r.end ? std::to_string(*r.end) : std::string("open"));
        }
        for (const auto& [k, v] : p.attributes) {
            const auto* actor = std::get_if<ActorId>(&v);
            line += " " + k + "=" + (actor && !actor->is_external() ? t.actors.at(actor->value).name : pgc::to_string(v));
        }
        out.push_back(std::move(line));
    }
    return out;
}

inline std::string render_text(const json& d) {
    std::ostringstream o;
    const auto& sc = d.at("scenario");
    std::string bidders;
    for (const auto& b : sc.at("bidders")) {
        bidders += (bidders.empty() ? "" : ",") + b.at("name").get<std::string>() + ":" + std::to_string(b.at("maximum").get<long long>()) + ":" +
                   b.at("honesty").get<std::string>();
    }
    o << "scenario bidders=" << bidders << " reserve=" << sc.at("reserve") << " increment=" << sc.at("increment") << " item=" << sc.at("item").get<std::string>()
      << " mutant=" << sc.at("mutant").get<std::string>() << "\n";
    const auto& ex = d.at("exploration");
    o << "exploration strategy=" << ex.at("strategy").get<std::string>() << " bound=" << ex.at("bound") << " seed=" << ex.at("seed") << " samples=" << ex.at("samples")
      << "\n";
    const auto& s = d.at("schedules");
    o << "schedules total=" << s.at("total") << " complete=" << s.at("complete") << " truncated=" << s.at("truncated") << "\n";
    for (const auto& n : d.at("norms")) {
        o << "norm " << n.at("name").get<std::string>() << " status=" << n.at("status").get<std::string>() << " traces=" << n.at("traces")
          << " holds=" << n.at("holds") << " violated=" << n.at("violated") << " vacuous=" << n.at("vacuous") << " inconclusive=" << n.at("inconclusive")
          << "\n";
        o << "  formula " << n.at("formula").get<std::string>() << "\n";
        for (const auto& w : n.at("witnesses")) {
            o << "  witness trace=" << w.at("trace") << (w.at("truncated").get<bool>() ? " truncated" : "") << "\n";
            o << "    binding " << binding_text(w.at("binding")) << "\n";
            o << "    schedule " << join(w.at("schedule"), " ") << "\n";
            if (w.contains("full_trace")) {
                for (const auto& line : trace_lines(trace::from_json(w.at("full_trace")))) o << "    event " << line << "\n";
            } else {
                for (const auto& line : w.at("excerpt")) o << "    excerpt " << line.get<std::string>() << "\n";
            }
            if (!w.at("near_miss").is_null()) {
                const auto& nm = w.at("near_miss");
                o << "    near-miss";
                if (!nm.at("binding").empty()) o << " " << binding_text(nm.at("binding"));
                if (!nm.at("note").get<std::string>().empty()) o << " (" << nm.at("note").get<std::string>() << ")";
                o << "\n";
                for (const auto& f : nm.at("failed")) {
                    o << "      failed " << f.at("constraint").get<std::string>() << ": " << f.at("lhs").get<std::string>() << " vs "
                      << f.at("rhs").get<std::string>() << "\n";
                }
            }
        }
    }
    o << "result " << d.at("result").get<std::string>() << "\n";
    return o.str();
}

}  // namespace pgc::cli
