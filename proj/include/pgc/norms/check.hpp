#pragma once

// Norm checking over participation traces. Every antecedent match must be
// extended to a consequent match; the search is existential over the whole
// trace (or over a commitment's scope) and uses only causal order and
// attribute values, never the delivery schedule.

#include <pgc/norms/norm.hpp>
#include <pgc/trace/trace.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace pgc::norms {

class UnknownRole : public Error {
public:
    using Error::Error;
};

enum class Status { holds, violated, vacuous, inconclusive };

inline const char* to_string(Status s) {
    switch (s) {
        case Status::holds: return "holds";
        case Status::violated: return "violated";
        case Status::vacuous: return "vacuous";
        case Status::inconclusive: return "inconclusive";
    }
    return "?";
}

using Binding = std::vector<std::pair<std::string, std::string>>;

struct FailedConstraint {
    std::string constraint;
    std::string lhs;
    std::string rhs;

    friend bool operator==(const FailedConstraint&, const FailedConstraint&) = default;
};

/// The consequent candidate that came closest: the fewest failed constraints.
struct NearMiss {
    Binding binding;
    std::vector<FailedConstraint> failed;
    std::string note;

    friend bool operator==(const NearMiss&, const NearMiss&) = default;
};

struct Witness {
    std::size_t trace_id = 0;
    Binding binding;
    std::vector<EnvelopeId> schedule;  // replays the trace
    std::vector<std::string> excerpt;
    std::optional<NearMiss> near_miss;
    bool truncated = false;

    friend bool operator==(const Witness&, const Witness&) = default;
};

struct Verdict {
    Status status = Status::vacuous;
    std::size_t matches = 0;   // antecedent matches
    std::size_t failures = 0;  // matches without a consequent
    std::vector<Witness> witnesses;
};

struct CheckOptions {
    std::size_t excerpt_limit = 20;
    std::size_t near_miss_budget = 100000;  // candidate assignments examined
};

/// Pledged information: a norm held by a whole system over a scope. An empty
/// scope is the whole trace; otherwise only participations lying entirely on
/// the named actors are considered.
struct Commitment {
    std::string pledger = "FishMarket";
    NormFormula norm;
    std::vector<std::string> scope;
};

/// Throws UnknownRole unless every pattern names a declared role with the
/// right number of arguments.
inline void require_roles(const NormFormula& n, const std::map<std::string, trace::RoleSchema>& roles) {
    auto check_pattern = [&](const Pattern& p) {
        auto it = roles.find(p.role);
        if (it == roles.end()) throw UnknownRole("norm " + n.name + " references unknown role " + p.role);
        if (it->second.positional.size() != p.args.size()) {
            throw UnknownRole("role " + p.role + " takes " + std::to_string(it->second.positional.size() + 1) + " arguments in norm " + n.name);
        }
    };
    for (const auto& p : n.antecedent) check_pattern(p);
    for (const auto& p : n.consequent) check_pattern(p);
}

namespace detail {

struct Slot {
    bool is_part = false;
    Value value;
    std::size_t part = 0;
};

using Env = std::vector<std::pair<std::string, Slot>>;

inline const Slot* lookup(const Env& env, const std::string& name) {
    for (const auto& [n, s] : env) {
        if (n == name) return &s;
    }
    return nullptr;
}

struct Resolved {
    bool missing = false;
    bool is_part = false;
    Value value;
    std::size_t part = 0;
};

class Matcher {
public:
    Matcher(const trace::Trace& t, const NormFormula& n, std::vector<std::size_t> visible, const CheckOptions& opt)
        : t_(t), n_(n), opt_(opt) {
        for (std::size_t i : visible) by_role_[t.participations[i].role].push_back(i);
        require_roles(n, t.roles);
        ante_levels_ = levels(n.antecedent, n.antecedent_where, {});
    }

    Verdict run(std::size_t trace_id) {
        Verdict v;
        bool violated = false;
        bool inconclusive = false;
        Env env;
        enumerate(n_.antecedent, n_.antecedent_where, ante_levels_, 0, env, [&](const Env& match) {
            ++v.matches;
            if (!n_.consequent_false && consequent_holds(match)) return true;
            ++v.failures;
            const bool soft = !n_.consequent_false && t_.truncated;
            if (soft) {
                inconclusive = true;
            } else {
                violated = true;
            }
            if (v.witnesses.empty()) v.witnesses.push_back(witness(match, trace_id));
            return true;
        });
        v.status = violated ? Status::violated : inconclusive ? Status::inconclusive : v.matches > 0 ? Status::holds : Status::vacuous;
        return v;
    }

private:
    using Visit = std::function<bool(const Env&)>;  // false stops the enumeration

    // level at which each constraint becomes fully bound
    std::vector<std::size_t> levels(const std::vector<Pattern>& ps, const std::vector<Constraint>& cs, const Env& outer) const {
        std::map<std::string, std::size_t> intro;
        for (const auto& [name, slot] : outer) intro[name] = 0;
        for (std::size_t k = 0; k < ps.size(); ++k) {
            intro.emplace(ps[k].var, k);
            for (const auto& a : ps[k].args) {
                if (a != "_") intro.emplace(a, k);
            }
        }
        std::vector<std::size_t> out;
        for (const auto& c : cs) {
            std::size_t lvl = 0;
            for (const Operand* o : {&c.lhs, &c.rhs}) {
                if (o->kind == Operand::Kind::attribute || o->kind == Operand::Kind::variable) {
                    auto it = intro.find(o->var);
                    if (it != intro.end()) lvl = std::max(lvl, it->second);
                }
            }
            out.push_back(lvl);
        }
        return out;
    }

    bool enumerate(const std::vector<Pattern>& ps, const std::vector<Constraint>& cs, const std::vector<std::size_t>& lv, std::size_t k,
                   Env& env, const Visit& visit) const {
        if (k == ps.size()) return visit(env);
        const Pattern& p = ps[k];
        auto it = by_role_.find(p.role);
        if (it == by_role_.end()) return true;
        const auto& positional = t_.roles.at(p.role).positional;
        for (std::size_t idx : it->second) {
            const std::size_t mark = env.size();
            if (bind(p, positional, idx, env)) {
                bool ok = true;
                for (std::size_t c = 0; c < cs.size() && ok; ++c) {
                    if (lv[c] == k) ok = eval(cs[c], env);
                }
                if (ok && !enumerate(ps, cs, lv, k + 1, env, visit)) {
                    env.resize(mark);
                    return false;
                }
            }
            env.resize(mark);
        }
        return true;
    }

    bool bind(const Pattern& p, const std::vector<std::string>& positional, std::size_t idx, Env& env) const {
        const auto& part = t_.participations[idx];
        for (std::size_t i = 0; i < p.args.size(); ++i) {
            if (p.args[i] == "_") continue;
            auto a = part.attributes.find(positional[i]);
            if (a == part.attributes.end()) return false;
            if (const Slot* s = lookup(env, p.args[i])) {
                if (s->is_part || s->value != a->second) return false;
            } else {
                env.emplace_back(p.args[i], Slot{false, a->second, 0});
            }
        }
        env.emplace_back(p.var, Slot{true, Value{}, idx});
        return true;
    }

    Resolved resolve(const Operand& o, const Env& env) const {
        Resolved r;
        switch (o.kind) {
            case Operand::Kind::integer: r.value = o.number; return r;
            case Operand::Kind::text: r.value = o.literal; return r;
            case Operand::Kind::variable: {
                const Slot* s = lookup(env, o.var);
                if (s == nullptr) {
                    r.missing = true;
                } else {
                    r.is_part = s->is_part;
                    r.value = s->value;
                    r.part = s->part;
                }
                return r;
            }
            case Operand::Kind::attribute: {
                const Slot* s = lookup(env, o.var);
                if (s == nullptr || !s->is_part) {
                    r.missing = true;
                    return r;
                }
                const auto& attrs = t_.participations[s->part].attributes;
                auto it = attrs.find(o.attr);
                if (it == attrs.end()) {
                    r.missing = true;
                } else {
                    r.value = it->second;
                }
                return r;
            }
        }
        r.missing = true;
        return r;
    }

    bool eval(const Constraint& c, const Env& env) const {
        const Resolved l = resolve(c.lhs, env);
        const Resolved r = resolve(c.rhs, env);
        if (l.missing || r.missing) return false;
        if (is_ordering(c.op)) {
            if (!l.is_part || !r.is_part) return false;
            const auto o = trace::happens_before(t_, t_.participations[l.part], t_.participations[r.part]);
            switch (c.op) {
                case Op::before: return o == trace::Order::before;
                case Op::after: return o == trace::Order::after;
                default: return o == trace::Order::concurrent;
            }
        }
        if (l.is_part || r.is_part) {
            const bool same = l.is_part && r.is_part && l.part == r.part;
            if (c.op == Op::eq) return same;
            if (c.op == Op::ne) return !same;
            return false;
        }
        if (c.op == Op::eq) return l.value == r.value;
        if (c.op == Op::ne) return l.value != r.value;
        const auto* a = std::get_if<std::int64_t>(&l.value);
        const auto* b = std::get_if<std::int64_t>(&r.value);
        if (a == nullptr || b == nullptr) return false;
        switch (c.op) {
            case Op::lt: return *a < *b;
            case Op::le: return *a <= *b;
            case Op::gt: return *a > *b;
            case Op::ge: return *a >= *b;
            default: return false;
        }
    }

    bool consequent_holds(const Env& match) const {
        Env env = match;
        auto lv = levels(n_.consequent, n_.consequent_where, match);
        bool found = false;
        enumerate(n_.consequent, n_.consequent_where, lv, 0, env, [&](const Env&) {
            found = true;
            return false;
        });
        return found;
    }

    std::optional<NearMiss> near_miss(const Env& match) const {
        if (n_.consequent_false) return std::nullopt;
        Env env = match;
        const std::vector<Constraint> none;
        const std::vector<std::size_t> no_levels;
        std::optional<NearMiss> best;
        std::size_t best_failed = 0;
        std::size_t budget = opt_.near_miss_budget;
        enumerate(n_.consequent, none, no_levels, 0, env, [&](const Env& cand) {
            std::vector<FailedConstraint> failed;
            for (const auto& c : n_.consequent_where) {
                if (!eval(c, cand)) failed.push_back(FailedConstraint{to_string(c), render(resolve(c.lhs, cand)), render(resolve(c.rhs, cand))});
            }
            if (!best || failed.size() < best_failed) {
                best = NearMiss{render(cand, match.size()), failed, {}};
                best_failed = failed.size();
            }
            return --budget > 0;
        });
        if (!best) {
            std::string roles;
            for (const auto& p : n_.consequent) roles += (roles.empty() ? "" : ", ") + p.role;
            best = NearMiss{{}, {}, "no participation combination of " + roles + " agrees with the binding"};
        }
        return best;
    }

    std::string actor_name(ActorId a) const {
        if (!a.is_external() && a.value < t_.actors.size()) return t_.actors[a.value].name;
        return pgc::to_string(a);
    }

    std::string render(const Value& v) const {
        if (const auto* a = std::get_if<ActorId>(&v)) return actor_name(*a);
        return pgc::to_string(v);
    }

    std::string render_part(std::size_t idx) const {
        const auto& p = t_.participations[idx];
        std::string out = p.role + "@";
        for (std::size_t i = 0; i < p.regions.size(); ++i) {
            const auto& r = p.regions[i];
            if (i > 0) out += "+";
            out += actor_name(r.actor) + "#" + std::to_string(r.begin);
            if (!r.end) {
                out += "..";
            } else if (*r.end != r.begin) {
                out += ".." + std::to_string(*r.end);
            }
        }
        return out;
    }

    std::string render(const Resolved& r) const {
        if (r.missing) return "<missing>";
        if (r.is_part) return render_part(r.part);
        return render(r.value);
    }

    Binding render(const Env& env, std::size_t from = 0) const {
        Binding out;
        for (std::size_t i = from; i < env.size(); ++i) {
            const auto& [name, slot] = env[i];
            out.emplace_back(name, slot.is_part ? render_part(slot.part) : render(slot.value));
        }
        return out;
    }

    std::vector<std::string> excerpt(const Env& env) const {
        std::vector<trace::EventRef> events;
        for (const auto& [name, slot] : env) {
            if (!slot.is_part) continue;
            for (const auto& r : t_.participations[slot.part].regions) {
                auto last = t_.last_index(r);
                if (!last) continue;
                for (std::uint32_t i = r.begin; i <= *last; ++i) events.push_back(trace::EventRef{r.actor, i});
            }
        }
        std::sort(events.begin(), events.end());
        events.erase(std::unique(events.begin(), events.end()), events.end());
        std::vector<std::string> out;
        for (std::size_t i = 0; i < events.size() && i < opt_.excerpt_limit; ++i) {
            const auto& e = t_.event(events[i]);
            std::string line = actor_name(events[i].actor) + "#" + std::to_string(e.index) + " " + trace::to_string(e.kind) + " " + pgc::to_string(e.payload);
            if (e.kind == trace::EventKind::receive) line += " from " + actor_name(e.peer);
            if (e.kind == trace::EventKind::send) line += " to " + actor_name(e.peer);
            out.push_back(std::move(line));
        }
        if (events.size() > opt_.excerpt_limit) out.push_back("(" + std::to_string(events.size() - opt_.excerpt_limit) + " more events)");
        return out;
    }

    Witness witness(const Env& match, std::size_t trace_id) const {
        Witness w;
        w.trace_id = trace_id;
        w.binding = render(match);
        w.schedule = t_.schedule;
        w.excerpt = excerpt(match);
        w.near_miss = near_miss(match);
        w.truncated = t_.truncated;
        return w;
    }

    const trace::Trace& t_;
    const NormFormula& n_;
    const CheckOptions& opt_;
    std::map<std::string, std::vector<std::size_t>> by_role_;
    std::vector<std::size_t> ante_levels_;
};

inline std::vector<std::size_t> all_participations(const trace::Trace& t) {
    std::vector<std::size_t> out(t.participations.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
    return out;
}

}  // namespace detail

inline Verdict check(const trace::Trace& t, const NormFormula& norm, const CheckOptions& options = {}, std::size_t trace_id = 0) {
    detail::Matcher m(t, norm, detail::all_participations(t), options);
    return m.run(trace_id);
}

inline Verdict check(const trace::Trace& t, const Commitment& c, const CheckOptions& options = {}, std::size_t trace_id = 0) {
    if (c.scope.empty()) return check(t, c.norm, options, trace_id);
    std::vector<ActorId> scoped;
    for (const auto& name : c.scope) {
        auto it = std::find_if(t.actors.begin(), t.actors.end(), [&](const trace::ActorInfo& a) { return a.name == name; });
        if (it == t.actors.end()) throw UsageError("commitment scope names unknown actor '" + name + "'");
        scoped.push_back(it->id);
    }
    std::vector<std::size_t> visible;
    for (std::size_t i = 0; i < t.participations.size(); ++i) {
        const auto& regions = t.participations[i].regions;
        bool inside = std::all_of(regions.begin(), regions.end(), [&](const trace::Region& r) {
            return std::find(scoped.begin(), scoped.end(), r.actor) != scoped.end();
        });
        if (inside) visible.push_back(i);
    }
    detail::Matcher m(t, c.norm, std::move(visible), options);
    return m.run(trace_id);
}

/// Per-norm aggregate over a trace set. Counts are exact; at most
/// `witness_limit` violation witnesses are kept (0 keeps all), in trace order.
struct NormSummary {
    std::string norm;
    std::size_t traces = 0;
    std::size_t holds = 0;
    std::size_t violated = 0;
    std::size_t vacuous = 0;
    std::size_t inconclusive = 0;
    std::vector<Witness> witnesses;
    std::size_t witness_limit = 20;

    void add(const Verdict& v) {
        ++traces;
        switch (v.status) {
            case Status::holds: ++holds; break;
            case Status::violated: ++violated; break;
            case Status::vacuous: ++vacuous; break;
            case Status::inconclusive: ++inconclusive; break;
        }
        if (v.status == Status::violated) {
            for (const auto& w : v.witnesses) {
                if (witness_limit == 0 || witnesses.size() < witness_limit) witnesses.push_back(w);
            }
        }
    }

    /// Appends a summary of the traces that follow this one's; their ids are
    /// shifted past ours.
    void merge(NormSummary&& later) {
        for (auto& w : later.witnesses) {
            if (witness_limit != 0 && witnesses.size() >= witness_limit) break;
            w.trace_id += traces;
            witnesses.push_back(std::move(w));
        }
        traces += later.traces;
        holds += later.holds;
        violated += later.violated;
        vacuous += later.vacuous;
        inconclusive += later.inconclusive;
    }

    /// The overall status over the set: any violation wins, then any
    /// inconclusive trace, then holds if anything matched.
    Status status() const {
        if (violated > 0) return Status::violated;
        if (inconclusive > 0) return Status::inconclusive;
        if (holds > 0) return Status::holds;
        return Status::vacuous;
    }
};

inline NormSummary check_all(const std::vector<trace::Trace>& traces, const NormFormula& norm, const CheckOptions& options = {},
                             std::size_t witness_limit = 20) {
    NormSummary s;
    s.norm = norm.name;
    s.witness_limit = witness_limit;
    for (std::size_t i = 0; i < traces.size(); ++i) s.add(check(traces[i], norm, options, i));
    return s;
}

}  // namespace pgc::norms
