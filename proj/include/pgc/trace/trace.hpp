#pragma once

// Space-time trace model: per-actor local timelines joined by message
// transmissions, with named participations (regions) laid over them. There is
// no global clock; order is the causal order generated by local order and
// transmission edges.

#include <pgc/core/value.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pgc::trace {

enum class EventKind { receive, send, internal };

inline const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::receive: return "receive";
        case EventKind::send: return "send";
        case EventKind::internal: return "internal";
    }
    return "?";
}

struct EventRef {
    ActorId actor;
    std::uint32_t index = 0;

    friend constexpr auto operator<=>(const EventRef&, const EventRef&) = default;
};

struct Event {
    std::uint32_t index = 0;
    EventKind kind = EventKind::internal;
    std::optional<EnvelopeId> envelope;  // absent for internal events
    ActorId peer = ActorId::external();  // sender for receive, target for send
    Message payload;

    friend bool operator==(const Event&, const Event&) = default;
};

struct Transmission {
    EnvelopeId envelope;
    std::optional<EventRef> send;  // absent for externally injected messages
    EventRef arrival;
    std::string tag;

    friend bool operator==(const Transmission&, const Transmission&) = default;
};

/// Interval of one actor's local timeline. `end == nullopt` marks a region
/// still open at the horizon of a truncated trace.
struct Region {
    ActorId actor;
    std::uint32_t begin = 0;
    std::optional<std::uint32_t> end;

    friend bool operator==(const Region&, const Region&) = default;
    friend auto operator<=>(const Region& a, const Region& b) {
        if (auto c = a.actor <=> b.actor; c != 0) return c;
        if (auto c = a.begin <=> b.begin; c != 0) return c;
        // open regions sort after closed ones
        if (a.end.has_value() != b.end.has_value()) return a.end.has_value() ? std::strong_ordering::less : std::strong_ordering::greater;
        return a.end.value_or(0) <=> b.end.value_or(0);
    }
};

using Attributes = std::map<std::string, Value>;

/// A participation may span several actors (a delivery occupies the seller at
/// the send and the buyer at the arrival), so it carries one region per actor
/// it touches.
struct Participation {
    std::string role;
    std::vector<Region> regions;
    Attributes attributes;

    friend bool operator==(const Participation&, const Participation&) = default;
};

struct RoleSchema {
    std::string role;
    std::vector<std::string> positional;  // attribute names bound by pattern arguments

    friend bool operator==(const RoleSchema&, const RoleSchema&) = default;
};

struct ActorInfo {
    ActorId id;
    std::string name;
    std::string kind;

    friend bool operator==(const ActorInfo&, const ActorInfo&) = default;
};

class InvalidTrace : public Error {
public:
    using Error::Error;
};

enum class Order { before, after, concurrent, same };

inline const char* to_string(Order o) {
    switch (o) {
        case Order::before: return "before";
        case Order::after: return "after";
        case Order::concurrent: return "concurrent";
        case Order::same: return "same";
    }
    return "?";
}

class Trace {
public:
    std::vector<ActorInfo> actors;
    std::vector<std::vector<Event>> timelines;  // indexed by actor id
    std::vector<Transmission> transmissions;
    std::vector<Participation> participations;
    std::map<std::string, RoleSchema> roles;
    std::vector<EnvelopeId> schedule;  // delivery order that produced this trace
    bool truncated = false;

    std::size_t actor_count() const noexcept { return timelines.size(); }

    const std::vector<Event>& timeline(ActorId a) const {
        if (a.is_external() || a.value >= timelines.size()) throw InvalidTrace("unknown actor " + pgc::to_string(a));
        return timelines[a.value];
    }

    bool contains(EventRef e) const noexcept {
        return !e.actor.is_external() && e.actor.value < timelines.size() && e.index < timelines[e.actor.value].size();
    }

    const Event& event(EventRef e) const {
        if (!contains(e)) throw InvalidTrace("event " + pgc::to_string(e.actor) + "#" + std::to_string(e.index) + " not in trace");
        return timelines[e.actor.value][e.index];
    }

    /// Validates structure and computes vector clocks. Must be called after the
    /// timelines and transmissions are final; throws InvalidTrace on dangling
    /// transmissions or a causal cycle.
    void finalize() {
        const std::size_t n = timelines.size();
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t i = 0; i < timelines[a].size(); ++i) {
                if (timelines[a][i].index != i) throw InvalidTrace("non-contiguous local index on " + pgc::to_string(ActorId{static_cast<std::uint32_t>(a)}));
            }
        }
        // incoming transmission edge per receive event
        std::vector<std::vector<std::optional<EventRef>>> incoming(n);
        for (std::size_t a = 0; a < n; ++a) incoming[a].assign(timelines[a].size(), std::nullopt);
        for (const auto& t : transmissions) {
            if (!contains(t.arrival)) throw InvalidTrace("transmission " + pgc::to_string(t.envelope) + " arrives outside the trace");
            if (event(t.arrival).kind != EventKind::receive) throw InvalidTrace("transmission " + pgc::to_string(t.envelope) + " arrives at a non-receive event");
            if (t.send) {
                if (!contains(*t.send)) throw InvalidTrace("transmission " + pgc::to_string(t.envelope) + " sent outside the trace");
                if (event(*t.send).kind != EventKind::send) throw InvalidTrace("transmission " + pgc::to_string(t.envelope) + " leaves from a non-send event");
            }
            auto& slot = incoming[t.arrival.actor.value][t.arrival.index];
            if (slot) throw InvalidTrace("two transmissions arrive at one event");
            slot = t.send ? t.send : std::optional<EventRef>{EventRef{ActorId::external(), 0}};
        }

        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t i = 0; i < timelines[a].size(); ++i) {
                if (timelines[a][i].kind == EventKind::receive && !incoming[a][i]) {
                    throw InvalidTrace("receive event without a transmission on " + pgc::to_string(ActorId{static_cast<std::uint32_t>(a)}));
                }
            }
        }

        clocks_.assign(n, {});
        for (std::size_t a = 0; a < n; ++a) clocks_[a].assign(timelines[a].size() * n, 0);
        std::vector<std::uint32_t> progress(n, 0);  // next unprocessed local index
        std::size_t remaining = 0;
        for (const auto& tl : timelines) remaining += tl.size();
        while (remaining > 0) {
            bool advanced = false;
            for (std::size_t a = 0; a < n; ++a) {
                while (progress[a] < timelines[a].size()) {
                    const std::uint32_t i = progress[a];
                    const auto& in = incoming[a][i];
                    if (in && !in->actor.is_external() && progress[in->actor.value] <= in->index) break;
                    std::uint32_t* vc = &clocks_[a][i * n];
                    if (i > 0) std::copy_n(&clocks_[a][(i - 1) * n], n, vc);
                    if (in && !in->actor.is_external()) {
                        const std::uint32_t* other = &clocks_[in->actor.value][in->index * n];
                        for (std::size_t k = 0; k < n; ++k) vc[k] = std::max(vc[k], other[k]);
                    }
                    vc[a] = i + 1;
                    ++progress[a];
                    --remaining;
                    advanced = true;
                }
            }
            if (!advanced) throw InvalidTrace("causal order contains a cycle");
        }
        finalized_ = true;
    }

    bool finalized() const noexcept { return finalized_; }

    /// Strict causal precedence between two events (irreflexive).
    bool precedes(EventRef a, EventRef b) const {
        require_finalized();
        if (!contains(a)) throw InvalidTrace("event " + pgc::to_string(a.actor) + "#" + std::to_string(a.index) + " not in trace");
        if (!contains(b)) throw InvalidTrace("event " + pgc::to_string(b.actor) + "#" + std::to_string(b.index) + " not in trace");
        if (a == b) return false;
        return clocks_[b.actor.value][b.index * timelines.size() + a.actor.value] >= a.index + 1;
    }

    /// Last event index covered by a region, resolving open ends against the
    /// actor's timeline. nullopt when the region covers no recorded event.
    std::optional<std::uint32_t> last_index(const Region& r) const {
        const auto& tl = timeline(r.actor);
        if (r.end) return *r.end;
        if (tl.empty() || r.begin >= tl.size()) return std::nullopt;
        return static_cast<std::uint32_t>(tl.size() - 1);
    }

    void validate(const Region& r) const {
        const auto& tl = timeline(r.actor);
        if (r.end && *r.end < r.begin) throw InvalidTrace("region end precedes begin on " + pgc::to_string(r.actor));
        if (r.end && *r.end >= tl.size()) throw InvalidTrace("region extends past the timeline of " + pgc::to_string(r.actor));
        if (!r.end && r.begin > tl.size()) throw InvalidTrace("open region starts past the timeline of " + pgc::to_string(r.actor));
    }

private:
    void require_finalized() const {
        if (!finalized_) throw InvalidTrace("trace not finalized");
    }

    std::vector<std::vector<std::uint32_t>> clocks_;
    bool finalized_ = false;
};

// ---------------------------------------------------------------------------
// Causal order queries
// ---------------------------------------------------------------------------

namespace detail {

struct Bounds {
    EventRef first;
    EventRef last;
};

inline std::vector<Bounds> covered(const Trace& t, const std::vector<Region>& regions) {
    std::vector<Bounds> out;
    for (const auto& r : regions) {
        t.validate(r);
        auto last = t.last_index(r);
        if (!last || *last < r.begin) continue;
        out.push_back({EventRef{r.actor, r.begin}, EventRef{r.actor, *last}});
    }
    return out;
}

inline std::vector<Region> normalized(const Trace& t, std::vector<Region> regions) {
    for (auto& r : regions) {
        if (!r.end) r.end = t.last_index(r);
    }
    std::sort(regions.begin(), regions.end());
    regions.erase(std::unique(regions.begin(), regions.end()), regions.end());
    return regions;
}

inline bool all_before(const Trace& t, const std::vector<Bounds>& p, const std::vector<Bounds>& q) {
    if (p.empty() || q.empty()) return false;
    for (const auto& a : p) {
        for (const auto& b : q) {
            if (!t.precedes(a.last, b.first)) return false;
        }
    }
    return true;
}

}  // namespace detail

/// `before` iff every event of p causally precedes every event of q.
inline Order happens_before(const Trace& t, const std::vector<Region>& p, const std::vector<Region>& q) {
    if (detail::normalized(t, p) == detail::normalized(t, q)) return Order::same;
    auto bp = detail::covered(t, p);
    auto bq = detail::covered(t, q);
    if (detail::all_before(t, bp, bq)) return Order::before;
    if (detail::all_before(t, bq, bp)) return Order::after;
    return Order::concurrent;
}

inline Order happens_before(const Trace& t, EventRef p, EventRef q) {
    (void)t.event(p);
    (void)t.event(q);
    if (p == q) return Order::same;
    if (t.precedes(p, q)) return Order::before;
    if (t.precedes(q, p)) return Order::after;
    return Order::concurrent;
}

inline Order happens_before(const Trace& t, const Participation& p, const Participation& q) {
    return happens_before(t, p.regions, q.regions);
}

inline Region point(EventRef e) { return Region{e.actor, e.index, e.index}; }

/// Adjacency of two regions on one actor: r2 begins immediately after r1 ends.
/// Nothing is required of the events at the boundary.
inline bool adjacent(const Trace& t, const Region& r1, const Region& r2) {
    if (r1.actor != r2.actor) throw InvalidTrace("adjacency is defined only for regions on the same actor");
    t.validate(r1);
    t.validate(r2);
    if (!r1.end) return false;
    return *r1.end + 1 == r2.begin;
}

// ---------------------------------------------------------------------------
// Annotation
// ---------------------------------------------------------------------------

struct AnnotationRule {
    std::string name;
    std::vector<RoleSchema> roles;
    std::function<std::vector<Participation>(const Trace&)> derive;
};

inline void validate(const Trace& t, const Participation& p) {
    auto it = t.roles.find(p.role);
    if (it == t.roles.end()) throw InvalidTrace("participation of undeclared role " + p.role);
    if (p.regions.empty()) throw InvalidTrace("participation " + p.role + " has no region");
    for (const auto& r : p.regions) t.validate(r);
    for (const auto& attr : it->second.positional) {
        if (!p.attributes.count(attr)) throw InvalidTrace("participation " + p.role + " lacks attribute '" + attr + "'");
    }
}

/// Adds the rule's participations. Re-applying the same rule is a no-op.
inline Trace annotate(Trace t, const AnnotationRule& rule) {
    for (const auto& schema : rule.roles) {
        auto [it, inserted] = t.roles.emplace(schema.role, schema);
        if (!inserted && it->second != schema) throw InvalidTrace("rule " + rule.name + " redeclares role " + schema.role + " with a different schema");
    }
    auto derived = rule.derive(t);
    for (auto& p : derived) {
        bool declared = std::any_of(rule.roles.begin(), rule.roles.end(), [&](const RoleSchema& s) { return s.role == p.role; });
        if (!declared) throw InvalidTrace("rule " + rule.name + " produced undeclared role " + p.role);
        validate(t, p);
        if (std::find(t.participations.begin(), t.participations.end(), p) == t.participations.end()) {
            t.participations.push_back(std::move(p));
        }
    }
    return t;
}

/// Stable identity of the causal content (timelines), independent of the
/// interleaving that produced it.
inline std::string canonical_key(const Trace& t) {
    std::string key;
    for (std::size_t a = 0; a < t.timelines.size(); ++a) {
        key += '|';
        for (const auto& e : t.timelines[a]) {
            key += static_cast<char>('0' + static_cast<int>(e.kind));
            if (e.envelope) key += pgc::to_string(*e.envelope);
            key += ':';
            key += e.payload.tag();
            key += ';';
        }
    }
    if (t.truncated) key += "|T";
    return key;
}

}  // namespace pgc::trace
