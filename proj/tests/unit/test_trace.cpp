#include <pgc/fishmarket/scenario.hpp>
#include <pgc/progression/progression.hpp>
#include <pgc/trace/export.hpp>
#include <pgc/trace/trace.hpp>

#include <gtest/gtest.h>

#include <deque>

using namespace pgc;
using trace::EventKind;
using trace::EventRef;
using trace::Order;

namespace {

trace::Event internal(std::uint32_t i, const char* tag) { return trace::Event{i, EventKind::internal, std::nullopt, ActorId{0}, Message(tag)}; }

// One actor, ten identical internal events.
trace::Trace driving() {
    trace::Trace t;
    t.actors.push_back(trace::ActorInfo{ActorId{0}, "car", "car"});
    t.timelines.resize(1);
    for (std::uint32_t i = 0; i < 10; ++i) t.timelines[0].push_back(internal(i, "Drive"));
    t.roles.emplace("SafeDriving", trace::RoleSchema{"SafeDriving", {}});
    t.roles.emplace("UnsafeDriving", trace::RoleSchema{"UnsafeDriving", {}});
    t.finalize();
    return t;
}

// a0: send m -> a1 ; a1: receive m, send r -> a0 ; a0: receive r. Plus a lone event on a2.
trace::Trace round_trip() {
    trace::Trace t;
    for (std::uint32_t a = 0; a < 3; ++a) t.actors.push_back(trace::ActorInfo{ActorId{a}, "n" + std::to_string(a), "node"});
    t.timelines.resize(3);
    const EnvelopeId m{ActorId{0}, 0};
    const EnvelopeId r{ActorId{1}, 1};
    t.timelines[0].push_back(trace::Event{0, EventKind::send, m, ActorId{1}, Message("M")});
    t.timelines[0].push_back(trace::Event{1, EventKind::receive, r, ActorId{1}, Message("R")});
    t.timelines[1].push_back(trace::Event{0, EventKind::receive, m, ActorId{0}, Message("M")});
    t.timelines[1].push_back(trace::Event{1, EventKind::send, r, ActorId{0}, Message("R")});
    t.timelines[2].push_back(trace::Event{0, EventKind::internal, std::nullopt, ActorId{2}, Message("Idle")});
    t.transmissions.push_back(trace::Transmission{m, EventRef{ActorId{0}, 0}, EventRef{ActorId{1}, 0}, "M"});
    t.transmissions.push_back(trace::Transmission{r, EventRef{ActorId{1}, 1}, EventRef{ActorId{0}, 1}, "R"});
    t.finalize();
    return t;
}

std::vector<EventRef> all_events(const trace::Trace& t) {
    std::vector<EventRef> out;
    for (std::uint32_t a = 0; a < t.timelines.size(); ++a) {
        for (std::uint32_t i = 0; i < t.timelines[a].size(); ++i) out.push_back(EventRef{ActorId{a}, i});
    }
    return out;
}

// Reachability over local successor and transmission edges, by search.
bool reachable(const trace::Trace& t, EventRef from, EventRef to) {
    std::deque<EventRef> todo{from};
    std::set<EventRef> seen{from};
    while (!todo.empty()) {
        EventRef e = todo.front();
        todo.pop_front();
        std::vector<EventRef> next;
        if (e.index + 1 < t.timelines[e.actor.value].size()) next.push_back(EventRef{e.actor, e.index + 1});
        for (const auto& tr : t.transmissions) {
            if (tr.send && *tr.send == e) next.push_back(tr.arrival);
        }
        for (auto n : next) {
            if (n == to) return true;
            if (seen.insert(n).second) todo.push_back(n);
        }
    }
    return false;
}

std::vector<trace::Trace> sample_auction_traces(std::size_t samples) {
    auto sc = fishmarket::build_scenario(fishmarket::make_spec({6, 6}, 5));
    progression::ExploreOptions o;
    o.strategy = progression::Strategy::random;
    o.samples = samples;
    o.seed = 11;
    o.bound = fishmarket::termination_bound(fishmarket::make_spec({6, 6}, 5));
    return progression::explore_traces(sc.system, o).traces;
}

}  // namespace

TEST(HappensBefore, RoundTripOrder) {
    auto t = round_trip();
    EXPECT_EQ(trace::happens_before(t, EventRef{ActorId{0}, 0}, EventRef{ActorId{0}, 1}), Order::before);
    EXPECT_EQ(trace::happens_before(t, EventRef{ActorId{1}, 1}, EventRef{ActorId{0}, 0}), Order::after);
    EXPECT_EQ(trace::happens_before(t, EventRef{ActorId{2}, 0}, EventRef{ActorId{1}, 0}), Order::concurrent);
    EXPECT_EQ(trace::happens_before(t, EventRef{ActorId{1}, 0}, EventRef{ActorId{1}, 0}), Order::same);
    EXPECT_THROW(trace::happens_before(t, EventRef{ActorId{1}, 0}, EventRef{ActorId{1}, 5}), trace::InvalidTrace);
}

TEST(HappensBefore, MatchesReachabilityAndIsAStrictPartialOrder) {
    for (const auto& t : sample_auction_traces(6)) {
        const auto ev = all_events(t);
        for (auto a : ev) {
            EXPECT_FALSE(t.precedes(a, a));
            for (auto b : ev) {
                const bool p = t.precedes(a, b);
                ASSERT_EQ(p, a != b && reachable(t, a, b)) << "a" << a.actor.value << "#" << a.index << " a" << b.actor.value << "#" << b.index;
                if (p) {
                    EXPECT_FALSE(t.precedes(b, a));
                }
            }
        }
        // transitivity on a subsample
        for (std::size_t i = 0; i < ev.size(); i += 3) {
            for (std::size_t j = 0; j < ev.size(); j += 2) {
                if (!t.precedes(ev[i], ev[j])) continue;
                for (auto c : ev) {
                    if (t.precedes(ev[j], c)) {
                        EXPECT_TRUE(t.precedes(ev[i], c));
                    }
                }
            }
        }
    }
}

TEST(HappensBefore, Regions) {
    auto t = round_trip();
    const trace::Region first{ActorId{0}, 0, 0};
    const trace::Region second{ActorId{1}, 0, 1};
    const trace::Region idle{ActorId{2}, 0, 0};
    EXPECT_EQ(trace::happens_before(t, {first}, {second}), Order::before);
    EXPECT_EQ(trace::happens_before(t, {second}, {first}), Order::after);
    EXPECT_EQ(trace::happens_before(t, {first}, {idle}), Order::concurrent);
    EXPECT_EQ(trace::happens_before(t, {second}, {second}), Order::same);
    // overlapping regions are not ordered
    EXPECT_EQ(trace::happens_before(t, {trace::Region{ActorId{0}, 0, 1}}, {second}), Order::concurrent);
    // a region spanning two actors precedes what follows both parts
    EXPECT_EQ(trace::happens_before(t, {first, trace::Region{ActorId{1}, 0, 0}}, {trace::Region{ActorId{0}, 1, 1}}), Order::before);
}

TEST(Adjacency, SplitWithoutABoundaryEvent) {
    auto t = driving();
    const trace::Region safe{ActorId{0}, 0, 4};
    const trace::Region unsafe{ActorId{0}, 5, 9};
    EXPECT_TRUE(trace::adjacent(t, safe, unsafe));
    EXPECT_FALSE(trace::adjacent(t, unsafe, safe));
    EXPECT_FALSE(trace::adjacent(t, safe, trace::Region{ActorId{0}, 6, 9}));
    // every event is the same Drive note: nothing marks index 5
    for (const auto& e : t.timeline(ActorId{0})) EXPECT_EQ(e.payload, Message("Drive"));
    EXPECT_EQ(trace::happens_before(t, {safe}, {unsafe}), Order::before);
}

TEST(Adjacency, RejectsForeignOrInvalidRegions) {
    auto t = round_trip();
    EXPECT_THROW(trace::adjacent(t, trace::Region{ActorId{0}, 0, 0}, trace::Region{ActorId{1}, 1, 1}), trace::InvalidTrace);
    EXPECT_THROW(trace::adjacent(t, trace::Region{ActorId{0}, 0, 7}, trace::Region{ActorId{0}, 8, 8}), trace::InvalidTrace);
    EXPECT_THROW(t.validate(trace::Region{ActorId{0}, 1, 0}), trace::InvalidTrace);
}

TEST(Finalize, RejectsMalformedTraces) {
    auto t = round_trip();
    trace::Trace dangling = t;
    dangling.transmissions.pop_back();
    EXPECT_THROW(dangling.finalize(), trace::InvalidTrace);

    trace::Trace gap = t;
    gap.timelines[2][0].index = 3;
    EXPECT_THROW(gap.finalize(), trace::InvalidTrace);

    // a0 receives before it sends what it receives in reply to
    trace::Trace cycle;
    cycle.actors = t.actors;
    cycle.timelines.resize(3);
    const EnvelopeId m{ActorId{0}, 1};
    const EnvelopeId r{ActorId{1}, 1};
    cycle.timelines[0].push_back(trace::Event{0, EventKind::receive, r, ActorId{1}, Message("R")});
    cycle.timelines[0].push_back(trace::Event{1, EventKind::send, m, ActorId{1}, Message("M")});
    cycle.timelines[1].push_back(trace::Event{0, EventKind::receive, m, ActorId{0}, Message("M")});
    cycle.timelines[1].push_back(trace::Event{1, EventKind::send, r, ActorId{0}, Message("R")});
    cycle.transmissions.push_back(trace::Transmission{m, EventRef{ActorId{0}, 1}, EventRef{ActorId{1}, 0}, "M"});
    cycle.transmissions.push_back(trace::Transmission{r, EventRef{ActorId{1}, 1}, EventRef{ActorId{0}, 0}, "R"});
    EXPECT_THROW(cycle.finalize(), trace::InvalidTrace);

    trace::Trace raw = t;
    trace::Trace unfinalized;
    unfinalized.actors = raw.actors;
    unfinalized.timelines = raw.timelines;
    EXPECT_THROW(unfinalized.precedes(EventRef{ActorId{0}, 0}, EventRef{ActorId{0}, 1}), trace::InvalidTrace);
}

TEST(Annotation, IsIdempotentAndChecksRoles) {
    auto t = driving();
    trace::AnnotationRule rule{"split", {{"Phase", {"kind"}}}, [](const trace::Trace&) {
                                   return std::vector<trace::Participation>{
                                       {"Phase", {trace::Region{ActorId{0}, 0, 4}}, {{"kind", std::string("safe")}}},
                                       {"Phase", {trace::Region{ActorId{0}, 5, 9}}, {{"kind", std::string("unsafe")}}}};
                               }};
    auto once = trace::annotate(t, rule);
    auto twice = trace::annotate(once, rule);
    EXPECT_EQ(once.participations.size(), 2u);
    EXPECT_EQ(twice.participations, once.participations);

    trace::AnnotationRule missing{"bad", {{"Phase", {"kind"}}}, [](const trace::Trace&) {
                                      return std::vector<trace::Participation>{{"Phase", {trace::Region{ActorId{0}, 0, 4}}, {}}};
                                  }};
    EXPECT_THROW(trace::annotate(t, missing), trace::InvalidTrace);

    trace::AnnotationRule undeclared{"bad", {}, [](const trace::Trace&) {
                                         return std::vector<trace::Participation>{{"Phase", {trace::Region{ActorId{0}, 0, 4}}, {}}};
                                     }};
    EXPECT_THROW(trace::annotate(t, undeclared), trace::InvalidTrace);

    trace::AnnotationRule clash{"clash", {{"Phase", {"other"}}}, [](const trace::Trace&) { return std::vector<trace::Participation>{}; }};
    EXPECT_THROW(trace::annotate(once, clash), trace::InvalidTrace);
}

TEST(Export, JsonRoundTrip) {
    for (const auto& t : sample_auction_traces(4)) {
        const auto j = trace::to_json(t);
        const auto back = trace::from_json(j);
        EXPECT_EQ(trace::to_json(back), j);
        EXPECT_EQ(trace::canonical_key(back), trace::canonical_key(t));
        EXPECT_EQ(back.participations, t.participations);
        for (auto a : all_events(t)) {
            for (auto b : all_events(t)) ASSERT_EQ(back.precedes(a, b), t.precedes(a, b));
        }
    }
}

TEST(Export, JsonShape) {
    const auto t = sample_auction_traces(1).front();
    const auto j = trace::to_json(t);
    for (const char* k : {"actors", "events", "transmissions", "roles", "participations", "schedule", "truncated"}) EXPECT_TRUE(j.contains(k)) << k;
    const auto& start = j.at("events").at(0);
    EXPECT_EQ(start.at("kind"), "receive");
    EXPECT_EQ(start.at("envelope"), "ext.0");
    EXPECT_TRUE(start.at("peer").is_null());
    EXPECT_EQ(start.at("payload").at("tag"), "Start");
    EXPECT_TRUE(j.at("transmissions").at(0).at("send").is_null());
}

TEST(Export, MalformedJsonIsRejected) {
    auto j = trace::to_json(round_trip());
    auto missing = j;
    missing.erase("transmissions");
    EXPECT_THROW(trace::from_json(missing), trace::InvalidTrace);
    auto bad_kind = j;
    bad_kind["events"][0]["kind"] = "teleport";
    EXPECT_THROW(trace::from_json(bad_kind), trace::InvalidTrace);
    auto dangling = j;
    dangling["transmissions"].erase(0);
    EXPECT_THROW(trace::from_json(dangling), trace::InvalidTrace);
    auto bad_value = j;
    bad_value["events"][0]["payload"]["fields"]["x"] = 1.5;
    EXPECT_THROW(trace::from_json(bad_value), trace::InvalidTrace);
}

TEST(Export, Xml) {
    const auto xml = trace::to_xml(sample_auction_traces(1).front());
    EXPECT_NE(xml.find("<trace truncated=\"false\">"), std::string::npos);
    EXPECT_NE(xml.find("envelope=\"ext.0\""), std::string::npos);
    EXPECT_NE(xml.find("<delivery>ext.0</delivery>"), std::string::npos);
    EXPECT_NE(xml.find("role=\"Alarm\""), std::string::npos);
}

TEST(CanonicalKey, IgnoresInterleavingOfIndependentDeliveries) {
    auto t = round_trip();
    auto other = t;
    std::reverse(other.transmissions.begin(), other.transmissions.end());
    other.finalize();
    EXPECT_EQ(trace::canonical_key(t), trace::canonical_key(other));
    other.truncated = true;
    EXPECT_NE(trace::canonical_key(t), trace::canonical_key(other));
}
