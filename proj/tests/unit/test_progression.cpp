#include <oracle/auction_oracle.hpp>

#include <pgc/fishmarket/scenario.hpp>
#include <pgc/progression/progression.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

using namespace pgc;
using History = std::vector<EnvelopeId>;

namespace {

// Tokens bounce between two nodes; every node notes what it saw.
actor::System<int> ping_pong(int tokens, int hops) {
    actor::System<int> sys;
    sys.define_kind("node", [](const int& seen, const actor::Incoming& in) {
        actor::Outcome<int> out{seen + 1, {}, {}, {}};
        const auto left = in.message.integer("left");
        if (left > 0) out.sends.push_back(actor::Outgoing{ActorId{1 - in.self.value}, Message("Token").with("left", left - 1)});
        return out;
    });
    sys.spawn("node", 0);
    sys.spawn("node", 0);
    for (int k = 0; k < tokens; ++k) sys.inject(ActorId{static_cast<std::uint32_t>(k % 2)}, Message("Token").with("left", std::int64_t{hops}));
    sys.seal();
    return sys;
}

bool is_prefix(const History& p, const History& h) { return p.size() <= h.size() && std::equal(p.begin(), p.end(), h.begin()); }

// Counterexamples to: every stage-i history is a prefix of some stage-(i+1)
// history, and every stage-(i+1) history extends exactly one stage-i history.
template <class S>
std::size_t monotonicity_counterexamples(const actor::System<S>& sys, std::size_t stages) {
    std::size_t bad = 0;
    auto cur = progression::bottom(sys);
    for (std::size_t i = 0; i < stages; ++i) {
        auto next = progression::progress(sys, cur);
        const auto h = cur.histories();
        const auto g = next.histories();
        for (const auto& x : h) {
            auto it = std::lower_bound(g.begin(), g.end(), x);
            if (it == g.end() || !is_prefix(x, *it)) ++bad;
        }
        for (const auto& y : g) {
            std::size_t count = 0;
            for (std::size_t len = 0; len <= y.size(); ++len) {
                if (std::binary_search(h.begin(), h.end(), History(y.begin(), y.begin() + static_cast<long>(len)))) ++count;
            }
            if (count != 1) ++bad;
        }
        cur = std::move(next);
    }
    return bad;
}

// Canonical keys in visiting order.
struct KeySink {
    std::vector<std::string> keys;

    template <class S>
    void visit(const progression::Leaf<S>& leaf) {
        keys.push_back(trace::canonical_key(leaf.trace()));
    }
    void merge(KeySink&& later) { keys.insert(keys.end(), later.keys.begin(), later.keys.end()); }
};

template <class S>
std::set<std::string> keys(const actor::System<S>& sys, const progression::ExploreOptions& o) {
    auto r = progression::explore(sys, o, KeySink{});
    return {r.sink.keys.begin(), r.sink.keys.end()};
}

progression::ExploreOptions exhaustive(std::size_t bound) {
    progression::ExploreOptions o;
    o.bound = bound;
    return o;
}

}  // namespace

TEST(Progression, BottomIsTheInitialBehavior) {
    auto sys = ping_pong(2, 1);
    auto b = progression::bottom(sys);
    ASSERT_EQ(b.behaviors.size(), 1u);
    EXPECT_TRUE(b.behaviors[0].history.empty());
    EXPECT_FALSE(b.all_complete());
}

TEST(Progression, MonotoneOnPingPong) {
    auto sys = ping_pong(2, 3);
    EXPECT_EQ(monotonicity_counterexamples(sys, 10), 0u);
}

TEST(Progression, MonotoneOnSingleBidderAuction) {
    const auto spec = fishmarket::make_spec({6}, 5);
    auto sc = fishmarket::build_scenario(spec);
    EXPECT_EQ(monotonicity_counterexamples(sc.system, fishmarket::termination_bound(spec)), 0u);
}

TEST(Progression, ReachesAFixpointAtCompletion) {
    auto sys = ping_pong(2, 2);
    auto cur = progression::bottom(sys);
    for (int i = 0; i < 6; ++i) cur = progression::progress(sys, cur);
    ASSERT_TRUE(cur.all_complete());
    auto again = progression::progress(sys, cur);
    EXPECT_EQ(again.histories(), cur.histories());
}

TEST(Progression, ParallelProgressIsIdentical) {
    auto sc = fishmarket::build_scenario(fishmarket::make_spec({6, 6}, 5));
    auto one = progression::bottom(sc.system);
    auto four = one;
    for (int i = 0; i < 7; ++i) {
        one = progression::progress(sc.system, one, 1);
        four = progression::progress(sc.system, four, 4);
        ASSERT_EQ(one.histories(), four.histories());
    }
}

TEST(Progression, FinalStageMatchesExhaustiveExploration) {
    const auto spec = fishmarket::make_spec({6}, 5);
    auto sc = fishmarket::build_scenario(spec);
    const auto bound = fishmarket::termination_bound(spec);
    auto cur = progression::bottom(sc.system);
    for (std::size_t i = 0; i < bound; ++i) cur = progression::progress(sc.system, cur);
    auto explored = progression::explore(sc.system, exhaustive(bound), progression::HistoryCollector{});
    auto hs = explored.sink.histories;
    std::sort(hs.begin(), hs.end());
    EXPECT_EQ(cur.histories(), hs);
    EXPECT_TRUE(cur.all_complete());
}

TEST(Explore, JobCountDoesNotChangeTheResult) {
    auto sc = fishmarket::build_scenario(fishmarket::make_spec({6, 6}, 5));
    auto o = exhaustive(12);
    auto one = progression::explore(sc.system, o, progression::HistoryCollector{});
    o.jobs = 4;
    auto four = progression::explore(sc.system, o, progression::HistoryCollector{});
    EXPECT_EQ(one.sink.histories, four.sink.histories);
    EXPECT_EQ(one.sink.truncated, four.sink.truncated);
    EXPECT_EQ(one.stats, four.stats);
}

TEST(Explore, RandomSchedulesAreAmongTheExhaustiveOnes) {
    const auto spec = fishmarket::make_spec({6, 6}, 5);
    auto sc = fishmarket::build_scenario(spec);
    const auto bound = fishmarket::termination_bound(spec);
    auto o = exhaustive(bound);
    o.reduction = progression::Reduction::sleep_sets;
    const auto all = keys(sc.system, o);
    progression::ExploreOptions r;
    r.strategy = progression::Strategy::random;
    r.bound = bound;
    r.samples = 200;
    r.seed = 3;
    const auto sampled = keys(sc.system, r);
    EXPECT_GT(sampled.size(), 1u);
    for (const auto& k : sampled) EXPECT_TRUE(all.count(k)) << k;
}

TEST(Explore, RandomIsReproducibleAndJobIndependent) {
    auto sc = fishmarket::build_scenario(fishmarket::make_spec({6, 6}, 5));
    progression::ExploreOptions r;
    r.strategy = progression::Strategy::random;
    r.bound = 23;
    r.samples = 150;
    r.seed = 42;
    auto a = progression::explore(sc.system, r, progression::HistoryCollector{});
    r.jobs = 3;
    auto b = progression::explore(sc.system, r, progression::HistoryCollector{});
    EXPECT_EQ(a.sink.histories, b.sink.histories);
    r.seed = 43;
    auto c = progression::explore(sc.system, r, progression::HistoryCollector{});
    EXPECT_NE(a.sink.histories, c.sink.histories);
}

TEST(Explore, SleepSetsKeepEveryTraceOnce) {
    auto sc = fishmarket::build_scenario(fishmarket::make_spec({6, 6}, 5));
    auto o = exhaustive(11);
    auto full = progression::explore(sc.system, o, KeySink{});
    o.reduction = progression::Reduction::sleep_sets;
    auto reduced = progression::explore(sc.system, o, KeySink{});
    const std::set<std::string> a(full.sink.keys.begin(), full.sink.keys.end());
    const std::set<std::string> b(reduced.sink.keys.begin(), reduced.sink.keys.end());
    EXPECT_EQ(a, b);
    EXPECT_EQ(reduced.sink.keys.size(), b.size());
    EXPECT_LT(reduced.stats.schedules, full.stats.schedules);
}

TEST(Explore, LimitAndTimeBudget) {
    auto sc = fishmarket::build_scenario(fishmarket::make_spec({6, 6}, 5));
    auto o = exhaustive(23);
    o.limit = 1000;
    EXPECT_THROW(progression::explore(sc.system, o, progression::HistoryCollector{}), progression::ExplorationLimit);
    o.limit = 0;
    o.time_budget = std::chrono::milliseconds(1);
    EXPECT_THROW(progression::explore(sc.system, o, progression::HistoryCollector{}), progression::ExplorationLimit);
}

TEST(Explore, ReplayReproducesTheLeaf) {
    auto sc = fishmarket::build_scenario(fishmarket::make_spec({6, 6}, 5));
    auto r = progression::explore_traces(sc.system, exhaustive(9));
    for (std::size_t i = 0; i < r.traces.size(); i += 97) {
        const auto& t = r.traces[i];
        auto config = progression::replay(sc.system, t.schedule);
        EXPECT_EQ(trace::canonical_key(trace::from_execution(config, sc.system, t.truncated)), trace::canonical_key(t));
    }
    EXPECT_THROW(progression::replay(sc.system, {EnvelopeId{ActorId{3}, 0}}), actor::NotEnabled);
}

// ---------------------------------------------------------------------------
// Agreement with the test-side reference model
// ---------------------------------------------------------------------------

namespace {

void expect_oracle_agreement(const fishmarket::ScenarioSpec& spec, const oracle::Auction& model, std::size_t bound) {
    auto sc = fishmarket::build_scenario(spec);
    auto full = progression::explore_traces(sc.system, exhaustive(bound));
    std::set<std::string> mine;
    for (const auto& t : full.traces) mine.insert(trace::canonical_key(t));
    const auto ref = oracle::enumerate(model, bound);
    EXPECT_EQ(full.stats.schedules, ref.histories);
    EXPECT_EQ(mine, ref.keys);
}

}  // namespace

TEST(Oracle, SingleBidderComplete) {
    const auto spec = fishmarket::make_spec({6}, 5);
    expect_oracle_agreement(spec, oracle::Auction{{6}, 5, 1, {}, false}, fishmarket::termination_bound(spec));
}

TEST(Oracle, TwoBiddersTruncated) {
    expect_oracle_agreement(fishmarket::make_spec({6, 6}, 5), oracle::Auction{{6, 6}, 5, 1, {}, false}, 10);
    expect_oracle_agreement(fishmarket::make_spec({10, 20}, 5), oracle::Auction{{10, 20}, 5, 1, {}, false}, 8);
}

TEST(Oracle, IncrementAndSettlementVariants) {
    auto spec = fishmarket::make_spec({9}, 5, 2);
    spec.bidders[0].honesty = fishmarket::Honesty::short_payer;
    expect_oracle_agreement(spec, oracle::Auction{{9}, 5, 2, {oracle::Pay::short_payer}, false}, fishmarket::termination_bound(spec));
    spec.bidders[0].honesty = fishmarket::Honesty::deadbeat;
    expect_oracle_agreement(spec, oracle::Auction{{9}, 5, 2, {oracle::Pay::deadbeat}, false}, fishmarket::termination_bound(spec));
}

TEST(Oracle, LateAcceptMutant) {
    auto spec = fishmarket::make_spec({6}, 5);
    spec.mutant = fishmarket::Mutant::late_accept;
    expect_oracle_agreement(spec, oracle::Auction{{6}, 5, 1, {}, true}, fishmarket::termination_bound(spec));
}
