#include <pgc/fishmarket/scenario.hpp>
#include <pgc/progression/progression.hpp>

#include <gtest/gtest.h>

#include <map>

using namespace pgc;
using namespace pgc::fishmarket;

namespace {

// Final states of every complete schedule, with the leaf's trace.
struct Ending {
    std::optional<Leader> leader;
    std::vector<std::optional<std::string>> outcomes;
    std::optional<Currency> received;
    bool delivered = false;
    std::size_t accepted = 0;
};

struct EndingSink {
    std::vector<Ending> endings;
    std::size_t truncated = 0;

    void visit(const progression::Leaf<State>& leaf) {
        if (leaf.truncated()) {
            ++truncated;
            return;
        }
        const auto& st = leaf.config().states;
        Ending e;
        const auto& au = std::get<AuctionState>(st[0]);
        e.leader = au.leader;
        e.accepted = static_cast<std::size_t>(au.accepted);
        for (std::size_t i = 1; i + 2 < st.size(); ++i) e.outcomes.push_back(std::get<BidderState>(st[i]).outcome);
        const auto& seller = std::get<SellerState>(st[st.size() - 2]);
        e.received = seller.received;
        e.delivered = seller.delivered;
        endings.push_back(std::move(e));
    }
    void merge(EndingSink&& o) {
        for (auto& e : o.endings) endings.push_back(std::move(e));
        truncated += o.truncated;
    }
};

EndingSink endings(const ScenarioSpec& spec, bool reduce = true) {
    auto sc = build_scenario(spec);
    progression::ExploreOptions o;
    o.bound = termination_bound(spec);
    if (reduce) o.reduction = progression::Reduction::sleep_sets;
    return progression::explore(sc.system, o, EndingSink{}).sink;
}

}  // namespace

TEST(Scenario, BuildsActorsInOrder) {
    auto sc = build_scenario(make_spec({6, 9}, 5));
    ASSERT_EQ(sc.system.size(), 5u);
    EXPECT_EQ(sc.system.info(ActorId{0}).name, "auction");
    EXPECT_EQ(sc.system.info(ActorId{2}).name, "b2");
    EXPECT_EQ(sc.seller, ActorId{3});
    EXPECT_EQ(sc.buyer, ActorId{4});
    const auto c = sc.system.initial();
    ASSERT_EQ(c.in_flight.size(), 1u);
    EXPECT_EQ(c.in_flight[0].message().tag(), "Start");
}

TEST(Scenario, TerminationBoundCoversEverySchedule) {
    for (const auto& spec : {make_spec({6}, 5), make_spec({8}, 5), make_spec({6, 6}, 5), make_spec({7, 6}, 5), make_spec({4, 3}, 5)}) {
        auto e = endings(spec);
        EXPECT_EQ(e.truncated, 0u);
        EXPECT_FALSE(e.endings.empty());
    }
}

TEST(Scenario, SingleBidderAscendsToItsMaximum) {
    // bids 5, 6, 7 are accepted; 8 is not below the maximum
    for (const auto& e : endings(make_spec({8}, 5)).endings) {
        // the alarm may close the auction at any point of the ascent
        if (!e.leader) {
            EXPECT_EQ(e.outcomes[0], std::optional<std::string>("nosale"));
            EXPECT_FALSE(e.delivered);
            continue;
        }
        EXPECT_GE(e.leader->amount, 5);
        EXPECT_LE(e.leader->amount, 7);
        EXPECT_EQ(e.outcomes[0], std::optional<std::string>("won"));
        EXPECT_EQ(e.received, std::optional<Currency>(e.leader->amount));
    }
}

TEST(Scenario, EqualBiddersSellAtTheReserveOrNotAtAll) {
    std::map<std::string, std::size_t> seen;
    for (const auto& e : endings(make_spec({6, 6}, 5)).endings) {
        if (!e.leader) {
            ++seen["nosale"];
            continue;
        }
        EXPECT_EQ(e.leader->amount, 5);
        EXPECT_EQ(e.accepted, 1u);
        const std::size_t w = e.leader->bidder.value - 1;
        EXPECT_EQ(e.outcomes[w], std::optional<std::string>("won"));
        EXPECT_EQ(e.outcomes[1 - w], std::optional<std::string>("lost"));
        EXPECT_EQ(e.received, std::optional<Currency>(5));
        ++seen["b" + std::to_string(w + 1)];
    }
    EXPECT_GT(seen["b1"], 0u);
    EXPECT_GT(seen["b2"], 0u);
    EXPECT_GT(seen["nosale"], 0u);
}

TEST(Scenario, NobodyBidsBelowTheReserve) {
    for (const auto& e : endings(make_spec({4, 3}, 5)).endings) {
        EXPECT_FALSE(e.leader);
        EXPECT_FALSE(e.delivered);
    }
}

TEST(Scenario, SettlementHonesty) {
    auto spec = make_spec({6}, 5);
    spec.bidders[0].honesty = Honesty::short_payer;
    for (const auto& e : endings(spec).endings) {
        if (e.leader) {
            EXPECT_EQ(e.received, std::optional<Currency>(4));
        }
    }
    spec.bidders[0].honesty = Honesty::deadbeat;
    for (const auto& e : endings(spec).endings) {
        EXPECT_FALSE(e.received);
    }
}

TEST(Scenario, LateAcceptMutantAcceptsAfterTheAlarm) {
    auto spec = make_spec({6}, 5);
    spec.mutant = Mutant::late_accept;
    auto sc = build_scenario(spec);
    progression::ExploreOptions o;
    o.bound = termination_bound(spec);
    auto r = progression::explore_traces(sc.system, o);
    std::size_t late = 0;
    for (const auto& t : r.traces) {
        bool closed = false;
        for (const auto& e : t.timeline(sc.auction)) {
            if (e.payload.tag() == "Closed") closed = true;
            if (closed && e.payload.tag() == "Accept") ++late;
        }
    }
    EXPECT_GT(late, 0u);
}

TEST(Behavior, ModelingFaults) {
    auto params = std::make_shared<AuctionParams>();
    params->bidders = {ActorId{1}};
    params->seller = ActorId{2};
    AuctionState idle;
    idle.params = params;
    const Message alarm = msg::alarm();
    EXPECT_THROW(auction_behavior(State{idle}, actor::Incoming{ActorId{0}, ActorId{0}, EnvelopeId{ActorId{0}, 1}, alarm}), ModelingFault);

    AuctionState open = idle;
    open.phase = Phase::open;
    const Message forged = msg::bid(5, ActorId{1});
    // the bid claims to come from b1 but was sent by b7
    EXPECT_THROW(auction_behavior(State{open}, actor::Incoming{ActorId{0}, ActorId{7}, EnvelopeId{ActorId{7}, 0}, forged}), ModelingFault);
    const Message start = msg::start();
    EXPECT_THROW(auction_behavior(State{open}, actor::Incoming{ActorId{0}, ActorId::external(), EnvelopeId{ActorId::external(), 0}, start}), ModelingFault);
    const Message junk("Junk");
    EXPECT_THROW(bidder_behavior(State{BidderState{}}, actor::Incoming{ActorId{1}, ActorId{0}, EnvelopeId{ActorId{0}, 0}, junk}), ModelingFault);
    EXPECT_THROW(bidder_behavior(State{open}, actor::Incoming{ActorId{1}, ActorId{0}, EnvelopeId{ActorId{0}, 0}, alarm}), ModelingFault);
}

TEST(Behavior, BidderRelaysTooLittleToItself) {
    const Message m = msg::too_little(9);
    auto out = bidder_behavior(State{BidderState{ActorId{0}, 12, std::nullopt}}, actor::Incoming{ActorId{1}, ActorId{0}, EnvelopeId{ActorId{0}, 3}, m});
    ASSERT_EQ(out.sends.size(), 1u);
    EXPECT_EQ(out.sends[0].target, ActorId{1});
    EXPECT_EQ(out.sends[0].payload, msg::new_minimum(9));
}

TEST(Annotation, AuctionRegionsAndSettlement) {
    auto spec = make_spec({6}, 5);
    auto sc = build_scenario(spec);
    progression::ExploreOptions o;
    o.bound = termination_bound(spec);
    for (const auto& t : progression::explore_traces(sc.system, o).traces) {
        std::map<std::string, std::size_t> count;
        for (const auto& p : t.participations) ++count[p.role];
        EXPECT_EQ(count["Start"], 1u);
        EXPECT_EQ(count["Alarm"], 1u);
        EXPECT_EQ(count["Closed"], 1u);
        EXPECT_EQ(count["Outcome"], 1u);
        EXPECT_EQ(count["AuctionOpen"], 1u);
        for (const auto& p : t.participations) {
            if (p.role == "AuctionOpen") {
                // the open region ends right before the alarm arrival
                const auto& alarm = *std::find_if(t.participations.begin(), t.participations.end(), [](const auto& q) { return q.role == "Alarm"; });
                EXPECT_TRUE(trace::adjacent(t, p.regions[0], alarm.regions[0]));
            }
            if (p.role == "Delivers") {
                ASSERT_EQ(p.regions.size(), 2u);
                EXPECT_EQ(p.regions[0].actor, sc.seller);
                EXPECT_EQ(p.regions[1].actor, sc.buyer);
                EXPECT_EQ(std::get<ActorId>(p.attributes.at("buyer")), sc.bidders[0]);
            }
        }
        EXPECT_EQ(count["Delivers"], count["Pays"]);
    }
}

TEST(ScenarioFile, Validation) {
    auto s = make_spec({6}, 5);
    s.increment = 0;
    EXPECT_THROW(validate(s), UsageError);
    s = make_spec({6}, -1);
    EXPECT_THROW(validate(s), UsageError);
    s = make_spec({6, 7}, 5);
    s.bidders[1].name = "b1";
    EXPECT_THROW(validate(s), UsageError);
    s = make_spec({6}, 5);
    s.bidders[0].name = "seller";
    EXPECT_THROW(validate(s), UsageError);
    s = make_spec({-2}, 5);
    EXPECT_THROW(validate(s), UsageError);
    s = make_spec({6}, 5);
    s.exploration.strategy = "greedy";
    EXPECT_THROW(validate(s), UsageError);
}

TEST(ScenarioFile, JsonRoundTripAndErrors) {
    auto s = make_spec({10, 20}, 5);
    s.bidders[1].honesty = Honesty::short_payer;
    s.mutant = Mutant::late_accept;
    s.exploration.bound = 12;
    s.exploration.seed = 9;
    s.norms = {"fig4", "pays"};
    EXPECT_EQ(spec_from_json(spec_to_json(s)), s);

    auto j = spec_to_json(s);
    j["colour"] = "red";
    EXPECT_THROW(spec_from_json(j), UsageError);
    j = spec_to_json(s);
    j["bidders"][0]["maximum"] = "ten";
    EXPECT_THROW(spec_from_json(j), UsageError);
    j = spec_to_json(s);
    j["mutant"] = "early-close";
    EXPECT_THROW(spec_from_json(j), UsageError);
    EXPECT_THROW(spec_from_json(nlohmann::json::array()), UsageError);

    const auto minimal = spec_from_json(nlohmann::json::parse(R"({"bidders": [{"maximum": 6}], "reserve": 5})"));
    EXPECT_EQ(minimal.bidders[0].name, "b1");
    EXPECT_EQ(minimal.increment, 1);
    EXPECT_EQ(minimal.exploration.strategy, "exhaustive");
}
