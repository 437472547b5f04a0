#pragma once

#include <pgc/fishmarket/actors.hpp>
#include <pgc/trace/trace.hpp>

#include <json.hpp>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

namespace pgc::fishmarket {

struct BidderSpec {
    std::string name;
    Currency maximum = 0;
    Honesty honesty = Honesty::honest;  // how the buyer settles if this bidder wins

    friend bool operator==(const BidderSpec&, const BidderSpec&) = default;
};

struct ExplorationSpec {
    std::optional<std::size_t> bound;  // default: termination_bound of the scenario
    std::string strategy = "exhaustive";
    std::uint64_t seed = 0;
    std::size_t samples = 100;
    unsigned jobs = 1;

    friend bool operator==(const ExplorationSpec&, const ExplorationSpec&) = default;
};

struct ScenarioSpec {
    std::vector<BidderSpec> bidders;
    Currency reserve = 0;
    Currency increment = 1;
    std::string item = "fish";
    Mutant mutant = Mutant::none;
    ExplorationSpec exploration;
    std::vector<std::string> norms;  // built-in names or file paths

    friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

/// Checks the invariants a scenario must satisfy before anything is spawned.
inline void validate(const ScenarioSpec& spec) {
    if (spec.increment < 1) throw UsageError("increment must be at least 1");
    if (spec.reserve < 0) throw UsageError("reserve must be non-negative");
    std::set<std::string> names{"auction", "seller", "buyer"};
    for (const auto& b : spec.bidders) {
        if (b.name.empty()) throw UsageError("bidder with empty name");
        if (b.maximum < 0) throw UsageError("bidder " + b.name + " has a negative maximum");
        if (!names.insert(b.name).second) throw UsageError("duplicate actor name '" + b.name + "'");
    }
    if (spec.exploration.strategy != "exhaustive" && spec.exploration.strategy != "random") {
        throw UsageError("unknown strategy '" + spec.exploration.strategy + "'");
    }
}

/// Bidders named b1..bn with the given maxima, everything else defaulted.
inline ScenarioSpec make_spec(const std::vector<Currency>& maxima, Currency reserve, Currency increment = 1) {
    ScenarioSpec s;
    s.reserve = reserve;
    s.increment = increment;
    for (std::size_t i = 0; i < maxima.size(); ++i) s.bidders.push_back(BidderSpec{"b" + std::to_string(i + 1), maxima[i], Honesty::honest});
    return s;
}

/// Number of deliveries after which every schedule of the scenario is
/// complete. Each accepted bid raises the minimum by at least the increment,
/// so at most A bids are accepted; between two acceptances each bidder can
/// produce at most one NewMinimum/Bid/TooLittle/relay chain per minimum
/// level, and closing adds the outcomes and the settlement.
inline std::size_t termination_bound(const ScenarioSpec& spec) {
    const auto n = static_cast<std::size_t>(spec.bidders.size());
    Currency top = 0;
    for (const auto& b : spec.bidders) top = std::max(top, b.maximum);
    const Currency span = std::max<Currency>(0, top - spec.reserve);
    const std::size_t accepted = top - 1 >= spec.reserve ? static_cast<std::size_t>((top - 1 - spec.reserve) / spec.increment + 1) : 0;
    // Start + Alarm, bidding rounds, outcomes, DeliverRequest + Deliver + Pay
    return 2 + n * (1 + accepted) * (1 + 3 * static_cast<std::size_t>(span)) + n + 3;
}

// ---------------------------------------------------------------------------
// Participation annotation
// ---------------------------------------------------------------------------

inline std::vector<trace::RoleSchema> role_schemas() {
    return {
        {"Start", {"auction"}},          {"Alarm", {"auction"}},        {"AuctionOpen", {"auction"}},
        {"BidArrival", {"bidder"}},      {"Accept", {"bidder"}},        {"TooLittle", {"bidder"}},
        {"TooLate", {"bidder"}},         {"NewMinimum", {"bidder"}},    {"Outcome", {"bidder"}},
        {"Closed", {"auction"}},         {"Delivers", {"seller", "buyer"}}, {"Pays", {"payer", "payee"}},
    };
}

namespace detail {

inline std::map<EnvelopeId, trace::EventRef> arrivals(const trace::Trace& t) {
    std::map<EnvelopeId, trace::EventRef> out;
    for (const auto& tr : t.transmissions) out.emplace(tr.envelope, tr.arrival);
    return out;
}

/// The send point, plus the arrival point once the message was delivered.
inline std::vector<trace::Region> span(const std::map<EnvelopeId, trace::EventRef>& arrived, ActorId self, const trace::Event& send) {
    std::vector<trace::Region> r{trace::Region{self, send.index, send.index}};
    auto it = arrived.find(*send.envelope);
    if (it != arrived.end()) r.push_back(trace::point(it->second));
    return r;
}

inline std::vector<trace::Participation> derive(const trace::Trace& t) {
    std::vector<trace::Participation> out;
    const auto arrived = arrivals(t);
    auto add = [&](std::string role, std::vector<trace::Region> regions, trace::Attributes attrs) {
        out.push_back(trace::Participation{std::move(role), std::move(regions), std::move(attrs)});
    };

    for (const auto& info : t.actors) {
        const ActorId self = info.id;
        const auto& tl = t.timeline(self);
        if (info.kind == "auction") {
            std::optional<std::uint32_t> started;
            std::optional<std::uint32_t> alarmed;
            for (const auto& e : tl) {
                const auto here = std::vector<trace::Region>{trace::Region{self, e.index, e.index}};
                const Message& m = e.payload;
                if (e.kind == trace::EventKind::receive) {
                    if (m.tag() == "Start") {
                        started = e.index;
                        add("Start", here, {{"auction", self}});
                    } else if (m.tag() == "Alarm") {
                        if (!alarmed) alarmed = e.index;
                        add("Alarm", here, {{"auction", self}});
                    } else if (m.tag() == "Bid") {
                        add("BidArrival", here, {{"bidder", m.actor("bidder")}, {"amount", m.integer("amount")}});
                    }
                } else if (e.kind == trace::EventKind::internal) {
                    if (m.tag() == "Accept") {
                        add("Accept", here, {{"bidder", m.actor("bidder")}, {"amount", m.integer("amount")}, {"ordinal", m.integer("ordinal")}});
                    } else if (m.tag() == "Closed") {
                        trace::Attributes a{{"auction", self}, {"result", m.text("result")}};
                        if (m.has("winner")) a["winner"] = m.actor("winner");
                        a["price"] = m.has("price") ? m.integer("price") : Currency{0};
                        add("Closed", here, std::move(a));
                    }
                } else if (e.peer != self) {
                    if (m.tag() == "NewMinimum") {
                        add("NewMinimum", span(arrived, self, e), {{"bidder", e.peer}, {"amount", m.integer("amount")}});
                    } else if (m.tag() == "TooLittle") {
                        add("TooLittle", span(arrived, self, e), {{"bidder", e.peer}, {"amount", m.integer("minimum")}});
                    } else if (m.tag() == "TooLate") {
                        add("TooLate", span(arrived, self, e), {{"bidder", e.peer}, {"amount", m.integer("amount")}});
                    }
                }
            }
            if (started) {
                trace::Region open{self, *started, std::nullopt};
                if (alarmed && *alarmed > *started) open.end = *alarmed - 1;
                if (!alarmed || *alarmed > *started) add("AuctionOpen", {open}, {{"auction", self}});
            }
        } else if (info.kind == "bidder") {
            for (const auto& e : tl) {
                if (e.kind != trace::EventKind::receive) continue;
                const Message& m = e.payload;
                const auto here = std::vector<trace::Region>{trace::Region{self, e.index, e.index}};
                if (m.tag() == "Won") {
                    add("Outcome", here, {{"bidder", self}, {"result", std::string("won")}, {"amount", m.integer("amount")}});
                } else if (m.tag() == "Lost") {
                    add("Outcome", here, {{"bidder", self}, {"result", std::string("lost")}, {"amount", Currency{0}}});
                } else if (m.tag() == "NoSale") {
                    add("Outcome", here, {{"bidder", self}, {"result", std::string("nosale")}, {"amount", Currency{0}}});
                }
            }
        } else if (info.kind == "seller") {
            for (const auto& e : tl) {
                if (e.kind != trace::EventKind::send || e.payload.tag() != "Deliver") continue;
                const Message& m = e.payload;
                add("Delivers", span(arrived, self, e),
                    {{"seller", self}, {"buyer", m.actor("winner")}, {"price", m.integer("price")}, {"item", m.text("item")}});
            }
        } else if (info.kind == "buyer") {
            for (const auto& e : tl) {
                if (e.kind != trace::EventKind::send || e.payload.tag() != "Pay") continue;
                const Message& m = e.payload;
                add("Pays", span(arrived, self, e), {{"payer", m.actor("payer")}, {"payee", e.peer}, {"amount", m.integer("amount")}});
            }
        }
    }
    return out;
}

}  // namespace detail

inline trace::AnnotationRule annotation_rule() { return trace::AnnotationRule{"fishmarket", role_schemas(), detail::derive}; }

// ---------------------------------------------------------------------------
// Scenario construction
// ---------------------------------------------------------------------------

struct Scenario {
    actor::System<State> system;
    ActorId auction;
    std::vector<ActorId> bidders;
    ActorId seller;
    ActorId buyer;
};

/// Spawns auction, bidders, seller and buyer (ids 0, 1..n, n+1, n+2), injects
/// Start and seals. The buyer settles on behalf of whichever bidder wins.
inline Scenario build_scenario(const ScenarioSpec& spec) {
    validate(spec);
    Scenario sc;
    auto& sys = sc.system;
    sys.define_kind("auction", auction_behavior);
    sys.define_kind("bidder", bidder_behavior);
    sys.define_kind("seller", seller_behavior);
    sys.define_kind("buyer", buyer_behavior);

    const auto n = static_cast<std::uint32_t>(spec.bidders.size());
    sc.auction = ActorId{0};
    sc.seller = ActorId{n + 1};
    sc.buyer = ActorId{n + 2};

    auto params = std::make_shared<AuctionParams>();
    params->reserve = spec.reserve;
    params->increment = spec.increment;
    params->seller = sc.seller;
    params->item = spec.item;
    params->mutant = spec.mutant;
    auto honesty = std::make_shared<std::map<ActorId, Honesty>>();
    for (std::uint32_t i = 0; i < n; ++i) {
        params->bidders.push_back(ActorId{i + 1});
        honesty->emplace(ActorId{i + 1}, spec.bidders[i].honesty);
    }
    sc.bidders = params->bidders;

    AuctionState auction;
    auction.params = std::move(params);
    sys.spawn("auction", State{std::move(auction)}, "auction");
    for (std::uint32_t i = 0; i < n; ++i) {
        sys.spawn("bidder", State{BidderState{sc.auction, spec.bidders[i].maximum, std::nullopt}}, spec.bidders[i].name);
    }
    sys.spawn("seller", State{SellerState{sc.buyer, false, std::nullopt}}, "seller");
    sys.spawn("buyer", State{BuyerState{sc.seller, std::move(honesty), Honesty::honest}}, "buyer");
    sys.inject(sc.auction, msg::start());
    sys.add_annotation(annotation_rule());
    sys.seal();
    return sc;
}

// ---------------------------------------------------------------------------
// JSON scenario files
// ---------------------------------------------------------------------------

inline ScenarioSpec spec_from_json(const nlohmann::json& j) {
    auto known = [&](const nlohmann::json& obj, std::initializer_list<const char*> keys, const std::string& where) {
        for (const auto& [k, v] : obj.items()) {
            if (std::none_of(keys.begin(), keys.end(), [&](const char* x) { return k == x; })) {
                throw UsageError("unknown key '" + k + "' in " + where);
            }
        }
    };
    try {
        if (!j.is_object()) throw UsageError("scenario must be a JSON object");
        known(j, {"bidders", "reserve", "increment", "item", "mutant", "exploration", "norms"}, "scenario");
        ScenarioSpec s;
        s.reserve = j.value("reserve", Currency{0});
        s.increment = j.value("increment", Currency{1});
        s.item = j.value("item", std::string("fish"));
        s.mutant = parse_mutant(j.value("mutant", std::string("none")));
        if (j.contains("bidders")) {
            std::size_t k = 0;
            for (const auto& b : j.at("bidders")) {
                ++k;
                known(b, {"name", "maximum", "honesty"}, "bidder");
                s.bidders.push_back(BidderSpec{b.value("name", "b" + std::to_string(k)), b.at("maximum").get<Currency>(),
                                               parse_honesty(b.value("honesty", std::string("honest")))});
            }
        }
        if (j.contains("exploration")) {
            const auto& e = j.at("exploration");
            known(e, {"bound", "strategy", "seed", "samples", "jobs"}, "exploration");
            if (e.contains("bound")) s.exploration.bound = e.at("bound").get<std::size_t>();
            s.exploration.strategy = e.value("strategy", s.exploration.strategy);
            s.exploration.seed = e.value("seed", s.exploration.seed);
            s.exploration.samples = e.value("samples", s.exploration.samples);
            s.exploration.jobs = e.value("jobs", s.exploration.jobs);
        }
        if (j.contains("norms")) s.norms = j.at("norms").get<std::vector<std::string>>();
        validate(s);
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("malformed scenario: ") + e.what());
    }
}

inline nlohmann::json spec_to_json(const ScenarioSpec& s) {
    nlohmann::json j;
    j["reserve"] = s.reserve;
    j["increment"] = s.increment;
    j["item"] = s.item;
    j["mutant"] = to_string(s.mutant);
    j["bidders"] = nlohmann::json::array();
    for (const auto& b : s.bidders) j["bidders"].push_back({{"name", b.name}, {"maximum", b.maximum}, {"honesty", to_string(b.honesty)}});
    nlohmann::json e{{"strategy", s.exploration.strategy}, {"seed", s.exploration.seed}, {"samples", s.exploration.samples}};
    if (s.exploration.bound) e["bound"] = *s.exploration.bound;
    j["exploration"] = e;
    j["norms"] = s.norms;
    return j;
}

}  // namespace pgc::fishmarket
