#pragma once

// Santa Cruz FishMarket actors: an English auction with a reserve, announced
// minimum bids and one closing alarm; bidders that bid the announced minimum
// while it is below their maximum; and a seller/buyer pair that settles the
// sale. All currency is integer minor units.

#include <pgc/actor/runtime.hpp>

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace pgc::fishmarket {

using Currency = std::int64_t;

enum class Mutant { none, late_accept, no_announce };
enum class Honesty { honest, deadbeat, short_payer };

inline const char* to_string(Mutant m) {
    switch (m) {
        case Mutant::none: return "none";
        case Mutant::late_accept: return "late-accept";
        case Mutant::no_announce: return "no-announce";
    }
    return "?";
}

inline const char* to_string(Honesty h) {
    switch (h) {
        case Honesty::honest: return "honest";
        case Honesty::deadbeat: return "deadbeat";
        case Honesty::short_payer: return "short-payer";
    }
    return "?";
}

inline Mutant parse_mutant(const std::string& s) {
    if (s == "none" || s.empty()) return Mutant::none;
    if (s == "late-accept") return Mutant::late_accept;
    if (s == "no-announce") return Mutant::no_announce;
    throw UsageError("unknown mutant '" + s + "' (expected none, late-accept, no-announce)");
}

inline Honesty parse_honesty(const std::string& s) {
    if (s == "honest") return Honesty::honest;
    if (s == "deadbeat") return Honesty::deadbeat;
    if (s == "short-payer") return Honesty::short_payer;
    throw UsageError("unknown honesty '" + s + "' (expected honest, deadbeat, short-payer)");
}

// ---------------------------------------------------------------------------
// Message vocabulary
// ---------------------------------------------------------------------------

namespace msg {

inline Message start() { return Message("Start"); }
inline Message alarm() { return Message("Alarm"); }
inline Message bid(Currency amount, ActorId bidder) { return Message("Bid").with("amount", amount).with("bidder", bidder); }
inline Message new_minimum(Currency amount) { return Message("NewMinimum").with("amount", amount); }
inline Message too_little(Currency minimum) { return Message("TooLittle").with("minimum", minimum); }
inline Message too_late(Currency amount) { return Message("TooLate").with("amount", amount); }
inline Message won(Currency amount) { return Message("Won").with("amount", amount); }
inline Message lost() { return Message("Lost"); }
inline Message no_sale() { return Message("NoSale"); }
inline Message deliver_request(ActorId winner, Currency price, const std::string& item) {
    return Message("DeliverRequest").with("winner", winner).with("price", price).with("item", item);
}
inline Message deliver(const std::string& item, Currency price, ActorId winner) {
    return Message("Deliver").with("item", item).with("price", price).with("winner", winner);
}
inline Message pay(Currency amount, ActorId payer) { return Message("Pay").with("amount", amount).with("payer", payer); }

// internal notes
inline Message accept(ActorId bidder, Currency amount, std::int64_t ordinal) {
    return Message("Accept").with("bidder", bidder).with("amount", amount).with("ordinal", ordinal);
}
inline Message closed_sold(ActorId winner, Currency price) {
    return Message("Closed").with("result", std::string("sold")).with("winner", winner).with("price", price);
}
inline Message closed_no_sale() { return Message("Closed").with("result", std::string("nosale")); }

}  // namespace msg

// ---------------------------------------------------------------------------
// States
// ---------------------------------------------------------------------------

struct AuctionParams {
    Currency reserve = 0;
    Currency increment = 1;
    std::vector<ActorId> bidders;
    ActorId seller;
    std::string item = "fish";
    Mutant mutant = Mutant::none;
};

struct Leader {
    ActorId bidder;
    Currency amount = 0;
    std::int64_t ordinal = 0;

    friend bool operator==(const Leader&, const Leader&) = default;
};

enum class Phase { idle, open, closed };

struct AuctionState {
    std::shared_ptr<const AuctionParams> params;
    Phase phase = Phase::idle;
    Currency minimum = 0;
    std::optional<Leader> leader;
    std::int64_t accepted = 0;

    friend bool operator==(const AuctionState& a, const AuctionState& b) {
        return a.params == b.params && a.phase == b.phase && a.minimum == b.minimum && a.leader == b.leader && a.accepted == b.accepted;
    }
};

struct BidderState {
    ActorId auction;
    Currency maximum = 0;
    std::optional<std::string> outcome;

    friend bool operator==(const BidderState&, const BidderState&) = default;
};

struct SellerState {
    ActorId buyer;
    bool delivered = false;
    std::optional<Currency> received;

    friend bool operator==(const SellerState&, const SellerState&) = default;
};

struct BuyerState {
    ActorId seller;
    std::shared_ptr<const std::map<ActorId, Honesty>> honesty;  // per winning bidder
    Honesty fallback = Honesty::honest;

    Honesty honesty_of(ActorId winner) const {
        if (honesty) {
            auto it = honesty->find(winner);
            if (it != honesty->end()) return it->second;
        }
        return fallback;
    }

    friend bool operator==(const BuyerState& a, const BuyerState& b) {
        return a.seller == b.seller && a.honesty == b.honesty && a.fallback == b.fallback;
    }
};

using State = std::variant<AuctionState, BidderState, SellerState, BuyerState>;
using Out = actor::Outcome<State>;

namespace detail {

template <class T>
const T& as(const State& s, const char* kind) {
    const T* p = std::get_if<T>(&s);
    if (p == nullptr) throw ModelingFault(std::string("actor state is not a ") + kind);
    return *p;
}

[[noreturn]] inline void unknown_tag(const char* kind, const Message& m) {
    throw ModelingFault(std::string(kind) + " has no handler for message " + m.tag());
}

inline void broadcast(Out& out, const AuctionParams& p, const Message& m) {
    for (ActorId b : p.bidders) out.sends.push_back(actor::Outgoing{b, m});
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Behaviors
// ---------------------------------------------------------------------------

inline Out auction_behavior(const State& current, const actor::Incoming& in) {
    AuctionState s = detail::as<AuctionState>(current, "auction");
    const AuctionParams& p = *s.params;
    const Message& m = in.message;
    Out out{s, {}, {}, {}};

    if (m.tag() == "Start") {
        if (s.phase != Phase::idle) throw ModelingFault("auction started twice");
        s.phase = Phase::open;
        s.minimum = p.reserve;
        detail::broadcast(out, p, msg::new_minimum(s.minimum));
        out.sends.push_back(actor::Outgoing{in.self, msg::alarm()});
    } else if (m.tag() == "Bid") {
        const ActorId bidder = m.actor("bidder");
        const Currency amount = m.integer("amount");
        if (std::find(p.bidders.begin(), p.bidders.end(), bidder) == p.bidders.end() || bidder != in.sender) {
            throw ModelingFault("bid from unregistered address " + to_string(in.sender));
        }
        if (s.phase == Phase::idle) throw ModelingFault("bid before the auction started");
        const bool accepting = s.phase == Phase::open || p.mutant == Mutant::late_accept;
        if (accepting && amount >= s.minimum) {
            s.leader = Leader{bidder, amount, s.accepted};
            out.notes.push_back(msg::accept(bidder, amount, s.accepted));
            ++s.accepted;
            s.minimum = amount + p.increment;
            if (p.mutant != Mutant::no_announce) detail::broadcast(out, p, msg::new_minimum(s.minimum));
        } else if (s.phase == Phase::closed) {
            out.replies.push_back(msg::too_late(amount));
        } else {
            out.replies.push_back(msg::too_little(s.minimum));
        }
    } else if (m.tag() == "Alarm") {
        if (s.phase == Phase::closed) throw ModelingFault("alarm received twice");
        if (s.phase == Phase::idle) throw ModelingFault("alarm before the auction started");
        s.phase = Phase::closed;
        if (s.leader) {
            out.notes.push_back(msg::closed_sold(s.leader->bidder, s.leader->amount));
            for (ActorId b : p.bidders) {
                out.sends.push_back(actor::Outgoing{b, b == s.leader->bidder ? msg::won(s.leader->amount) : msg::lost()});
            }
            out.sends.push_back(actor::Outgoing{p.seller, msg::deliver_request(s.leader->bidder, s.leader->amount, p.item)});
        } else {
            out.notes.push_back(msg::closed_no_sale());
            detail::broadcast(out, p, msg::no_sale());
        }
    } else {
        detail::unknown_tag("auction", m);
    }
    out.state = std::move(s);
    return out;
}

inline Out bidder_behavior(const State& current, const actor::Incoming& in) {
    BidderState s = detail::as<BidderState>(current, "bidder");
    const Message& m = in.message;
    Out out{s, {}, {}, {}};

    if (m.tag() == "NewMinimum") {
        const Currency amount = m.integer("amount");
        if (amount < s.maximum) out.sends.push_back(actor::Outgoing{s.auction, msg::bid(amount, in.self)});
    } else if (m.tag() == "TooLittle") {
        // the relay: hand the new minimum back to ourselves as an ordinary message
        out.sends.push_back(actor::Outgoing{in.self, msg::new_minimum(m.integer("minimum"))});
    } else if (m.tag() == "Won") {
        s.outcome = "won";
    } else if (m.tag() == "Lost") {
        s.outcome = "lost";
    } else if (m.tag() == "NoSale") {
        s.outcome = "nosale";
    } else if (m.tag() == "TooLate") {
        // nothing to do: the auction has closed
    } else {
        detail::unknown_tag("bidder", m);
    }
    out.state = std::move(s);
    return out;
}

inline Out seller_behavior(const State& current, const actor::Incoming& in) {
    SellerState s = detail::as<SellerState>(current, "seller");
    const Message& m = in.message;
    Out out{s, {}, {}, {}};

    if (m.tag() == "DeliverRequest") {
        if (!m.has("winner")) throw ModelingFault("deliver request with no winner");
        s.delivered = true;
        out.sends.push_back(actor::Outgoing{s.buyer, msg::deliver(m.text("item"), m.integer("price"), m.actor("winner"))});
    } else if (m.tag() == "Pay") {
        s.received = s.received.value_or(0) + m.integer("amount");
    } else {
        detail::unknown_tag("seller", m);
    }
    out.state = std::move(s);
    return out;
}

inline Out buyer_behavior(const State& current, const actor::Incoming& in) {
    const BuyerState& s = detail::as<BuyerState>(current, "buyer");
    const Message& m = in.message;
    Out out{s, {}, {}, {}};

    if (m.tag() == "Deliver") {
        const ActorId winner = m.actor("winner");
        const Currency price = m.integer("price");
        switch (s.honesty_of(winner)) {
            case Honesty::honest: out.sends.push_back(actor::Outgoing{s.seller, msg::pay(price, winner)}); break;
            case Honesty::deadbeat: break;
            case Honesty::short_payer: out.sends.push_back(actor::Outgoing{s.seller, msg::pay(price - 1, winner)}); break;
        }
    } else {
        detail::unknown_tag("buyer", m);
    }
    return out;
}

}  // namespace pgc::fishmarket
