#pragma once

// Deterministic actor runtime. Message processing is serialized per actor,
// sends are one-way and asynchronous, and every sent message waits in an
// explicit in-flight pool until something outside the runtime (a scheduler, an
// explorer) picks it for delivery. No FIFO guarantee exists between any pair
// of actors.

#include <pgc/core/value.hpp>
#include <pgc/trace/trace.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace pgc::actor {

struct ActorAddress {
    ActorId id;
    std::string kind;

    friend bool operator==(const ActorAddress&, const ActorAddress&) = default;
};

struct Envelope {
    EnvelopeId id;
    ActorId target;
    std::shared_ptr<const Message> payload;

    ActorId sender() const noexcept { return id.sender; }
    const Message& message() const noexcept { return *payload; }

    friend bool operator==(const Envelope& a, const Envelope& b) {
        return a.id == b.id && a.target == b.target && *a.payload == *b.payload;
    }
};

/// One delivery and everything the target did in reaction to it. Local event
/// indices: the receive is `receive_index`, notes follow one index each, then
/// one send event per emitted envelope in order.
struct DeliveryRecord {
    Envelope delivered;
    std::uint32_t receive_index = 0;
    std::vector<Message> notes;
    std::vector<Envelope> emitted;

    friend bool operator==(const DeliveryRecord&, const DeliveryRecord&) = default;
};

/// Persistent append-only delivery log; copies share their common prefix.
class Log {
public:
    Log() = default;

    std::size_t size() const noexcept { return head_ ? head_->size : 0; }
    bool empty() const noexcept { return head_ == nullptr; }

    Log append(DeliveryRecord record) const {
        auto node = std::make_shared<const Node>(Node{std::move(record), head_, size() + 1});
        return Log(std::move(node));
    }

    const DeliveryRecord& back() const { return head_->record; }

    /// Oldest first.
    std::vector<const DeliveryRecord*> records() const {
        std::vector<const DeliveryRecord*> out(size());
        std::size_t i = out.size();
        for (const Node* n = head_.get(); n != nullptr; n = n->prev.get()) out[--i] = &n->record;
        return out;
    }

    std::vector<EnvelopeId> history() const {
        std::vector<EnvelopeId> out(size());
        std::size_t i = out.size();
        for (const Node* n = head_.get(); n != nullptr; n = n->prev.get()) out[--i] = n->record.delivered.id;
        return out;
    }

    friend bool operator==(const Log& a, const Log& b) {
        if (a.size() != b.size()) return false;
        const Node* x = a.head_.get();
        const Node* y = b.head_.get();
        for (; x != nullptr; x = x->prev.get(), y = y->prev.get()) {
            if (x == y) return true;
            if (!(x->record == y->record)) return false;
        }
        return true;
    }

private:
    struct Node {
        DeliveryRecord record;
        std::shared_ptr<const Node> prev;
        std::size_t size;
    };

    explicit Log(std::shared_ptr<const Node> head) : head_(std::move(head)) {}

    std::shared_ptr<const Node> head_;
};

struct Outgoing {
    ActorId target;
    Message payload;
};

/// Result of a behavior function. Replies go back to the sender of the message
/// being processed; notes become internal events on the actor's timeline.
template <class S>
struct Outcome {
    S state;
    std::vector<Outgoing> sends;
    std::vector<Message> replies;
    std::vector<Message> notes;
};

struct Incoming {
    ActorId self;
    ActorId sender;
    EnvelopeId envelope;
    const Message& message;
};

template <class S>
using Behavior = std::function<Outcome<S>(const S&, const Incoming&)>;

template <class S>
struct Configuration {
    std::vector<S> states;                    // indexed by actor id
    std::vector<Envelope> in_flight;          // sorted by envelope id
    std::vector<std::uint32_t> next_index;    // next local event index per actor
    Log log;

    bool complete() const noexcept { return in_flight.empty(); }

    friend bool operator==(const Configuration&, const Configuration&) = default;
};

class NotEnabled : public Error {
public:
    using Error::Error;
};

template <class S>
class System {
public:
    void define_kind(std::string kind, Behavior<S> behavior) {
        if (sealed_) throw ModelingFault("cannot define kind '" + kind + "' after seal");
        if (kind_index_.count(kind)) throw ModelingFault("kind '" + kind + "' defined twice");
        kind_index_.emplace(kind, behaviors_.size());
        behaviors_.push_back(std::move(behavior));
    }

    ActorAddress spawn(const std::string& kind, S initial, std::string name = {}) {
        if (sealed_) throw ModelingFault("spawn of '" + kind + "' after seal");
        auto it = kind_index_.find(kind);
        if (it == kind_index_.end()) throw ModelingFault("unknown actor kind '" + kind + "'");
        ActorAddress addr{ActorId{static_cast<std::uint32_t>(actors_.size())}, kind};
        if (name.empty()) name = kind + std::to_string(addr.id.value);
        actors_.push_back(trace::ActorInfo{addr.id, std::move(name), kind});
        actor_kind_.push_back(it->second);
        initial_.push_back(std::move(initial));
        return addr;
    }

    /// Queues a message from outside the system, delivered like any other.
    EnvelopeId inject(ActorId target, Message message) {
        if (sealed_) throw ModelingFault("inject after seal");
        check_target(target);
        EnvelopeId id{ActorId::external(), static_cast<std::uint32_t>(injected_.size())};
        injected_.push_back(Envelope{id, target, std::make_shared<const Message>(std::move(message))});
        return id;
    }

    void add_annotation(trace::AnnotationRule rule) {
        if (sealed_) throw ModelingFault("annotation rule added after seal");
        annotations_.push_back(std::move(rule));
    }

    void seal() { sealed_ = true; }
    bool sealed() const noexcept { return sealed_; }

    const std::vector<trace::ActorInfo>& actors() const noexcept { return actors_; }
    const std::vector<trace::AnnotationRule>& annotations() const noexcept { return annotations_; }
    std::size_t size() const noexcept { return actors_.size(); }

    const trace::ActorInfo& info(ActorId id) const {
        check_target(id);
        return actors_[id.value];
    }

    Configuration<S> initial() const {
        if (!sealed_) throw ModelingFault("system not sealed");
        Configuration<S> c;
        c.states = initial_;
        c.in_flight = injected_;
        std::sort(c.in_flight.begin(), c.in_flight.end(), [](const Envelope& a, const Envelope& b) { return a.id < b.id; });
        c.next_index.assign(actors_.size(), 0);
        return c;
    }

    /// Applies the target's behavior to one in-flight envelope. Only the
    /// target's state changes; emitted envelopes join the in-flight pool.
    Configuration<S> deliver(const Configuration<S>& config, EnvelopeId id) const {
        auto it = std::lower_bound(config.in_flight.begin(), config.in_flight.end(), id,
                                   [](const Envelope& e, const EnvelopeId& x) { return e.id < x; });
        if (it == config.in_flight.end() || it->id != id) throw NotEnabled("envelope " + to_string(id) + " is not in flight");
        const Envelope env = *it;
        const ActorId self = env.target;

        Outcome<S> out = behaviors_[actor_kind_[self.value]](
            config.states[self.value], Incoming{self, env.sender(), env.id, env.message()});

        Configuration<S> next;
        next.states = config.states;
        next.states[self.value] = std::move(out.state);
        next.next_index = config.next_index;

        DeliveryRecord rec;
        rec.delivered = env;
        std::uint32_t& cursor = next.next_index[self.value];
        rec.receive_index = cursor++;
        rec.notes = std::move(out.notes);
        cursor += static_cast<std::uint32_t>(rec.notes.size());

        auto emit = [&](ActorId target, Message&& payload) {
            check_target(target);
            rec.emitted.push_back(Envelope{EnvelopeId{self, cursor++}, target, std::make_shared<const Message>(std::move(payload))});
        };
        for (auto& s : out.sends) emit(s.target, std::move(s.payload));
        for (auto& r : out.replies) {
            if (env.sender().is_external()) throw ModelingFault("reply " + r.tag() + " addressed to the outside of a closed system");
            emit(env.sender(), std::move(r));
        }

        next.in_flight.reserve(config.in_flight.size() - 1 + rec.emitted.size());
        for (const auto& e : config.in_flight) {
            if (e.id != id) next.in_flight.push_back(e);
        }
        // emitted ids are (self, fresh index): larger than any id self sent before
        for (const auto& e : rec.emitted) next.in_flight.push_back(e);
        std::sort(next.in_flight.begin(), next.in_flight.end(), [](const Envelope& a, const Envelope& b) { return a.id < b.id; });

        next.log = config.log.append(std::move(rec));
        return next;
    }

private:
    void check_target(ActorId id) const {
        if (id.is_external() || id.value >= actors_.size()) throw ModelingFault("no actor " + to_string(id));
    }

    std::map<std::string, std::size_t> kind_index_;
    std::vector<Behavior<S>> behaviors_;
    std::vector<trace::ActorInfo> actors_;
    std::vector<std::size_t> actor_kind_;
    std::vector<S> initial_;
    std::vector<Envelope> injected_;
    std::vector<trace::AnnotationRule> annotations_;
    bool sealed_ = false;
};

/// The nondeterministic choice point: every in-flight envelope is deliverable.
template <class S>
const std::vector<Envelope>& enabled(const Configuration<S>& config) noexcept {
    return config.in_flight;
}

template <class S>
Configuration<S> deliver(const System<S>& system, const Configuration<S>& config, EnvelopeId id) {
    return system.deliver(config, id);
}

}  // namespace pgc::actor
