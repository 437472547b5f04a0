#pragma once

#include <pgc/actor/runtime.hpp>
#include <pgc/trace/trace.hpp>

namespace pgc::trace {

/// Renders a runtime log as a trace: one timeline per actor, one transmission
/// per delivered envelope, then the system's annotation rules. Sends whose
/// envelopes are still in flight appear on the sender's timeline without a
/// transmission.
template <class S>
Trace from_execution(const actor::Configuration<S>& config, const actor::System<S>& system, bool truncated = false) {
    Trace t;
    t.actors = system.actors();
    t.timelines.resize(system.size());
    t.truncated = truncated;

    const auto records = config.log.records();
    t.schedule.reserve(records.size());
    t.transmissions.reserve(records.size());

    // where each emitted envelope left from
    std::map<EnvelopeId, EventRef> sent_at;

    for (const actor::DeliveryRecord* rec : records) {
        const ActorId self = rec->delivered.target;
        if (self.is_external() || self.value >= t.timelines.size()) throw InvalidTrace("log delivers to unknown actor");
        auto& tl = t.timelines[self.value];
        if (rec->receive_index != tl.size()) throw InvalidTrace("log skips local events on " + pgc::to_string(self));

        const EnvelopeId id = rec->delivered.id;
        std::optional<EventRef> from;
        if (!id.sender.is_external()) {
            auto it = sent_at.find(id);
            if (it == sent_at.end()) throw InvalidTrace("dangling envelope " + pgc::to_string(id));
            from = it->second;
            sent_at.erase(it);
        }

        tl.push_back(Event{rec->receive_index, EventKind::receive, id, id.sender, rec->delivered.message()});
        t.transmissions.push_back(Transmission{id, from, EventRef{self, rec->receive_index}, rec->delivered.message().tag()});
        t.schedule.push_back(id);

        for (const auto& note : rec->notes) {
            tl.push_back(Event{static_cast<std::uint32_t>(tl.size()), EventKind::internal, std::nullopt, self, note});
        }
        for (const auto& e : rec->emitted) {
            if (e.id.index != tl.size()) throw InvalidTrace("send index mismatch on " + pgc::to_string(self));
            tl.push_back(Event{e.id.index, EventKind::send, e.id, e.target, e.message()});
            sent_at.emplace(e.id, EventRef{self, e.id.index});
        }
    }

    t.finalize();
    for (const auto& rule : system.annotations()) t = annotate(std::move(t), rule);
    return t;
}

}  // namespace pgc::trace
