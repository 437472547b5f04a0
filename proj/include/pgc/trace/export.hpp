#pragma once

// Trace serialization. JSON is the native exchange format and round-trips;
// XML is a write-only export with the same structure.

#include <pgc/trace/trace.hpp>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <json.hpp>

#include <sstream>
#include <string>

namespace pgc::trace {

namespace detail {

// integers and strings map to JSON scalars, actors to {"actor": id}
inline nlohmann::json value_json(const Value& v) {
    if (auto i = std::get_if<std::int64_t>(&v)) return *i;
    if (auto s = std::get_if<std::string>(&v)) return *s;
    const ActorId a = std::get<ActorId>(v);
    return nlohmann::json{{"actor", a.is_external() ? nlohmann::json(nullptr) : nlohmann::json(a.value)}};
}

inline ActorId actor_json(const nlohmann::json& j) {
    return j.is_null() ? ActorId::external() : ActorId{j.get<std::uint32_t>()};
}

inline Value value_from_json(const nlohmann::json& j) {
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_string()) return j.get<std::string>();
    if (j.is_object() && j.contains("actor")) return actor_json(j.at("actor"));
    throw InvalidTrace("unrecognized value " + j.dump());
}

inline nlohmann::json ref_json(EventRef r) { return {{"actor", r.actor.value}, {"index", r.index}}; }

inline EventRef ref_from_json(const nlohmann::json& j) {
    return EventRef{ActorId{j.at("actor").get<std::uint32_t>()}, j.at("index").get<std::uint32_t>()};
}

inline nlohmann::json attributes_json(const std::vector<Message::Field>& fields) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [k, v] : fields) out[k] = value_json(v);
    return out;
}

inline nlohmann::json attributes_json(const Attributes& attrs) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [k, v] : attrs) out[k] = value_json(v);
    return out;
}

}  // namespace detail

inline nlohmann::json to_json(const Trace& t) {
    using nlohmann::json;
    json j;
    j["actors"] = json::array();
    for (const auto& a : t.actors) j["actors"].push_back({{"id", a.id.value}, {"name", a.name}, {"kind", a.kind}});
    j["events"] = json::array();
    for (std::size_t a = 0; a < t.timelines.size(); ++a) {
        for (const auto& e : t.timelines[a]) {
            json ev{{"actor", a}, {"index", e.index}, {"kind", to_string(e.kind)}};
            ev["envelope"] = e.envelope ? json(pgc::to_string(*e.envelope)) : json(nullptr);
            ev["peer"] = e.peer.is_external() ? json(nullptr) : json(e.peer.value);
            ev["payload"] = {{"tag", e.payload.tag()}, {"fields", detail::attributes_json(e.payload.fields())}};
            j["events"].push_back(std::move(ev));
        }
    }
    j["transmissions"] = json::array();
    for (const auto& tr : t.transmissions) {
        j["transmissions"].push_back({{"envelope", pgc::to_string(tr.envelope)},
                                      {"send", tr.send ? detail::ref_json(*tr.send) : json(nullptr)},
                                      {"arrival", detail::ref_json(tr.arrival)},
                                      {"tag", tr.tag}});
    }
    j["roles"] = json::array();
    for (const auto& [name, schema] : t.roles) j["roles"].push_back({{"role", name}, {"positional", schema.positional}});
    j["participations"] = json::array();
    for (const auto& p : t.participations) {
        json regions = json::array();
        for (const auto& r : p.regions) {
            regions.push_back({{"actor", r.actor.value}, {"begin", r.begin}, {"end", r.end ? json(*r.end) : json(nullptr)}});
        }
        j["participations"].push_back({{"role", p.role}, {"regions", regions}, {"attributes", detail::attributes_json(p.attributes)}});
    }
    j["schedule"] = json::array();
    for (const auto& id : t.schedule) j["schedule"].push_back(pgc::to_string(id));
    j["truncated"] = t.truncated;
    return j;
}

/// Rebuilds and finalizes a trace; throws InvalidTrace on malformed input.
inline Trace from_json(const nlohmann::json& j) {
    try {
        Trace t;
        for (const auto& a : j.at("actors")) {
            t.actors.push_back(ActorInfo{ActorId{a.at("id").get<std::uint32_t>()}, a.at("name").get<std::string>(), a.at("kind").get<std::string>()});
        }
        t.timelines.resize(t.actors.size());
        for (const auto& ev : j.at("events")) {
            const auto a = ev.at("actor").get<std::size_t>();
            if (a >= t.timelines.size()) throw InvalidTrace("event on unknown actor " + std::to_string(a));
            Event e;
            e.index = ev.at("index").get<std::uint32_t>();
            const auto kind = ev.at("kind").get<std::string>();
            if (kind == "receive") {
                e.kind = EventKind::receive;
            } else if (kind == "send") {
                e.kind = EventKind::send;
            } else if (kind == "internal") {
                e.kind = EventKind::internal;
            } else {
                throw InvalidTrace("unknown event kind '" + kind + "'");
            }
            if (!ev.at("envelope").is_null()) e.envelope = parse_envelope_id(ev.at("envelope").get<std::string>());
            e.peer = detail::actor_json(ev.at("peer"));
            Message m(ev.at("payload").at("tag").get<std::string>());
            for (const auto& [k, v] : ev.at("payload").at("fields").items()) m.set(k, detail::value_from_json(v));
            e.payload = std::move(m);
            t.timelines[a].push_back(std::move(e));
        }
        for (const auto& tr : j.at("transmissions")) {
            Transmission x;
            x.envelope = parse_envelope_id(tr.at("envelope").get<std::string>());
            if (!tr.at("send").is_null()) x.send = detail::ref_from_json(tr.at("send"));
            x.arrival = detail::ref_from_json(tr.at("arrival"));
            x.tag = tr.at("tag").get<std::string>();
            t.transmissions.push_back(std::move(x));
        }
        for (const auto& r : j.at("roles")) {
            const auto name = r.at("role").get<std::string>();
            t.roles.emplace(name, RoleSchema{name, r.at("positional").get<std::vector<std::string>>()});
        }
        for (const auto& p : j.at("participations")) {
            Participation x;
            x.role = p.at("role").get<std::string>();
            for (const auto& r : p.at("regions")) {
                Region reg{ActorId{r.at("actor").get<std::uint32_t>()}, r.at("begin").get<std::uint32_t>(), std::nullopt};
                if (!r.at("end").is_null()) reg.end = r.at("end").get<std::uint32_t>();
                x.regions.push_back(reg);
            }
            for (const auto& [k, v] : p.at("attributes").items()) x.attributes[k] = detail::value_from_json(v);
            t.participations.push_back(std::move(x));
        }
        for (const auto& s : j.at("schedule")) t.schedule.push_back(parse_envelope_id(s.get<std::string>()));
        t.truncated = j.at("truncated").get<bool>();
        t.finalize();
        for (const auto& p : t.participations) validate(t, p);
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidTrace(std::string("malformed trace document: ") + e.what());
    } catch (const UsageError& e) {
        throw InvalidTrace(e.what());
    }
}

inline std::string to_xml(const Trace& t) {
    using boost::property_tree::ptree;
    auto value_attr = [](ptree& node, const std::string& name, const Value& v) {
        ptree& f = node.add("field", "");
        f.put("<xmlattr>.name", name);
        if (auto i = std::get_if<std::int64_t>(&v)) {
            f.put("<xmlattr>.int", *i);
        } else if (auto s = std::get_if<std::string>(&v)) {
            f.put("<xmlattr>.text", *s);
        } else {
            f.put("<xmlattr>.actor", pgc::to_string(std::get<ActorId>(v)));
        }
    };
    ptree root;
    ptree& tr = root.add("trace", "");
    tr.put("<xmlattr>.truncated", t.truncated ? "true" : "false");
    for (const auto& a : t.actors) {
        ptree& n = tr.add("actors.actor", "");
        n.put("<xmlattr>.id", a.id.value);
        n.put("<xmlattr>.name", a.name);
        n.put("<xmlattr>.kind", a.kind);
    }
    for (std::size_t a = 0; a < t.timelines.size(); ++a) {
        for (const auto& e : t.timelines[a]) {
            ptree& n = tr.add("events.event", "");
            n.put("<xmlattr>.actor", a);
            n.put("<xmlattr>.index", e.index);
            n.put("<xmlattr>.kind", to_string(e.kind));
            if (e.envelope) n.put("<xmlattr>.envelope", pgc::to_string(*e.envelope));
            if (!e.peer.is_external()) n.put("<xmlattr>.peer", e.peer.value);
            n.put("<xmlattr>.tag", e.payload.tag());
            for (const auto& [k, v] : e.payload.fields()) value_attr(n, k, v);
        }
    }
    for (const auto& x : t.transmissions) {
        ptree& n = tr.add("transmissions.transmission", "");
        n.put("<xmlattr>.envelope", pgc::to_string(x.envelope));
        n.put("<xmlattr>.tag", x.tag);
        if (x.send) n.put("<xmlattr>.send", pgc::to_string(x.send->actor) + "#" + std::to_string(x.send->index));
        n.put("<xmlattr>.arrival", pgc::to_string(x.arrival.actor) + "#" + std::to_string(x.arrival.index));
    }
    for (const auto& p : t.participations) {
        ptree& n = tr.add("participations.participation", "");
        n.put("<xmlattr>.role", p.role);
        for (const auto& r : p.regions) {
            ptree& reg = n.add("region", "");
            reg.put("<xmlattr>.actor", r.actor.value);
            reg.put("<xmlattr>.begin", r.begin);
            if (r.end) reg.put("<xmlattr>.end", *r.end);
        }
        for (const auto& [k, v] : p.attributes) value_attr(n, k, v);
    }
    for (const auto& id : t.schedule) tr.add("schedule.delivery", pgc::to_string(id));
    std::ostringstream out;
    boost::property_tree::write_xml(out, root, boost::property_tree::xml_writer_make_settings<std::string>(' ', 2));
    return out.str();
}

}  // namespace pgc::trace
