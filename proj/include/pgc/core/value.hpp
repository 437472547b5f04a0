#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace pgc {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A behavior or scenario violated its own modeling contract (unknown message
/// tag, second Alarm, ...). Distinct from a norm violation, which is data.
class ModelingFault : public Error {
public:
    using Error::Error;
};

/// Bad configuration or arguments supplied by the user.
class UsageError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t position)
        : Error(message + " at position " + std::to_string(position)), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

// ---------------------------------------------------------------------------
// Actor identity
// ---------------------------------------------------------------------------

struct ActorId {
    std::uint32_t value = 0;

    static constexpr ActorId external() noexcept { return ActorId{std::numeric_limits<std::uint32_t>::max()}; }
    constexpr bool is_external() const noexcept { return value == std::numeric_limits<std::uint32_t>::max(); }

    friend constexpr auto operator<=>(ActorId, ActorId) = default;
};

inline std::string to_string(ActorId id) {
    return id.is_external() ? std::string("ext") : "a" + std::to_string(id.value);
}

/// Envelope identity is causal: the sender and the sender's local event index
/// at the send. External injections use ActorId::external() and an injection
/// ordinal. Equivalent interleavings therefore name the same message the same
/// way, which is what makes trace sets comparable across schedules.
struct EnvelopeId {
    ActorId sender;
    std::uint32_t index = 0;

    friend constexpr auto operator<=>(const EnvelopeId&, const EnvelopeId&) = default;
};

inline std::string to_string(const EnvelopeId& id) {
    return to_string(id.sender) + "." + std::to_string(id.index);
}

inline EnvelopeId parse_envelope_id(std::string_view text) {
    auto dot = text.find('.');
    if (dot == std::string_view::npos) throw UsageError("malformed envelope id '" + std::string(text) + "'");
    auto who = text.substr(0, dot);
    auto idx = text.substr(dot + 1);
    EnvelopeId id;
    try {
        if (who == "ext") {
            id.sender = ActorId::external();
        } else if (!who.empty() && who.front() == 'a') {
            id.sender = ActorId{static_cast<std::uint32_t>(std::stoul(std::string(who.substr(1))))};
        } else {
            throw UsageError("malformed envelope id '" + std::string(text) + "'");
        }
        id.index = static_cast<std::uint32_t>(std::stoul(std::string(idx)));
    } catch (const std::logic_error&) {
        throw UsageError("malformed envelope id '" + std::string(text) + "'");
    }
    return id;
}

// ---------------------------------------------------------------------------
// Structured values
// ---------------------------------------------------------------------------

using Value = std::variant<std::int64_t, std::string, ActorId>;

inline std::string to_string(const Value& v) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::int64_t>) {
                return std::to_string(x);
            } else if constexpr (std::is_same_v<T, std::string>) {
                return "'" + x + "'";
            } else {
                return to_string(x);
            }
        },
        v);
}

/// Tag plus named fields. Fields are kept sorted by name so that printing and
/// comparison are canonical.
class Message {
public:
    using Field = std::pair<std::string, Value>;

    Message() = default;
    explicit Message(std::string tag) : tag_(std::move(tag)) {}

    Message&& with(std::string name, Value value) && {
        set(std::move(name), std::move(value));
        return std::move(*this);
    }
    Message& with(std::string name, Value value) & {
        set(std::move(name), std::move(value));
        return *this;
    }

    void set(std::string name, Value value) {
        auto it = std::lower_bound(fields_.begin(), fields_.end(), name,
                                   [](const Field& f, const std::string& n) { return f.first < n; });
        if (it != fields_.end() && it->first == name) {
            it->second = std::move(value);
        } else {
            fields_.insert(it, Field{std::move(name), std::move(value)});
        }
    }

    const std::string& tag() const noexcept { return tag_; }
    const std::vector<Field>& fields() const noexcept { return fields_; }

    const Value* find(std::string_view name) const noexcept {
        auto it = std::lower_bound(fields_.begin(), fields_.end(), name,
                                   [](const Field& f, std::string_view n) { return f.first < n; });
        if (it != fields_.end() && it->first == name) return &it->second;
        return nullptr;
    }
    bool has(std::string_view name) const noexcept { return find(name) != nullptr; }

    std::int64_t integer(std::string_view name) const { return get<std::int64_t>(name); }
    ActorId actor(std::string_view name) const { return get<ActorId>(name); }
    const std::string& text(std::string_view name) const { return get<std::string>(name); }

    friend bool operator==(const Message&, const Message&) = default;

private:
    template <class T>
    const T& get(std::string_view name) const {
        const Value* v = find(name);
        if (v == nullptr) throw ModelingFault("message " + tag_ + " lacks field '" + std::string(name) + "'");
        const T* typed = std::get_if<T>(v);
        if (typed == nullptr) throw ModelingFault("message " + tag_ + " field '" + std::string(name) + "' has wrong type");
        return *typed;
    }

    std::string tag_;
    std::vector<Field> fields_;
};

inline std::string to_string(const Message& m) {
    std::string out = m.tag();
    if (m.fields().empty()) return out;
    out += '{';
    bool first = true;
    for (const auto& [name, value] : m.fields()) {
        if (!first) out += ',';
        first = false;
        out += name;
        out += '=';
        out += to_string(value);
    }
    out += '}';
    return out;
}

}  // namespace pgc
