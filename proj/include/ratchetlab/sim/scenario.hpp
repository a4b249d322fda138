#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ratchetlab/registry.hpp"

namespace ratchetlab::sim {

using registry::UserId;

enum class DeliveryKind { deliver, drop, reorder, duplicate, tamper };

struct DeliveryPolicy {
    DeliveryKind kind = DeliveryKind::deliver;
    /// reorder: deliver right after the script event at this index
    /// (an index past the end means "when the script finishes").
    std::size_t reorder_to = 0;
    /// tamper: flip the low bit of this byte (taken modulo the envelope length).
    std::size_t tamper_byte = 0;
};

enum class SendExpectation { delivered, rejected, dropped };

struct SendEvent {
    UserId from;
    UserId to;
    std::string text;
    DeliveryPolicy policy;
    std::optional<SendExpectation> expect;
};

struct RotateSpkEvent {
    UserId user;
};

struct ReplenishEvent {
    UserId user;
    std::size_t count = 0;
};

struct MarkMitmEvent {
    UserId a;
    UserId b;
};

struct VerifyCodesEvent {
    UserId a;
    UserId b;
    std::optional<bool> expect_match;
};

struct TickEvent {
    std::uint64_t count = 1;
};

using ScriptEvent = std::variant<SendEvent, RotateSpkEvent, ReplenishEvent, MarkMitmEvent, VerifyCodesEvent, TickEvent>;

struct Scenario {
    std::vector<UserId> parties;
    std::vector<ScriptEvent> script;
    std::uint64_t seed = 0;
    std::size_t initial_opks = 10;
    bool auto_replenish = true;
    std::size_t replenish_batch = 10;
};

/// Throws Error(Errc::config) for malformed documents or references to undeclared parties.
Scenario parse_scenario(std::string_view json);
Scenario load_scenario(const std::filesystem::path& path);
std::string scenario_to_json(const Scenario& scenario);

void validate(const Scenario& scenario);

}  // namespace ratchetlab::sim
