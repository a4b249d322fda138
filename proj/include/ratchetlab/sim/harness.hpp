#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ratchetlab/bytes.hpp"
#include "ratchetlab/crypto/entropy.hpp"
#include "ratchetlab/registry.hpp"
#include "ratchetlab/session.hpp"
#include "ratchetlab/sim/scenario.hpp"

namespace ratchetlab::sim {

using registry::Tick;

/// Reserved actor names.
inline constexpr std::string_view kMark = "mark";
inline constexpr std::string_view kTransport = "transport";

/// One line of the audit log. Append-only; serialised as JSON lines.
///
/// Server-visible actions: register, rotate_spk, fetch_bundle, relay.
/// Client actions: establish, send, ratchet (step = dh-step | symmetric-step,
/// detail = send | recv), deliver, replenish, verify_codes.
/// Transport and adversary actions: drop, tamper, mitm_arm, mitm_substitute_bundle, mitm_intercept.
struct TranscriptEvent {
    std::uint64_t seq = 0;
    Tick at = 0;
    std::string actor;
    std::string action;
    std::optional<std::string> peer;
    std::optional<std::uint64_t> msg;
    std::optional<std::string> step;
    std::optional<std::string> text;
    std::optional<std::size_t> bytes;
    std::string detail;
    std::string outcome = "ok";
    std::string reason;
    bool operator==(const TranscriptEvent&) const = default;
};

std::string transcript_to_jsonl(const std::vector<TranscriptEvent>& events);
/// Throws Error(Errc::parse) on a malformed line.
std::vector<TranscriptEvent> transcript_from_jsonl(std::string_view text);

/// An envelope as it left the transport, after any adversary rewrite.
struct WireRecord {
    std::uint64_t msg = 0;
    UserId from;
    UserId to;
    Bytes envelope;
};

struct DeliveryOutcome {
    bool ok = false;
    Bytes plaintext;
    std::string reason;
};

struct MessageFate {
    UserId from;
    UserId to;
    std::string text;
    bool composed = false;
    bool dropped = false;
    std::size_t delivered_ok = 0;
    std::size_t rejected = 0;
    std::size_t plaintext_mismatches = 0;
    std::optional<SendExpectation> expect;
};

/// Tallies of the four ratchet-step rules for a conversation viewed from the
/// first party ("green" = first party's messages, "white" = the peer's):
///   [0] white->white  peer's hashing ratchet only
///   [1] green->green  viewer's hashing ratchet only
///   [2] white->green  viewer's DH ratchet steps once
///   [3] green->white  peer's DH ratchet steps once
struct RuleCheck {
    std::array<std::size_t, 4> rule_counts{};
    std::size_t judged = 0;
    std::size_t establishments = 0;
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
    bool all_rules_exercised() const;
};

/// Checks DH-step/symmetric-step labels for every pair of parties. A send is
/// judged only when every earlier message of its pair was already delivered.
RuleCheck check_ratchet_rules(const std::vector<TranscriptEvent>& transcript, const std::vector<UserId>& parties);

struct HarnessOptions {
    std::size_t initial_opks = 10;
    bool auto_replenish = true;
    std::size_t replenish_batch = 10;
};

/// Deterministic single-threaded world: one key server, the declared
/// parties, a transport, and optionally Mark in the middle.
class Harness {
public:
    Harness(std::vector<UserId> parties, std::uint64_t seed, HarnessOptions options = {});
    ~Harness();
    Harness(const Harness&) = delete;
    Harness& operator=(const Harness&) = delete;

    /// Sender side: establishes a session on first use, encrypts, hands the
    /// envelope to the server, and lets Mark rewrite it if armed. Returns
    /// nullopt (and logs a rejection) if the sender cannot produce a message.
    std::optional<WireRecord> compose(const UserId& from, const UserId& to, std::string_view text);

    /// Recipient side. Never throws on protocol errors; they become rejected events.
    DeliveryOutcome deliver(const WireRecord& record);

    void drop(const WireRecord& record);
    /// XORs `mask` into one byte (index taken modulo the length) and logs it.
    WireRecord tamper(const WireRecord& record, std::size_t byte_index, std::uint8_t mask = 0x01,
                      std::string_view actor = kTransport);

    void rotate_spk(const UserId& user);
    std::size_t replenish(const UserId& user, std::size_t count, std::string_view detail = {});
    void arm_mitm(const UserId& a, const UserId& b);
    /// Each side computes the code from the identity key it actually holds for the other.
    bool verify_codes(const UserId& a, const UserId& b);
    session::SafetyCode code_seen_by(const UserId& owner, const UserId& peer) const;

    void advance(Tick ticks = 1) { now_ += ticks; }
    Tick now() const { return now_; }

    const std::vector<TranscriptEvent>& transcript() const { return transcript_; }
    const std::vector<WireRecord>& wire_log() const { return wire_log_; }
    const std::map<std::uint64_t, MessageFate>& messages() const { return messages_; }
    std::map<std::uint64_t, MessageFate>& mutable_messages() { return messages_; }
    const std::vector<std::string>& mark_plaintexts() const { return mark_plaintexts_; }

    registry::Registry& server() { return server_; }
    const registry::Registry& server() const { return server_; }
    session::Account& account(const UserId& user);
    session::Session* session(const UserId& owner, const UserId& peer);
    const std::vector<UserId>& parties() const { return parties_; }
    crypto::EntropySource& rng() { return rng_; }

private:
    struct Party;
    struct Mitm;

    TranscriptEvent& log(std::string actor, std::string action);
    void log_steps(const UserId& actor, const UserId& peer, std::uint64_t msg, const ratchet::StepCounters& before,
                   const ratchet::StepCounters& after);
    Party& party(const UserId& user);
    const Party& party(const UserId& user) const;
    registry::PrekeyBundle fetch_for(const UserId& requester, const UserId& target);
    Bytes mark_rewrite(const UserId& from, const UserId& to, std::uint64_t msg, Bytes envelope);

    std::vector<UserId> parties_;
    HarnessOptions options_;
    crypto::DeterministicEntropy rng_;
    registry::Registry server_;
    std::map<UserId, std::unique_ptr<Party>> party_map_;
    std::unique_ptr<Mitm> mitm_;
    std::vector<TranscriptEvent> transcript_;
    std::vector<WireRecord> wire_log_;
    std::map<std::uint64_t, MessageFate> messages_;
    std::vector<std::string> mark_plaintexts_;
    Tick now_ = 0;
    std::uint64_t next_msg_ = 1;
};

struct RunResult {
    std::vector<TranscriptEvent> transcript;
    std::map<std::uint64_t, MessageFate> messages;
    std::vector<std::string> failures;
    RuleCheck rules;
    std::size_t skipped_keys_remaining = 0;
    std::string registry_snapshot;
    std::vector<WireRecord> wire;
    bool ok() const { return failures.empty() && rules.ok(); }
};

/// Executes a scenario. Component errors become rejected transcript events;
/// the run itself only fails on a malformed scenario (Errc::config).
RunResult run(const Scenario& scenario);

}  // namespace ratchetlab::sim
