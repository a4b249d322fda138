#pragma once

#include <cstdint>
#include <string>

#include "ratchetlab/sim/harness.hpp"

namespace ratchetlab::sim {

struct Verdict {
    bool pass = false;
    std::string detail;
};

/// Outcome of Mark's three attacks on one pair.
struct AttackReport {
    UserId a;
    UserId b;
    Verdict confidentiality;
    Verdict integrity;
    Verdict authenticity;

    std::size_t messages = 0;
    std::size_t recovery_attempts = 0;
    std::size_t plaintexts_recovered = 0;
    std::size_t tampered_deliveries = 0;
    std::size_t tamper_rejections = 0;
    std::size_t originals_delivered_after_tamper = 0;
    bool honest_codes_match = false;
    bool forged_message_rejected = false;
    bool replay_rejected = false;
    bool mitm_delivery_succeeded = false;
    bool mitm_codes_mismatch = false;
    std::size_t mitm_plaintexts_read = 0;

    bool all_pass() const { return confidentiality.pass && integrity.pass && authenticity.pass; }
};

struct AttackOptions {
    std::size_t messages = 12;
    std::size_t tamper_positions_per_message = 8;
};

/// Runs the confidentiality, integrity and authenticity attacks. Mark never
/// holds a victim's private key; he sees the server's public state and every
/// envelope, and may rewrite, inject or substitute bundles.
AttackReport mark_attack_suite(const UserId& a, const UserId& b, std::uint64_t seed, AttackOptions options = {});

std::string render(const AttackReport& report);

}  // namespace ratchetlab::sim
