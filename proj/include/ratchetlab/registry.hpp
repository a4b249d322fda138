#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ratchetlab/crypto/keys.hpp"

namespace ratchetlab::registry {

using UserId = std::string;
using Tick = std::uint64_t;

inline constexpr Tick kDefaultRotationPeriod = 7;
inline constexpr Tick kDefaultRetentionWindow = 2 * kDefaultRotationPeriod;
/// Pool size below which a client should upload more one-time prekeys.
inline constexpr std::size_t kLowPoolThreshold = 5;

struct SignedPrekeyUpload {
    std::uint32_t spk_id = 0;
    crypto::PublicKey pub;
    crypto::Signature signature;
};

struct OneTimePrekeyRecord {
    std::uint32_t opk_id = 0;
    crypto::PublicKey pub;
    bool operator==(const OneTimePrekeyRecord&) const = default;
};

struct SignedPrekeyRecord {
    std::uint32_t spk_id = 0;
    crypto::PublicKey pub;
    crypto::Signature signature;
    Tick published_at = 0;
    std::optional<Tick> retired_at;
};

enum class Action { register_user, rotate, fetch_bundle, relay_message };

std::string_view action_name(Action a);

struct MetadataEvent {
    UserId actor;
    Action action = Action::register_user;
    std::optional<UserId> peer;
    Tick at = 0;
    bool operator==(const MetadataEvent&) const = default;
};

/// Server-side view of a user. Holds public material only.
struct UserRecord {
    UserId user_id;
    crypto::IdentityPublic identity;
    std::vector<SignedPrekeyRecord> signed_prekeys;  // newest last; exactly one without retired_at
    std::vector<OneTimePrekeyRecord> one_time_pool;  // sorted by opk_id
    std::vector<MetadataEvent> metadata_log;

    const SignedPrekeyRecord& active_signed_prekey() const;
};

struct PrekeyBundle {
    crypto::IdentityPublic identity;
    std::uint32_t spk_id = 0;
    crypto::PublicKey spk_pub;
    crypto::Signature spk_signature;
    std::optional<OneTimePrekeyRecord> opk;
};

struct PeerContact {
    UserId peer;
    std::size_t count = 0;
    Tick last_contact = 0;
    bool operator==(const PeerContact&) const = default;
};

struct MetadataReport {
    UserId user;
    std::vector<PeerContact> peers;  // sorted by peer id
};

struct RegistryConfig {
    Tick retention_window = kDefaultRetentionWindow;
};

/// In-memory key server. Every command takes the registry lock, so commands
/// from concurrent callers apply atomically in arrival order.
class Registry {
public:
    explicit Registry(RegistryConfig config = {});

    /// Errc::conflict on a taken user id; Errc::rejected on a bad SPK signature
    /// or duplicate one-time prekey ids.
    void register_user(const UserId& user, const crypto::IdentityPublic& identity, const SignedPrekeyUpload& spk,
                       const std::vector<OneTimePrekeyRecord>& opks, Tick now = 0);

    /// Retires the active SPK at `now` and purges records retired more than
    /// retention_window ticks ago.
    void rotate_signed_prekey(const UserId& user, const SignedPrekeyUpload& spk, Tick now);

    /// Returns the new pool size. The whole upload is rejected if any id collides.
    std::size_t replenish_opks(const UserId& user, const std::vector<OneTimePrekeyRecord>& opks);

    /// Pops the lowest-id one-time prekey if any.
    PrekeyBundle fetch_bundle(const UserId& requester, const UserId& target, Tick now);

    /// Logs that the server relayed a message from `from` to `to`.
    void record_relay(const UserId& from, const UserId& to, Tick now);

    MetadataReport metadata_report(const UserId& user) const;

    bool contains(const UserId& user) const;
    std::size_t pool_size(const UserId& user) const;
    UserRecord record(const UserId& user) const;
    std::vector<UserId> users() const;
    const RegistryConfig& config() const { return config_; }

    /// JSON snapshot of all records, pools, and logs.
    std::string export_snapshot() const;
    /// Replaces the current state. Throws Error(Errc::parse) on a malformed document.
    void import_snapshot(std::string_view json);

private:
    UserRecord& find_locked(const UserId& user);
    const UserRecord& find_locked(const UserId& user) const;
    void log_locked(const UserId& actor, Action action, const std::optional<UserId>& peer, Tick at);

    RegistryConfig config_;
    mutable std::mutex mutex_;
    std::map<UserId, UserRecord> users_;
};

}  // namespace ratchetlab::registry
