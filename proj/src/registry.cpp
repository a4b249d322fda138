#include "ratchetlab/registry.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"
#include "ratchetlab/crypto/signature.hpp"
#include "ratchetlab/encoding.hpp"
#include "ratchetlab/error.hpp"

namespace ratchetlab::registry {

using nlohmann::json;

std::string_view action_name(Action a) {
    switch (a) {
        case Action::register_user: return "register";
        case Action::rotate: return "rotate";
        case Action::fetch_bundle: return "fetch_bundle";
        case Action::relay_message: return "relay_message";
    }
    return "unknown";
}

namespace {

Action parse_action(std::string_view s) {
    if (s == "register") return Action::register_user;
    if (s == "rotate") return Action::rotate;
    if (s == "fetch_bundle") return Action::fetch_bundle;
    if (s == "relay_message") return Action::relay_message;
    throw Error(Errc::parse, "unknown metadata action: " + std::string(s));
}

bool signature_valid(const crypto::IdentityPublic& identity, const crypto::PublicKey& spk,
                     const crypto::Signature& sig) {
    return crypto::verify_prekey(identity.signing, encode_public(spk), sig.view());
}

void check_unique_ids(const std::vector<OneTimePrekeyRecord>& existing, const std::vector<OneTimePrekeyRecord>& added) {
    std::set<std::uint32_t> ids;
    for (const auto& r : existing) ids.insert(r.opk_id);
    for (const auto& r : added)
        if (!ids.insert(r.opk_id).second)
            throw Error(Errc::rejected, "duplicate one-time prekey id " + std::to_string(r.opk_id));
}

void merge_pool(std::vector<OneTimePrekeyRecord>& pool, const std::vector<OneTimePrekeyRecord>& added) {
    pool.insert(pool.end(), added.begin(), added.end());
    std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) { return a.opk_id < b.opk_id; });
}

}  // namespace

const SignedPrekeyRecord& UserRecord::active_signed_prekey() const {
    for (const auto& r : signed_prekeys)
        if (!r.retired_at) return r;
    throw Error(Errc::internal, "user has no active signed prekey");
}

Registry::Registry(RegistryConfig config) : config_(config) {}

UserRecord& Registry::find_locked(const UserId& user) {
    auto it = users_.find(user);
    if (it == users_.end()) throw Error(Errc::not_found, "unknown user: " + user);
    return it->second;
}

const UserRecord& Registry::find_locked(const UserId& user) const {
    auto it = users_.find(user);
    if (it == users_.end()) throw Error(Errc::not_found, "unknown user: " + user);
    return it->second;
}

void Registry::log_locked(const UserId& actor, Action action, const std::optional<UserId>& peer, Tick at) {
    MetadataEvent ev{actor, action, peer, at};
    if (auto it = users_.find(actor); it != users_.end()) it->second.metadata_log.push_back(ev);
    if (peer && *peer != actor)
        if (auto it = users_.find(*peer); it != users_.end()) it->second.metadata_log.push_back(ev);
}

void Registry::register_user(const UserId& user, const crypto::IdentityPublic& identity,
                             const SignedPrekeyUpload& spk, const std::vector<OneTimePrekeyRecord>& opks, Tick now) {
    std::lock_guard lock(mutex_);
    if (users_.contains(user)) throw Error(Errc::conflict, "user already registered: " + user);
    if (!signature_valid(identity, spk.pub, spk.signature))
        throw Error(Errc::rejected, "signed prekey signature does not verify under identity key");
    check_unique_ids({}, opks);

    UserRecord rec;
    rec.user_id = user;
    rec.identity = identity;
    rec.signed_prekeys.push_back({spk.spk_id, spk.pub, spk.signature, now, std::nullopt});
    merge_pool(rec.one_time_pool, opks);
    users_.emplace(user, std::move(rec));
    log_locked(user, Action::register_user, std::nullopt, now);
}

void Registry::rotate_signed_prekey(const UserId& user, const SignedPrekeyUpload& spk, Tick now) {
    std::lock_guard lock(mutex_);
    auto& rec = find_locked(user);
    if (!signature_valid(rec.identity, spk.pub, spk.signature))
        throw Error(Errc::rejected, "signed prekey signature does not verify under identity key");
    for (const auto& r : rec.signed_prekeys)
        if (r.spk_id == spk.spk_id) throw Error(Errc::rejected, "signed prekey id already in use");

    for (auto& r : rec.signed_prekeys)
        if (!r.retired_at) r.retired_at = now;
    rec.signed_prekeys.push_back({spk.spk_id, spk.pub, spk.signature, now, std::nullopt});
    std::erase_if(rec.signed_prekeys, [&](const SignedPrekeyRecord& r) {
        return r.retired_at && now > *r.retired_at + config_.retention_window;
    });
    log_locked(user, Action::rotate, std::nullopt, now);
}

std::size_t Registry::replenish_opks(const UserId& user, const std::vector<OneTimePrekeyRecord>& opks) {
    std::lock_guard lock(mutex_);
    auto& rec = find_locked(user);
    check_unique_ids(rec.one_time_pool, opks);
    merge_pool(rec.one_time_pool, opks);
    return rec.one_time_pool.size();
}

PrekeyBundle Registry::fetch_bundle(const UserId& requester, const UserId& target, Tick now) {
    std::lock_guard lock(mutex_);
    auto& rec = find_locked(target);
    const auto& spk = rec.active_signed_prekey();
    PrekeyBundle bundle{rec.identity, spk.spk_id, spk.pub, spk.signature, std::nullopt};
    if (!rec.one_time_pool.empty()) {
        bundle.opk = rec.one_time_pool.front();
        rec.one_time_pool.erase(rec.one_time_pool.begin());
    }
    log_locked(requester, Action::fetch_bundle, target, now);
    return bundle;
}

void Registry::record_relay(const UserId& from, const UserId& to, Tick now) {
    std::lock_guard lock(mutex_);
    log_locked(from, Action::relay_message, to, now);
}

MetadataReport Registry::metadata_report(const UserId& user) const {
    std::lock_guard lock(mutex_);
    const auto& rec = find_locked(user);
    std::map<UserId, PeerContact> by_peer;
    for (const auto& ev : rec.metadata_log) {
        if (!ev.peer) continue;
        const UserId& other = ev.actor == user ? *ev.peer : ev.actor;
        auto& c = by_peer[other];
        c.peer = other;
        ++c.count;
        c.last_contact = std::max(c.last_contact, ev.at);
    }
    MetadataReport report{user, {}};
    for (auto& [_, c] : by_peer) report.peers.push_back(c);
    return report;
}

bool Registry::contains(const UserId& user) const {
    std::lock_guard lock(mutex_);
    return users_.contains(user);
}

std::size_t Registry::pool_size(const UserId& user) const {
    std::lock_guard lock(mutex_);
    return find_locked(user).one_time_pool.size();
}

UserRecord Registry::record(const UserId& user) const {
    std::lock_guard lock(mutex_);
    return find_locked(user);
}

std::vector<UserId> Registry::users() const {
    std::lock_guard lock(mutex_);
    std::vector<UserId> out;
    for (const auto& [id, _] : users_) out.push_back(id);
    return out;
}

std::string Registry::export_snapshot() const {
    std::lock_guard lock(mutex_);
    json doc;
    doc["version"] = 1;
    doc["retention_window"] = config_.retention_window;
    json users = json::array();
    for (const auto& [id, rec] : users_) {
        json u;
        u["user_id"] = id;
        u["identity_pub"] = to_hex(rec.identity.dh.view());
        u["identity_signing_pub"] = to_hex(rec.identity.signing.view());
        json spks = json::array();
        for (const auto& s : rec.signed_prekeys) {
            json j{{"spk_id", s.spk_id},
                   {"public", to_hex(s.pub.view())},
                   {"signature", to_hex(s.signature.view())},
                   {"published_at", s.published_at}};
            j["retired_at"] = s.retired_at ? json(*s.retired_at) : json(nullptr);
            spks.push_back(j);
        }
        u["signed_prekeys"] = spks;
        json pool = json::array();
        for (const auto& o : rec.one_time_pool) pool.push_back({{"opk_id", o.opk_id}, {"public", to_hex(o.pub.view())}});
        u["one_time_pool"] = pool;
        json log = json::array();
        for (const auto& ev : rec.metadata_log) {
            json e{{"actor", ev.actor}, {"action", action_name(ev.action)}, {"at", ev.at}};
            e["peer"] = ev.peer ? json(*ev.peer) : json(nullptr);
            log.push_back(e);
        }
        u["metadata_log"] = log;
        users.push_back(u);
    }
    doc["users"] = users;
    return doc.dump(2);
}

void Registry::import_snapshot(std::string_view text) {
    std::map<UserId, UserRecord> loaded;
    RegistryConfig cfg;
    try {
        json doc = json::parse(text);
        if (doc.at("version").get<int>() != 1) throw Error(Errc::parse, "unsupported snapshot version");
        cfg.retention_window = doc.at("retention_window").get<Tick>();
        for (const auto& u : doc.at("users")) {
            UserRecord rec;
            rec.user_id = u.at("user_id").get<std::string>();
            rec.identity.dh = crypto::PublicKey::from_bytes(from_hex(u.at("identity_pub").get<std::string>()));
            rec.identity.signing =
                crypto::SigningPublicKey::from_bytes(from_hex(u.at("identity_signing_pub").get<std::string>()));
            std::size_t active = 0;
            for (const auto& s : u.at("signed_prekeys")) {
                SignedPrekeyRecord r;
                r.spk_id = s.at("spk_id").get<std::uint32_t>();
                r.pub = crypto::PublicKey::from_bytes(from_hex(s.at("public").get<std::string>()));
                r.signature = crypto::Signature::from_bytes(from_hex(s.at("signature").get<std::string>()));
                r.published_at = s.at("published_at").get<Tick>();
                if (!s.at("retired_at").is_null()) r.retired_at = s.at("retired_at").get<Tick>();
                else ++active;
                if (!signature_valid(rec.identity, r.pub, r.signature))
                    throw Error(Errc::parse, "snapshot holds a signed prekey with an invalid signature");
                rec.signed_prekeys.push_back(r);
            }
            if (active != 1) throw Error(Errc::parse, "snapshot user must have exactly one active signed prekey");
            std::vector<OneTimePrekeyRecord> pool;
            for (const auto& o : u.at("one_time_pool"))
                pool.push_back({o.at("opk_id").get<std::uint32_t>(),
                                crypto::PublicKey::from_bytes(from_hex(o.at("public").get<std::string>()))});
            check_unique_ids({}, pool);
            merge_pool(rec.one_time_pool, pool);
            for (const auto& e : u.at("metadata_log")) {
                MetadataEvent ev;
                ev.actor = e.at("actor").get<std::string>();
                ev.action = parse_action(e.at("action").get<std::string>());
                if (!e.at("peer").is_null()) ev.peer = e.at("peer").get<std::string>();
                ev.at = e.at("at").get<Tick>();
                rec.metadata_log.push_back(ev);
            }
            if (!loaded.emplace(rec.user_id, rec).second) throw Error(Errc::parse, "duplicate user in snapshot");
        }
    } catch (const json::exception& e) {
        throw Error(Errc::parse, std::string("malformed registry snapshot: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == Errc::parse) throw;
        throw Error(Errc::parse, std::string("malformed registry snapshot: ") + e.what());
    }
    std::lock_guard lock(mutex_);
    config_ = cfg;
    users_ = std::move(loaded);
}

}  // namespace ratchetlab::registry
