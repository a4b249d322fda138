#include "ratchetlab/sim/harness.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ratchetlab/error.hpp"
#include "ratchetlab/wire.hpp"

namespace ratchetlab::sim {

using nlohmann::json;

struct Harness::Party {
    session::Account account;
    std::map<UserId, session::Session> sessions;
};

// Mark holds a forged identity for each victim, published on a shadow server
// he controls, and one session per victim under the opposite forged identity.
struct Harness::Mitm {
    UserId a;
    UserId b;
    crypto::DeterministicEntropy rng;
    registry::Registry shadow;
    std::map<UserId, session::Account> forged;
    std::map<UserId, session::Session> with;

    Mitm(UserId a_, UserId b_, ByteView seed) : a(std::move(a_)), b(std::move(b_)), rng(seed) {}

    bool covers(const UserId& x, const UserId& y) const { return (x == a && y == b) || (x == b && y == a); }
};

namespace {

std::string describe(const Error& e) { return std::string(errc_name(e.code())) + ": " + e.what(); }

}  // namespace

Harness::Harness(std::vector<UserId> parties, std::uint64_t seed, HarnessOptions options)
    : parties_(std::move(parties)), options_(options), rng_(seed) {
    for (const auto& user : parties_) {
        auto p = std::make_unique<Party>(Party{session::Account(user, rng_), {}});
        p->account.register_with(server_, options_.initial_opks, now_);
        log(user, "register");
        party_map_.emplace(user, std::move(p));
    }
}

Harness::~Harness() = default;

TranscriptEvent& Harness::log(std::string actor, std::string action) {
    TranscriptEvent ev;
    ev.seq = transcript_.size();
    ev.at = now_;
    ev.actor = std::move(actor);
    ev.action = std::move(action);
    transcript_.push_back(std::move(ev));
    return transcript_.back();
}

void Harness::log_steps(const UserId& actor, const UserId& peer, std::uint64_t msg,
                        const ratchet::StepCounters& before, const ratchet::StepCounters& after) {
    auto emit = [&](std::uint64_t n, const char* step, const char* side) {
        for (std::uint64_t i = 0; i < n; ++i) {
            auto& ev = log(actor, "ratchet");
            ev.peer = peer;
            ev.msg = msg;
            ev.step = step;
            ev.detail = side;
        }
    };
    emit(after.dh_steps - before.dh_steps, "dh-step", "root");
    emit(after.recv_steps - before.recv_steps, "symmetric-step", "recv");
    emit(after.send_steps - before.send_steps, "symmetric-step", "send");
}

Harness::Party& Harness::party(const UserId& user) {
    auto it = party_map_.find(user);
    if (it == party_map_.end()) throw Error(Errc::config, "unknown party: " + user);
    return *it->second;
}

const Harness::Party& Harness::party(const UserId& user) const {
    auto it = party_map_.find(user);
    if (it == party_map_.end()) throw Error(Errc::config, "unknown party: " + user);
    return *it->second;
}

session::Account& Harness::account(const UserId& user) { return party(user).account; }

session::Session* Harness::session(const UserId& owner, const UserId& peer) {
    auto& p = party(owner);
    auto it = p.sessions.find(peer);
    return it == p.sessions.end() ? nullptr : &it->second;
}

registry::PrekeyBundle Harness::fetch_for(const UserId& requester, const UserId& target) {
    auto bundle = server_.fetch_bundle(requester, target, now_);
    auto& ev = log(requester, "fetch_bundle");
    ev.peer = target;
    ev.detail = bundle.opk ? "opk=" + std::to_string(bundle.opk->opk_id) : "opk=none";

    if (options_.auto_replenish && party_map_.contains(target) &&
        server_.pool_size(target) < registry::kLowPoolThreshold)
        replenish(target, options_.replenish_batch, "auto");

    if (mitm_ && mitm_->covers(requester, target)) {
        auto forged = mitm_->shadow.fetch_bundle(requester, target, now_);
        auto& m = log(std::string(kMark), "mitm_substitute_bundle");
        m.peer = target;
        m.detail = "bundle for " + target + " replaced for " + requester;
        return forged;
    }
    return bundle;
}

std::optional<WireRecord> Harness::compose(const UserId& from, const UserId& to, std::string_view text) {
    const std::uint64_t id = next_msg_++;
    auto& fate = messages_[id];
    fate.from = from;
    fate.to = to;
    fate.text = std::string(text);

    auto& sender = party(from);
    party(to);
    Bytes envelope;
    try {
        auto it = sender.sessions.find(to);
        if (it == sender.sessions.end()) {
            auto bundle = fetch_for(from, to);
            auto out = session::establish_outbound_with_bundle(sender.account, bundle, to, to_bytes(text), rng_);
            auto& ev = log(from, "establish");
            ev.peer = to;
            ev.msg = id;
            ev.detail = bundle.opk ? "x3dh-4dh" : "x3dh-3dh";
            log_steps(from, to, id, {}, out.session.ratchet().counters);
            sender.sessions.insert_or_assign(to, std::move(out.session));
            envelope = std::move(out.envelope);
        } else {
            auto before = it->second.ratchet().counters;
            envelope = it->second.encrypt(to_bytes(text));
            log_steps(from, to, id, before, it->second.ratchet().counters);
        }
    } catch (const Error& e) {
        auto& ev = log(from, "send");
        ev.peer = to;
        ev.msg = id;
        ev.text = std::string(text);
        ev.outcome = "rejected";
        ev.reason = describe(e);
        return std::nullopt;
    }

    fate.composed = true;
    auto& ev = log(from, "send");
    ev.peer = to;
    ev.msg = id;
    ev.text = std::string(text);
    ev.detail = wire::peek_kind(envelope) == wire::Kind::initial ? "initial" : "normal";

    server_.record_relay(from, to, now_);
    auto& relay = log(from, "relay");
    relay.peer = to;
    relay.msg = id;
    relay.bytes = envelope.size();

    if (mitm_ && mitm_->covers(from, to)) envelope = mark_rewrite(from, to, id, std::move(envelope));

    WireRecord rec{id, from, to, std::move(envelope)};
    wire_log_.push_back(rec);
    return rec;
}

Bytes Harness::mark_rewrite(const UserId& from, const UserId& to, std::uint64_t msg, Bytes envelope) {
    auto& m = *mitm_;
    try {
        Bytes plaintext;
        if (wire::peek_kind(envelope) == wire::Kind::initial) {
            auto in = session::establish_inbound(m.forged.at(to), from, envelope, m.rng);
            plaintext = std::move(in.plaintext);
            m.with.insert_or_assign(from, std::move(in.session));
        } else {
            auto it = m.with.find(from);
            if (it == m.with.end()) throw Error(Errc::no_session, "Mark holds no session with " + from);
            plaintext = it->second.decrypt(envelope, m.rng);
        }

        Bytes forwarded;
        if (auto it = m.with.find(to); it != m.with.end()) {
            forwarded = it->second.encrypt(plaintext);
        } else {
            auto bundle = server_.fetch_bundle(std::string(kMark), to, now_);
            auto& f = log(std::string(kMark), "fetch_bundle");
            f.peer = to;
            f.detail = bundle.opk ? "opk=" + std::to_string(bundle.opk->opk_id) : "opk=none";
            auto out = session::establish_outbound_with_bundle(m.forged.at(from), bundle, to, plaintext, m.rng);
            m.with.insert_or_assign(to, std::move(out.session));
            forwarded = std::move(out.envelope);
        }
        auto& ev = log(std::string(kMark), "mitm_intercept");
        ev.peer = to;
        ev.msg = msg;
        ev.text = to_string(plaintext);
        ev.detail = "read and re-encrypted message from " + from;
        mark_plaintexts_.push_back(to_string(plaintext));
        return forwarded;
    } catch (const Error& e) {
        auto& ev = log(std::string(kMark), "mitm_intercept");
        ev.peer = to;
        ev.msg = msg;
        ev.outcome = "rejected";
        ev.reason = describe(e);
        ev.detail = "passed through unchanged";
        return envelope;
    }
}

DeliveryOutcome Harness::deliver(const WireRecord& record) {
    auto& fate = messages_[record.msg];
    auto& recipient = party(record.to);
    DeliveryOutcome result;
    try {
        if (wire::peek_kind(record.envelope) == wire::Kind::initial) {
            auto in = session::establish_inbound(recipient.account, record.from, record.envelope, rng_);
            log_steps(record.to, record.from, record.msg, {}, in.session.ratchet().counters);
            recipient.sessions.insert_or_assign(record.from, std::move(in.session));
            result.plaintext = std::move(in.plaintext);
        } else {
            auto it = recipient.sessions.find(record.from);
            if (it == recipient.sessions.end())
                throw Error(Errc::no_session, "no session with " + record.from);
            auto before = it->second.ratchet().counters;
            result.plaintext = it->second.decrypt(record.envelope, rng_);
            log_steps(record.to, record.from, record.msg, before, it->second.ratchet().counters);
        }
        result.ok = true;
    } catch (const Error& e) {
        result.reason = describe(e);
    }

    auto& ev = log(record.to, "deliver");
    ev.peer = record.from;
    ev.msg = record.msg;
    if (result.ok) {
        ev.text = to_string(result.plaintext);
        ++fate.delivered_ok;
        if (ev.text != fate.text) ++fate.plaintext_mismatches;
    } else {
        ev.outcome = "rejected";
        ev.reason = result.reason;
        ++fate.rejected;
    }
    return result;
}

void Harness::drop(const WireRecord& record) {
    messages_[record.msg].dropped = true;
    auto& ev = log(std::string(kTransport), "drop");
    ev.peer = record.to;
    ev.msg = record.msg;
}

WireRecord Harness::tamper(const WireRecord& record, std::size_t byte_index, std::uint8_t mask,
                           std::string_view actor) {
    WireRecord out = record;
    if (!out.envelope.empty()) out.envelope[byte_index % out.envelope.size()] ^= mask;
    auto& ev = log(std::string(actor), "tamper");
    ev.peer = record.to;
    ev.msg = record.msg;
    ev.detail = "xor " + std::to_string(mask) + " at byte " + std::to_string(out.envelope.empty() ? 0 : byte_index % out.envelope.size());
    return out;
}

void Harness::rotate_spk(const UserId& user) {
    auto& ev = log(user, "rotate_spk");
    try {
        party(user).account.rotate_signed_prekey(server_, now_);
    } catch (const Error& e) {
        ev.outcome = "rejected";
        ev.reason = describe(e);
    }
}

std::size_t Harness::replenish(const UserId& user, std::size_t count, std::string_view detail) {
    std::size_t size = party(user).account.replenish(server_, count);
    auto& ev = log(user, "replenish");
    ev.detail = std::string(detail.empty() ? "" : std::string(detail) + " ") + "pool=" + std::to_string(size);
    return size;
}

void Harness::arm_mitm(const UserId& a, const UserId& b) {
    ByteArray<32> seed;
    rng_.fill(seed);
    mitm_ = std::make_unique<Mitm>(a, b, seed);
    for (const auto& victim : {a, b}) {
        session::Account forged(victim, mitm_->rng);
        forged.register_with(mitm_->shadow, options_.initial_opks, now_);
        mitm_->forged.emplace(victim, std::move(forged));
    }
    auto& ev = log(std::string(kMark), "mitm_arm");
    ev.peer = a + "," + b;
}

session::SafetyCode Harness::code_seen_by(const UserId& owner, const UserId& peer) const {
    const auto& p = party(owner);
    auto it = p.sessions.find(peer);
    crypto::PublicKey peer_ik = it != p.sessions.end() ? it->second.ik_remote() : server_.record(peer).identity.dh;
    return session::safety_code(p.account.identity().pub, owner, peer_ik, peer);
}

bool Harness::verify_codes(const UserId& a, const UserId& b) {
    auto code_a = code_seen_by(a, b);
    auto code_b = code_seen_by(b, a);
    bool match = code_a == code_b;
    auto& ev = log(a, "verify_codes");
    ev.peer = b;
    ev.outcome = match ? "match" : "mismatch";
    ev.detail = a + ": " + code_a.grouped() + " | " + b + ": " + code_b.grouped();
    return match;
}

bool RuleCheck::all_rules_exercised() const {
    return std::all_of(rule_counts.begin(), rule_counts.end(), [](std::size_t n) { return n > 0; });
}

RuleCheck check_ratchet_rules(const std::vector<TranscriptEvent>& transcript, const std::vector<UserId>& parties) {
    RuleCheck out;
    std::map<UserId, std::size_t> order;
    for (std::size_t i = 0; i < parties.size(); ++i) order[parties[i]] = i;

    using Directed = std::pair<UserId, UserId>;
    auto pair_key = [&](const UserId& x, const UserId& y) {
        return order.at(x) < order.at(y) ? Directed{x, y} : Directed{y, x};
    };

    std::map<Directed, std::uint64_t> dh_since_send;   // (owner, peer)
    std::map<Directed, std::uint64_t> sym_since_send;  // send-chain steps
    std::map<Directed, std::optional<UserId>> last_sender;
    std::map<Directed, std::set<std::uint64_t>> undelivered;

    for (const auto& ev : transcript) {
        if (!ev.peer || !order.contains(ev.actor) || !order.contains(*ev.peer)) continue;
        const Directed self{ev.actor, *ev.peer};
        if (ev.action == "ratchet" && ev.step) {
            if (*ev.step == "dh-step") ++dh_since_send[self];
            else if (ev.detail == "send") ++sym_since_send[self];
        } else if (ev.action == "deliver" && ev.outcome == "ok" && ev.msg) {
            undelivered[pair_key(ev.actor, *ev.peer)].erase(*ev.msg);
        } else if (ev.action == "send" && ev.outcome == "ok" && ev.msg) {
            const auto key = pair_key(ev.actor, *ev.peer);
            const bool green = key.first == ev.actor;
            const auto dh = dh_since_send[self];
            const auto sym = sym_since_send[self];
            auto& prev = last_sender[key];
            if (undelivered[key].empty()) {
                ++out.judged;
                std::string where = "msg " + std::to_string(*ev.msg) + " (" + ev.actor + "->" + *ev.peer + ")";
                if (sym != 1)
                    out.violations.push_back(where + ": expected one send-chain step, saw " + std::to_string(sym));
                if (!prev) {
                    ++out.establishments;
                    if (dh != 1) out.violations.push_back(where + ": first message needs exactly one DH step");
                } else if (*prev == ev.actor) {
                    ++out.rule_counts[green ? 1 : 0];
                    if (dh != 0)
                        out.violations.push_back(where + ": same-direction message performed " + std::to_string(dh) +
                                                 " DH steps");
                } else {
                    ++out.rule_counts[green ? 2 : 3];
                    if (dh != 1)
                        out.violations.push_back(where + ": direction change performed " + std::to_string(dh) +
                                                 " DH steps, expected 1");
                }
            }
            prev = ev.actor;
            undelivered[key].insert(*ev.msg);
            dh_since_send[self] = 0;
            sym_since_send[self] = 0;
        }
    }
    return out;
}

std::string transcript_to_jsonl(const std::vector<TranscriptEvent>& events) {
    std::string out;
    for (const auto& ev : events) {
        json j;
        j["seq"] = ev.seq;
        j["at"] = ev.at;
        j["actor"] = ev.actor;
        j["action"] = ev.action;
        if (ev.peer) j["peer"] = *ev.peer;
        if (ev.msg) j["msg"] = *ev.msg;
        if (ev.step) j["step"] = *ev.step;
        if (ev.text) j["text"] = *ev.text;
        if (ev.bytes) j["bytes"] = *ev.bytes;
        if (!ev.detail.empty()) j["detail"] = ev.detail;
        j["outcome"] = ev.outcome;
        if (!ev.reason.empty()) j["reason"] = ev.reason;
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<TranscriptEvent> transcript_from_jsonl(std::string_view text) {
    std::vector<TranscriptEvent> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            json j = json::parse(line);
            TranscriptEvent ev;
            ev.seq = j.at("seq").get<std::uint64_t>();
            ev.at = j.at("at").get<Tick>();
            ev.actor = j.at("actor").get<std::string>();
            ev.action = j.at("action").get<std::string>();
            if (j.contains("peer")) ev.peer = j["peer"].get<std::string>();
            if (j.contains("msg")) ev.msg = j["msg"].get<std::uint64_t>();
            if (j.contains("step")) ev.step = j["step"].get<std::string>();
            if (j.contains("text")) ev.text = j["text"].get<std::string>();
            if (j.contains("bytes")) ev.bytes = j["bytes"].get<std::size_t>();
            ev.detail = j.value("detail", std::string());
            ev.outcome = j.at("outcome").get<std::string>();
            ev.reason = j.value("reason", std::string());
            out.push_back(std::move(ev));
        } catch (const json::exception& e) {
            throw Error(Errc::parse, "transcript line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

namespace {

struct Held {
    std::size_t release_after;
    WireRecord record;
};

}  // namespace

RunResult run(const Scenario& scenario) {
    validate(scenario);
    Harness h(scenario.parties, scenario.seed,
              HarnessOptions{scenario.initial_opks, scenario.auto_replenish, scenario.replenish_batch});
    RunResult result;
    std::vector<Held> held;

    auto release = [&](std::size_t index) {
        std::vector<WireRecord> due;
        std::erase_if(held, [&](Held& x) {
            if (x.release_after != index) return false;
            due.push_back(std::move(x.record));
            return true;
        });
        for (const auto& rec : due) h.deliver(rec);
    };

    for (std::size_t i = 0; i < scenario.script.size(); ++i) {
        h.advance();
        std::visit(
            [&](const auto& e) {
                using T = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<T, SendEvent>) {
                    auto rec = h.compose(e.from, e.to, e.text);
                    if (!rec) {
                        h.mutable_messages()[h.messages().rbegin()->first].expect = e.expect;
                        return;
                    }
                    h.mutable_messages()[rec->msg].expect = e.expect;
                    switch (e.policy.kind) {
                        case DeliveryKind::deliver: h.deliver(*rec); break;
                        case DeliveryKind::drop: h.drop(*rec); break;
                        case DeliveryKind::duplicate:
                            h.deliver(*rec);
                            h.deliver(*rec);
                            break;
                        case DeliveryKind::tamper: h.deliver(h.tamper(*rec, e.policy.tamper_byte)); break;
                        case DeliveryKind::reorder: held.push_back({e.policy.reorder_to, std::move(*rec)}); break;
                    }
                } else if constexpr (std::is_same_v<T, RotateSpkEvent>) {
                    h.rotate_spk(e.user);
                } else if constexpr (std::is_same_v<T, ReplenishEvent>) {
                    h.replenish(e.user, e.count);
                } else if constexpr (std::is_same_v<T, MarkMitmEvent>) {
                    h.arm_mitm(e.a, e.b);
                } else if constexpr (std::is_same_v<T, VerifyCodesEvent>) {
                    bool match = h.verify_codes(e.a, e.b);
                    if (e.expect_match && *e.expect_match != match)
                        result.failures.push_back("verify_codes " + e.a + "/" + e.b + ": expected " +
                                                  (*e.expect_match ? "match" : "mismatch"));
                } else {
                    h.advance(e.count);
                }
            },
            scenario.script[i]);
        release(i);
    }
    for (auto& x : held) h.deliver(x.record);

    for (const auto& [id, fate] : h.messages()) {
        const std::string where = "msg " + std::to_string(id) + " (" + fate.from + "->" + fate.to + ")";
        if (fate.delivered_ok > 1) result.failures.push_back(where + ": decrypted more than once");
        if (fate.plaintext_mismatches) result.failures.push_back(where + ": recovered plaintext differs");
        if (!fate.expect) continue;
        switch (*fate.expect) {
            case SendExpectation::delivered:
                if (fate.delivered_ok != 1) result.failures.push_back(where + ": expected delivery");
                break;
            case SendExpectation::rejected:
                if (fate.delivered_ok != 0 || fate.dropped) result.failures.push_back(where + ": expected rejection");
                break;
            case SendExpectation::dropped:
                if (!fate.dropped) result.failures.push_back(where + ": expected drop");
                break;
        }
    }

    for (const auto& owner : scenario.parties)
        for (const auto& peer : scenario.parties)
            if (auto* s = h.session(owner, peer)) result.skipped_keys_remaining += s->ratchet().skipped.size();

    result.rules = check_ratchet_rules(h.transcript(), scenario.parties);
    result.transcript = h.transcript();
    result.messages = h.messages();
    result.registry_snapshot = h.server().export_snapshot();
    result.wire = h.wire_log();
    return result;
}

}  // namespace ratchetlab::sim
