#include "ratchetlab/sim/attack.hpp"

#include <algorithm>
#include <sstream>

#include "ratchetlab/crypto/aead.hpp"
#include "ratchetlab/crypto/primitives.hpp"
#include "ratchetlab/encoding.hpp"
#include "ratchetlab/error.hpp"
#include "ratchetlab/wire.hpp"

namespace ratchetlab::sim {

namespace {

struct Line {
    UserId from;
    UserId to;
    std::string text;
};

// Mixed bursts and alternations, fixed by the seed.
std::vector<Line> conversation(const UserId& a, const UserId& b, std::uint64_t seed, std::size_t n) {
    crypto::DeterministicEntropy rng(seed ^ 0x5eedc0de);
    std::vector<Line> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::uint8_t coin = 0;
        rng.fill({&coin, 1});
        bool from_a = i == 0 || (coin & 1);
        ByteArray<6> salt;
        rng.fill(salt);
        out.push_back({from_a ? a : b, from_a ? b : a,
                       "message " + std::to_string(i) + " from " + (from_a ? a : b) + " nonce " + to_hex(salt)});
    }
    return out;
}

bool contains(ByteView hay, std::string_view needle) {
    if (needle.empty() || needle.size() > hay.size()) return false;
    return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

bool is_plaintext(const Bytes& candidate, const std::vector<Line>& lines) {
    return std::any_of(lines.begin(), lines.end(), [&](const Line& l) { return to_string(candidate) == l.text; });
}

void confidentiality(AttackReport& r, const UserId& a, const UserId& b, std::uint64_t seed, std::size_t n) {
    Harness h({a, b}, seed);
    auto lines = conversation(a, b, seed, n);
    for (const auto& l : lines)
        if (auto rec = h.compose(l.from, l.to, l.text)) h.deliver(*rec);

    std::size_t leaks = 0;
    std::size_t attempts = 0;
    auto try_open = [&](auto&& fn) {
        ++attempts;
        try {
            if (is_plaintext(fn(), lines)) ++leaks;
        } catch (const Error&) {
        }
    };

    // 1. Does any plaintext appear verbatim on the wire or on the server?
    const std::string snapshot = h.server().export_snapshot();
    for (const auto& l : lines) {
        ++attempts;
        if (snapshot.find(l.text) != std::string::npos) ++leaks;
        for (const auto& w : h.wire_log())
            if (contains(w.envelope, l.text)) ++leaks;
    }

    // 2. Mark, with his own keys, tries to act as the recipient of each initial message.
    crypto::DeterministicEntropy mark_rng(seed ^ 0x3a7c);
    session::Account mark_account(std::string(kMark), mark_rng);
    for (const auto& w : h.wire_log()) {
        if (wire::peek_kind(w.envelope) != wire::Kind::initial) continue;
        try_open([&] { return session::establish_inbound(mark_account, w.from, w.envelope, mark_rng).plaintext; });
    }

    // 3. Mark opens a genuine session of his own with each victim and feeds it their traffic.
    for (const auto& victim : {a, b}) {
        auto out = session::establish_outbound(mark_account, h.server(), victim, to_bytes("hello"), mark_rng, h.now());
        for (const auto& w : h.wire_log()) {
            if (wire::peek_kind(w.envelope) != wire::Kind::normal) continue;
            auto probe = out.session;
            try_open([&] { return probe.decrypt(w.envelope, mark_rng); });
        }
    }

    // 4. Keys guessed from public data alone: headers, identity keys, envelope prefixes.
    const auto ik_a = h.server().record(a).identity.dh;
    const auto ik_b = h.server().record(b).identity.dh;
    for (const auto& w : h.wire_log()) {
        if (wire::peek_kind(w.envelope) != wire::Kind::normal) continue;
        auto msg = wire::open_normal(w.envelope);
        Bytes header = msg.header.encode();
        for (ByteView ikm : {ByteView(header), ik_a.view(), ik_b.view(), msg.header.ratchet_pub.view()}) {
            SecretBytes guess = crypto::kdf(ikm, {}, to_bytes(crypto::kInfoMessageKey), crypto::kMessageKeyMaterial);
            Bytes ad = concat({encode_public(w.from == a ? ik_a : ik_b), encode_public(w.from == a ? ik_b : ik_a), header});
            try_open([&] { return crypto::aead_decrypt(guess.view(), msg.ciphertext, ad); });
        }
    }

    r.recovery_attempts = attempts;
    r.plaintexts_recovered = leaks;
    r.confidentiality.pass = leaks == 0;
    r.confidentiality.detail = std::to_string(attempts) + " recovery attempts from public data, " +
                               std::to_string(leaks) + " plaintexts recovered";

    // Authenticity on the honest run: codes agree, injected and replayed messages bounce.
    r.honest_codes_match = h.verify_codes(a, b);

    ByteArray<32> junk;
    mark_rng.fill(junk);
    wire::NormalMessage forged{{crypto::generate_keypair(mark_rng).pub, 0, 0}, Bytes(64)};
    mark_rng.fill(forged.ciphertext);
    r.forged_message_rejected = !h.deliver(WireRecord{0, a, b, wire::seal_normal(forged)}).ok;

    const auto& log = h.wire_log();
    auto last_to_b = std::find_if(log.rbegin(), log.rend(), [&](const WireRecord& w) { return w.to == b; });
    r.replay_rejected = last_to_b != log.rend() && !h.deliver(*last_to_b).ok;
    r.messages = lines.size();
}

void integrity(AttackReport& r, const UserId& a, const UserId& b, std::uint64_t seed, const AttackOptions& opt) {
    Harness h({a, b}, seed + 1);
    crypto::DeterministicEntropy pick(seed ^ 0x7a3e);
    std::size_t tampered = 0;
    std::size_t rejected = 0;
    std::size_t recovered = 0;
    for (const auto& l : conversation(a, b, seed + 1, opt.messages)) {
        auto rec = h.compose(l.from, l.to, l.text);
        if (!rec) continue;
        const std::size_t len = rec->envelope.size();
        for (std::size_t k = 0; k < opt.tamper_positions_per_message; ++k) {
            ByteArray<2> coin;
            pick.fill(coin);
            // Spread positions across prelude, header and body; vary the bit.
            std::size_t pos = (k * len) / opt.tamper_positions_per_message + coin[0] % std::max<std::size_t>(1, len / opt.tamper_positions_per_message);
            std::uint8_t mask = static_cast<std::uint8_t>(1u << (coin[1] % 8));
            ++tampered;
            if (!h.deliver(h.tamper(*rec, pos, mask, kMark)).ok) ++rejected;
        }
        auto res = h.deliver(*rec);
        if (res.ok && to_string(res.plaintext) == l.text) ++recovered;
    }
    r.tampered_deliveries = tampered;
    r.tamper_rejections = rejected;
    r.originals_delivered_after_tamper = recovered;
    r.integrity.pass = tampered > 0 && rejected == tampered && recovered == opt.messages;
    r.integrity.detail = std::to_string(rejected) + "/" + std::to_string(tampered) +
                         " tampered envelopes rejected; " + std::to_string(recovered) + "/" +
                         std::to_string(opt.messages) + " untouched originals delivered afterwards";
}

void mitm(AttackReport& r, const UserId& a, const UserId& b, std::uint64_t seed, std::size_t n) {
    Harness h({a, b}, seed + 2);
    h.arm_mitm(a, b);
    std::size_t ok = 0;
    auto lines = conversation(a, b, seed + 2, n);
    for (const auto& l : lines) {
        auto rec = h.compose(l.from, l.to, l.text);
        if (!rec) continue;
        auto res = h.deliver(*rec);
        if (res.ok && to_string(res.plaintext) == l.text) ++ok;
    }
    r.mitm_delivery_succeeded = ok == lines.size();
    r.mitm_plaintexts_read = h.mark_plaintexts().size();
    r.mitm_codes_mismatch = !h.verify_codes(a, b);
}

}  // namespace

AttackReport mark_attack_suite(const UserId& a, const UserId& b, std::uint64_t seed, AttackOptions options) {
    AttackReport r;
    r.a = a;
    r.b = b;
    confidentiality(r, a, b, seed, options.messages);
    integrity(r, a, b, seed, options);
    mitm(r, a, b, seed, options.messages);

    r.authenticity.pass = r.honest_codes_match && r.forged_message_rejected && r.replay_rejected && r.mitm_codes_mismatch;
    std::ostringstream d;
    d << "honest codes " << (r.honest_codes_match ? "match" : "MISMATCH") << "; forged message "
      << (r.forged_message_rejected ? "rejected" : "ACCEPTED") << "; replay "
      << (r.replay_rejected ? "rejected" : "ACCEPTED") << "; bundle substitution: delivery "
      << (r.mitm_delivery_succeeded ? "succeeded" : "failed") << ", Mark read " << r.mitm_plaintexts_read
      << " messages, safety codes " << (r.mitm_codes_mismatch ? "MISMATCH (detected)" : "match (undetected)");
    r.authenticity.detail = d.str();
    return r;
}

std::string render(const AttackReport& r) {
    std::ostringstream out;
    auto line = [&](const char* name, const Verdict& v) {
        out << name << ": " << (v.pass ? "PASS" : "FAIL") << " - " << v.detail << '\n';
    };
    out << "attack suite on " << r.a << " <-> " << r.b << '\n';
    line("confidentiality", r.confidentiality);
    line("integrity", r.integrity);
    line("authenticity", r.authenticity);
    return out.str();
}

}  // namespace ratchetlab::sim
