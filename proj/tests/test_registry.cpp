#include <gtest/gtest.h>

#include <map>
#include <set>
#include <thread>

#include "ratchetlab/crypto/signature.hpp"
#include "ratchetlab/encoding.hpp"
#include "ratchetlab/error.hpp"
#include "ratchetlab/registry.hpp"
#include "support.hpp"

using namespace ratchetlab;
using namespace ratchetlab::registry;

namespace {

struct Keys {
    crypto::KeyPair identity;
    std::uint32_t next_spk = 1;
    std::uint32_t next_opk = 1;
};

Errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return Errc::internal;
}

class RegistryTest : public ::testing::Test {
protected:
    crypto::DeterministicEntropy rng{77};

    Keys make() { return Keys{crypto::generate_keypair(rng)}; }

    SignedPrekeyUpload spk(Keys& k) {
        auto kp = crypto::generate_keypair(rng);
        return {k.next_spk++, kp.pub, crypto::sign_prekey(k.identity, encode_public(kp.pub))};
    }

    std::vector<OneTimePrekeyRecord> opks(Keys& k, std::size_t n) {
        std::vector<OneTimePrekeyRecord> out;
        for (std::size_t i = 0; i < n; ++i) out.push_back({k.next_opk++, crypto::generate_keypair(rng).pub});
        return out;
    }

    void enroll(Registry& r, const UserId& u, Keys& k, std::size_t n, Tick now = 0) {
        r.register_user(u, crypto::identity_public(k.identity), spk(k), opks(k, n), now);
    }

    static std::size_t active_count(const UserRecord& rec) {
        return std::count_if(rec.signed_prekeys.begin(), rec.signed_prekeys.end(),
                             [](const auto& s) { return !s.retired_at; });
    }
};

}  // namespace

TEST_F(RegistryTest, RegisterWithTenOpks) {
    Registry r;
    Keys bud = make();
    enroll(r, "bud", bud, 10);
    EXPECT_EQ(r.pool_size("bud"), 10u);
    EXPECT_EQ(active_count(r.record("bud")), 1u);
    EXPECT_EQ(r.record("bud").metadata_log.size(), 1u);
}

TEST_F(RegistryTest, DuplicateRegistrationConflicts) {
    Registry r;
    Keys bud = make();
    enroll(r, "bud", bud, 1);
    EXPECT_EQ(code_of([&] { enroll(r, "bud", bud, 1); }), Errc::conflict);
}

TEST_F(RegistryTest, WrongSignerRejected) {
    Registry r;
    Keys bud = make(), mallory = make();
    auto upload = spk(mallory);
    EXPECT_EQ(code_of([&] { r.register_user("bud", crypto::identity_public(bud.identity), upload, {}, 0); }),
              Errc::rejected);
    EXPECT_FALSE(r.contains("bud"));
}

TEST_F(RegistryTest, DuplicateOpkIdsInRegistrationRejected) {
    Registry r;
    Keys bud = make();
    auto list = opks(bud, 2);
    list[1].opk_id = list[0].opk_id;
    EXPECT_EQ(code_of([&] { r.register_user("bud", crypto::identity_public(bud.identity), spk(bud), list, 0); }),
              Errc::rejected);
}

TEST_F(RegistryTest, RotateKeepsOneActive) {
    Registry r;
    Keys bud = make();
    enroll(r, "bud", bud, 0);
    r.rotate_signed_prekey("bud", spk(bud), 3);
    auto rec = r.record("bud");
    ASSERT_EQ(rec.signed_prekeys.size(), 2u);
    EXPECT_EQ(active_count(rec), 1u);
    EXPECT_EQ(rec.signed_prekeys[0].retired_at, Tick{3});
    EXPECT_EQ(rec.active_signed_prekey().spk_id, 2u);
    EXPECT_EQ(r.fetch_bundle("adam", "bud", 4).spk_id, 2u);
}

TEST_F(RegistryTest, RetentionBoundary) {
    Registry r;
    Keys bud = make();
    enroll(r, "bud", bud, 0);
    r.rotate_signed_prekey("bud", spk(bud), 10);                       // spk1 retired at 10
    r.rotate_signed_prekey("bud", spk(bud), 10 + kDefaultRetentionWindow);  // boundary: kept
    EXPECT_EQ(r.record("bud").signed_prekeys.size(), 3u);
    r.rotate_signed_prekey("bud", spk(bud), 10 + kDefaultRetentionWindow + 1);  // spk1 purged
    auto rec = r.record("bud");
    EXPECT_EQ(rec.signed_prekeys.front().spk_id, 2u);
    EXPECT_EQ(active_count(rec), 1u);
}

TEST_F(RegistryTest, RotateErrors) {
    Registry r;
    Keys bud = make(), mallory = make();
    enroll(r, "bud", bud, 0);
    EXPECT_EQ(code_of([&] { r.rotate_signed_prekey("nobody", spk(bud), 1); }), Errc::not_found);
    EXPECT_EQ(code_of([&] { r.rotate_signed_prekey("bud", spk(mallory), 1); }), Errc::rejected);
    EXPECT_EQ(active_count(r.record("bud")), 1u);
}

TEST_F(RegistryTest, RandomRotationSequencesKeepExactlyOneActive) {
    Registry r;
    Keys bud = make();
    enroll(r, "bud", bud, 0);
    crypto::DeterministicEntropy pick(5);
    Tick now = 0;
    for (int i = 0; i < 200; ++i) {
        std::uint8_t step;
        pick.fill({&step, 1});
        now += step % 9;
        r.rotate_signed_prekey("bud", spk(bud), now);
        auto rec = r.record("bud");
        ASSERT_EQ(active_count(rec), 1u);
        EXPECT_EQ(rec.active_signed_prekey().spk_id, bud.next_spk - 1);
        for (const auto& s : rec.signed_prekeys)
            if (s.retired_at) EXPECT_LE(now, *s.retired_at + kDefaultRetentionWindow);
    }
}

TEST_F(RegistryTest, Replenish) {
    Registry r;
    Keys bud = make();
    enroll(r, "bud", bud, 2);
    EXPECT_EQ(r.replenish_opks("bud", opks(bud, 5)), 7u);
    EXPECT_EQ(r.replenish_opks("bud", {}), 7u);
    auto dup = opks(bud, 1);
    dup[0].opk_id = 1;
    EXPECT_EQ(code_of([&] { r.replenish_opks("bud", dup); }), Errc::rejected);
    EXPECT_EQ(r.pool_size("bud"), 7u);
    EXPECT_EQ(code_of([&] { r.replenish_opks("nobody", {}); }), Errc::not_found);
}

TEST_F(RegistryTest, PoolOfOneThenEmpty) {
    Registry r;
    Keys bud = make();
    enroll(r, "bud", bud, 1);
    EXPECT_TRUE(r.fetch_bundle("adam", "bud", 1).opk.has_value());
    EXPECT_FALSE(r.fetch_bundle("adam", "bud", 2).opk.has_value());
    EXPECT_EQ(code_of([&] { r.fetch_bundle("adam", "nobody", 2); }), Errc::not_found);
}

TEST_F(RegistryTest, ExhaustivePoolDrain) {
    Registry r;
    Keys bud = make();
    enroll(r, "bud", bud, 100);
    auto uploaded = r.record("bud").one_time_pool;
    std::set<std::uint32_t> seen;
    std::uint32_t last = 0;
    for (std::size_t i = 0; i < 100; ++i) {
        auto before = r.pool_size("bud");
        auto b = r.fetch_bundle("adam", "bud", i);
        ASSERT_TRUE(b.opk);
        EXPECT_GT(b.opk->opk_id, last);  // lowest id first
        last = b.opk->opk_id;
        EXPECT_TRUE(seen.insert(b.opk->opk_id).second);
        EXPECT_EQ(r.pool_size("bud"), before - 1);
        EXPECT_TRUE(crypto::verify_prekey(b.identity.signing, encode_public(b.spk_pub), b.spk_signature.view()));
    }
    EXPECT_EQ(seen.size(), 100u);
    std::set<std::uint32_t> all;
    for (const auto& o : uploaded) all.insert(o.opk_id);
    EXPECT_EQ(seen, all);
    EXPECT_FALSE(r.fetch_bundle("adam", "bud", 200).opk);
}

TEST_F(RegistryTest, MetadataCountsFetchAndRelays) {
    Registry r;
    Keys adam = make(), bud = make();
    enroll(r, "adam", adam, 1);
    enroll(r, "bud", bud, 1);
    r.fetch_bundle("adam", "bud", 1);
    r.record_relay("adam", "bud", 2);
    r.record_relay("adam", "bud", 3);
    r.record_relay("adam", "bud", 5);
    auto rep = r.metadata_report("adam");
    ASSERT_EQ(rep.peers.size(), 1u);
    EXPECT_EQ(rep.peers[0].peer, "bud");
    EXPECT_EQ(rep.peers[0].count, 4u);
    EXPECT_EQ(rep.peers[0].last_contact, 5u);
    EXPECT_EQ(r.metadata_report("bud").peers[0].count, 4u);
}

TEST_F(RegistryTest, NoActivityEmptyReport) {
    Registry r;
    Keys adam = make();
    enroll(r, "adam", adam, 0);
    EXPECT_TRUE(r.metadata_report("adam").peers.empty());
    EXPECT_EQ(code_of([&] { r.metadata_report("nobody"); }), Errc::not_found);
}

TEST_F(RegistryTest, InterleavedPeersMatchIndependentFold) {
    Registry r;
    Keys a = make(), b = make(), c = make();
    enroll(r, "adam", a, 5);
    enroll(r, "bud", b, 5);
    enroll(r, "cleo", c, 5);
    crypto::DeterministicEntropy pick(31);
    const char* names[] = {"adam", "bud", "cleo"};
    for (Tick t = 1; t < 120; ++t) {
        std::uint8_t x[3];
        pick.fill(x);
        std::string from = names[x[0] % 3], to = names[x[1] % 3];
        if (from == to) continue;
        if (x[2] % 4 == 0) r.fetch_bundle(from, to, t);
        else r.record_relay(from, to, t);
    }
    for (const char* u : names) {
        std::map<std::string, PeerContact> fold;
        for (const auto& ev : r.record(u).metadata_log) {
            if (!ev.peer) continue;
            std::string other = ev.actor == u ? *ev.peer : ev.actor;
            fold[other].peer = other;
            fold[other].count++;
            fold[other].last_contact = std::max(fold[other].last_contact, ev.at);
        }
        std::vector<PeerContact> expected;
        for (auto& [_, pc] : fold) expected.push_back(pc);
        EXPECT_EQ(r.metadata_report(u).peers, expected) << u;
    }
}

TEST_F(RegistryTest, SnapshotRoundTrip) {
    Registry r;
    Keys a = make(), b = make();
    enroll(r, "adam", a, 3);
    enroll(r, "bud", b, 2);
    r.rotate_signed_prekey("bud", spk(b), 4);
    r.fetch_bundle("adam", "bud", 5);
    std::string snap = r.export_snapshot();
    Registry copy;
    copy.import_snapshot(snap);
    EXPECT_EQ(copy.export_snapshot(), snap);
    EXPECT_EQ(copy.pool_size("bud"), 1u);
    EXPECT_EQ(copy.metadata_report("adam").peers, r.metadata_report("adam").peers);
    EXPECT_EQ(code_of([&] { copy.import_snapshot("{not json"); }), Errc::parse);
    EXPECT_EQ(copy.export_snapshot(), snap);  // failed import leaves state alone
}

TEST_F(RegistryTest, ConcurrentFetchesServeEachOpkOnce) {
    Registry r;
    Keys bud = make();
    enroll(r, "bud", bud, 400);
    std::vector<std::vector<std::uint32_t>> got(8);
    std::vector<std::thread> workers;
    for (std::size_t t = 0; t < got.size(); ++t)
        workers.emplace_back([&, t] {
            for (int i = 0; i < 60; ++i)
                if (auto b = r.fetch_bundle("u" + std::to_string(t), "bud", i); b.opk) got[t].push_back(b.opk->opk_id);
        });
    for (auto& w : workers) w.join();
    std::set<std::uint32_t> all;
    std::size_t total = 0;
    for (const auto& g : got) {
        total += g.size();
        all.insert(g.begin(), g.end());
    }
    EXPECT_EQ(total, 400u);
    EXPECT_EQ(all.size(), 400u);
    EXPECT_EQ(r.pool_size("bud"), 0u);
}
