#include <gtest/gtest.h>

#include <filesystem>

#include "ratchetlab/error.hpp"
#include "ratchetlab/sim/attack.hpp"
#include "ratchetlab/sim/harness.hpp"
#include "ratchetlab/sim/metadata.hpp"
#include "ratchetlab/sim/scenario.hpp"
#include "ratchetlab/sim/vectors.hpp"

using namespace ratchetlab;
using namespace ratchetlab::sim;

namespace {

Errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return Errc::internal;
}

SendEvent send(std::string from, std::string to, std::string text, DeliveryPolicy policy = {},
               std::optional<SendExpectation> expect = SendExpectation::delivered) {
    SendEvent e;
    e.from = std::move(from);
    e.to = std::move(to);
    e.text = std::move(text);
    e.policy = policy;
    e.expect = expect;
    return e;
}

// White/green pattern of the reference conversation, as seen on Adam's phone.
Scenario reference_chat(std::uint64_t seed) {
    Scenario s;
    s.parties = {"adam", "bud"};
    s.seed = seed;
    const char* pattern = "BBAABAABBBAB";
    for (int i = 0; pattern[i]; ++i) {
        bool bud = pattern[i] == 'B';
        s.script.push_back(send(bud ? "bud" : "adam", bud ? "adam" : "bud", "line " + std::to_string(i)));
    }
    return s;
}

std::size_t count(const std::vector<TranscriptEvent>& t, std::string_view action, std::string_view outcome) {
    return std::count_if(t.begin(), t.end(),
                         [&](const auto& e) { return e.action == action && e.outcome == outcome; });
}

std::filesystem::path scenario_dir() { return std::filesystem::path(RATCHETLAB_SOURCE_DIR) / "scenarios"; }

}  // namespace

TEST(Scenario, ParseAndSerialiseRoundTrip) {
    auto s = parse_scenario(R"({"parties":["adam","bud"],"seed":4,"script":[
        {"op":"send","from":"adam","to":"bud","text":"hi","policy":{"kind":"reorder","to":2}},
        {"op":"send","from":"bud","to":"adam","text":"yo","policy":{"kind":"tamper","byte":3},"expect":"rejected"},
        {"op":"tick","count":2},
        {"op":"rotate_spk","user":"bud"},
        {"op":"replenish","user":"bud","count":3},
        {"op":"mark_mitm","pair":["adam","bud"]},
        {"op":"verify_codes","pair":["adam","bud"],"expect":"mismatch"}]})");
    EXPECT_EQ(s.script.size(), 7u);
    auto again = parse_scenario(scenario_to_json(s));
    EXPECT_EQ(scenario_to_json(again), scenario_to_json(s));
}

TEST(Scenario, MalformedIsConfigError) {
    EXPECT_EQ(code_of([] { parse_scenario("{"); }), Errc::config);
    EXPECT_EQ(code_of([] { parse_scenario(R"({"parties":["adam"],"script":[{"op":"send","from":"adam","to":"zed"}]})"); }),
              Errc::config);
    EXPECT_EQ(code_of([] { parse_scenario(R"({"parties":["adam","mark"],"script":[]})"); }), Errc::config);
    EXPECT_EQ(code_of([] { parse_scenario(R"({"parties":["a","b"],"script":[{"op":"dance"}]})"); }), Errc::config);
    EXPECT_EQ(code_of([] {
                  parse_scenario(R"({"parties":["a","b"],"script":[{"op":"send","from":"a","to":"b",
                      "policy":{"kind":"reorder","to":0}}]})");
              }),
              Errc::config);
    EXPECT_EQ(code_of([] { load_scenario("/nonexistent/scenario.json"); }), Errc::config);
}

TEST(Transcript, JsonlRoundTrip) {
    auto r = run(reference_chat(1));
    auto text = transcript_to_jsonl(r.transcript);
    EXPECT_EQ(transcript_from_jsonl(text), r.transcript);
    EXPECT_EQ(code_of([] { transcript_from_jsonl("{\"seq\":1}\nnot json\n"); }), Errc::parse);
}

TEST(Harness, SameSeedByteIdentical) {
    auto a = transcript_to_jsonl(run(reference_chat(42)).transcript);
    auto b = transcript_to_jsonl(run(reference_chat(42)).transcript);
    EXPECT_EQ(a, b);
    auto ra = run(reference_chat(42)), rc = run(reference_chat(43));
    EXPECT_EQ(ra.registry_snapshot, run(reference_chat(42)).registry_snapshot);
    EXPECT_NE(ra.registry_snapshot, rc.registry_snapshot);
}

TEST(Harness, ReferenceChatRulesHold) {
    for (std::uint64_t seed : {1, 2, 3}) {
        auto r = run(reference_chat(seed));
        EXPECT_TRUE(r.ok());
        EXPECT_TRUE(r.rules.violations.empty());
        EXPECT_TRUE(r.rules.all_rules_exercised());
        EXPECT_EQ(r.rules.judged, 12u);
    }
}

TEST(Harness, RuleCheckerCatchesMislabelledSteps) {
    auto r = run(reference_chat(5));
    auto t = r.transcript;
    auto it = std::find_if(t.begin() + 20, t.end(), [](const auto& e) { return e.step == "dh-step"; });
    ASSERT_NE(it, t.end());
    t.erase(it);
    EXPECT_FALSE(check_ratchet_rules(t, {"adam", "bud"}).ok());

    auto t2 = r.transcript;
    auto sym = std::find_if(t2.begin() + 20, t2.end(),
                            [](const auto& e) { return e.step == "symmetric-step" && e.detail == "send"; });
    ASSERT_NE(sym, t2.end());
    t2.insert(sym, *sym);
    EXPECT_FALSE(check_ratchet_rules(t2, {"adam", "bud"}).ok());
}

TEST(Harness, TamperIsIsolated) {
    Scenario s;
    s.parties = {"adam", "bud"};
    s.seed = 9;
    for (int i = 0; i < 8; ++i) {
        DeliveryPolicy p;
        std::optional<SendExpectation> x = SendExpectation::delivered;
        if (i == 3) {
            p.kind = DeliveryKind::tamper;
            p.tamper_byte = 50;
            x = SendExpectation::rejected;
        }
        s.script.push_back(send(i % 3 ? "adam" : "bud", i % 3 ? "bud" : "adam", "m" + std::to_string(i), p, x));
    }
    auto r = run(s);
    EXPECT_TRUE(r.ok()) << (r.failures.empty() ? "" : r.failures[0]);
    EXPECT_EQ(count(r.transcript, "deliver", "rejected"), 1u);
    EXPECT_EQ(count(r.transcript, "deliver", "ok"), 7u);
}

TEST(Harness, DropReorderDuplicateEachDeliveredOnce) {
    Scenario s;
    s.parties = {"adam", "bud"};
    s.seed = 10;
    s.script.push_back(send("adam", "bud", "0"));
    s.script.push_back(send("adam", "bud", "1", {DeliveryKind::reorder, 4, 0}));
    s.script.push_back(send("adam", "bud", "2", {DeliveryKind::duplicate, 0, 0}));
    s.script.push_back(send("adam", "bud", "3", {DeliveryKind::drop, 0, 0}, SendExpectation::dropped));
    s.script.push_back(send("bud", "adam", "4"));
    s.script.push_back(send("adam", "bud", "5", {DeliveryKind::duplicate, 0, 0}));
    auto r = run(s);
    EXPECT_TRUE(r.ok()) << (r.failures.empty() ? "" : r.failures[0]);
    for (const auto& [id, fate] : r.messages) {
        if (fate.dropped) {
            EXPECT_EQ(fate.delivered_ok, 0u);
            continue;
        }
        EXPECT_EQ(fate.delivered_ok, 1u) << fate.text;
        EXPECT_EQ(fate.plaintext_mismatches, 0u);
    }
    EXPECT_EQ(r.messages.at(3).rejected, 1u);  // duplicate of "2"
    EXPECT_EQ(r.skipped_keys_remaining, 1u);   // the dropped message's key
}

TEST(Harness, ExpectationFailureIsReported) {
    Scenario s;
    s.parties = {"adam", "bud"};
    s.script.push_back(send("adam", "bud", "x", {DeliveryKind::tamper, 0, 60}, SendExpectation::delivered));
    auto r = run(s);
    EXPECT_FALSE(r.ok());
    EXPECT_FALSE(r.failures.empty());
}

TEST(Harness, MitmDeliversButCodesMismatch) {
    Scenario s = parse_scenario(R"({"parties":["adam","bud"],"seed":3,"script":[
        {"op":"mark_mitm","pair":["adam","bud"]},
        {"op":"send","from":"adam","to":"bud","text":"meet at noon","expect":"delivered"},
        {"op":"send","from":"bud","to":"adam","text":"ok","expect":"delivered"},
        {"op":"verify_codes","pair":["adam","bud"],"expect":"mismatch"}]})");
    auto r = run(s);
    EXPECT_TRUE(r.ok()) << (r.failures.empty() ? "" : r.failures[0]);
    EXPECT_GE(count(r.transcript, "mitm_intercept", "ok"), 2u);
    EXPECT_EQ(count(r.transcript, "mitm_substitute_bundle", "ok"), 1u);

    Harness h({"adam", "bud"}, 3);
    h.arm_mitm("adam", "bud");
    auto rec = h.compose("adam", "bud", "secret plans");
    ASSERT_TRUE(rec);
    EXPECT_TRUE(h.deliver(*rec).ok);
    ASSERT_EQ(h.mark_plaintexts().size(), 1u);
    EXPECT_EQ(h.mark_plaintexts()[0], "secret plans");
    EXPECT_FALSE(h.verify_codes("adam", "bud"));
    // Each side sees Mark's forged identity, not the real one.
    EXPECT_NE(h.session("adam", "bud")->ik_remote(), h.account("bud").identity().pub);
}

TEST(Harness, AutoReplenishKeepsPoolAboveThreshold) {
    HarnessOptions opt;
    opt.initial_opks = 6;
    Harness h({"bud", "a1", "a2", "a3", "a4", "a5", "a6", "a7", "a8"}, 11, opt);
    for (int i = 1; i <= 8; ++i) {
        auto rec = h.compose("a" + std::to_string(i), "bud", "hi");
        ASSERT_TRUE(rec);
        EXPECT_TRUE(h.deliver(*rec).ok);
        EXPECT_GE(h.server().pool_size("bud"), registry::kLowPoolThreshold);
    }
    EXPECT_GE(count(h.transcript(), "replenish", "ok"), 1u);
}

TEST(Harness, SpkRotationAndRetention) {
    Scenario s;
    s.parties = {"adam", "bud"};
    s.script.push_back(send("adam", "bud", "a"));
    s.script.push_back(RotateSpkEvent{"bud"});
    s.script.push_back(TickEvent{30});
    s.script.push_back(RotateSpkEvent{"bud"});
    s.script.push_back(send("bud", "adam", "b"));
    s.script.push_back(send("adam", "bud", "c"));
    auto r = run(s);
    EXPECT_TRUE(r.ok());
    registry::Registry reg;
    reg.import_snapshot(r.registry_snapshot);
    auto rec = reg.record("bud");
    EXPECT_EQ(std::count_if(rec.signed_prekeys.begin(), rec.signed_prekeys.end(),
                            [](const auto& k) { return !k.retired_at; }),
              1);
}

TEST(Metadata, TenMessages) {
    Scenario s;
    s.parties = {"adam", "bud"};
    for (int i = 0; i < 10; ++i) s.script.push_back(send("adam", "bud", "note " + std::to_string(i)));
    auto demo = metadata_demo(s);
    EXPECT_TRUE(demo.consistent);
    EXPECT_EQ(demo.server.relay_events, 10u);
    EXPECT_EQ((demo.server.relays.at({"adam", "bud"})), 10u);
    EXPECT_EQ(demo.server.plaintext_bytes_observed, 0u);
    const auto& adam = demo.server.reports.at("adam");
    ASSERT_EQ(adam.peers.size(), 1u);
    EXPECT_EQ(adam.peers[0].count, 11u);  // one bundle fetch plus ten relays
}

TEST(Metadata, NoTrafficEmpty) {
    Scenario s;
    s.parties = {"adam", "bud"};
    auto demo = metadata_demo(s);
    EXPECT_TRUE(demo.server.empty());
    EXPECT_TRUE(demo.folded.empty());
    EXPECT_TRUE(demo.consistent);
}

TEST(Metadata, FoldMatchesServerOnEveryBundledScenario) {
    for (const auto& entry : std::filesystem::directory_iterator(scenario_dir())) {
        SCOPED_TRACE(entry.path().string());
        auto demo = metadata_demo(load_scenario(entry.path()));
        EXPECT_TRUE(demo.consistent);
        EXPECT_EQ(demo.server.plaintext_bytes_observed, 0u);
    }
}

TEST(Metadata, FoldIsIndependentOfClientEvents) {
    auto r = run(reference_chat(6));
    std::vector<TranscriptEvent> server_only;
    for (const auto& e : r.transcript)
        if (e.action == "register" || e.action == "fetch_bundle" || e.action == "relay") server_only.push_back(e);
    auto a = fold_transcript(r.transcript), b = fold_transcript(server_only);
    EXPECT_EQ(a.relay_events, b.relay_events);
    for (const auto& [u, rep] : a.reports) EXPECT_EQ(rep.peers, b.reports.at(u).peers);
    EXPECT_EQ(a.relay_events, 12u);
}

TEST(Attack, HonestAndMitmVerdicts) {
    for (std::uint64_t seed : {1, 2, 3}) {
        auto rep = mark_attack_suite("adam", "bud", seed, {6, 6});
        EXPECT_TRUE(rep.confidentiality.pass) << rep.confidentiality.detail;
        EXPECT_TRUE(rep.integrity.pass) << rep.integrity.detail;
        EXPECT_TRUE(rep.authenticity.pass) << rep.authenticity.detail;
        EXPECT_TRUE(rep.honest_codes_match);
        EXPECT_TRUE(rep.mitm_delivery_succeeded);
        EXPECT_TRUE(rep.mitm_codes_mismatch);
        EXPECT_EQ(rep.plaintexts_recovered, 0u);
        EXPECT_GT(rep.recovery_attempts, 0u);
        EXPECT_EQ(rep.tamper_rejections, rep.tampered_deliveries);
        EXPECT_NE(render(rep).find("confidentiality: PASS"), std::string::npos);
    }
}

TEST(Vectors, AllPass) {
    auto v = run_primitive_vectors();
    EXPECT_GE(v.size(), 3u);
    for (const auto& r : v) EXPECT_TRUE(r.pass()) << r.name;
}

TEST(Scenarios, BundledFilesPass) {
    for (const auto& entry : std::filesystem::directory_iterator(scenario_dir())) {
        SCOPED_TRACE(entry.path().string());
        auto r = run(load_scenario(entry.path()));
        EXPECT_TRUE(r.ok()) << (r.failures.empty() ? "" : r.failures[0]);
    }
}
