#include "ratchetlab/sim/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ratchetlab/error.hpp"

namespace ratchetlab::sim {

using nlohmann::json;

namespace {

DeliveryPolicy parse_policy(const json& j) {
    DeliveryPolicy p;
    std::string kind = j.is_string() ? j.get<std::string>() : j.at("kind").get<std::string>();
    if (kind == "deliver") p.kind = DeliveryKind::deliver;
    else if (kind == "drop") p.kind = DeliveryKind::drop;
    else if (kind == "duplicate") p.kind = DeliveryKind::duplicate;
    else if (kind == "reorder") {
        p.kind = DeliveryKind::reorder;
        p.reorder_to = j.at("to").get<std::size_t>();
    } else if (kind == "tamper") {
        p.kind = DeliveryKind::tamper;
        p.tamper_byte = j.at("byte").get<std::size_t>();
    } else
        throw Error(Errc::config, "unknown delivery policy: " + kind);
    return p;
}

json policy_json(const DeliveryPolicy& p) {
    switch (p.kind) {
        case DeliveryKind::deliver: return "deliver";
        case DeliveryKind::drop: return "drop";
        case DeliveryKind::duplicate: return "duplicate";
        case DeliveryKind::reorder: return json{{"kind", "reorder"}, {"to", p.reorder_to}};
        case DeliveryKind::tamper: return json{{"kind", "tamper"}, {"byte", p.tamper_byte}};
    }
    return "deliver";
}

std::pair<UserId, UserId> parse_pair(const json& j) {
    const auto& p = j.at("pair");
    if (!p.is_array() || p.size() != 2) throw Error(Errc::config, "pair must list exactly two parties");
    return {p[0].get<std::string>(), p[1].get<std::string>()};
}

ScriptEvent parse_event(const json& j) {
    auto op = j.at("op").get<std::string>();
    if (op == "send") {
        SendEvent e{j.at("from").get<std::string>(), j.at("to").get<std::string>(), j.value("text", std::string()),
                    {}, std::nullopt};
        if (j.contains("policy")) e.policy = parse_policy(j.at("policy"));
        if (j.contains("expect")) {
            auto x = j.at("expect").get<std::string>();
            if (x == "delivered") e.expect = SendExpectation::delivered;
            else if (x == "rejected") e.expect = SendExpectation::rejected;
            else if (x == "dropped") e.expect = SendExpectation::dropped;
            else throw Error(Errc::config, "unknown send expectation: " + x);
        }
        return e;
    }
    if (op == "rotate_spk") return RotateSpkEvent{j.at("user").get<std::string>()};
    if (op == "replenish") return ReplenishEvent{j.at("user").get<std::string>(), j.at("count").get<std::size_t>()};
    if (op == "mark_mitm") {
        auto [a, b] = parse_pair(j);
        return MarkMitmEvent{a, b};
    }
    if (op == "verify_codes") {
        auto [a, b] = parse_pair(j);
        VerifyCodesEvent e{a, b, std::nullopt};
        if (j.contains("expect")) {
            auto x = j.at("expect").get<std::string>();
            if (x == "match") e.expect_match = true;
            else if (x == "mismatch") e.expect_match = false;
            else throw Error(Errc::config, "verify_codes expect must be match or mismatch");
        }
        return e;
    }
    if (op == "tick") return TickEvent{j.value("count", std::uint64_t{1})};
    throw Error(Errc::config, "unknown script op: " + op);
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
    Scenario s;
    try {
        json doc = json::parse(text);
        s.parties = doc.at("parties").get<std::vector<std::string>>();
        s.seed = doc.value("seed", std::uint64_t{0});
        s.initial_opks = doc.value("initial_opks", std::size_t{10});
        s.auto_replenish = doc.value("auto_replenish", true);
        s.replenish_batch = doc.value("replenish_batch", std::size_t{10});
        for (const auto& ev : doc.at("script")) s.script.push_back(parse_event(ev));
    } catch (const json::exception& e) {
        throw Error(Errc::config, std::string("malformed scenario: ") + e.what());
    }
    validate(s);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::config, "cannot open scenario file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string scenario_to_json(const Scenario& s) {
    json doc;
    doc["parties"] = s.parties;
    doc["seed"] = s.seed;
    doc["initial_opks"] = s.initial_opks;
    doc["auto_replenish"] = s.auto_replenish;
    doc["replenish_batch"] = s.replenish_batch;
    json script = json::array();
    for (const auto& ev : s.script) {
        std::visit(
            [&](const auto& e) {
                using T = std::decay_t<decltype(e)>;
                json j;
                if constexpr (std::is_same_v<T, SendEvent>) {
                    j = {{"op", "send"}, {"from", e.from}, {"to", e.to}, {"text", e.text}, {"policy", policy_json(e.policy)}};
                    if (e.expect) {
                        static constexpr const char* kNames[] = {"delivered", "rejected", "dropped"};
                        j["expect"] = kNames[static_cast<int>(*e.expect)];
                    }
                } else if constexpr (std::is_same_v<T, RotateSpkEvent>) {
                    j = {{"op", "rotate_spk"}, {"user", e.user}};
                } else if constexpr (std::is_same_v<T, ReplenishEvent>) {
                    j = {{"op", "replenish"}, {"user", e.user}, {"count", e.count}};
                } else if constexpr (std::is_same_v<T, MarkMitmEvent>) {
                    j = {{"op", "mark_mitm"}, {"pair", {e.a, e.b}}};
                } else if constexpr (std::is_same_v<T, VerifyCodesEvent>) {
                    j = {{"op", "verify_codes"}, {"pair", {e.a, e.b}}};
                    if (e.expect_match) j["expect"] = *e.expect_match ? "match" : "mismatch";
                } else {
                    j = {{"op", "tick"}, {"count", e.count}};
                }
                script.push_back(j);
            },
            ev);
    }
    doc["script"] = script;
    return doc.dump(2);
}

void validate(const Scenario& s) {
    std::set<UserId> declared(s.parties.begin(), s.parties.end());
    if (declared.size() != s.parties.size()) throw Error(Errc::config, "duplicate party in scenario");
    if (declared.contains("mark")) throw Error(Errc::config, "\"mark\" is reserved for the adversary");
    auto need = [&](const UserId& u) {
        if (!declared.contains(u)) throw Error(Errc::config, "script references undeclared party: " + u);
    };
    for (std::size_t i = 0; i < s.script.size(); ++i) {
        std::visit(
            [&](const auto& e) {
                using T = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<T, SendEvent>) {
                    need(e.from);
                    need(e.to);
                    if (e.from == e.to) throw Error(Errc::config, "a party cannot send to itself");
                    if (e.policy.kind == DeliveryKind::reorder && e.policy.reorder_to <= i)
                        throw Error(Errc::config, "reorder target must come after the send event");
                } else if constexpr (std::is_same_v<T, RotateSpkEvent> || std::is_same_v<T, ReplenishEvent>) {
                    need(e.user);
                } else if constexpr (std::is_same_v<T, MarkMitmEvent> || std::is_same_v<T, VerifyCodesEvent>) {
                    need(e.a);
                    need(e.b);
                    if (e.a == e.b) throw Error(Errc::config, "pair must name two different parties");
                }
            },
            s.script[i]);
    }
}

}  // namespace ratchetlab::sim
