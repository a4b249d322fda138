#include "ratchetlab/sim/metadata.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace ratchetlab::sim {

namespace {

void add_contact(std::map<UserId, std::map<UserId, registry::PeerContact>>& acc, const UserId& user,
                 const UserId& other, Tick at) {
    auto& c = acc[user][other];
    c.peer = other;
    ++c.count;
    c.last_contact = std::max(c.last_contact, at);
}

constexpr std::size_t kMinScanLength = 8;

bool server_visible(const TranscriptEvent& ev) {
    return ev.action == "register" || ev.action == "fetch_bundle" || ev.action == "relay" || ev.action == "rotate_spk";
}

bool contains_text(ByteView hay, const std::string& needle) {
    if (needle.empty() || needle.size() > hay.size()) return false;
    return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

}  // namespace

bool MetadataSummary::empty() const {
    return relay_events == 0 &&
           std::all_of(reports.begin(), reports.end(), [](const auto& kv) { return kv.second.peers.empty(); });
}

MetadataSummary fold_transcript(const std::vector<TranscriptEvent>& events) {
    std::set<UserId> registered;
    std::map<UserId, std::map<UserId, registry::PeerContact>> acc;
    MetadataSummary out;
    for (const auto& ev : events) {
        if (server_visible(ev) && ev.text) out.plaintext_bytes_observed += ev.text->size();
        if (ev.outcome != "ok") continue;
        if (ev.action == "register") {
            registered.insert(ev.actor);
            continue;
        }
        if ((ev.action != "fetch_bundle" && ev.action != "relay") || !ev.peer) continue;
        if (ev.action == "relay") {
            ++out.relay_events;
            ++out.relays[{ev.actor, *ev.peer}];
        }
        if (*ev.peer == ev.actor) continue;
        if (registered.contains(ev.actor)) add_contact(acc, ev.actor, *ev.peer, ev.at);
        if (registered.contains(*ev.peer)) add_contact(acc, *ev.peer, ev.actor, ev.at);
    }
    for (const auto& user : registered) {
        registry::MetadataReport r{user, {}};
        for (const auto& [_, c] : acc[user]) r.peers.push_back(c);
        out.reports.emplace(user, std::move(r));
    }
    return out;
}

MetadataDemo metadata_demo(const Scenario& scenario) {
    RunResult result = run(scenario);
    registry::Registry server;
    server.import_snapshot(result.registry_snapshot);

    MetadataDemo demo;
    for (const auto& user : server.users()) demo.server.reports.emplace(user, server.metadata_report(user));
    demo.folded = fold_transcript(result.transcript);
    demo.server.relays = demo.folded.relays;
    demo.server.relay_events = demo.folded.relay_events;

    // What the server handles: its own events and the relayed envelopes.
    // Texts shorter than kMinScanLength match random ciphertext by chance,
    // so only longer ones are searched for verbatim.
    std::size_t seen = demo.folded.plaintext_bytes_observed;
    for (const auto& w : result.wire) {
        auto it = result.messages.find(w.msg);
        if (it == result.messages.end() || it->second.text.size() < kMinScanLength) continue;
        if (contains_text(w.envelope, it->second.text)) seen += it->second.text.size();
    }
    demo.server.plaintext_bytes_observed = seen;
    demo.folded.plaintext_bytes_observed = seen;

    demo.consistent = demo.server.reports.size() == demo.folded.reports.size();
    for (const auto& [user, r] : demo.server.reports) {
        auto it = demo.folded.reports.find(user);
        if (it == demo.folded.reports.end() || it->second.peers != r.peers) demo.consistent = false;
    }
    return demo;
}

std::string render_metadata(const MetadataSummary& s) {
    std::ostringstream out;
    out << "relay events: " << s.relay_events << '\n';
    out << "plaintext bytes observed: " << s.plaintext_bytes_observed << '\n';
    for (const auto& [pair, n] : s.relays) out << "  " << pair.first << " -> " << pair.second << ": " << n << '\n';
    for (const auto& [user, r] : s.reports) {
        out << user << ':';
        if (r.peers.empty()) out << " no contacts";
        out << '\n';
        for (const auto& c : r.peers)
            out << "  " << c.peer << "  count=" << c.count << "  last_contact=" << c.last_contact << '\n';
    }
    return out.str();
}

}  // namespace ratchetlab::sim
