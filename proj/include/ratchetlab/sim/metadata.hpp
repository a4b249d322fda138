#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ratchetlab/registry.hpp"
#include "ratchetlab/sim/harness.hpp"
#include "ratchetlab/sim/scenario.hpp"

namespace ratchetlab::sim {

/// What the key server can learn without a single plaintext byte.
struct MetadataSummary {
    std::map<UserId, registry::MetadataReport> reports;  // one per registered user
    std::map<std::pair<UserId, UserId>, std::size_t> relays;  // directed (from, to)
    std::size_t relay_events = 0;
    std::size_t plaintext_bytes_observed = 0;
    bool empty() const;
};

/// Rebuilds per-user contact reports from server-visible transcript events
/// (register, fetch_bundle, relay). Events involving unregistered actors only
/// count towards the registered side. plaintext_bytes_observed counts text
/// carried by server-visible events.
MetadataSummary fold_transcript(const std::vector<TranscriptEvent>& events);

struct MetadataDemo {
    MetadataSummary server;     // from the registry's own metadata logs
    MetadataSummary folded;     // recomputed from the transcript
    bool consistent = false;    // server.reports == folded.reports
};

/// Runs the scenario, then reads the report back out of the registry.
MetadataDemo metadata_demo(const Scenario& scenario);

std::string render_metadata(const MetadataSummary& summary);

}  // namespace ratchetlab::sim
