#pragma once

#include <string>
#include <vector>

namespace ratchetlab::sim {

struct VectorResult {
    std::string name;
    std::string source;
    std::string expected;
    std::string actual;
    bool pass() const { return expected == actual; }
};

/// Published HMAC, HKDF and X25519 vectors plus the toy DH example.
std::vector<VectorResult> run_primitive_vectors();

}  // namespace ratchetlab::sim
