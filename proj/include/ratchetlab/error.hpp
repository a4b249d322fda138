#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ratchetlab {

enum class Errc {
    generation,       // entropy source exhausted or failed
    contributory,     // DH produced the all-zero secret
    parameter,        // invalid toy-DH or KDF parameters
    malformed,        // input too short or wrongly sized
    authentication,   // MAC tag mismatch
    internal,         // invariant violated after a valid tag
    signature,        // prekey signature failed; protocol aborted
    conflict,         // duplicate registration
    not_found,        // unknown user
    rejected,         // server refused an upload
    missing_key,      // responder lacks the referenced prekey
    terminated,       // responder could not open the initial ciphertext
    state,            // operation invalid in the current ratchet state
    flood,            // too many skipped message keys
    parse,            // wire or file decoding failure
    no_session,       // normal message with no established session
    config,           // malformed scenario
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace ratchetlab
