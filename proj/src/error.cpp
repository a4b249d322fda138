#include "ratchetlab/error.hpp"

namespace ratchetlab {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::generation: return "generation";
        case Errc::contributory: return "contributory";
        case Errc::parameter: return "parameter";
        case Errc::malformed: return "malformed";
        case Errc::authentication: return "authentication";
        case Errc::internal: return "internal";
        case Errc::signature: return "signature";
        case Errc::conflict: return "conflict";
        case Errc::not_found: return "not-found";
        case Errc::rejected: return "rejected";
        case Errc::missing_key: return "missing-key";
        case Errc::terminated: return "terminated";
        case Errc::state: return "state";
        case Errc::flood: return "flood";
        case Errc::parse: return "parse";
        case Errc::no_session: return "no-session";
        case Errc::config: return "config";
    }
    return "unknown";
}

}  // namespace ratchetlab
