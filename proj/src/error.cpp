#include "orlicz/error.hpp"

namespace orlicz {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::invalid_young: return "invalid-young";
    case Errc::not_certified: return "not-certified";
    case Errc::maximizer_at_boundary: return "maximizer-at-boundary";
    case Errc::hardy_verification_failed: return "hardy-verification-failed";
    case Errc::overflow: return "overflow";
    case Errc::invalid_grid: return "invalid-grid";
    case Errc::stencil_exceeds_domain: return "stencil-exceeds-domain";
    case Errc::non_torus: return "non-torus";
    case Errc::cancellation_violated: return "cancellation-violated";
    case Errc::unbounded_derivative: return "unbounded-derivative";
    case Errc::not_elliptic: return "not-elliptic";
    case Errc::unsupported_family: return "unsupported-family";
    case Errc::annulus_too_thin: return "annulus-thinner-than-3h";
    case Errc::config_parse: return "config-parse-error";
    case Errc::unknown_generator: return "unknown-generator";
    case Errc::io: return "io-error";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace orlicz
