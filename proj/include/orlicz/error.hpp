#pragma once

#include <stdexcept>
#include <string>

namespace orlicz {

enum class Errc {
  invalid_argument,
  invalid_young,
  not_certified,
  maximizer_at_boundary,
  hardy_verification_failed,
  overflow,
  invalid_grid,
  stencil_exceeds_domain,
  non_torus,
  cancellation_violated,
  unbounded_derivative,
  not_elliptic,
  unsupported_family,
  annulus_too_thin,
  config_parse,
  unknown_generator,
  io,
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace orlicz
