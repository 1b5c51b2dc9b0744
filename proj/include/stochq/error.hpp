#pragma once

#include <stdexcept>
#include <string>

namespace stochq {

// Failure categories surfaced by the library. The C API maps these one-to-one
// onto stq_status codes, so keep the two lists in sync.
enum class ErrorCode {
  invalid_argument = 1,
  invalid_resolution,
  topology,
  degree,
  unsupported_mesh,
  unsupported_backend,
  deterministic_limit,
  not_potential,
  capacity,
  numerical,
  ergodic_zero_missing,
  no_instanton,
  indeterminate_index,
  invalid_noise,
  statistics,
  unfittable,
  validation,
  io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace stochq
