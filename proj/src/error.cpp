#include "stochq/error.hpp"

namespace stochq {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::invalid_resolution: return "invalid-resolution";
    case ErrorCode::topology: return "topology";
    case ErrorCode::degree: return "degree";
    case ErrorCode::unsupported_mesh: return "unsupported-mesh";
    case ErrorCode::unsupported_backend: return "unsupported-backend";
    case ErrorCode::deterministic_limit: return "deterministic-limit";
    case ErrorCode::not_potential: return "not-potential";
    case ErrorCode::capacity: return "capacity";
    case ErrorCode::numerical: return "numerical";
    case ErrorCode::ergodic_zero_missing: return "ergodic-zero-missing";
    case ErrorCode::no_instanton: return "no-instanton";
    case ErrorCode::indeterminate_index: return "indeterminate-index";
    case ErrorCode::invalid_noise: return "invalid-noise";
    case ErrorCode::statistics: return "statistics";
    case ErrorCode::unfittable: return "unfittable";
    case ErrorCode::validation: return "validation";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace stochq
