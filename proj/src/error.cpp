#include "oscid/error.hpp"

namespace oscid {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::io: return "io";
    case ErrorCode::parse: return "parse";
    case ErrorCode::non_uniform_time: return "non_uniform_time";
    case ErrorCode::shape_mismatch: return "shape_mismatch";
    case ErrorCode::no_signal: return "no_signal";
    case ErrorCode::defective_operator: return "defective_operator";
    case ErrorCode::infeasible_plan: return "infeasible_plan";
  }
  return "unknown";
}

}  // namespace oscid
