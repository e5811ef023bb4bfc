#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oscid {

enum class ErrorCode {
  invalid_argument,
  io,
  parse,
  non_uniform_time,
  shape_mismatch,
  no_signal,
  defective_operator,
  infeasible_plan,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every rejection raised by the library. The CLI prints these as a single
// `error: <code>: <message>` line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace oscid
