#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sse {

enum class ErrorCode {
  invalid_argument,
  parse,
  duplicate_id,
  dangling_row,
  format,
  io,
  dimension_mismatch,
  precondition,
  transport,
  invariant,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type. The CLI turns it into
// a single-line JSON error record.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sse
