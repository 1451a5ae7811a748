#include "sse/error.hpp"

namespace sse {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::parse: return "parse";
    case ErrorCode::duplicate_id: return "duplicate_id";
    case ErrorCode::dangling_row: return "dangling_row";
    case ErrorCode::format: return "format";
    case ErrorCode::io: return "io";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::precondition: return "precondition";
    case ErrorCode::transport: return "transport";
    case ErrorCode::invariant: return "invariant";
  }
  return "unknown";
}

}  // namespace sse
