#include "daembed/error.hpp"

namespace daembed {

const char* to_string(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::numeric: return "numeric";
    case ErrorCategory::config: return "config";
    case ErrorCategory::io: return "io";
    case ErrorCategory::dimension: return "dimension";
    case ErrorCategory::alignment: return "alignment";
    case ErrorCategory::data: return "data";
  }
  return "unknown";
}

int exit_code(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::parse: return 2;
    case ErrorCategory::numeric: return 3;
    case ErrorCategory::config: return 4;
    case ErrorCategory::io: return 5;
    case ErrorCategory::dimension: return 6;
    case ErrorCategory::alignment: return 7;
    case ErrorCategory::data: return 8;
  }
  return 1;
}

}  // namespace daembed
