#pragma once

#include <stdexcept>
#include <string>

namespace daembed {

/// Broad failure classes. The CLI maps each to a distinct exit code.
enum class ErrorCategory {
  parse,      ///< malformed input file content
  numeric,    ///< singular or ill-conditioned systems
  config,     ///< invalid configuration or option values
  io,         ///< unreadable/unwritable paths
  dimension,  ///< shape mismatches and out-of-range sizes
  alignment,  ///< vocabularies share too few tokens
  data,       ///< datasets that violate a precondition (single class, empty)
};

const char* to_string(ErrorCategory category) noexcept;

/// Process exit code for a category: parse=2, numeric=3, config=4, io=5,
/// dimension=6, alignment=7, data=8.
int exit_code(ErrorCategory category) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line = 0)
      : Error(ErrorCategory::parse, line ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}

  /// 1-based line number, or 0 when not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message) : Error(ErrorCategory::numeric, message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error(ErrorCategory::config, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ErrorCategory::io, message) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& message) : Error(ErrorCategory::dimension, message) {}
};

class AlignmentError : public Error {
 public:
  explicit AlignmentError(const std::string& message) : Error(ErrorCategory::alignment, message) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& message) : Error(ErrorCategory::data, message) {}
};

}  // namespace daembed
