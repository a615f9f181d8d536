#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace mvrl {

// Error taxonomy surfaced by the CLI as one-line, machine-parsable messages
// ("error: <category>: <detail>"). Library code throws; the CLI maps the
// category to a distinct nonzero exit code.
enum class ErrorCategory { usage, config, io, validation, numeric };

inline const char* to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::usage: return "usage";
    case ErrorCategory::config: return "config";
    case ErrorCategory::io: return "io";
    case ErrorCategory::validation: return "validation";
    case ErrorCategory::numeric: return "numeric";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

inline void require(bool condition, ErrorCategory category, const std::string& message) {
  if (!condition) throw Error(category, message);
}

// Fixed-width, locale-independent float formatting used for every file the
// tool writes; output must be byte-identical across runs with equal inputs.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::string(buf);
}

}  // namespace mvrl
