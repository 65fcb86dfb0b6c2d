#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace lupts {

/// Error with a stable machine-readable code alongside the human message.
/// Codes used across the library: "invalid_argument", "dimension_mismatch",
/// "non_finite", "degenerate", "io_error", "parse_error", "schema_mismatch",
/// "unknown_preset", "unknown_estimator".
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace lupts
