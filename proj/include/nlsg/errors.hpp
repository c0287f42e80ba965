#pragma once

#include <stdexcept>
#include <string>

namespace nlsg {

// Bad arguments (wrong parameter range, malformed graph file, unusable grid).
struct invalid_parameter : std::invalid_argument {
  explicit invalid_parameter(const std::string& msg) : std::invalid_argument(msg) {}
};

// Parameter combinations the model does not define (p = 6 solitons, ratios of
// zero functions, supercritical mass on the line, ...).
struct unsupported_input : std::invalid_argument {
  explicit unsupported_input(const std::string& msg) : std::invalid_argument(msg) {}
};

// Runtime numerical breakdown: blow-up monitors, failed bracket searches,
// sign-condition rectangles that cannot be certified.
struct numerical_failure : std::runtime_error {
  explicit numerical_failure(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace nlsg
