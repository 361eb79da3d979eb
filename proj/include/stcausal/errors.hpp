#pragma once

#include <stdexcept>
#include <string>

namespace stc {

// Bad input data or bad configuration. CLI maps this family to exit code 1,
// anything else thrown maps to exit code 2.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : ValidationError {
  explicit ConfigError(const std::string& msg) : ValidationError(msg) {}
};

}  // namespace stc
