#pragma once

#include <stdexcept>
#include <string>

namespace misc {

// Bad configuration or arguments that no amount of computation can fix.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical procedure failed: solver stalled, singular design, no root.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace misc
