#pragma once

#include <stdexcept>
#include <string>

namespace vmimo {

/// Bad configuration file, bad key value, or a precondition on user input.
/// The CLI maps this to exit code 2; everything else maps to 3.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace vmimo
