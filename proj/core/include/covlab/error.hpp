#pragma once

#include <stdexcept>
#include <string>

namespace covlab {

// Malformed or inconsistent caller input: bad dimensions, unknown labels,
// empty regions, out-of-range parameters.
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

// Filesystem failures (unreadable problem file, unwritable report path).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace covlab
