#pragma once

#include <stdexcept>
#include <string>

namespace ctvrpca {

/// Operand dimensions disagree, or an unfolded matrix lacks the tensor
/// extents needed to fold it back.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A scalar argument is outside its domain (negative threshold, mu <= 0, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A decomposition or transform produced non-finite output or failed to
/// converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed tensor file (bad magic, truncated payload).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration document failed schema validation.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace ctvrpca
