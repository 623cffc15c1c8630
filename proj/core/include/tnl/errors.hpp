#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tnl {

/// Raised by the formula parser. `position()` is a byte offset into the
/// input, clamped to [0, input length].
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t position, const std::string& message)
      : std::runtime_error(message + " (at offset " + std::to_string(position) + ")"),
        position_(position),
        brief_(message) {}

  std::size_t position() const noexcept { return position_; }
  const std::string& brief() const noexcept { return brief_; }

 private:
  std::size_t position_;
  std::string brief_;
};

/// A computation produced NaN/Inf or an otherwise unusable number.
/// Maps to CLI exit code 2.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& message) : std::runtime_error(message) {}
};

/// The gradient-check precondition was violated: the evaluation point sits
/// too close to a min/max/clamp/branch kink for finite differences.
class KinkError : public std::runtime_error {
 public:
  explicit KinkError(const std::string& message) : std::runtime_error(message) {}
};

}  // namespace tnl
