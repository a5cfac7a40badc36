#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pcj {

enum class ErrorKind {
  Parse,
  Schema,
  WitnessShape,
  Coverage,
  Parameter,
  ScaleExceeded,
  ConstraintViolation,
  Io,
  Internal,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library. The kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace pcj
