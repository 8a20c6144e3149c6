#pragma once

#include <stdexcept>
#include <string>

namespace wparab {

enum class ErrorKind {
  NonIntegrable,
  EmptyBall,
  EmptyRegion,
  NoBracket,
  SingularSystem,
  EllipticityViolation,
  GateFailed,
  PreconditionFailed,
  InvalidInput,
  ConfigError,
  IoError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace wparab
