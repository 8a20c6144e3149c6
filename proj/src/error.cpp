#include "wparab/error.hpp"

namespace wparab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonIntegrable: return "NonIntegrable";
    case ErrorKind::EmptyBall: return "EmptyBall";
    case ErrorKind::EmptyRegion: return "EmptyRegion";
    case ErrorKind::NoBracket: return "NoBracket";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::EllipticityViolation: return "EllipticityViolation";
    case ErrorKind::GateFailed: return "GateFailed";
    case ErrorKind::PreconditionFailed: return "PreconditionFailed";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace wparab
