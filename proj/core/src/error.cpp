#include "pcjoin/error.hpp"

namespace pcj {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::WitnessShape: return "witness-shape";
    case ErrorKind::Coverage: return "coverage";
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::ScaleExceeded: return "scale-exceeded";
    case ErrorKind::ConstraintViolation: return "constraint-violation";
    case ErrorKind::Io: return "io";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

}  // namespace pcj
