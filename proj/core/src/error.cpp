#include "levelk/error.hpp"

namespace levelk {

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kContractViolation: return "contract violation";
    case ErrorKind::kNotFound: return "not found";
    case ErrorKind::kInfeasibleManeuver: return "infeasible maneuver";
    case ErrorKind::kConfiguration: return "configuration error";
    case ErrorKind::kSchema: return "schema error";
    case ErrorKind::kIo: return "i/o error";
  }
  return "error";
}

}  // namespace levelk
