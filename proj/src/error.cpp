#include "aah/error.hpp"

namespace aah {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonHermitianInput: return "NonHermitianInput";
    case ErrorKind::BandIndexOutOfRange: return "BandIndexOutOfRange";
    case ErrorKind::EvenDenominator: return "EvenDenominator";
    case ErrorKind::MeshTooCoarse: return "MeshTooCoarse";
    case ErrorKind::FiducialInGapViolation: return "FiducialInGapViolation";
    case ErrorKind::GridUnderresolved: return "GridUnderresolved";
    case ErrorKind::LeakageExceeded: return "LeakageExceeded";
    case ErrorKind::NoBoundMode: return "NoBoundMode";
    case ErrorKind::FitDegenerate: return "FitDegenerate";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace aah
