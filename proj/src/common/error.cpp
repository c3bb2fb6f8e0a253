#include "common/error.hpp"

namespace svc {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::NumericalError: return "NumericalError";
    case ErrorKind::ShapeError: return "ShapeError";
    case ErrorKind::FeatureAlignmentError: return "FeatureAlignmentError";
    case ErrorKind::FeatureFileError: return "FeatureFileError";
    case ErrorKind::InsufficientVoicing: return "InsufficientVoicing";
    case ErrorKind::OptimizerError: return "OptimizerError";
    case ErrorKind::CheckpointError: return "CheckpointError";
  }
  return "UnknownError";
}

int error_kind_exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidConfig:
      return 1;
    case ErrorKind::NumericalError:
      return 3;
    default:
      return 2;
  }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind) {}

}  // namespace svc
