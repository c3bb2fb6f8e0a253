#pragma once

#include <stdexcept>
#include <string>

namespace svc {

// Error taxonomy shared by all modules. The CLI maps kinds to exit codes:
// usage/config -> 1, data -> 2, numerical -> 3.
enum class ErrorKind {
  InvalidInput,
  InvalidConfig,
  NumericalError,
  ShapeError,
  FeatureAlignmentError,
  FeatureFileError,
  InsufficientVoicing,
  OptimizerError,
  CheckpointError,
};

const char* error_kind_name(ErrorKind kind);
int error_kind_exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace svc
