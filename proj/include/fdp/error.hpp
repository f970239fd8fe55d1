#pragma once

#include <stdexcept>
#include <string>

namespace fdp {

/// Failure categories surfaced by the library. The CLI maps these onto exit codes.
enum class ErrorKind {
  InvalidArgument,
  NonHermitianInput,
  InvalidTime,
  StepCountZero,
  SingularKernel,
  InvalidSpectrum,
  EmptyBatch,
  NonFiniteGradient,
  NonFiniteState,
  MaskShapeMismatch,
  CutoffAboveNyquist,
  ReferenceTooCoarse,
  CheckpointMismatch,
  Io,
  Config,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace fdp
