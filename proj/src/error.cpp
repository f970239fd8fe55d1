#include "fdp/error.hpp"

namespace fdp {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonHermitianInput: return "NonHermitianInput";
    case ErrorKind::InvalidTime: return "InvalidTime";
    case ErrorKind::StepCountZero: return "StepCountZero";
    case ErrorKind::SingularKernel: return "SingularKernel";
    case ErrorKind::InvalidSpectrum: return "InvalidSpectrum";
    case ErrorKind::EmptyBatch: return "EmptyBatch";
    case ErrorKind::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::MaskShapeMismatch: return "MaskShapeMismatch";
    case ErrorKind::CutoffAboveNyquist: return "CutoffAboveNyquist";
    case ErrorKind::ReferenceTooCoarse: return "ReferenceTooCoarse";
    case ErrorKind::CheckpointMismatch: return "CheckpointMismatch";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Config: return "Config";
  }
  return "Unknown";
}

}  // namespace fdp
