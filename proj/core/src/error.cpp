#include "rsym/error.hpp"

namespace rsym {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidLaw: return "InvalidLaw";
    case ErrorCode::kDegenerateLaw: return "DegenerateLaw";
    case ErrorCode::kRejectionDiverges: return "RejectionDiverges";
    case ErrorCode::kOutOfBox: return "OutOfBox";
    case ErrorCode::kVolumeTooLarge: return "VolumeTooLarge";
    case ErrorCode::kReductionStalled: return "ReductionStalled";
    case ErrorCode::kFullRank: return "FullRank";
    case ErrorCode::kAtomBlowup: return "AtomBlowup";
    case ErrorCode::kEnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::kOverlapError: return "OverlapError";
    case ErrorCode::kBoundViolation: return "BoundViolation";
    case ErrorCode::kConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::kNoPivot: return "NoPivot";
    case ErrorCode::kDegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorCode::kSpacingUnverified: return "SpacingUnverified";
    case ErrorCode::kArithmeticOverflow: return "ArithmeticOverflow";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kUnknownExperiment: return "UnknownExperiment";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kReplayMismatch: return "ReplayMismatch";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace rsym
