#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rsym {

enum class ErrorCode {
  kInvalidArgument,
  kInvalidLaw,
  kDegenerateLaw,
  kRejectionDiverges,
  kOutOfBox,
  kVolumeTooLarge,
  kReductionStalled,
  kFullRank,
  kAtomBlowup,
  kEnumerationTooLarge,
  kOverlapError,
  kBoundViolation,
  kConvergenceFailure,
  kNoPivot,
  kDegenerateSpectrum,
  kSpacingUnverified,
  kArithmeticOverflow,
  kParseError,
  kUnknownExperiment,
  kInvalidConfig,
  kReplayMismatch,
  kIoError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace rsym
