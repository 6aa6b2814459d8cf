#pragma once

#include <stdexcept>
#include <string>

namespace rd {

enum class ErrorCode {
  NonSquare,
  AsymmetryTooLarge,
  NonFinite,
  SketchDimExceedsRows,
  RankDeficient,
  InvalidResolution,
  ShapeMismatch,
  DivergedLoss,
  BadMagic,
  VersionUnsupported,
  TruncatedFile,
  DuplicateName,
  IoFailure,
  DimensionMismatch,
  NotPsd,
  SpectrumTooShort,
  MismatchedLayers,
  NumericError,
};

/// Library-wide exception carrying a machine-checkable code alongside the text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

const char* error_code_name(ErrorCode code);

}  // namespace rd
