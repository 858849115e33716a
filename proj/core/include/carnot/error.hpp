#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace carnot {

enum class ErrorCode {
  NotSkewSymmetric,
  LinearlyDependent,
  DimensionOutOfRange,
  BadParams,
  DimensionMismatch,
  NonpositiveLambda,
  IndexOutOfRange,
  SingularMatrix,
  OutOfDomain,
  DegeneratePair,
  EmptyTranslatedDomain,
  GridTooCoarse,
  SupportNotContained,
  VanishingX1f,
  ImmediateExit,
  NonConvergent,
  NoReferenceComponent,
  CurveNotOnUnitInterval,
  SettingViolated,
  NonMonotoneFamily,
  KernelTooWide,
  InversionFailure,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& detail = {});

}  // namespace carnot
