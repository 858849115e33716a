#include "carnot/error.hpp"

namespace carnot {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotSkewSymmetric: return "NotSkewSymmetric";
    case ErrorCode::LinearlyDependent: return "LinearlyDependent";
    case ErrorCode::DimensionOutOfRange: return "DimensionOutOfRange";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonpositiveLambda: return "NonpositiveLambda";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::DegeneratePair: return "DegeneratePair";
    case ErrorCode::EmptyTranslatedDomain: return "EmptyTranslatedDomain";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::SupportNotContained: return "SupportNotContained";
    case ErrorCode::VanishingX1f: return "VanishingX1f";
    case ErrorCode::ImmediateExit: return "ImmediateExit";
    case ErrorCode::NonConvergent: return "NonConvergent";
    case ErrorCode::NoReferenceComponent: return "NoReferenceComponent";
    case ErrorCode::CurveNotOnUnitInterval: return "CurveNotOnUnitInterval";
    case ErrorCode::SettingViolated: return "SettingViolated";
    case ErrorCode::NonMonotoneFamily: return "NonMonotoneFamily";
    case ErrorCode::KernelTooWide: return "KernelTooWide";
    case ErrorCode::InversionFailure: return "InversionFailure";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {
std::string compose(ErrorCode code, const std::string& detail) {
  std::string msg(to_string(code));
  if (!detail.empty()) {
    msg += ": ";
    msg += detail;
  }
  return msg;
}
}  // namespace

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(compose(code, detail)), code_(code) {}

void fail(ErrorCode code, const std::string& detail) { throw Error(code, detail); }

}  // namespace carnot
