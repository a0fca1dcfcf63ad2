#include "ipd/error.hpp"

namespace ipd {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InsufficientRows: return "InsufficientRows";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::DegenerateTimes: return "DegenerateTimes";
    case ErrorKind::TooFewCalibrationPoints: return "TooFewCalibrationPoints";
    case ErrorKind::BudgetTooSmall: return "BudgetTooSmall";
    case ErrorKind::EmptyZetaGrid: return "EmptyZetaGrid";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::NotAchievable: return "NotAchievable";
    case ErrorKind::DegenerateTraining: return "DegenerateTraining";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_input_error(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::ConfigError:
    case ErrorKind::ParseError:
    case ErrorKind::SchemaError:
    case ErrorKind::NonFiniteValue:
    case ErrorKind::IoError:
      return true;
    default:
      return false;
  }
}

}  // namespace ipd
