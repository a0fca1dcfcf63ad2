#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ipd {

enum class ErrorKind {
  // numerical
  RankDeficient,
  DimensionMismatch,
  InsufficientRows,
  IndexOutOfRange,
  TooFewPoints,
  DegenerateTimes,
  TooFewCalibrationPoints,
  BudgetTooSmall,
  EmptyZetaGrid,
  SingularSystem,
  NonFiniteInput,
  NotAchievable,
  DegenerateTraining,
  // configuration / input
  InvalidArgument,
  ConfigError,
  ParseError,
  SchemaError,
  NonFiniteValue,
  IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// True for errors caused by the user's configuration or input files, as
/// opposed to failures of the numerical pipeline.
bool is_input_error(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace ipd
