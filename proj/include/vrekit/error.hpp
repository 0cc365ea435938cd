#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vrekit {

/// Failure categories shared by every module. Loaders and operations throw
/// vrekit::Error carrying one of these so callers (and the validator) can
/// report a specific cause.
enum class ErrorKind {
  Io,
  MalformedFile,
  DuplicateCell,
  OutOfRangeCoordinate,
  OutOfRangeValue,
  MissingValue,
  VariableMismatch,
  TimeAxisGap,
  UnknownCell,
  WeightSumInvalid,
  AxisMismatch,
  EmptyInput,
  BinMismatch,
  SearchGridEmpty,
  LengthNotDivisible,
  ZeroMean,
  TooShort,
  InsufficientYears,
  GridMismatch,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace vrekit
