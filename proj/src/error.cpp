#include "vrekit/error.hpp"

namespace vrekit {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "Io";
    case ErrorKind::MalformedFile: return "MalformedFile";
    case ErrorKind::DuplicateCell: return "DuplicateCell";
    case ErrorKind::OutOfRangeCoordinate: return "OutOfRangeCoordinate";
    case ErrorKind::OutOfRangeValue: return "OutOfRangeValue";
    case ErrorKind::MissingValue: return "MissingValue";
    case ErrorKind::VariableMismatch: return "VariableMismatch";
    case ErrorKind::TimeAxisGap: return "TimeAxisGap";
    case ErrorKind::UnknownCell: return "UnknownCell";
    case ErrorKind::WeightSumInvalid: return "WeightSumInvalid";
    case ErrorKind::AxisMismatch: return "AxisMismatch";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::BinMismatch: return "BinMismatch";
    case ErrorKind::SearchGridEmpty: return "SearchGridEmpty";
    case ErrorKind::LengthNotDivisible: return "LengthNotDivisible";
    case ErrorKind::ZeroMean: return "ZeroMean";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::InsufficientYears: return "InsufficientYears";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

}  // namespace vrekit
