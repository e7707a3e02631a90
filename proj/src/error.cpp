#include "intraday/error.hpp"

namespace intraday {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::kDimensionMismatch:
    return "DimensionMismatch";
  case ErrorKind::kNonFiniteInput:
    return "NonFiniteInput";
  case ErrorKind::kEmptyRange:
    return "EmptyRange";
  case ErrorKind::kOutOfBounds:
    return "OutOfBounds";
  case ErrorKind::kInvalidS:
    return "InvalidS";
  case ErrorKind::kShapeMismatch:
    return "ShapeMismatch";
  case ErrorKind::kInvalidLevels:
    return "InvalidLevels";
  case ErrorKind::kInvalidConfig:
    return "InvalidConfig";
  case ErrorKind::kInvalidArgument:
    return "InvalidArgument";
  case ErrorKind::kNotPositiveDefinite:
    return "NotPositiveDefinite";
  case ErrorKind::kAllComponentsDegenerate:
    return "AllComponentsDegenerate";
  case ErrorKind::kParseError:
    return "ParseError";
  case ErrorKind::kVersionMismatch:
    return "VersionMismatch";
  case ErrorKind::kDanglingDictionaryRef:
    return "DanglingDictionaryRef";
  case ErrorKind::kRaggedRow:
    return "RaggedRow";
  case ErrorKind::kDuplicateId:
    return "DuplicateId";
  case ErrorKind::kIo:
    return "IoError";
  }
  return "Error";
}

} // namespace intraday
