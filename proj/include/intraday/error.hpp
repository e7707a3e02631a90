#ifndef INTRADAY_ERROR_HPP_
#define INTRADAY_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace intraday {

enum class ErrorKind {
  // validation
  kDimensionMismatch,
  kNonFiniteInput,
  kEmptyRange,
  kOutOfBounds,
  kInvalidS,
  kShapeMismatch,
  kInvalidLevels,
  kInvalidConfig,
  kInvalidArgument,
  // numerical
  kNotPositiveDefinite,
  kAllComponentsDegenerate,
  // io
  kParseError,
  kVersionMismatch,
  kDanglingDictionaryRef,
  kRaggedRow,
  kDuplicateId,
  kIo,
};

enum class ErrorCategory { kValidation, kNumerical, kIo };

constexpr ErrorCategory category(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::kNotPositiveDefinite:
  case ErrorKind::kAllComponentsDegenerate:
    return ErrorCategory::kNumerical;
  case ErrorKind::kParseError:
  case ErrorKind::kVersionMismatch:
  case ErrorKind::kDanglingDictionaryRef:
  case ErrorKind::kRaggedRow:
  case ErrorKind::kDuplicateId:
  case ErrorKind::kIo:
    return ErrorCategory::kIo;
  default:
    return ErrorCategory::kValidation;
  }
}

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Message without the kind prefix.
  const std::string &detail() const noexcept { return detail_; }
  ErrorCategory error_category() const noexcept { return category(kind_); }

private:
  ErrorKind kind_;
  std::string detail_;
};

} // namespace intraday

#endif // INTRADAY_ERROR_HPP_
