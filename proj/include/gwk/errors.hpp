#ifndef GWK_ERRORS_HPP
#define GWK_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gwk {

enum class ErrorKind {
  NegativeMass,
  MassSumMismatch,
  DegenerateLaw,
  NonFinite,
  Domain,
  NotFixedPoint,
  CriticalLaw,
  InnerConstantOutOfRange,
  ZeroOrderSeries,
  TruncationLossExceeded,
  NotConverged,
  StateCapExceeded,
  PopulationCapExceeded,
  InsufficientSurvivors,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Base of every error raised by the library; `kind()` identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct Violation {
  ErrorKind kind;
  std::string detail;
};

/// Raised by offspring-law validation. Lists every violated constraint, not only the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations);

  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

}  // namespace gwk

#endif  // GWK_ERRORS_HPP
