#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace deriloss {

enum class ErrorKind {
  InvalidArgument,
  ConfigError,
  NonFiniteEvaluation,
  IntegralMismatch,
  DivergentIntegral,
  DivergentObjective,
  GridTooSmall,
  PoorFit,
  OutOfInterval,
  HypothesisViolated,
  EmptySubdivision,
  NotClassMember,
  StepSizeUnderflow,
  NonFiniteState,
  BoundViolated,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` distinguishes failures.
/// HypothesisViolated carries the names of the failed conditions.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what, std::vector<std::string> failed = {});

  ErrorKind kind() const noexcept { return kind_; }
  const std::vector<std::string>& failed_conditions() const noexcept { return failed_; }

private:
  ErrorKind kind_;
  std::vector<std::string> failed_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace deriloss
