#include "deriloss/error.hpp"

namespace deriloss {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::NonFiniteEvaluation: return "NonFiniteEvaluation";
    case ErrorKind::IntegralMismatch: return "IntegralMismatch";
    case ErrorKind::DivergentIntegral: return "DivergentIntegral";
    case ErrorKind::DivergentObjective: return "DivergentObjective";
    case ErrorKind::GridTooSmall: return "GridTooSmall";
    case ErrorKind::PoorFit: return "PoorFit";
    case ErrorKind::OutOfInterval: return "OutOfInterval";
    case ErrorKind::HypothesisViolated: return "HypothesisViolated";
    case ErrorKind::EmptySubdivision: return "EmptySubdivision";
    case ErrorKind::NotClassMember: return "NotClassMember";
    case ErrorKind::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::BoundViolated: return "BoundViolated";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

namespace {
std::string decorate(ErrorKind kind, const std::string& what, const std::vector<std::string>& failed) {
  std::string msg = std::string(to_string(kind)) + ": " + what;
  if (!failed.empty()) {
    msg += " [";
    for (std::size_t i = 0; i < failed.size(); ++i) {
      if (i) msg += ", ";
      msg += failed[i];
    }
    msg += "]";
  }
  return msg;
}
}  // namespace

Error::Error(ErrorKind kind, const std::string& what, std::vector<std::string> failed)
    : std::runtime_error(decorate(kind, what, failed)), kind_(kind), failed_(std::move(failed)) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace deriloss
