#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace arwflow {

enum class ErrorKind {
  InvalidField,
  DegenerateMetric,
  OutOfRange,
  NotSpacelike,
  FlowDegenerate,
  OutsideCone,
  StepFailure,
  InvalidInitialData,
  NotReady,
  FitUndefined,
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers branch on kind().
class FlowError : public std::runtime_error {
 public:
  FlowError(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  // Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace arwflow
