#include "arwflow/errors.hpp"

namespace arwflow {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidField: return "InvalidField";
    case ErrorKind::DegenerateMetric: return "DegenerateMetric";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::NotSpacelike: return "NotSpacelike";
    case ErrorKind::FlowDegenerate: return "FlowDegenerate";
    case ErrorKind::OutsideCone: return "OutsideCone";
    case ErrorKind::StepFailure: return "StepFailure";
    case ErrorKind::InvalidInitialData: return "InvalidInitialData";
    case ErrorKind::NotReady: return "NotReady";
    case ErrorKind::FitUndefined: return "FitUndefined";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace arwflow
