#include "qclab/errors.hpp"

namespace qclab {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroConditioningMass: return "ZeroConditioningMass";
    case ErrorCode::NotARefinement: return "NotARefinement";
    case ErrorCode::MalformedTree: return "MalformedTree";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::Unachievable: return "Unachievable";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::InnerComplexityZero: return "InnerComplexityZero";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace qclab
