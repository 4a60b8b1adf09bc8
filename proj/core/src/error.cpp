#include "coevolve/error.hpp"

namespace coevolve {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSymmetric: return "NonSymmetric";
    case ErrorCode::NotPositiveSemidefinite: return "NotPositiveSemidefinite";
    case ErrorCode::EigFailure: return "EigFailure";
    case ErrorCode::NotFactorizable: return "NotFactorizable";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::BadDistribution: return "BadDistribution";
    case ErrorCode::AllUnderflow: return "AllUnderflow";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateRate: return "DegenerateRate";
    case ErrorCode::TooFewInjected: return "TooFewInjected";
    case ErrorCode::TooFewComponents: return "TooFewComponents";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::RangeError: return "RangeError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::EmptySeries: return "EmptySeries";
  }
  return "Unknown";
}

}  // namespace coevolve
