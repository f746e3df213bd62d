#include "miest/error.hpp"

namespace miest {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::RaggedRows: return "RaggedRows";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::EmptyData: return "EmptyData";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::Divergent: return "Divergent";
    case ErrorCode::CalibrationFailed: return "CalibrationFailed";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace miest
