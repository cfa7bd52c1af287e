#include "mgkt/error.hpp"

namespace mgkt {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::BadDirection: return "BadDirection";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::TooFewTriples: return "TooFewTriples";
    case ErrorCode::BadRatios: return "BadRatios";
    case ErrorCode::Exhausted: return "Exhausted";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::MissingVertex: return "MissingVertex";
    case ErrorCode::MissingFeatures: return "MissingFeatures";
    case ErrorCode::MissingEmbedding: return "MissingEmbedding";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::Divergence: return "Divergence";
    case ErrorCode::ConfigDependency: return "ConfigDependency";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::MissingCheckpoint: return "MissingCheckpoint";
    case ErrorCode::BadCheckpoint: return "BadCheckpoint";
    case ErrorCode::TruthMismatch: return "TruthMismatch";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

}  // namespace mgkt
