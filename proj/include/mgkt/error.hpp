#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mgkt {

enum class ErrorCode {
  InvalidArgument,
  Io,
  MalformedLine,
  BadDirection,
  EmptyGraph,
  InvalidGraph,
  TooFewTriples,
  BadRatios,
  Exhausted,
  DimMismatch,
  MissingVertex,
  MissingFeatures,
  MissingEmbedding,
  EmptyInput,
  Divergence,
  ConfigDependency,
  ConfigInvalid,
  MissingCheckpoint,
  BadCheckpoint,
  TruthMismatch,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure surfaced by the library. The code is stable and is what the
/// CLI prints; the message carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  /// The detail text without the code prefix that what() carries.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace mgkt
