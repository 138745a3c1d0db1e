#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace t2m {

// Error kinds raised across the library. The CLI maps groups of these onto
// its exit-code taxonomy (see cli.hpp).
enum class Errc {
  // npy / corpus / targets
  MagicMismatch,
  UnsupportedDtype,
  FortranOrderUnsupported,
  ShapeHeaderMalformed,
  MissingFile,
  InvariantViolation,
  UnknownKind,
  MissingField,
  NonUnitDirection,
  // kinematics
  AlreadyDenormalized,
  DimensionMismatch,
  NormalizedInput,
  TooShort,
  EmptySeries,
  DegenerateMesh,
  // semantic
  BadK,
  ZeroVector,
  InsufficientOutputs,
  EmptyCorpus,
  Empty,
  // fine-grained
  WindowOutOfRange,
  BadJoints,
  UnresolvedPrompt,
  // judge
  Transport,
  RateLimited,
  SchemaViolation,
  BandMismatch,
  OutOfRange,
  Misaligned,
  // scoring
  DegenerateRange,
  MissingMetric,
  NoCandidates,
  // run configuration
  Config,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace t2m
