#pragma once

#include <stdexcept>
#include <string>

namespace specmatch {

// Stable error codes; the CLI prints them as machine-readable prefixes.
enum class ErrorCode {
  ParseError,
  DegenerateFace,
  IndexOutOfRange,
  DisconnectedMesh,
  DegenerateTriangle,
  ConvergenceFailure,
  InsufficientVertices,
  ZeroEigenvalue,
  InvalidSchedule,
  TooFewSamples,
  DimensionMismatch,
  KindMismatch,
  EmptyCorpus,
  DescriptorMissing,
  VertexCountMismatch,
  MissingFile,
  ManifestParseError,
  EmptyTestSet,
  EmptySample,
  InvalidArgument,
  IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace specmatch
