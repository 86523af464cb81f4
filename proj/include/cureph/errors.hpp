#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace cureph {

/// Base class for all library errors. Carries a short machine-readable code
/// (e.g. "singular-matrix") that the CLI prints alongside the message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class InvalidInputError : public Error {
 public:
  explicit InvalidInputError(const std::string& what)
      : Error("invalid-input", what) {}
};

class InvalidParameterError : public Error {
 public:
  explicit InvalidParameterError(const std::string& what)
      : Error("invalid-parameter", what) {}
};

class SingularMatrixError : public Error {
 public:
  explicit SingularMatrixError(const std::string& what)
      : Error("singular-matrix", what) {}
};

class DegenerateLatencyError : public Error {
 public:
  explicit DegenerateLatencyError(const std::string& what)
      : Error("degenerate-latency", what) {}
};

class BoundarySingularityError : public Error {
 public:
  explicit BoundarySingularityError(const std::string& what)
      : Error("boundary-singularity", what) {}
};

class NonfiniteLikelihoodError : public Error {
 public:
  explicit NonfiniteLikelihoodError(const std::string& what)
      : Error("nonfinite-likelihood", what) {}
};

class DegenerateStateError : public Error {
 public:
  explicit DegenerateStateError(const std::string& what)
      : Error("degenerate-state", what) {}
};

class DegenerateInitializationError : public Error {
 public:
  explicit DegenerateInitializationError(const std::string& what)
      : Error("degenerate-initialization", what) {}
};

class InfiniteResidualError : public Error {
 public:
  explicit InfiniteResidualError(const std::string& what)
      : Error("infinite-residual", what) {}
};

class FitFailureError : public Error {
 public:
  explicit FitFailureError(const std::string& what)
      : Error("fit-failure", what) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error("parse-error", what) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error("validation-error", what) {}
};

class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what)
      : Error("internal-error", what) {}
};

}  // namespace cureph
