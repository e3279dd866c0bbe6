#pragma once

#include <stdexcept>
#include <string>

namespace selliptic {

struct InvalidParameter : std::runtime_error {
  explicit InvalidParameter(const std::string& what) : std::runtime_error(what) {}
};

/// A user-supplied evaluator returned a non-finite value, or a quadrature
/// panel failed to converge.
struct EvaluationError : std::runtime_error {
  explicit EvaluationError(const std::string& what) : std::runtime_error(what) {}
};

/// Requested an envelope quantity for a nonlinearity whose growth integral
/// diverges.
struct DivergentEnvelope : std::runtime_error {
  explicit DivergentEnvelope(const std::string& what) : std::runtime_error(what) {}
};

struct RangeError : std::runtime_error {
  explicit RangeError(const std::string& what) : std::runtime_error(what) {}
};

struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// No bracketing interval for the profile shooting parameter; typically the
/// degenerate regime where the only nonnegative profile is identically zero.
struct NoProfileFound : std::runtime_error {
  explicit NoProfileFound(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ResolutionError : std::runtime_error {
  explicit ResolutionError(const std::string& what) : std::runtime_error(what) {}
};

struct Unsupported : std::runtime_error {
  explicit Unsupported(const std::string& what) : std::runtime_error(what) {}
};

struct IOError : std::runtime_error {
  explicit IOError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace selliptic
