#pragma once

#include <stdexcept>
#include <string>

namespace ensmc {

// Numerical failures.
struct NotPositiveDefinite : std::runtime_error {
  explicit NotPositiveDefinite(const std::string& what) : std::runtime_error(what) {}
};
struct NoConvergence : std::runtime_error {
  explicit NoConvergence(const std::string& what) : std::runtime_error(what) {}
};
struct DimensionMismatch : std::invalid_argument {
  explicit DimensionMismatch(const std::string& what) : std::invalid_argument(what) {}
};
struct NonPositiveVariance : std::runtime_error {
  explicit NonPositiveVariance(const std::string& what) : std::runtime_error(what) {}
};

// Target / sampler failures.
struct TargetDegenerate : std::runtime_error {
  explicit TargetDegenerate(const std::string& what) : std::runtime_error(what) {}
};
struct AllZeroDensity : std::runtime_error {
  explicit AllZeroDensity(const std::string& what) : std::runtime_error(what) {}
};
struct UnsupportedMeasure : std::logic_error {
  explicit UnsupportedMeasure(const std::string& what) : std::logic_error(what) {}
};
struct InitDegenerate : std::runtime_error {
  explicit InitDegenerate(const std::string& what) : std::runtime_error(what) {}
};
struct UnsupportedP : std::invalid_argument {
  explicit UnsupportedP(const std::string& what) : std::invalid_argument(what) {}
};

// Harness failures.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ensmc
