#pragma once

#include <stdexcept>
#include <string>

namespace medsamp {

/// Caller violated a documented precondition (bad parameters, malformed config).
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

/// A configuration that is valid but exceeds a cost guard of an exact transform.
class UnsupportedConfiguration : public std::runtime_error {
 public:
  explicit UnsupportedConfiguration(const std::string& what) : std::runtime_error(what) {}
};

/// Linear-algebra or precision failure (residual too large, non-finite result).
class NumericFailure : public std::runtime_error {
 public:
  explicit NumericFailure(const std::string& what) : std::runtime_error(what) {}
};

/// The chain has no path to the optimum from some state.
class StructuralError : public std::runtime_error {
 public:
  explicit StructuralError(const std::string& what) : std::runtime_error(what) {}
};

/// The additive drift bound does not apply (minimum drift is not positive).
class InapplicableBound : public std::domain_error {
 public:
  explicit InapplicableBound(const std::string& what) : std::domain_error(what) {}
};

}  // namespace medsamp
