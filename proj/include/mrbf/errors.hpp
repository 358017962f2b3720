#pragma once

#include <stdexcept>
#include <string>

namespace mrbf {

/// Base of every error thrown by the library. Callers that only need to
/// know "this cell failed" catch this; tests match the concrete types.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// A kernel or special function was asked for its value at a pole.
class SingularityError : public DomainError {
 public:
  using DomainError::DomainError;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class OverflowError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Requested (operator, order, dimension) or scheme combination is not built.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class SymmetryError : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

class StructureError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& what, std::size_t pivot)
      : Error(what), pivot_(pivot) {}
  std::size_t pivot_index() const { return pivot_; }

 private:
  std::size_t pivot_;
};

class RankError : public Error {
 public:
  RankError(const std::string& what, std::size_t rank) : Error(what), rank_(rank) {}
  std::size_t numerical_rank() const { return rank_; }

 private:
  std::size_t rank_;
};

class ConditioningError : public Error {
 public:
  ConditioningError(const std::string& what, double cond)
      : Error(what), condition_(cond) {}
  double condition_estimate() const { return condition_; }

 private:
  double condition_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Too few usable rows for a convergence fit.
class FitError : public Error {
 public:
  using Error::Error;
};

}  // namespace mrbf
