#pragma once

// Closed-form test problems: exact solutions, forcings and the operator
// powers of the forcing needed by the boundary particle method.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mrbf/geometry.hpp"
#include "mrbf/solvers.hpp"

namespace mrbf {

/// Finite sums of c * x^a y^b z^c * T1(x) T2(y) T3(z) with T in {1, sin, cos}.
/// Closed under differentiation, so constant-coefficient second-order
/// operators can be applied exactly.
class TrigPolynomial {
 public:
  enum Trig : int { One = 0, Sin = 1, Cos = 2 };
  struct Key {
    std::array<int, 3> power{};
    std::array<int, 3> trig{};
    auto operator<=>(const Key&) const = default;
  };

  TrigPolynomial() = default;
  static TrigPolynomial term(double coef, std::array<int, 3> power, std::array<int, 3> trig);

  TrigPolynomial& operator+=(const TrigPolynomial& o);
  TrigPolynomial operator+(const TrigPolynomial& o) const;
  TrigPolynomial operator*(double s) const;

  TrigPolynomial derivative(int axis) const;
  TrigPolynomial laplacian(int dim) const;
  /// a del^2 + b . grad + c of the operator (second order only).
  TrigPolynomial apply(const OperatorSpec& op) const;

  double value(const Vec3& x) const;
  Vec3 gradient(const Vec3& x) const;
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  /// Value, gradient and laplacian callbacks sharing this polynomial.
  SmoothField field(int dim) const;

 private:
  std::map<Key, double> terms_;
};

struct ProblemParams {
  std::optional<double> gamma;  // helmholtz2d_inhomog default 2; helmholtz3d_homog default sqrt(3)
  double sigma = 1.0;           // convdiff3d
  int powers = kMaxKernelOrder;  // number of R^k{f} callbacks to build
};

/// Tags: helmholtz2d_inhomog, helmholtz3d_homog, convdiff3d (or
/// "convdiff3d(<sigma>)"), plus the manufactured poisson2d, helmholtz2d_trig
/// and jump1d. Throws ConfigError for an unknown tag.
BoundaryValueProblem named_problem(const std::string& tag, const ProblemParams& params = {});

std::vector<std::string> named_problem_tags();

/// Largest |R{u} - f| of the exact solution over `count` random material
/// points of `region`.
double problem_residual(const BoundaryValueProblem& bvp, const Region& region, int count = 10,
                        std::uint64_t seed = 1);

/// Throws ConfigError when problem_residual exceeds `tol`.
void validate_problem(const BoundaryValueProblem& bvp, const Region& region, double tol = 1e-8,
                      std::uint64_t seed = 1);

}  // namespace mrbf
