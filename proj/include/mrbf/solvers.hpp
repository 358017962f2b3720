#pragma once

// Collocation schemes: boundary knot (BKM), boundary particle (BPM), Kansa,
// modified Kansa (MKM) and least-squares collocation (LSRCM), plus the
// dual-reciprocity particular solution used by BKM.

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "mrbf/geometry.hpp"
#include "mrbf/kernels.hpp"
#include "mrbf/linalg.hpp"
#include "mrbf/vec.hpp"

namespace mrbf {

using ScalarField = std::function<double(const Vec3&)>;
using VectorField = std::function<Vec3(const Vec3&)>;

/// A scalar field with an optional gradient (needed wherever Neumann data
/// has to be derived from it).
struct SmoothField {
  ScalarField value;
  VectorField gradient;
  ScalarField laplacian;  // optional; lets named problems be checked exactly

  explicit operator bool() const { return static_cast<bool>(value); }
  double operator()(const Vec3& x) const { return value(x); }
  /// Throws ParameterError when no gradient was supplied.
  double normal_derivative(const Vec3& x, const Vec3& n) const;
};

struct BoundaryValueProblem {
  OperatorSpec op;
  SmoothField forcing;  // f; empty for a homogeneous problem
  ScalarField dirichlet;
  std::function<double(const Vec3& x, const Vec3& n)> neumann;
  /// operator_powers_of_f[k - 1] = R^k{f}. BPM with truncation M uses k < M.
  std::vector<SmoothField> operator_powers_of_f;
  SmoothField exact;  // optional

  /// Dirichlet, Neumann and exact data all taken from one closed form.
  static BoundaryValueProblem from_exact(const OperatorSpec& op, SmoothField exact,
                                         SmoothField forcing = {});
};

enum class Scheme { BKM, BPM, Kansa, MKM, LSRCM };

std::string to_string(Scheme s);

/// u_p = sum_k c_k K_p(x, x_k), where K_p is the radial pre-image of the
/// interpolation basis (times the convective factor for convection-diffusion).
class ParticularSolution {
 public:
  double value(const Vec3& x) const;
  Vec3 gradient(const Vec3& x) const;
  double normal_derivative(const Vec3& x, const Vec3& n) const { return dot(gradient(x), n); }
  /// The interpolant of f whose exact pre-image this is.
  double forcing_interpolant(const Vec3& x) const;

  const std::vector<Vec3>& centers() const { return centers_; }
  const Vector& coefficients() const { return coefficients_; }
  double condition_estimate() const { return condition_; }
  const ProfilePtr& pre_image() const { return pre_image_; }
  bool zero() const { return coefficients_.empty(); }

 private:
  friend std::shared_ptr<const ParticularSolution> make_particular(
      const OperatorSpec&, std::vector<Vec3>, Vector, ProfilePtr, ProfilePtr, double);
  OperatorSpec op_;
  std::vector<Vec3> centers_;
  Vector coefficients_;
  ProfilePtr basis_;
  ProfilePtr pre_image_;
  double condition_ = 1.0;
};

using ParticularPtr = std::shared_ptr<const ParticularSolution>;

struct DrmOptions {
  double step = 1e-3;  // radial ODE step
  double radius = 0.0;  // table extent; 0 picks 1.25 x the cloud's bounding-box diagonal
};

/// Interpolates f at every node of `cloud` with `basis` and inverts the
/// operator radially. Returns an empty (zero) particular solution when the
/// problem has no forcing. Second-order operators only.
ParticularPtr drm_particular_solution(const BoundaryValueProblem& bvp, const NodeCloud& cloud,
                                      const ProfilePtr& basis, const DrmOptions& options = {});

/// Radial pre-image Phi of `basis` with D (Phi'' + (n - 1) Phi' / r + s Phi) = phi
/// and Phi(0) = Phi'(0) = 0, tabulated on [0, radius].
ProfilePtr radial_pre_image(const OperatorSpec& op, const ProfilePtr& basis, double radius,
                            double step = 1e-3);

class Solution {
 public:
  Scheme scheme = Scheme::BKM;
  /// BKM: {lambda, interior u}; BPM: {beta^0, ..., beta^M};
  /// Kansa and LSRCM: {c}; MKM: {alpha, beta}.
  std::vector<Vector> coefficients;
  ParticularPtr particular;
  double condition_estimate = std::numeric_limits<double>::quiet_NaN();
  int factorizations = 0;
  Structure structure = Structure::General;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t rank = 0;  // numerical rank when a truncated solve was used, else cols

  double evaluate(const Vec3& x) const { return field_(x); }
  std::vector<double> evaluate(const std::vector<Vec3>& points) const;
  void set_field(ScalarField f) { field_ = std::move(f); }

 private:
  ScalarField field_;
};

struct BkmOptions {
  int order = 0;                 // kernel order m of u_m^#
  ProfilePtr drm_basis;          // default: multiquadric with c = 1
  DrmOptions drm;
  ParticularPtr particular;      // precomputed u_p (skips the DRM step)
  bool exploit_structure = true;
  double pivot_tolerance = 0.0;  // boundary kernel matrices are legitimately near-singular
};

Solution bkm_solve(const BoundaryValueProblem& bvp, const NodeCloud& cloud, const BkmOptions& options = {});

enum class LevelSolver { LU, TruncatedSvd };

struct BpmOptions {
  int truncation = 4;  // M
  bool reuse_factorization = true;
  /// The level matrix is nearly singular for smooth kernels; LU solutions
  /// pick up large null-space components that the higher levels amplify.
  LevelSolver solver = LevelSolver::TruncatedSvd;
  double rank_tolerance = 1e-10;  // relative singular value cut-off (SVD only)
  bool exploit_structure = true;  // LU only
  double pivot_tolerance = 0.0;   // LU only
};

/// Uses only the boundary nodes of `cloud`.
Solution bpm_solve(const BoundaryValueProblem& bvp, const NodeCloud& cloud, const BpmOptions& options = {});

struct CollocationOptions {
  bool exploit_structure = true;
  double pivot_tolerance = kDefaultPivotTolerance;
};

Solution kansa_solve(const BoundaryValueProblem& bvp, const NodeCloud& cloud, const ProfilePtr& rbf,
                     const CollocationOptions& options = {});

Solution mkm_solve(const BoundaryValueProblem& bvp, const NodeCloud& cloud, const ProfilePtr& rbf,
                   const CollocationOptions& options = {});

/// The square MKM system, exposed for symmetry checks.
Matrix mkm_matrix(const OperatorSpec& op, const NodeCloud& cloud, const RadialProfile& rbf);

struct LsrcmOptions {
  double rank_tolerance = -1.0;  // see least_squares_solve
  /// Multiplier on the (unit-normalised) boundary rows. Negative picks
  /// sqrt(#PDE rows / #boundary rows). Has no effect on a square system.
  double boundary_weight = -1.0;
};

/// Rows: PDE at interior field nodes, boundary conditions at boundary field
/// nodes; columns: rbf centred at `sources`. Rows are scaled to unit norm
/// before the least-squares solve.
Solution lsrcm_solve(const BoundaryValueProblem& bvp, const NodeCloud& field_nodes,
                     const std::vector<Vec3>& sources, const ProfilePtr& rbf, const LsrcmOptions& options = {});

/// R{u} - f at x from the closed form of `u` (value, gradient and
/// laplacian required). Second-order operators only.
double operator_residual(const OperatorSpec& op, const SmoothField& u, const SmoothField& f, const Vec3& x);

/// sqrt(sum (u - u_exact)^2 / sum u_exact^2) over the checkpoints.
double l2_relative_error(const Solution& solution, const ScalarField& exact, const std::vector<Vec3>& checkpoints);
double l2_relative_error(const std::vector<double>& computed, const std::vector<double>& exact);

}  // namespace mrbf
