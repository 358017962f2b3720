#pragma once

// PDE operators, their high-order general/fundamental solutions, kernel-RBF
// constructions and the radial calculus shared by all collocation schemes.

#include <array>
#include <memory>
#include <string>

#include "mrbf/vec.hpp"

namespace mrbf {

enum class OperatorKind {
  Laplace,
  Helmholtz,            // del^2 u + gamma^2 u
  ConvectionDiffusion,  // D del^2 u - v . grad u - kappa u
  VibrationPlate,       // del^4 u - lambda^2 u
  WinklerPlate,         // del^4 u + kappa^2 u
  BurgerPlate,          // del^4 u - mu^2 del^2 u
};

std::string to_string(OperatorKind kind);

struct OperatorSpec {
  OperatorKind kind = OperatorKind::Laplace;
  int dim = 2;
  double gamma = 0.0;        // Helmholtz wavenumber
  double diffusivity = 1.0;  // D
  Vec3 velocity{};           // v
  double reaction = 0.0;     // kappa (convection-diffusion)
  double lambda = 0.0;       // vibration plate
  double kappa = 0.0;        // Winkler foundation
  double mu = 0.0;           // Burger plate

  static OperatorSpec laplace(int dim);
  static OperatorSpec helmholtz(int dim, double gamma);
  static OperatorSpec convection_diffusion(int dim, double diffusivity, const Vec3& velocity,
                                           double reaction);
  static OperatorSpec vibration_plate(int dim, double lambda);
  static OperatorSpec winkler_plate(int dim, double kappa);
  static OperatorSpec burger_plate(int dim, double mu);

  /// Throws ParameterError on invalid physical parameters and
  /// CapabilityError on an unsupported dimension.
  void validate() const;

  bool fourth_order() const;
  /// True when the operator has no first-order (convective) part.
  bool self_adjoint() const;
  /// w = v / (2D) for convection-diffusion, zero otherwise. The kernels of
  /// that operator carry the factor exp(w . (x - y)).
  Vec3 convective_shift() const;
};

/// mu = sqrt((|v| / 2D)^2 + kappa / D).
double mu_parameter(double diffusivity, const Vec3& velocity, double reaction);

/// Q_0 = 1, Q_m = Q_{m-1} / (2 m mu^2).
double q_coefficient(int m, double mu);

inline constexpr int kMaxKernelOrder = 8;

/// d[k] is the k-th radial derivative, k = 0..4.
struct RadialJet {
  std::array<double, 5> d{};
};

/// A radial function phi(r) together with its radial derivatives.
class RadialProfile {
 public:
  virtual ~RadialProfile() = default;

  /// Derivatives up to `max_order` (<= 4); higher entries are left 0.
  virtual RadialJet jet(double r, int max_order) const = 0;
  virtual bool singular_at_origin() const = 0;
  /// phi ~ r^{-p} near the origin (0 for logarithmic or no singularity).
  virtual double pole_order() const { return 0.0; }
  virtual int order_m() const { return 0; }
  virtual const OperatorSpec* operator_spec() const { return nullptr; }

  double evaluate(double r) const { return jet(r, 0).d[0]; }
  double d_dr(double r) const { return jet(r, 1).d[1]; }
  double d2_dr2(double r) const { return jet(r, 2).d[2]; }
};

using ProfilePtr = std::shared_ptr<const RadialProfile>;

/// m-th order nonsingular general solution, normalized so that
/// R{u_m} = u_{m-1} and u_0(0) = 1. The convective factor of
/// convection-diffusion is not part of the radial profile.
ProfilePtr general_solution(const OperatorSpec& op, int m);

/// m-th order fundamental solution with R{u_0} = delta and R{u_m} = u_{m-1}.
ProfilePtr fundamental_solution(const OperatorSpec& op, int m);

/// Radial part of the operator applied to a profile. For convection-diffusion
/// this is D (del^2 - mu^2), the action on exp(w . d) phi(r) with the
/// exponential divided out.
double apply_operator(const OperatorSpec& op, const RadialProfile& profile, double r);

// Kernel-RBF constructions.

enum class KernelStrategy { None, AugmentEvenPower, ShapeShift };

struct KernelRbfStrategy {
  KernelStrategy kind = KernelStrategy::None;
  int m = 0;       // r^{2m} augmentation
  double c = 0.0;  // shape parameter of r -> sqrt(r^2 + c^2)

  static KernelRbfStrategy none() { return {}; }
  static KernelRbfStrategy augment(int m) { return {KernelStrategy::AugmentEvenPower, m, 0.0}; }
  static KernelRbfStrategy shape_shift(double c) { return {KernelStrategy::ShapeShift, 0, c}; }
};

/// phi(r) = r^k.
ProfilePtr power_rbf(double k);
/// phi(r) = ln r.
ProfilePtr log_rbf();
/// Thin plate spline r^{2m} ln r.
ProfilePtr thin_plate_spline(int m);

class KernelRbf : public RadialProfile {
 public:
  KernelRbf(ProfilePtr base, KernelRbfStrategy strategy);

  RadialJet jet(double r, int max_order) const override;
  bool singular_at_origin() const override;
  double pole_order() const override;
  int order_m() const override { return base_->order_m(); }
  const OperatorSpec* operator_spec() const override { return base_->operator_spec(); }

  const ProfilePtr& base() const { return base_; }
  const KernelRbfStrategy& strategy() const { return strategy_; }

 private:
  ProfilePtr base_;
  KernelRbfStrategy strategy_;
};

std::shared_ptr<const KernelRbf> make_kernel_rbf(ProfilePtr base, KernelRbfStrategy strategy);

/// Multiquadric sqrt(r^2 + c^2), i.e. the shape shift applied to r.
std::shared_ptr<const KernelRbf> multiquadric(double c);

// Point-pair kernels.

struct KernelJet {
  double value = 0.0;
  Vec3 grad{};
  Mat3 hess{};
};

/// K(x, y) = exp(w . (x - y)) phi(|x - y|); derivatives are taken with
/// respect to x (d/dy = -d/dx by translation invariance).
class PointKernel {
 public:
  PointKernel(ProfilePtr profile, const OperatorSpec& op);

  KernelJet jet(const Vec3& x, const Vec3& y, int order) const;
  double value(const Vec3& x, const Vec3& y) const { return jet(x, y, 0).value; }

  const RadialProfile& profile() const { return *profile_; }
  const ProfilePtr& profile_ptr() const { return profile_; }

 private:
  ProfilePtr profile_;
  Vec3 shift_{};
  bool has_shift_ = false;
};

double evaluate_kernel(const RadialProfile& profile, const Vec3& x, const Vec3& y,
                       const OperatorSpec& op);

/// Derivative of the kernel with respect to x along n_x.
double normal_derivative(const RadialProfile& profile, const Vec3& x, const Vec3& y,
                         const Vec3& n_x, const OperatorSpec& op);

/// n_x^T (d^2 K / dx dy) n_y, the mixed response/source normal derivative.
double binormal_second_derivative(const RadialProfile& profile, const Vec3& x, const Vec3& y,
                                  const Vec3& n_x, const Vec3& n_y, const OperatorSpec& op);

/// Cartesian derivatives of a plain radial function phi(|d|) in `dim`
/// dimensions, with the smooth r -> 0 limits.
struct RadialCalculus {
  double value = 0.0;
  Vec3 grad{};
  Mat3 hess{};
  double laplacian = 0.0;
  Vec3 grad_laplacian{};
  double bilaplacian = 0.0;
};

RadialCalculus radial_calculus(const RadialProfile& profile, const Vec3& d, int dim,
                               int max_order = 4);

}  // namespace mrbf
