#include "mrbf/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "mrbf/errors.hpp"
#include "mrbf/specfun.hpp"

namespace mrbf {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Reduced Bessel functions.
//
// Every hierarchy member is built from one of four families R_nu(r), each
// obeying dR_nu/dr = rho * r * R_{nu+1}. That single rule gives exact radial
// derivatives of arbitrary order.

enum class Family {
  Regular,   // s^-nu I_nu(s), s^2 = mu2 r^2 (covers J, I, ber/bei and mu2 = 0)
  K,         // s^-nu K_nu(s), mu2 > 0
  Y,         // s^-nu Y_nu(s), s^2 = -mu2 r^2
  KelvinK,   // s^-nu K_nu(s), mu2 = +-i kappa
  PowerLog,  // not Bessel: terms r^p (ln r)^e
};

bool is_imaginary(cplx z) { return z.real() == 0.0 && z.imag() != 0.0; }
bool is_real(cplx z) { return z.imag() == 0.0; }

cplx regular_series(double nu, cplx mu2, double r) {
  const cplx z = mu2 * (r * r / 4.0);
  cplx term = 1.0 / (std::pow(2.0, nu) * specfun::gamma(nu + 1.0));
  cplx sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= z / (k * (k + nu));
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) return sum;
  }
  throw ConvergenceError("regular kernel series did not converge");
}

cplx reduced_value(Family fam, cplx mu2, double nu, double r) {
  switch (fam) {
    case Family::Regular: {
      if (mu2 == 0.0) return 1.0 / (std::pow(2.0, nu) * specfun::gamma(nu + 1.0));
      if (std::abs(mu2) * r * r <= 4.0) return regular_series(nu, mu2, r);
      if (is_real(mu2)) {
        const double s = std::sqrt(std::fabs(mu2.real())) * r;
        const double v = mu2.real() > 0.0 ? specfun::bessel_i(nu, s) : specfun::bessel_j(nu, s);
        return v / std::pow(s, nu);
      }
      if (is_imaginary(mu2)) {
        const double x = std::sqrt(std::fabs(mu2.imag())) * r;
        cplx v = std::pow(x, -nu) * std::polar(1.0, -0.75 * kPi * nu) * specfun::kelvin_be(nu, x);
        return mu2.imag() > 0.0 ? v : std::conj(v);
      }
      break;
    }
    case Family::K: {
      const double s = std::sqrt(mu2.real()) * r;
      return specfun::bessel_k(nu, s) / std::pow(s, nu);
    }
    case Family::Y: {
      const double s = std::sqrt(-mu2.real()) * r;
      return specfun::bessel_y(nu, s) / std::pow(s, nu);
    }
    case Family::KelvinK: {
      const double x = std::sqrt(std::fabs(mu2.imag())) * r;
      cplx v = std::pow(x, -nu) * std::polar(1.0, 0.25 * kPi * nu) * specfun::kelvin_ke(nu, x);
      return mu2.imag() > 0.0 ? v : std::conj(v);
    }
    case Family::PowerLog:
      break;
  }
  throw CapabilityError("no reduced Bessel function for this parameter");
}

cplx family_rho(Family fam, cplx mu2) {
  switch (fam) {
    case Family::Regular:
    case Family::Y:
      return mu2;
    case Family::K:
    case Family::KelvinK:
      return -mu2;
    case Family::PowerLog:
      break;
  }
  return 0.0;
}

// tau in (del^2 - mu^2)[r^{2j} R_{nu0+j}] = 2 j tau r^{2j-2} R_{nu0+j-1}.
double family_tau(Family fam) {
  return (fam == Family::K || fam == Family::KelvinK) ? -1.0 : 1.0;
}

// ---------------------------------------------------------------------------
// Term algebra.

// Bessel component term: coef * r^power * R_{nu0+index}(r).
// Power-log term:        coef * r^power * (ln r)^index.
struct Term {
  cplx coef;
  double power;
  int index;
};

using TermList = std::vector<Term>;

void merge_into(TermList& out, const Term& t) {
  if (t.coef == 0.0) return;
  for (auto& o : out) {
    if (o.power == t.power && o.index == t.index) {
      o.coef += t.coef;
      return;
    }
  }
  out.push_back(t);
}

TermList differentiate(const TermList& terms, Family fam, cplx rho) {
  TermList out;
  for (const auto& t : terms) {
    if (t.power != 0.0) merge_into(out, {t.coef * t.power, t.power - 1.0, t.index});
    if (fam == Family::PowerLog) {
      if (t.index != 0) merge_into(out, {t.coef * static_cast<double>(t.index), t.power - 1.0, t.index - 1});
    } else if (rho != 0.0) {
      merge_into(out, {t.coef * rho, t.power + 1.0, t.index + 1});
    }
  }
  return out;
}

struct Component {
  Family family = Family::PowerLog;
  cplx mu2 = 0.0;
  double nu0 = 0.0;
  std::array<TermList, 5> jets;  // jets[k] = k-th radial derivative
};

Component make_component(Family fam, cplx mu2, double nu0, TermList terms) {
  Component c;
  c.family = fam;
  c.mu2 = mu2;
  c.nu0 = nu0;
  c.jets[0] = std::move(terms);
  const cplx rho = family_rho(fam, mu2);
  for (int k = 1; k < 5; ++k) c.jets[k] = differentiate(c.jets[k - 1], fam, rho);
  return c;
}

double power_log_at(const Term& t, double r) {
  if (r == 0.0) {
    if (t.power > 0.0) return 0.0;
    if (t.power == 0.0 && t.index == 0) return 1.0;
    throw SingularityError("radial profile is singular at r = 0");
  }
  double v = std::pow(r, t.power);
  if (t.index != 0) v *= std::pow(std::log(r), t.index);
  return v;
}

class TermProfile : public RadialProfile {
 public:
  TermProfile(std::vector<Component> comps, bool singular, double pole, int m,
              std::optional<OperatorSpec> op)
      : comps_(std::move(comps)), singular_(singular), pole_(pole), m_(m), op_(std::move(op)) {}

  RadialJet jet(double r, int max_order) const override {
    if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("radius must be finite and >= 0");
    if (max_order < 0 || max_order > 4) throw DomainError("derivative order must be in [0, 4]");
    RadialJet out;
    for (const auto& c : comps_) {
      if (c.family == Family::PowerLog) {
        for (int k = 0; k <= max_order; ++k) {
          double s = 0.0;
          for (const auto& t : c.jets[k]) s += t.coef.real() * power_log_at(t, r);
          out.d[k] += s;
        }
        continue;
      }
      if (r == 0.0 && c.family != Family::Regular) {
        throw SingularityError("fundamental solution is singular at r = 0");
      }
      std::map<int, cplx> cache;
      auto reduced = [&](int idx) {
        auto it = cache.find(idx);
        if (it != cache.end()) return it->second;
        const cplx v = reduced_value(c.family, c.mu2, c.nu0 + idx, r);
        cache.emplace(idx, v);
        return v;
      };
      for (int k = 0; k <= max_order; ++k) {
        cplx s = 0.0;
        for (const auto& t : c.jets[k]) {
          const double rp = (t.power == 0.0) ? 1.0 : std::pow(r, t.power);
          if (rp == 0.0) continue;
          s += t.coef * rp * reduced(t.index);
        }
        out.d[k] += s.real();
      }
    }
    return out;
  }

  bool singular_at_origin() const override { return singular_; }
  double pole_order() const override { return pole_; }
  int order_m() const override { return m_; }
  const OperatorSpec* operator_spec() const override { return op_ ? &*op_ : nullptr; }

 private:
  std::vector<Component> comps_;
  bool singular_;
  double pole_;
  int m_;
  std::optional<OperatorSpec> op_;
};

// ---------------------------------------------------------------------------
// Hierarchies P_j with (del^2 - mu2) P_j = P_{j-1}.

struct Hierarchy {
  Family family;
  cplx mu2;
  double nu0;
  std::vector<TermList> members;  // members[j] = P_j as terms
};

double factorial(int j) {
  double f = 1.0;
  for (int i = 2; i <= j; ++i) f *= i;
  return f;
}

// Coefficient of r^{-2 nu} in the small-r expansion of R_nu.
cplx leading_coefficient(Family fam, cplx mu2, double nu) {
  switch (fam) {
    case Family::K:
    case Family::KelvinK:
      return specfun::gamma(nu) * std::pow(2.0, nu - 1.0) * std::pow(mu2, -nu);
    case Family::Y:
      return -specfun::gamma(nu) * std::pow(2.0, nu) / kPi * std::pow(-mu2, -nu);
    default:
      break;
  }
  return 0.0;
}

Hierarchy bessel_hierarchy(Family fam, cplx mu2, int dim, cplx c0, int jmax) {
  Hierarchy h{fam, mu2, dim / 2.0 - 1.0, {}};
  const double tau = family_tau(fam);
  std::vector<cplx> raw;
  for (int j = 0; j <= jmax; ++j) raw.push_back(c0 / (std::pow(2.0 * tau, j) * factorial(j)));
  if (dim != 3 || fam == Family::Regular) {
    for (int j = 0; j <= jmax; ++j) h.members.push_back({Term{raw[j], 2.0 * j, j}});
    return h;
  }
  // In 3D every raw member r^{2j} R_{1/2+j} keeps a 1/r term, so it only
  // satisfies the recursion away from the origin. Each member is rebuilt as
  // the previous one shifted up a level plus the multiple of P_0 that
  // cancels the 1/r term (and with it the stray point source).
  std::vector<cplx> lambda;
  for (int j = 0; j <= jmax; ++j) lambda.push_back(raw[j] * leading_coefficient(fam, mu2, h.nu0 + j));
  std::vector<cplx> c{1.0};
  for (int j = 0; j <= jmax; ++j) {
    if (j > 0) {
      c.insert(c.begin(), 0.0);
      cplx inv_r = 0.0;
      for (std::size_t i = 0; i < c.size(); ++i) inv_r += c[i] * lambda[i];
      c[0] -= inv_r / lambda[0];
    }
    TermList t;
    for (std::size_t i = 0; i < c.size(); ++i) merge_into(t, {c[i] * raw[i], 2.0 * i, static_cast<int>(i)});
    h.members.push_back(std::move(t));
  }
  return h;
}

// Fundamental hierarchy of del^2 as r^p (A ln r + B) terms.
Hierarchy laplace_fundamental_hierarchy(int dim, int jmax) {
  Hierarchy h{Family::PowerLog, 0.0, 0.0, {}};
  double p, a, b;
  if (dim == 2) {
    p = 0.0;
    a = 1.0 / (2.0 * kPi);
    b = 0.0;
  } else if (dim == 3) {
    p = -1.0;
    a = 0.0;
    b = -1.0 / (4.0 * kPi);
  } else {
    throw CapabilityError("Laplace fundamental solution only for dim 2 and 3");
  }
  for (int j = 0; j <= jmax; ++j) {
    if (j > 0) {
      const double q = p + 2.0;
      const double den = q * (q + dim - 2.0);
      const double na = a / den;
      const double nb = (b - na * (2.0 * q + dim - 2.0)) / den;
      p = q;
      a = na;
      b = nb;
    }
    TermList t;
    if (a != 0.0) t.push_back({a, p, 1});
    if (b != 0.0) t.push_back({b, p, 0});
    h.members.push_back(std::move(t));
  }
  return h;
}

Hierarchy general_hierarchy(cplx mu2, int dim, int jmax) {
  const double nu0 = dim / 2.0 - 1.0;
  const cplx c0 = std::pow(2.0, nu0) * specfun::gamma(nu0 + 1.0);
  return bessel_hierarchy(Family::Regular, mu2, dim, c0, jmax);
}

Hierarchy fundamental_hierarchy(cplx mu2, int dim, int jmax) {
  if (dim != 2 && dim != 3) throw CapabilityError("fundamental solutions only for dim 2 and 3");
  const double nu0 = dim / 2.0 - 1.0;
  if (mu2 == 0.0) return laplace_fundamental_hierarchy(dim, jmax);
  if (is_real(mu2) && mu2.real() > 0.0) {
    const cplx c0 = -std::pow(mu2.real(), nu0) / std::pow(2.0 * kPi, dim / 2.0);
    return bessel_hierarchy(Family::K, mu2, dim, c0, jmax);
  }
  if (is_real(mu2)) {
    const cplx c0 = 0.25 * std::pow(-mu2.real() / (2.0 * kPi), nu0);
    return bessel_hierarchy(Family::Y, mu2, dim, c0, jmax);
  }
  if (is_imaginary(mu2)) {
    const cplx c0 = -std::pow(mu2, nu0) / std::pow(2.0 * kPi, dim / 2.0);
    return bessel_hierarchy(Family::KelvinK, mu2, dim, c0, jmax);
  }
  throw CapabilityError("no fundamental solution for complex non-imaginary mu^2");
}

Component combine(const Hierarchy& h, const std::vector<cplx>& coefs) {
  TermList terms;
  for (std::size_t j = 0; j < coefs.size(); ++j) {
    for (const auto& t : h.members[j]) merge_into(terms, {t.coef * coefs[j], t.power, t.index});
  }
  return make_component(h.family, h.mu2, h.nu0, std::move(terms));
}

// Radial operator c2 L^2 + c1 L + c0 with L the radial Laplacian.
struct RadialPolynomial {
  double c2 = 0.0;
  double c1 = 0.0;
  double c0 = 0.0;
};

RadialPolynomial radial_polynomial(const OperatorSpec& op) {
  switch (op.kind) {
    case OperatorKind::Laplace:
      return {0.0, 1.0, 0.0};
    case OperatorKind::Helmholtz:
      return {0.0, 1.0, op.gamma * op.gamma};
    case OperatorKind::ConvectionDiffusion: {
      const double mu = mu_parameter(op.diffusivity, op.velocity, op.reaction);
      return {0.0, op.diffusivity, -op.diffusivity * mu * mu};
    }
    case OperatorKind::VibrationPlate:
      return {1.0, 0.0, -op.lambda * op.lambda};
    case OperatorKind::WinklerPlate:
      return {1.0, 0.0, op.kappa * op.kappa};
    case OperatorKind::BurgerPlate:
      return {1.0, -op.mu * op.mu, 0.0};
  }
  return {};
}

// Single factor D (del^2 - mu2).
struct SingleFactor {
  cplx mu2;
  double scale;
};

SingleFactor single_factor(const OperatorSpec& op) {
  switch (op.kind) {
    case OperatorKind::Laplace:
      return {0.0, 1.0};
    case OperatorKind::Helmholtz:
      return {-op.gamma * op.gamma, 1.0};
    case OperatorKind::ConvectionDiffusion: {
      const double mu = mu_parameter(op.diffusivity, op.velocity, op.reaction);
      return {mu * mu, op.diffusivity};
    }
    default:
      break;
  }
  throw CapabilityError("operator is not second order");
}

// (del^2 - mu1^2)(del^2 - mu2^2).
std::pair<cplx, cplx> two_factors(const OperatorSpec& op) {
  switch (op.kind) {
    case OperatorKind::VibrationPlate:
      return {-op.lambda, op.lambda};
    case OperatorKind::WinklerPlate:
      return {cplx(0.0, op.kappa), cplx(0.0, -op.kappa)};
    case OperatorKind::BurgerPlate:
      return {0.0, op.mu * op.mu};
    default:
      break;
  }
  throw CapabilityError("operator is not fourth order");
}

// Coefficients a_{m,j} of u_m = sum_j a_j P_j under R{u_m} = u_{m-1}, where
// R P_j = P_{j-2} + delta P_{j-1} (one part of a two-factor operator).
std::vector<cplx> next_coefficients(const std::vector<cplx>& prev, cplx delta) {
  const std::size_t d = prev.size() - 1;
  std::vector<cplx> a(d + 2, 0.0);
  a[d + 1] = prev[d] / delta;
  for (std::size_t p = d; p-- > 0;) a[p + 1] = (prev[p] - a[p + 2]) / delta;
  a[0] = 0.0;
  return a;
}

void check_order_m(int m) {
  if (m < 0) throw ParameterError("kernel order m must be >= 0");
  if (m > kMaxKernelOrder) {
    std::ostringstream os;
    os << "kernel order m = " << m << " exceeds the supported maximum " << kMaxKernelOrder;
    throw CapabilityError(os.str());
  }
}

void check_profile_dim(const OperatorSpec& op, int m) {
  op.validate();
  if (op.dim < 2) throw CapabilityError("kernel hierarchies need dimension 2 or more");
  if (op.dim > 3 && !(op.kind == OperatorKind::WinklerPlate && m == 0)) {
    throw CapabilityError("dimensions above 3 are only built for the zero-order Winkler kernel");
  }
}

double fundamental_pole(int dim, int m, int factors) {
  return std::max(0.0, dim - 2.0 * factors - 2.0 * m);
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::Laplace: return "laplace";
    case OperatorKind::Helmholtz: return "helmholtz";
    case OperatorKind::ConvectionDiffusion: return "convection_diffusion";
    case OperatorKind::VibrationPlate: return "vibration_plate";
    case OperatorKind::WinklerPlate: return "winkler_plate";
    case OperatorKind::BurgerPlate: return "burger_plate";
  }
  return "unknown";
}

OperatorSpec OperatorSpec::laplace(int dim) {
  OperatorSpec op;
  op.kind = OperatorKind::Laplace;
  op.dim = dim;
  return op;
}

OperatorSpec OperatorSpec::helmholtz(int dim, double gamma) {
  OperatorSpec op;
  op.kind = OperatorKind::Helmholtz;
  op.dim = dim;
  op.gamma = gamma;
  return op;
}

OperatorSpec OperatorSpec::convection_diffusion(int dim, double diffusivity, const Vec3& velocity,
                                                double reaction) {
  OperatorSpec op;
  op.kind = OperatorKind::ConvectionDiffusion;
  op.dim = dim;
  op.diffusivity = diffusivity;
  op.velocity = velocity;
  op.reaction = reaction;
  return op;
}

OperatorSpec OperatorSpec::vibration_plate(int dim, double lambda) {
  OperatorSpec op;
  op.kind = OperatorKind::VibrationPlate;
  op.dim = dim;
  op.lambda = lambda;
  return op;
}

OperatorSpec OperatorSpec::winkler_plate(int dim, double kappa) {
  OperatorSpec op;
  op.kind = OperatorKind::WinklerPlate;
  op.dim = dim;
  op.kappa = kappa;
  return op;
}

OperatorSpec OperatorSpec::burger_plate(int dim, double mu) {
  OperatorSpec op;
  op.kind = OperatorKind::BurgerPlate;
  op.dim = dim;
  op.mu = mu;
  return op;
}

void OperatorSpec::validate() const {
  // 1D is accepted for second-order operators (domain collocation only).
  const int max_dim = kind == OperatorKind::WinklerPlate ? 5 : 3;
  const int min_dim = fourth_order() ? 2 : 1;
  if (dim < min_dim || dim > max_dim) {
    std::ostringstream os;
    os << to_string(kind) << " is not built for dimension " << dim;
    throw CapabilityError(os.str());
  }
  auto positive = [](double v, const char* name) {
    if (!std::isfinite(v) || v <= 0.0) throw ParameterError(std::string(name) + " must be finite and > 0");
  };
  switch (kind) {
    case OperatorKind::Laplace:
      break;
    case OperatorKind::Helmholtz:
      positive(gamma, "gamma");
      break;
    case OperatorKind::ConvectionDiffusion:
      positive(diffusivity, "diffusivity");
      if (!std::isfinite(reaction) || reaction < 0.0) throw ParameterError("reaction must be finite and >= 0");
      for (int i = 0; i < 3; ++i) {
        if (!std::isfinite(velocity[i])) throw ParameterError("velocity must be finite");
        if (i >= dim && velocity[i] != 0.0) throw ParameterError("velocity has components beyond dim");
      }
      break;
    case OperatorKind::VibrationPlate:
      positive(lambda, "lambda");
      break;
    case OperatorKind::WinklerPlate:
      positive(kappa, "kappa");
      break;
    case OperatorKind::BurgerPlate:
      positive(mu, "mu");
      break;
  }
}

bool OperatorSpec::fourth_order() const {
  return kind == OperatorKind::VibrationPlate || kind == OperatorKind::WinklerPlate ||
         kind == OperatorKind::BurgerPlate;
}

bool OperatorSpec::self_adjoint() const {
  return kind != OperatorKind::ConvectionDiffusion || norm(velocity) == 0.0;
}

Vec3 OperatorSpec::convective_shift() const {
  if (kind != OperatorKind::ConvectionDiffusion) return {0.0, 0.0, 0.0};
  return (1.0 / (2.0 * diffusivity)) * velocity;
}

double mu_parameter(double diffusivity, const Vec3& velocity, double reaction) {
  if (!std::isfinite(diffusivity) || diffusivity <= 0.0) throw ParameterError("diffusivity must be > 0");
  if (!std::isfinite(reaction) || reaction < 0.0) throw ParameterError("reaction must be >= 0");
  const double w = norm(velocity) / (2.0 * diffusivity);
  return std::sqrt(w * w + reaction / diffusivity);
}

double q_coefficient(int m, double mu) {
  if (m < 0) throw ParameterError("q_coefficient needs m >= 0");
  if (m > 0 && mu == 0.0) throw DomainError("q_coefficient undefined for mu = 0");
  double q = 1.0;
  for (int k = 1; k <= m; ++k) q /= 2.0 * k * mu * mu;
  return q;
}

ProfilePtr general_solution(const OperatorSpec& op, int m) {
  check_order_m(m);
  check_profile_dim(op, m);
  if (!op.fourth_order()) {
    const auto f = single_factor(op);
    const Hierarchy h = general_hierarchy(f.mu2, op.dim, m);
    std::vector<cplx> coefs(m + 1, 0.0);
    coefs[m] = 1.0 / std::pow(f.scale, m);
    return std::make_shared<TermProfile>(std::vector<Component>{combine(h, coefs)}, false, 0.0, m, op);
  }
  const auto [mu1, mu2] = two_factors(op);
  const cplx delta = mu1 - mu2;
  const bool winkler = op.kind == OperatorKind::WinklerPlate;
  std::vector<cplx> a{winkler ? cplx(0.5, -0.5) : cplx(0.5)};
  std::vector<cplx> b{winkler ? std::conj(a[0]) : cplx(0.5)};
  for (int k = 1; k <= m; ++k) {
    a = next_coefficients(a, delta);
    b = next_coefficients(b, -delta);
  }
  const Hierarchy hp = general_hierarchy(mu1, op.dim, m);
  if (winkler) {
    // The second part is the complex conjugate of the first.
    for (auto& c : a) c *= 2.0;
    return std::make_shared<TermProfile>(std::vector<Component>{combine(hp, a)}, false, 0.0, m, op);
  }
  const Hierarchy hq = general_hierarchy(mu2, op.dim, m);
  return std::make_shared<TermProfile>(std::vector<Component>{combine(hp, a), combine(hq, b)}, false,
                                       0.0, m, op);
}

ProfilePtr fundamental_solution(const OperatorSpec& op, int m) {
  check_order_m(m);
  check_profile_dim(op, m);
  if (op.dim > 3) throw CapabilityError("fundamental solutions only for dim 2 and 3");
  if (!op.fourth_order()) {
    const auto f = single_factor(op);
    const Hierarchy h = fundamental_hierarchy(f.mu2, op.dim, m);
    std::vector<cplx> coefs(m + 1, 0.0);
    coefs[m] = 1.0 / std::pow(f.scale, m + 1);
    return std::make_shared<TermProfile>(std::vector<Component>{combine(h, coefs)}, true,
                                         fundamental_pole(op.dim, m, 1), m, op);
  }
  const auto [mu1, mu2] = two_factors(op);
  const cplx delta = mu1 - mu2;
  std::vector<cplx> a{1.0 / delta};
  std::vector<cplx> b{-1.0 / delta};
  for (int k = 1; k <= m; ++k) {
    a = next_coefficients(a, delta);
    b = next_coefficients(b, -delta);
    // The Dirac masses produced by the j = 0, 1 members must cancel; the
    // free j = 0 weight (a multiple of u_0) takes care of that.
    const cplx t = -(a[1] + b[1]) / delta;
    a[0] = t;
    b[0] = -t;
  }
  const double pole = fundamental_pole(op.dim, m, 2);
  const Hierarchy hp = fundamental_hierarchy(mu1, op.dim, m);
  if (op.kind == OperatorKind::WinklerPlate) {
    for (auto& c : a) c *= 2.0;
    return std::make_shared<TermProfile>(std::vector<Component>{combine(hp, a)}, true, pole, m, op);
  }
  const Hierarchy hq = fundamental_hierarchy(mu2, op.dim, m);
  return std::make_shared<TermProfile>(std::vector<Component>{combine(hp, a), combine(hq, b)}, true,
                                       pole, m, op);
}

double apply_operator(const OperatorSpec& op, const RadialProfile& profile, double r) {
  op.validate();
  const RadialPolynomial p = radial_polynomial(op);
  const int order = p.c2 != 0.0 ? 4 : 2;
  const RadialJet j = profile.jet(r, order);
  const double n = op.dim;
  double lap, bilap = 0.0;
  if (r == 0.0) {
    lap = n * j.d[2];
    bilap = n * (n + 2.0) / 3.0 * j.d[4];
  } else {
    lap = j.d[2] + (n - 1.0) * j.d[1] / r;
    bilap = j.d[4] + 2.0 * (n - 1.0) * j.d[3] / r + (n - 1.0) * (n - 3.0) * (j.d[2] / (r * r) - j.d[1] / (r * r * r));
  }
  return p.c2 * bilap + p.c1 * lap + p.c0 * j.d[0];
}

// ---------------------------------------------------------------------------
// Primitive RBFs and the kernel-RBF strategies.

ProfilePtr power_rbf(double k) {
  if (!std::isfinite(k)) throw ParameterError("power must be finite");
  auto c = make_component(Family::PowerLog, 0.0, 0.0, {Term{1.0, k, 0}});
  return std::make_shared<TermProfile>(std::vector<Component>{c}, k < 0.0, std::max(0.0, -k), 0,
                                       std::nullopt);
}

ProfilePtr log_rbf() {
  auto c = make_component(Family::PowerLog, 0.0, 0.0, {Term{1.0, 0.0, 1}});
  return std::make_shared<TermProfile>(std::vector<Component>{c}, true, 0.0, 0, std::nullopt);
}

ProfilePtr thin_plate_spline(int m) {
  if (m < 1) throw ParameterError("thin plate spline needs m >= 1");
  auto c = make_component(Family::PowerLog, 0.0, 0.0, {Term{1.0, 2.0 * m, 1}});
  return std::make_shared<TermProfile>(std::vector<Component>{c}, false, 0.0, 0, std::nullopt);
}

KernelRbf::KernelRbf(ProfilePtr base, KernelRbfStrategy strategy)
    : base_(std::move(base)), strategy_(strategy) {
  if (!base_) throw ParameterError("kernel RBF needs a base profile");
  switch (strategy_.kind) {
    case KernelStrategy::None:
      break;
    case KernelStrategy::AugmentEvenPower:
      if (strategy_.m < 1) throw ParameterError("augmentation power m must be >= 1");
      break;
    case KernelStrategy::ShapeShift:
      if (!std::isfinite(strategy_.c) || strategy_.c <= 0.0) throw ParameterError("shape parameter must be > 0");
      break;
  }
}

RadialJet KernelRbf::jet(double r, int max_order) const {
  switch (strategy_.kind) {
    case KernelStrategy::None:
      return base_->jet(r, max_order);
    case KernelStrategy::AugmentEvenPower: {
      if (r == 0.0 && base_->singular_at_origin()) {
        throw SingularityError("augmented kernel evaluated at its singular point");
      }
      const RadialJet b = base_->jet(r, max_order);
      const int p = 2 * strategy_.m;
      // Derivatives of r^p.
      std::array<double, 5> w{};
      double fall = 1.0;
      for (int i = 0; i <= max_order; ++i) {
        if (i > p) break;
        w[i] = fall * ((p - i == 0) ? 1.0 : std::pow(r, p - i));
        fall *= (p - i);
      }
      static constexpr int kBinom[5][5] = {{1}, {1, 1}, {1, 2, 1}, {1, 3, 3, 1}, {1, 4, 6, 4, 1}};
      RadialJet out;
      for (int k = 0; k <= max_order; ++k) {
        for (int i = 0; i <= k; ++i) out.d[k] += kBinom[k][i] * w[i] * b.d[k - i];
      }
      return out;
    }
    case KernelStrategy::ShapeShift: {
      const double c2 = strategy_.c * strategy_.c;
      const double q = std::sqrt(r * r + c2);
      const RadialJet b = base_->jet(q, max_order);
      const double q1 = r / q;
      const double q2 = c2 / (q * q * q);
      const double q5 = std::pow(q, 5);
      const double q3 = -3.0 * c2 * r / q5;
      const double q4 = -3.0 * c2 / q5 + 15.0 * c2 * r * r / (q5 * q * q);
      RadialJet out;
      out.d[0] = b.d[0];
      out.d[1] = b.d[1] * q1;
      out.d[2] = b.d[2] * q1 * q1 + b.d[1] * q2;
      out.d[3] = b.d[3] * q1 * q1 * q1 + 3.0 * b.d[2] * q1 * q2 + b.d[1] * q3;
      out.d[4] = b.d[4] * std::pow(q1, 4) + 6.0 * b.d[3] * q1 * q1 * q2 +
                 b.d[2] * (3.0 * q2 * q2 + 4.0 * q1 * q3) + b.d[1] * q4;
      for (int k = max_order + 1; k < 5; ++k) out.d[k] = 0.0;
      return out;
    }
  }
  return {};
}

bool KernelRbf::singular_at_origin() const {
  if (strategy_.kind == KernelStrategy::ShapeShift) return false;
  return base_->singular_at_origin();
}

double KernelRbf::pole_order() const {
  switch (strategy_.kind) {
    case KernelStrategy::None:
      return base_->pole_order();
    case KernelStrategy::AugmentEvenPower:
      return std::max(0.0, base_->pole_order() - 2.0 * strategy_.m);
    case KernelStrategy::ShapeShift:
      return 0.0;
  }
  return 0.0;
}

std::shared_ptr<const KernelRbf> make_kernel_rbf(ProfilePtr base, KernelRbfStrategy strategy) {
  return std::make_shared<const KernelRbf>(std::move(base), strategy);
}

std::shared_ptr<const KernelRbf> multiquadric(double c) {
  return make_kernel_rbf(power_rbf(1.0), KernelRbfStrategy::shape_shift(c));
}

// ---------------------------------------------------------------------------
// Point kernels.

PointKernel::PointKernel(ProfilePtr profile, const OperatorSpec& op) : profile_(std::move(profile)) {
  if (!profile_) throw ParameterError("point kernel needs a profile");
  shift_ = op.convective_shift();
  has_shift_ = norm(shift_) != 0.0;
}

KernelJet PointKernel::jet(const Vec3& x, const Vec3& y, int order) const {
  if (order < 0 || order > 2) throw DomainError("point kernel jet order must be in [0, 2]");
  const Vec3 d = x - y;
  const double r = norm(d);
  const RadialJet rj = profile_->jet(r, order);
  const double e = has_shift_ ? std::exp(dot(shift_, d)) : 1.0;
  KernelJet out;
  out.value = e * rj.d[0];
  if (order == 0) return out;

  Vec3 u{0.0, 0.0, 0.0};
  if (r > 0.0) u = (1.0 / r) * d;
  const Vec3& w = shift_;
  for (int i = 0; i < 3; ++i) out.grad[i] = e * (w[i] * rj.d[0] + rj.d[1] * u[i]);
  if (order == 1) return out;

  // Off the origin phi'/r carries the tangential curvature; at the origin a
  // smooth even profile has phi'/r -> phi''.
  const double tang = r > 0.0 ? rj.d[1] / r : rj.d[2];
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) {
      const double delta = i == k ? 1.0 : 0.0;
      out.hess[i][k] = e * (w[i] * w[k] * rj.d[0] + rj.d[1] * (w[i] * u[k] + u[i] * w[k]) +
                            rj.d[2] * u[i] * u[k] + tang * (delta - u[i] * u[k]));
    }
  }
  return out;
}

double evaluate_kernel(const RadialProfile& profile, const Vec3& x, const Vec3& y,
                       const OperatorSpec& op) {
  const Vec3 w = op.convective_shift();
  const Vec3 d = x - y;
  return std::exp(dot(w, d)) * profile.evaluate(norm(d));
}

namespace {

// Non-owning wrapper so the free functions can reuse PointKernel.
PointKernel borrowed(const RadialProfile& profile, const OperatorSpec& op) {
  return PointKernel(ProfilePtr(&profile, [](const RadialProfile*) {}), op);
}

}  // namespace

double normal_derivative(const RadialProfile& profile, const Vec3& x, const Vec3& y,
                         const Vec3& n_x, const OperatorSpec& op) {
  return dot(borrowed(profile, op).jet(x, y, 1).grad, n_x);
}

double binormal_second_derivative(const RadialProfile& profile, const Vec3& x, const Vec3& y,
                                  const Vec3& n_x, const Vec3& n_y, const OperatorSpec& op) {
  // d^2/dx dy = -d^2/dx^2 for a function of x - y.
  return -bilinear(n_x, borrowed(profile, op).jet(x, y, 2).hess, n_y);
}

RadialCalculus radial_calculus(const RadialProfile& profile, const Vec3& d, int dim, int max_order) {
  if (max_order < 0 || max_order > 4) throw DomainError("radial calculus order must be in [0, 4]");
  const double r = norm(d);
  const RadialJet j = profile.jet(r, max_order);
  const double n = dim;
  RadialCalculus out;
  out.value = j.d[0];
  if (max_order == 0) return out;
  if (r == 0.0) {
    // Limits for a smooth even profile.
    for (int i = 0; i < dim; ++i) out.hess[i][i] = j.d[2];
    out.laplacian = n * j.d[2];
    out.bilaplacian = n * (n + 2.0) / 3.0 * j.d[4];
    return out;
  }
  const Vec3 u = (1.0 / r) * d;
  out.grad = j.d[1] * u;
  if (max_order == 1) return out;
  const double tang = j.d[1] / r;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) {
      const double delta = (i == k && i < dim) ? 1.0 : 0.0;
      out.hess[i][k] = j.d[2] * u[i] * u[k] + tang * (delta - u[i] * u[k]);
    }
  }
  out.laplacian = j.d[2] + (n - 1.0) * tang;
  if (max_order < 3) return out;
  const double glap = j.d[3] + (n - 1.0) * (j.d[2] / r - j.d[1] / (r * r));
  out.grad_laplacian = glap * u;
  if (max_order < 4) return out;
  out.bilaplacian = j.d[4] + 2.0 * (n - 1.0) * j.d[3] / r +
                    (n - 1.0) * (n - 3.0) * (j.d[2] / (r * r) - j.d[1] / (r * r * r));
  return out;
}

}  // namespace mrbf
