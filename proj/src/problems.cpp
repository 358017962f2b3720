#include "mrbf/problems.hpp"

#include <cmath>
#include <cstdlib>
#include <memory>
#include <random>

#include "mrbf/errors.hpp"

namespace mrbf {

TrigPolynomial TrigPolynomial::term(double coef, std::array<int, 3> power, std::array<int, 3> trig) {
  TrigPolynomial p;
  if (coef != 0.0) p.terms_[Key{power, trig}] = coef;
  return p;
}

TrigPolynomial& TrigPolynomial::operator+=(const TrigPolynomial& o) {
  for (const auto& [k, c] : o.terms_) {
    const double v = (terms_[k] += c);
    if (v == 0.0) terms_.erase(k);
  }
  return *this;
}

TrigPolynomial TrigPolynomial::operator+(const TrigPolynomial& o) const {
  TrigPolynomial r = *this;
  r += o;
  return r;
}

TrigPolynomial TrigPolynomial::operator*(double s) const {
  TrigPolynomial r;
  if (s == 0.0) return r;
  for (const auto& [k, c] : terms_) r.terms_[k] = c * s;
  return r;
}

TrigPolynomial TrigPolynomial::derivative(int axis) const {
  TrigPolynomial r;
  for (const auto& [k, c] : terms_) {
    const int p = k.power[axis];
    if (p > 0) {
      Key k2 = k;
      k2.power[axis] = p - 1;
      r += term(c * p, k2.power, k2.trig);
    }
    const int t = k.trig[axis];
    if (t == One) continue;
    Key k2 = k;
    k2.trig[axis] = t == Sin ? Cos : Sin;
    r += term(t == Sin ? c : -c, k2.power, k2.trig);
  }
  return r;
}

TrigPolynomial TrigPolynomial::laplacian(int dim) const {
  TrigPolynomial r;
  for (int i = 0; i < dim; ++i) r += derivative(i).derivative(i);
  return r;
}

TrigPolynomial TrigPolynomial::apply(const OperatorSpec& op) const {
  switch (op.kind) {
    case OperatorKind::Laplace: return laplacian(op.dim);
    case OperatorKind::Helmholtz: return laplacian(op.dim) + *this * (op.gamma * op.gamma);
    case OperatorKind::ConvectionDiffusion: {
      TrigPolynomial r = laplacian(op.dim) * op.diffusivity + *this * (-op.reaction);
      for (int i = 0; i < op.dim; ++i) r += derivative(i) * (-op.velocity[i]);
      return r;
    }
    default: throw CapabilityError("symbolic operator application is limited to second-order operators");
  }
}

double TrigPolynomial::value(const Vec3& x) const {
  double s = 0.0;
  for (const auto& [k, c] : terms_) {
    double t = c;
    for (int i = 0; i < 3; ++i) {
      if (k.power[i] > 0) t *= std::pow(x[i], k.power[i]);
      if (k.trig[i] == Sin) t *= std::sin(x[i]);
      else if (k.trig[i] == Cos) t *= std::cos(x[i]);
    }
    s += t;
  }
  return s;
}

Vec3 TrigPolynomial::gradient(const Vec3& x) const {
  return {derivative(0).value(x), derivative(1).value(x), derivative(2).value(x)};
}

SmoothField TrigPolynomial::field(int dim) const {
  auto p = std::make_shared<const TrigPolynomial>(*this);
  auto g = std::make_shared<const std::array<TrigPolynomial, 3>>(
      std::array<TrigPolynomial, 3>{derivative(0), derivative(1), derivative(2)});
  auto l = std::make_shared<const TrigPolynomial>(laplacian(dim));
  SmoothField f;
  f.value = [p](const Vec3& x) { return p->value(x); };
  f.gradient = [g](const Vec3& x) { return Vec3{(*g)[0].value(x), (*g)[1].value(x), (*g)[2].value(x)}; };
  f.laplacian = [l](const Vec3& x) { return l->value(x); };
  return f;
}

namespace {

using T = TrigPolynomial;

BoundaryValueProblem trig_problem(const OperatorSpec& op, const TrigPolynomial& u, int powers) {
  const TrigPolynomial f = u.apply(op);
  BoundaryValueProblem p = BoundaryValueProblem::from_exact(op, u.field(op.dim), f.empty() ? SmoothField{} : f.field(op.dim));
  TrigPolynomial rk = f;
  for (int k = 1; k <= powers && !f.empty(); ++k) {
    rk = rk.apply(op);
    p.operator_powers_of_f.push_back(rk.field(op.dim));
  }
  return p;
}

BoundaryValueProblem convdiff_problem(double sigma) {
  OperatorSpec op = OperatorSpec::convection_diffusion(3, 1.0, {-sigma, -sigma, -sigma}, 0.0);
  SmoothField u;
  u.value = [sigma](const Vec3& x) {
    return std::exp(-sigma * x[0]) + std::exp(-sigma * x[1]) + std::exp(-sigma * x[2]);
  };
  u.gradient = [sigma](const Vec3& x) {
    return Vec3{-sigma * std::exp(-sigma * x[0]), -sigma * std::exp(-sigma * x[1]), -sigma * std::exp(-sigma * x[2])};
  };
  u.laplacian = [sigma](const Vec3& x) {
    return sigma * sigma * (std::exp(-sigma * x[0]) + std::exp(-sigma * x[1]) + std::exp(-sigma * x[2]));
  };
  return BoundaryValueProblem::from_exact(op, u);
}

// u = x |x| / 2 on [-1, 1]: u'' = sign(x), a forcing with a jump at 0.
BoundaryValueProblem jump_problem() {
  BoundaryValueProblem p;
  p.op = OperatorSpec::laplace(1);
  SmoothField u;
  u.value = [](const Vec3& x) { return 0.5 * x[0] * std::fabs(x[0]); };
  u.gradient = [](const Vec3& x) { return Vec3{std::fabs(x[0]), 0.0, 0.0}; };
  u.laplacian = [](const Vec3& x) { return x[0] > 0.0 ? 1.0 : (x[0] < 0.0 ? -1.0 : 0.0); };
  SmoothField f;
  f.value = u.laplacian;
  f.gradient = [](const Vec3&) { return Vec3{}; };
  return BoundaryValueProblem::from_exact(p.op, u, f);
}

double parse_sigma(const std::string& tag, double fallback) {
  const auto open = tag.find('(');
  if (open == std::string::npos) return fallback;
  const auto close = tag.find(')', open);
  if (close == std::string::npos || close != tag.size() - 1) throw ConfigError("malformed problem tag '" + tag + "'");
  const std::string arg = tag.substr(open + 1, close - open - 1);
  char* end = nullptr;
  const double v = std::strtod(arg.c_str(), &end);
  if (arg.empty() || *end != '\0') throw ConfigError("malformed parameter in problem tag '" + tag + "'");
  return v;
}

}  // namespace

BoundaryValueProblem named_problem(const std::string& tag, const ProblemParams& params) {
  const std::string base = tag.substr(0, tag.find('('));
  if (base != tag && base != "convdiff3d") throw ConfigError("problem '" + base + "' takes no parameter");
  if (base == "helmholtz2d_inhomog") {
    const double gamma = params.gamma.value_or(2.0);
    return trig_problem(OperatorSpec::helmholtz(2, gamma), T::term(1.0, {2, 0, 0}, {T::Sin, T::Cos, T::One}),
                        params.powers);
  }
  if (base == "helmholtz3d_homog") {
    // del^2 of sin x cos y cos z is -3 u, so only gamma^2 = 3 keeps f = 0;
    // another gamma is accepted here and caught by validate_problem.
    const double gamma = params.gamma.value_or(std::sqrt(3.0));
    const TrigPolynomial u = T::term(1.0, {0, 0, 0}, {T::Sin, T::Cos, T::Cos});
    BoundaryValueProblem p = BoundaryValueProblem::from_exact(OperatorSpec::helmholtz(3, gamma), u.field(3));
    return p;
  }
  if (base == "convdiff3d") {
    const double sigma = parse_sigma(tag, params.sigma);
    if (!(sigma > 0.0)) throw ConfigError("convdiff3d needs sigma > 0");
    return convdiff_problem(sigma);
  }
  if (base == "poisson2d") {
    const TrigPolynomial u = T::term(1.0, {0, 0, 0}, {T::Sin, T::Cos, T::One}) + T::term(1.0, {2, 1, 0}, {T::One, T::One, T::One});
    return trig_problem(OperatorSpec::laplace(2), u, params.powers);
  }
  if (base == "helmholtz2d_trig") {
    const double gamma = params.gamma.value_or(2.0);
    const TrigPolynomial u = T::term(1.0, {0, 0, 0}, {T::Cos, T::Sin, T::One}) + T::term(0.5, {1, 0, 0}, {T::One, T::Cos, T::One});
    return trig_problem(OperatorSpec::helmholtz(2, gamma), u, params.powers);
  }
  if (base == "jump1d") return jump_problem();
  throw ConfigError("unknown problem tag '" + tag + "'");
}

std::vector<std::string> named_problem_tags() {
  return {"helmholtz2d_inhomog", "helmholtz3d_homog", "convdiff3d", "poisson2d", "helmholtz2d_trig", "jump1d"};
}

double problem_residual(const BoundaryValueProblem& bvp, const Region& region, int count, std::uint64_t seed) {
  if (!bvp.exact) throw ConfigError("problem has no exact solution to validate");
  std::mt19937_64 rng(seed);
  const double h = region.half_extent();
  std::uniform_real_distribution<double> u(-h, h);
  double worst = 0.0;
  int found = 0;
  for (int tries = 0; found < count; ++tries) {
    if (tries > 100000) throw GeometryError("could not sample material points for the residual check");
    Vec3 x{};
    for (int i = 0; i < region.dim(); ++i) x[i] = u(rng);
    if (!region.contains(x)) continue;
    ++found;
    worst = std::max(worst, std::fabs(operator_residual(bvp.op, bvp.exact, bvp.forcing, x)));
  }
  return worst;
}

void validate_problem(const BoundaryValueProblem& bvp, const Region& region, double tol, std::uint64_t seed) {
  const double r = problem_residual(bvp, region, 10, seed);
  if (!(r < tol))
    throw ConfigError("exact solution does not satisfy the operator: residual " + std::to_string(r) +
                      " at a sample point (tolerance " + std::to_string(tol) + ")");
}

}  // namespace mrbf
