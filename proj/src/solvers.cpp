#include "mrbf/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mrbf/errors.hpp"

namespace mrbf {

double SmoothField::normal_derivative(const Vec3& x, const Vec3& n) const {
  if (!gradient) throw ParameterError("field has no gradient; Neumann data cannot be derived from it");
  return dot(gradient(x), n);
}

BoundaryValueProblem BoundaryValueProblem::from_exact(const OperatorSpec& op, SmoothField exact,
                                                      SmoothField forcing) {
  BoundaryValueProblem p;
  p.op = op;
  p.forcing = std::move(forcing);
  p.exact = std::move(exact);
  const SmoothField e = p.exact;
  p.dirichlet = e.value;
  p.neumann = [e](const Vec3& x, const Vec3& n) { return e.normal_derivative(x, n); };
  return p;
}

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::BKM: return "BKM";
    case Scheme::BPM: return "BPM";
    case Scheme::Kansa: return "Kansa";
    case Scheme::MKM: return "MKM";
    case Scheme::LSRCM: return "LSRCM";
  }
  return "?";
}

std::vector<double> Solution::evaluate(const std::vector<Vec3>& points) const {
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = field_(points[i]);
  return out;
}

namespace {

// L = a del^2 + b . grad + c; the adjoint flips b.
struct SecondOrderForm {
  double a = 1.0;
  Vec3 b{};
  double c = 0.0;
};

SecondOrderForm second_order_form(const OperatorSpec& op) {
  switch (op.kind) {
    case OperatorKind::Laplace: return {1.0, {}, 0.0};
    case OperatorKind::Helmholtz: return {1.0, {}, op.gamma * op.gamma};
    case OperatorKind::ConvectionDiffusion: return {op.diffusivity, -op.velocity, -op.reaction};
    default:
      throw CapabilityError(to_string(op.kind) + " is fourth order; the collocation schemes take second-order operators");
  }
}

double apply_form(const SecondOrderForm& L, const RadialCalculus& rc) {
  return L.a * rc.laplacian + dot(L.b, rc.grad) + L.c * rc.value;
}

double apply_adjoint(const SecondOrderForm& L, const RadialCalculus& rc) {
  return L.a * rc.laplacian - dot(L.b, rc.grad) + L.c * rc.value;
}

// grad (L phi) and grad (L* phi).
Vec3 grad_form(const SecondOrderForm& L, const RadialCalculus& rc, double sign) {
  const Vec3 hb = mat_vec(rc.hess, L.b);
  Vec3 g{};
  for (int i = 0; i < 3; ++i) g[i] = L.a * rc.grad_laplacian[i] + sign * hb[i] + L.c * rc.grad[i];
  return g;
}

// L L* phi = (a del^2 + c)^2 phi - (b . grad)^2 phi.
double apply_form_adjoint(const SecondOrderForm& L, const RadialCalculus& rc) {
  return L.a * L.a * rc.bilaplacian + 2.0 * L.a * L.c * rc.laplacian + L.c * L.c * rc.value -
         bilinear(L.b, rc.hess, L.b);
}

double forcing_at(const BoundaryValueProblem& bvp, const Vec3& x) {
  return bvp.forcing ? bvp.forcing(x) : 0.0;
}

double boundary_data(const BoundaryValueProblem& bvp, const Node& node) {
  if (node.kind == NodeKind::Dirichlet) {
    if (!bvp.dirichlet) throw ParameterError("problem has Dirichlet nodes but no Dirichlet data");
    return bvp.dirichlet(node.position);
  }
  if (!bvp.neumann) throw ParameterError("problem has Neumann nodes but no Neumann data");
  return bvp.neumann(node.position, node.normal);
}

// Entry of a boundary-type system: the row functional (value, or normal
// derivative at Neumann rows) applied to the column basis (K(., y_s), or
// n_s . grad_x K(., y_s) for Neumann centres, i.e. -dK/dn_s).
double boundary_entry(const PointKernel& k, const Node& row, const Node& col) {
  const bool drow = row.kind == NodeKind::Neumann;
  const bool dcol = col.kind == NodeKind::Neumann;
  const int order = (drow ? 1 : 0) + (dcol ? 1 : 0);
  const KernelJet j = k.jet(row.position, col.position, order);
  if (!drow && !dcol) return j.value;
  if (drow && !dcol) return dot(j.grad, row.normal);
  if (!drow && dcol) return dot(j.grad, col.normal);
  return bilinear(row.normal, j.hess, col.normal);
}

double basis_value(const PointKernel& k, const Vec3& x, const Node& col) {
  if (col.kind == NodeKind::Neumann) return dot(k.jet(x, col.position, 1).grad, col.normal);
  return k.value(x, col.position);
}

std::vector<Node> boundary_nodes(const NodeCloud& cloud) {
  const std::size_t nb = cloud.counts().boundary();
  return {cloud.nodes().begin(), cloud.nodes().begin() + static_cast<std::ptrdiff_t>(nb)};
}

SystemFactorization factor_or_throw(const Matrix& a, bool exploit, double pivot_tol, const char* what) {
  try {
    return factor_system(a, exploit, 1e-12, pivot_tol);
  } catch (const SingularMatrixError& e) {
    throw ConditioningError(std::string(what) + ": " + e.what(), std::numeric_limits<double>::infinity());
  }
}

void require_dim(const OperatorSpec& op, const NodeCloud& cloud) {
  op.validate();
  if (op.dim != cloud.dim())
    throw ParameterError("operator dimension " + std::to_string(op.dim) + " does not match cloud dimension " +
                         std::to_string(cloud.dim()));
}

// Tabulated solution of the radial ODE, interpolated by quintic Hermite
// polynomials from (Phi, Phi', Phi'') at the grid points.
class TabulatedProfile : public RadialProfile {
 public:
  TabulatedProfile(double h, std::vector<double> f, std::vector<double> f1, std::vector<double> f2)
      : h_(h), f_(std::move(f)), f1_(std::move(f1)), f2_(std::move(f2)) {}

  RadialJet jet(double r, int max_order) const override {
    if (max_order > 2) throw CapabilityError("tabulated pre-image only has derivatives up to order 2");
    if (r < 0.0 || !(r <= h_ * static_cast<double>(f_.size() - 1)))
      throw DomainError("radius " + std::to_string(r) + " outside the tabulated pre-image range");
    std::size_t i = std::min(static_cast<std::size_t>(r / h_), f_.size() - 2);
    const double t = r / h_ - static_cast<double>(i);
    const double h = h_;
    // Quintic Hermite basis on [0, 1] and its first two derivatives.
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    const double H[6] = {1 - 10 * t3 + 15 * t4 - 6 * t5, t - 6 * t3 + 8 * t4 - 3 * t5,
                         0.5 * (t2 - 3 * t3 + 3 * t4 - t5), 10 * t3 - 15 * t4 + 6 * t5,
                         -4 * t3 + 7 * t4 - 3 * t5, 0.5 * (t3 - 2 * t4 + t5)};
    const double D1[6] = {-30 * t2 + 60 * t3 - 30 * t4, 1 - 18 * t2 + 32 * t3 - 15 * t4,
                          0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4), 30 * t2 - 60 * t3 + 30 * t4,
                          -12 * t2 + 28 * t3 - 15 * t4, 0.5 * (3 * t2 - 8 * t3 + 5 * t4)};
    const double D2[6] = {-60 * t + 180 * t2 - 120 * t3, -36 * t + 96 * t2 - 60 * t3,
                          0.5 * (2 - 18 * t + 36 * t2 - 20 * t3), 60 * t - 180 * t2 + 120 * t3,
                          -24 * t + 84 * t2 - 60 * t3, 0.5 * (6 * t - 24 * t2 + 20 * t3)};
    const double c[6] = {f_[i], h * f1_[i], h * h * f2_[i], f_[i + 1], h * f1_[i + 1], h * h * f2_[i + 1]};
    RadialJet out;
    for (int k = 0; k < 6; ++k) {
      out.d[0] += c[k] * H[k];
      if (max_order >= 1) out.d[1] += c[k] * D1[k] / h;
      if (max_order >= 2) out.d[2] += c[k] * D2[k] / (h * h);
    }
    return out;
  }
  bool singular_at_origin() const override { return false; }

 private:
  double h_;
  std::vector<double> f_, f1_, f2_;
};

}  // namespace

ProfilePtr radial_pre_image(const OperatorSpec& op, const ProfilePtr& basis, double radius, double step) {
  op.validate();
  if (basis->singular_at_origin()) throw ParameterError("dual-reciprocity basis must be smooth at the origin");
  if (!(step > 0.0) || !(radius > 0.0)) throw ParameterError("pre-image needs a positive radius and step");
  double D = 1.0, s = 0.0;
  switch (op.kind) {
    case OperatorKind::Laplace: break;
    case OperatorKind::Helmholtz: s = op.gamma * op.gamma; break;
    case OperatorKind::ConvectionDiffusion: {
      D = op.diffusivity;
      const double mu = mu_parameter(op.diffusivity, op.velocity, op.reaction);
      s = -mu * mu;
      break;
    }
    default:
      throw CapabilityError("dual reciprocity is only built for second-order operators");
  }
  const double n = op.dim;
  const std::size_t steps = static_cast<std::size_t>(std::ceil(radius / step));
  const double h = radius / static_cast<double>(steps);

  auto phi = [&](double r) { return basis->evaluate(r); };
  auto rhs = [&](double r, double y, double yp) { return phi(r) / D - s * y - (n - 1.0) * yp / r; };

  // Even series Phi = a2 r^2 + a4 r^4 + ... starts the integration off the
  // singular point.
  const RadialJet j0 = basis->jet(0.0, 2);
  const double a2 = j0.d[0] / (D * 2.0 * n);
  const double a4 = (0.5 * j0.d[2] / D - s * a2) / (4.0 * (n + 2.0));

  std::vector<double> f(steps + 1), f1(steps + 1), f2(steps + 1);
  f[0] = 0.0;
  f1[0] = 0.0;
  f2[0] = 2.0 * a2;
  double y = a2 * h * h + a4 * h * h * h * h;
  double yp = 2.0 * a2 * h + 4.0 * a4 * h * h * h;
  f[1] = y;
  f1[1] = yp;
  f2[1] = rhs(h, y, yp);
  for (std::size_t i = 1; i < steps; ++i) {
    const double r = h * static_cast<double>(i);
    const double k1y = yp, k1p = rhs(r, y, yp);
    const double k2y = yp + 0.5 * h * k1p, k2p = rhs(r + 0.5 * h, y + 0.5 * h * k1y, yp + 0.5 * h * k1p);
    const double k3y = yp + 0.5 * h * k2p, k3p = rhs(r + 0.5 * h, y + 0.5 * h * k2y, yp + 0.5 * h * k2p);
    const double k4y = yp + h * k3p, k4p = rhs(r + h, y + h * k3y, yp + h * k3p);
    y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    yp += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    f[i + 1] = y;
    f1[i + 1] = yp;
    f2[i + 1] = rhs(r + h, y, yp);
  }
  return std::make_shared<TabulatedProfile>(h, std::move(f), std::move(f1), std::move(f2));
}

std::shared_ptr<const ParticularSolution> make_particular(const OperatorSpec& op, std::vector<Vec3> centers,
                                                          Vector coefficients, ProfilePtr basis,
                                                          ProfilePtr pre_image, double condition) {
  auto p = std::make_shared<ParticularSolution>();
  p->op_ = op;
  p->centers_ = std::move(centers);
  p->coefficients_ = std::move(coefficients);
  p->basis_ = std::move(basis);
  p->pre_image_ = std::move(pre_image);
  p->condition_ = condition;
  return p;
}

double ParticularSolution::value(const Vec3& x) const {
  if (zero()) return 0.0;
  const PointKernel k(pre_image_, op_);
  double s = 0.0;
  for (std::size_t i = 0; i < centers_.size(); ++i) s += coefficients_[i] * k.value(x, centers_[i]);
  return s;
}

Vec3 ParticularSolution::gradient(const Vec3& x) const {
  Vec3 g{};
  if (zero()) return g;
  const PointKernel k(pre_image_, op_);
  for (std::size_t i = 0; i < centers_.size(); ++i) g = g + coefficients_[i] * k.jet(x, centers_[i], 1).grad;
  return g;
}

double ParticularSolution::forcing_interpolant(const Vec3& x) const {
  if (zero()) return 0.0;
  const PointKernel k(basis_, op_);
  double s = 0.0;
  for (std::size_t i = 0; i < centers_.size(); ++i) s += coefficients_[i] * k.value(x, centers_[i]);
  return s;
}

ParticularPtr drm_particular_solution(const BoundaryValueProblem& bvp, const NodeCloud& cloud,
                                      const ProfilePtr& basis, const DrmOptions& options) {
  require_dim(bvp.op, cloud);
  (void)second_order_form(bvp.op);
  if (!bvp.forcing) return make_particular(bvp.op, {}, {}, basis, nullptr, 1.0);
  if (!basis) throw ParameterError("dual reciprocity needs an interpolation basis");

  const std::vector<Vec3> pts = cloud.positions();
  const std::size_t n = pts.size();
  Vec3 lo = pts.front(), hi = pts.front();
  for (const auto& p : pts)
    for (int i = 0; i < 3; ++i) {
      lo[i] = std::min(lo[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
  const double radius = options.radius > 0.0 ? options.radius : std::max(1.25 * norm(hi - lo), 1e-3);

  const PointKernel k(basis, bvp.op);
  Matrix a(n, n);
  Vector rhs(n);
  bool all_zero = true;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) = k.value(pts[i], pts[j]);
    rhs[i] = bvp.forcing(pts[i]);
    if (rhs[i] != 0.0) all_zero = false;
  }
  if (all_zero) return make_particular(bvp.op, {}, {}, basis, nullptr, 1.0);
  const SystemFactorization f = factor_or_throw(a, true, kDefaultPivotTolerance, "forcing interpolation matrix is singular");
  const double cond = condition_estimate(f);
  Vector c = f.solve(rhs);
  return make_particular(bvp.op, pts, std::move(c), basis, radial_pre_image(bvp.op, basis, radius, options.step),
                         cond);
}

// ------------------------------------------------------------------ BKM

Solution bkm_solve(const BoundaryValueProblem& bvp, const NodeCloud& cloud, const BkmOptions& options) {
  require_dim(bvp.op, cloud);
  (void)second_order_form(bvp.op);
  const NodeCounts counts = cloud.counts();
  const std::size_t nb = counts.boundary(), ni = counts.interior, n = nb + ni;
  if (nb == 0) throw GeometryError("boundary knot method needs boundary nodes");

  ParticularPtr up = options.particular;
  if (!up) {
    const ProfilePtr basis = options.drm_basis ? options.drm_basis : ProfilePtr(multiquadric(1.0));
    up = drm_particular_solution(bvp, cloud, basis, options.drm);
  }

  const PointKernel k(general_solution(bvp.op, options.order), bvp.op);
  const auto& nodes = cloud.nodes();
  Matrix a(n, n);
  Vector rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Node& row = nodes[i];
    for (std::size_t s = 0; s < nb; ++s) a(i, s) = boundary_entry(k, row, nodes[s]);
    if (i >= nb) {
      a(i, i) = -1.0;  // interior value u_l is an unknown
      rhs[i] = -up->value(row.position);
    } else if (row.kind == NodeKind::Dirichlet) {
      rhs[i] = boundary_data(bvp, row) - up->value(row.position);
    } else {
      rhs[i] = boundary_data(bvp, row) - up->normal_derivative(row.position, row.normal);
    }
  }

  const SystemFactorization f = factor_or_throw(a, options.exploit_structure, options.pivot_tolerance, "BKM collocation matrix is singular");
  const Vector x = f.solve(rhs);

  Solution sol;
  sol.scheme = Scheme::BKM;
  sol.coefficients = {Vector(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(nb)),
                      Vector(x.begin() + static_cast<std::ptrdiff_t>(nb), x.end())};
  sol.particular = up;
  sol.condition_estimate = condition_estimate(f);
  sol.factorizations = 1;
  sol.structure = f.structure();
  sol.rows = sol.cols = n;
  sol.rank = n;
  std::vector<Node> centres = boundary_nodes(cloud);
  Vector lambda = sol.coefficients[0];
  sol.set_field([k, centres, lambda, up](const Vec3& x) {
    double s = up->value(x);
    for (std::size_t j = 0; j < centres.size(); ++j) s += lambda[j] * basis_value(k, x, centres[j]);
    return s;
  });
  return sol;
}

// ------------------------------------------------------------------ BPM

Solution bpm_solve(const BoundaryValueProblem& bvp, const NodeCloud& cloud, const BpmOptions& options) {
  require_dim(bvp.op, cloud);
  (void)second_order_form(bvp.op);
  const int M = options.truncation;
  if (M < 0) throw ParameterError("BPM truncation order must be non-negative");
  if (M > kMaxKernelOrder)
    throw CapabilityError("BPM truncation " + std::to_string(M) + " exceeds the kernel order limit " +
                          std::to_string(kMaxKernelOrder));
  const bool forced = static_cast<bool>(bvp.forcing);
  if (forced && M >= 2 && bvp.operator_powers_of_f.size() < static_cast<std::size_t>(M - 1))
    throw ParameterError("BPM truncation " + std::to_string(M) + " needs R^k{f} up to k = " + std::to_string(M - 1));

  const std::vector<Node> bnodes = boundary_nodes(cloud);
  const std::size_t nb = bnodes.size();
  if (nb == 0) throw GeometryError("boundary particle method needs boundary nodes");

  std::vector<PointKernel> kern;
  for (int l = 0; l <= M; ++l) kern.emplace_back(general_solution(bvp.op, l), bvp.op);
  auto level_matrix = [&](int j) {
    Matrix a(nb, nb);
    for (std::size_t i = 0; i < nb; ++i)
      for (std::size_t s = 0; s < nb; ++s) a(i, s) = boundary_entry(kern[static_cast<std::size_t>(j)], bnodes[i], bnodes[s]);
    return a;
  };
  std::vector<Matrix> A;
  for (int j = 0; j <= M; ++j) A.push_back(level_matrix(j));

  int factorizations = 0;
  const bool svd = options.solver == LevelSolver::TruncatedSvd;
  std::shared_ptr<SystemFactorization> shared;
  std::shared_ptr<SvdFactorization> shared_svd;
  auto solve_level = [&](const Vector& rhs) {
    if (svd) {
      if (!shared_svd || !options.reuse_factorization) {
        shared_svd = std::make_shared<SvdFactorization>(svd_factor(A[0], options.rank_tolerance));
        ++factorizations;
      }
      return shared_svd->solve(rhs);
    }
    if (!shared || !options.reuse_factorization) {
      shared = std::make_shared<SystemFactorization>(
          factor_or_throw(A[0], options.exploit_structure, options.pivot_tolerance, "BPM interpolation matrix is singular"));
      ++factorizations;
    }
    return shared->solve(rhs);
  };

  std::vector<Vector> beta(static_cast<std::size_t>(M) + 1, Vector(nb, 0.0));
  // Level k >= 1 imposes R^k{u} = R^{k-1}{f} on the boundary; level 0 the
  // actual boundary conditions. Higher levels are already known.
  for (int k = M; k >= 0; --k) {
    if (k >= 1 && !forced) continue;
    Vector rhs(nb);
    const SmoothField* src = nullptr;
    if (k == 1) src = &bvp.forcing;
    if (k >= 2) src = &bvp.operator_powers_of_f[static_cast<std::size_t>(k - 2)];
    for (std::size_t i = 0; i < nb; ++i) {
      const Node& nd = bnodes[i];
      if (k == 0) rhs[i] = boundary_data(bvp, nd);
      else rhs[i] = nd.kind == NodeKind::Neumann ? src->normal_derivative(nd.position, nd.normal) : (*src)(nd.position);
    }
    for (int l = k + 1; l <= M; ++l) {
      const Vector c = A[static_cast<std::size_t>(l - k)] * beta[static_cast<std::size_t>(l)];
      for (std::size_t i = 0; i < nb; ++i) rhs[i] -= c[i];
    }
    beta[static_cast<std::size_t>(k)] = solve_level(rhs);
  }
  if (!shared && !shared_svd) solve_level(Vector(nb, 0.0));

  Solution sol;
  sol.scheme = Scheme::BPM;
  sol.coefficients = beta;
  sol.factorizations = factorizations;
  sol.rows = sol.cols = nb;
  if (svd) {
    sol.condition_estimate = shared_svd->condition();
    sol.structure = detect_structure(A[0]);
    sol.rank = shared_svd->rank();
  } else {
    sol.condition_estimate = condition_estimate(*shared);
    sol.structure = shared->structure();
    sol.rank = nb;
  }
  sol.set_field([kern, bnodes, beta](const Vec3& x) {
    double s = 0.0;
    for (std::size_t l = 0; l < beta.size(); ++l)
      for (std::size_t j = 0; j < bnodes.size(); ++j)
        if (beta[l][j] != 0.0) s += beta[l][j] * basis_value(kern[l], x, bnodes[j]);
    return s;
  });
  return sol;
}

// ----------------------------------------------------- domain collocation

namespace {

Solution finish_square(Scheme scheme, const Matrix& a, const Vector& rhs, const CollocationOptions& o,
                       const char* what) {
  const SystemFactorization f = factor_or_throw(a, o.exploit_structure, o.pivot_tolerance, what);
  Solution sol;
  sol.scheme = scheme;
  sol.coefficients = {f.solve(rhs)};
  sol.condition_estimate = condition_estimate(f);
  sol.factorizations = 1;
  sol.structure = f.structure();
  sol.rows = a.rows();
  sol.cols = a.cols();
  sol.rank = a.cols();
  return sol;
}

// Kansa-type row: PDE at interior nodes, BC at boundary nodes, basis phi(x - y).
double kansa_entry(const SecondOrderForm& L, const RadialProfile& rbf, int dim, const Node& row, const Vec3& centre) {
  const Vec3 d = row.position - centre;
  switch (row.kind) {
    case NodeKind::Interior: return apply_form(L, radial_calculus(rbf, d, dim, 2));
    case NodeKind::Dirichlet: return rbf.evaluate(norm(d));
    case NodeKind::Neumann: return dot(radial_calculus(rbf, d, dim, 1).grad, row.normal);
  }
  return 0.0;
}

double kansa_rhs(const BoundaryValueProblem& bvp, const Node& row) {
  return row.kind == NodeKind::Interior ? forcing_at(bvp, row.position) : boundary_data(bvp, row);
}

void set_plain_field(Solution& sol, const ProfilePtr& rbf, std::vector<Vec3> centres) {
  Vector c = sol.coefficients[0];
  sol.set_field([rbf, centres = std::move(centres), c](const Vec3& x) {
    double s = 0.0;
    for (std::size_t j = 0; j < centres.size(); ++j) s += c[j] * rbf->evaluate(norm(x - centres[j]));
    return s;
  });
}

}  // namespace

Solution kansa_solve(const BoundaryValueProblem& bvp, const NodeCloud& cloud, const ProfilePtr& rbf,
                     const CollocationOptions& options) {
  require_dim(bvp.op, cloud);
  const SecondOrderForm L = second_order_form(bvp.op);
  const std::size_t n = cloud.size();
  const std::vector<Vec3> centres = cloud.positions();
  Matrix a(n, n);
  Vector rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) = kansa_entry(L, *rbf, cloud.dim(), cloud[i], centres[j]);
    rhs[i] = kansa_rhs(bvp, cloud[i]);
  }
  Solution sol = finish_square(Scheme::Kansa, a, rhs, options, "Kansa collocation matrix is singular");
  set_plain_field(sol, rbf, centres);
  return sol;
}

Matrix mkm_matrix(const OperatorSpec& op, const NodeCloud& cloud, const RadialProfile& rbf) {
  const SecondOrderForm L = second_order_form(op);
  const std::size_t n = cloud.size(), nb = cloud.counts().boundary();
  const int dim = cloud.dim();
  const auto& nodes = cloud.nodes();
  Matrix a(n + nb, n + nb);
  for (std::size_t i = 0; i < n + nb; ++i) {
    // Rows 0..n-1: PDE at every node; rows n..n+nb-1: boundary conditions.
    const bool pde = i < n;
    const Node& row = pde ? nodes[i] : nodes[i - n];
    for (std::size_t j = 0; j < n + nb; ++j) {
      const bool alpha = j < n;
      const Node& col = alpha ? nodes[j] : nodes[j - n];
      const RadialCalculus rc = radial_calculus(rbf, row.position - col.position, dim, 4);
      double v = 0.0;
      if (pde) {
        if (alpha) v = apply_form_adjoint(L, rc);
        else if (col.kind == NodeKind::Dirichlet) v = apply_form(L, rc);
        else v = -dot(col.normal, grad_form(L, rc, 1.0));
      } else if (row.kind == NodeKind::Dirichlet) {
        if (alpha) v = apply_adjoint(L, rc);
        else if (col.kind == NodeKind::Dirichlet) v = rc.value;
        else v = -dot(col.normal, rc.grad);
      } else {
        if (alpha) v = dot(row.normal, grad_form(L, rc, -1.0));
        else if (col.kind == NodeKind::Dirichlet) v = dot(row.normal, rc.grad);
        else v = -bilinear(row.normal, rc.hess, col.normal);
      }
      a(i, j) = v;
    }
  }
  return a;
}

Solution mkm_solve(const BoundaryValueProblem& bvp, const NodeCloud& cloud, const ProfilePtr& rbf,
                   const CollocationOptions& options) {
  require_dim(bvp.op, cloud);
  const SecondOrderForm L = second_order_form(bvp.op);
  const std::size_t n = cloud.size(), nb = cloud.counts().boundary();
  const Matrix a = mkm_matrix(bvp.op, cloud, *rbf);
  Vector rhs(n + nb);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = forcing_at(bvp, cloud[i].position);
  for (std::size_t i = 0; i < nb; ++i) rhs[n + i] = boundary_data(bvp, cloud[i]);

  Solution sol = finish_square(Scheme::MKM, a, rhs, options, "MKM collocation matrix is singular");
  const Vector x = sol.coefficients[0];
  Vector alpha(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
  Vector beta(x.begin() + static_cast<std::ptrdiff_t>(n), x.end());
  sol.coefficients = {alpha, beta};
  const std::vector<Node> nodes = cloud.nodes();
  const int dim = cloud.dim();
  sol.set_field([L, rbf, nodes, alpha, beta, dim, nb](const Vec3& p) {
    double s = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const bool bnd = k < nb;
      const RadialCalculus rc = radial_calculus(*rbf, p - nodes[k].position, dim, 2);
      s += alpha[k] * apply_adjoint(L, rc);
      if (!bnd) continue;
      if (nodes[k].kind == NodeKind::Dirichlet) s += beta[k] * rc.value;
      else s -= beta[k] * dot(nodes[k].normal, rc.grad);
    }
    return s;
  });
  return sol;
}

Solution lsrcm_solve(const BoundaryValueProblem& bvp, const NodeCloud& field_nodes, const std::vector<Vec3>& sources,
                     const ProfilePtr& rbf, const LsrcmOptions& options) {
  require_dim(bvp.op, field_nodes);
  const SecondOrderForm L = second_order_form(bvp.op);
  const std::size_t m = field_nodes.size(), n = sources.size();
  if (m < n) throw RankError("LSRCM needs at least as many field nodes as sources", m);
  Matrix a(m, n);
  Vector rhs(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) = kansa_entry(L, *rbf, field_nodes.dim(), field_nodes[i], sources[j]);
    rhs[i] = kansa_rhs(bvp, field_nodes[i]);
  }
  // Equilibrate rows: PDE rows scale like 1/c^2 against O(1) boundary rows,
  // and unweighted least squares would then all but ignore the boundary.
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += a(i, j) * a(i, j);
    s = std::sqrt(s);
    if (s == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) a(i, j) /= s;
    rhs[i] /= s;
  }
  // Few boundary rows against many PDE rows: a linear drift is nearly free
  // for the PDE rows, so the fit trades the boundary data away unless the
  // two blocks carry comparable total weight.
  const std::size_t mb = field_nodes.counts().boundary();
  double w = options.boundary_weight;
  if (w < 0.0) w = mb > 0 && m > mb ? std::sqrt(static_cast<double>(m - mb) / static_cast<double>(mb)) : 1.0;
  for (std::size_t i = 0; i < mb; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) *= w;
    rhs[i] *= w;
  }
  Solution sol;
  sol.scheme = Scheme::LSRCM;
  sol.coefficients = {least_squares_solve(a, rhs, options.rank_tolerance)};
  sol.rows = m;
  sol.cols = n;
  sol.rank = n;
  set_plain_field(sol, rbf, sources);
  return sol;
}

// ---------------------------------------------------------------- errors

double operator_residual(const OperatorSpec& op, const SmoothField& u, const SmoothField& f, const Vec3& x) {
  const SecondOrderForm L = second_order_form(op);
  if (!u.value || !u.gradient || !u.laplacian)
    throw ParameterError("residual check needs value, gradient and laplacian of the solution");
  const double lu = L.a * u.laplacian(x) + dot(L.b, u.gradient(x)) + L.c * u.value(x);
  return lu - (f ? f(x) : 0.0);
}

double l2_relative_error(const std::vector<double>& computed, const std::vector<double>& exact) {
  if (computed.size() != exact.size()) throw ParameterError("error norm needs equally many values");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    num += (computed[i] - exact[i]) * (computed[i] - exact[i]);
    den += exact[i] * exact[i];
  }
  if (!(den > 0.0)) throw DomainError("relative error undefined: exact field vanishes at every checkpoint");
  return std::sqrt(num / den);
}

double l2_relative_error(const Solution& solution, const ScalarField& exact, const std::vector<Vec3>& checkpoints) {
  std::vector<double> ex(checkpoints.size());
  for (std::size_t i = 0; i < checkpoints.size(); ++i) ex[i] = exact(checkpoints[i]);
  return l2_relative_error(solution.evaluate(checkpoints), ex);
}

}  // namespace mrbf
