#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "mrbf/errors.hpp"
#include "mrbf/kernels.hpp"
#include "mrbf/specfun.hpp"

using mrbf::OperatorSpec;
using mrbf::Vec3;
using mrbf::operator+;
using mrbf::operator-;
using mrbf::operator*;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<OperatorSpec> all_operators(int dim) {
  return {
      OperatorSpec::laplace(dim),
      OperatorSpec::helmholtz(dim, 2.0),
      OperatorSpec::convection_diffusion(dim, 0.7, dim == 2 ? Vec3{0.6, -0.4, 0.0} : Vec3{0.3, -0.5, 0.2}, 0.4),
      OperatorSpec::vibration_plate(dim, 1.7),
      OperatorSpec::winkler_plate(dim, 1.3),
      OperatorSpec::burger_plate(dim, 1.1),
  };
}

// Flux of grad(phi) through the sphere of radius r, times `scale`.
double sphere_area(int dim, double r) { return dim == 2 ? 2.0 * kPi * r : 4.0 * kPi * r * r; }

double radial_laplacian(const mrbf::RadialProfile& p, double r, int dim) {
  const auto j = p.jet(r, 2);
  return j.d[2] + (dim - 1.0) * j.d[1] / r;
}

double radial_laplacian_slope(const mrbf::RadialProfile& p, double r, int dim) {
  const auto j = p.jet(r, 3);
  return j.d[3] + (dim - 1.0) * (j.d[2] / r - j.d[1] / (r * r));
}

double scale_of(double v) { return std::max(1.0, std::fabs(v)); }

}  // namespace

TEST_CASE("radial jets agree with central differences of the lower order") {
  const double h = 1e-5;
  for (int dim : {2, 3}) {
    for (const auto& op : all_operators(dim)) {
      for (int m : {0, 1, 3}) {
        for (bool fundamental : {false, true}) {
          const auto p = fundamental ? mrbf::fundamental_solution(op, m) : mrbf::general_solution(op, m);
          for (double r : {0.4, 1.1, 2.7}) {
            CAPTURE(mrbf::to_string(op.kind));
            CAPTURE(dim);
            CAPTURE(m);
            CAPTURE(fundamental);
            CAPTURE(r);
            const auto jp = p->jet(r + h, 4);
            const auto jm = p->jet(r - h, 4);
            const auto j0 = p->jet(r, 4);
            for (int k = 1; k <= 4; ++k) {
              const double fd = (jp.d[k - 1] - jm.d[k - 1]) / (2.0 * h);
              CHECK(std::fabs(fd - j0.d[k]) < 1e-6 * scale_of(j0.d[k]) + 1e-6 * scale_of(j0.d[k - 1]));
            }
          }
        }
      }
    }
  }
}

TEST_CASE("general solutions form a hierarchy under the operator") {
  for (int dim : {2, 3}) {
    for (const auto& op : all_operators(dim)) {
      for (int m = 0; m <= mrbf::kMaxKernelOrder; ++m) {
        const auto u = mrbf::general_solution(op, m);
        CHECK(u->order_m() == m);
        CHECK_FALSE(u->singular_at_origin());
        for (double r : {0.0, 0.3, 1.2, 2.9}) {
          CAPTURE(mrbf::to_string(op.kind));
          CAPTURE(dim);
          CAPTURE(m);
          CAPTURE(r);
          const double lhs = mrbf::apply_operator(op, *u, r);
          const double rhs = m == 0 ? 0.0 : mrbf::general_solution(op, m - 1)->evaluate(r);
          CHECK(std::fabs(lhs - rhs) < 1e-9 * scale_of(rhs));
        }
      }
      CHECK(mrbf::general_solution(op, 0)->evaluate(0.0) == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("fundamental solutions form a hierarchy off the origin") {
  for (int dim : {2, 3}) {
    for (const auto& op : all_operators(dim)) {
      for (int m = 0; m <= mrbf::kMaxKernelOrder; ++m) {
        const auto u = mrbf::fundamental_solution(op, m);
        CHECK(u->singular_at_origin());
        if (m == 0) CHECK_THROWS_AS(u->evaluate(0.0), mrbf::SingularityError);
        for (double r : {0.3, 1.2, 2.9}) {
          CAPTURE(mrbf::to_string(op.kind));
          CAPTURE(dim);
          CAPTURE(m);
          CAPTURE(r);
          const double lhs = mrbf::apply_operator(op, *u, r);
          const double rhs = m == 0 ? 0.0 : mrbf::fundamental_solution(op, m - 1)->evaluate(r);
          CHECK(std::fabs(lhs - rhs) < 1e-8 * scale_of(rhs));
        }
      }
    }
  }
}

TEST_CASE("fundamental solutions carry a unit point source only at order zero") {
  // Flux of the highest-order derivative through a small sphere measures the
  // Dirac mass produced by the operator.
  const double r = 1e-4;
  for (int dim : {2, 3}) {
    for (const auto& op : all_operators(dim)) {
      for (int m = 0; m <= 3; ++m) {
        CAPTURE(mrbf::to_string(op.kind));
        CAPTURE(dim);
        CAPTURE(m);
        const auto u = mrbf::fundamental_solution(op, m);
        const double expected = m == 0 ? 1.0 : 0.0;
        if (op.fourth_order()) {
          const double flux = sphere_area(dim, r) * radial_laplacian_slope(*u, r, dim);
          CHECK(std::fabs(flux - expected) < 1e-3);
          // The second-derivative flux (a dipole-free check) must vanish.
          CHECK(std::fabs(sphere_area(dim, r) * u->d_dr(r)) < 1e-3);
        } else {
          const double flux = op.diffusivity * sphere_area(dim, r) * u->d_dr(r);
          CHECK(std::fabs(flux - expected) < 1e-3);
        }
      }
    }
  }
}

TEST_CASE("closed forms of the order-zero kernels") {
  const double r = 0.83;
  CHECK(mrbf::fundamental_solution(OperatorSpec::laplace(2), 0)->evaluate(r) ==
        doctest::Approx(std::log(r) / (2.0 * kPi)).epsilon(1e-14));
  CHECK(mrbf::fundamental_solution(OperatorSpec::laplace(3), 0)->evaluate(r) ==
        doctest::Approx(-1.0 / (4.0 * kPi * r)).epsilon(1e-14));
  const double g = 2.0;
  CHECK(mrbf::fundamental_solution(OperatorSpec::helmholtz(3, g), 0)->evaluate(r) ==
        doctest::Approx(-std::cos(g * r) / (4.0 * kPi * r)).epsilon(1e-12));
  CHECK(mrbf::fundamental_solution(OperatorSpec::helmholtz(2, g), 0)->evaluate(r) ==
        doctest::Approx(mrbf::specfun::bessel_y(0.0, g * r) / 4.0).epsilon(1e-12));
  CHECK(mrbf::general_solution(OperatorSpec::helmholtz(2, g), 0)->evaluate(r) ==
        doctest::Approx(mrbf::specfun::bessel_j(0.0, g * r)).epsilon(1e-12));
  CHECK(mrbf::general_solution(OperatorSpec::helmholtz(3, g), 0)->evaluate(r) ==
        doctest::Approx(std::sin(g * r) / (g * r)).epsilon(1e-12));

  const double D = 0.7;
  const Vec3 v{0.3, -0.5, 0.2};
  const double kap = 0.4;
  const double mu = mrbf::mu_parameter(D, v, kap);
  const auto cd = OperatorSpec::convection_diffusion(3, D, v, kap);
  CHECK(mrbf::fundamental_solution(cd, 0)->evaluate(r) ==
        doctest::Approx(-std::exp(-mu * r) / (4.0 * kPi * D * r)).epsilon(1e-12));
  CHECK(mrbf::general_solution(cd, 0)->evaluate(r) ==
        doctest::Approx(std::sinh(mu * r) / (mu * r)).epsilon(1e-12));

  // Winkler: real combination of ber and bei.
  const double kappa = 1.3;
  const auto be = mrbf::specfun::kelvin_be(0.0, std::sqrt(kappa) * r);
  CHECK(mrbf::general_solution(OperatorSpec::winkler_plate(2, kappa), 0)->evaluate(r) ==
        doctest::Approx(be.real() + be.imag()).epsilon(1e-12));
}

TEST_CASE("mu parameter and Q coefficients") {
  CHECK(mrbf::mu_parameter(2.0, Vec3{3.0, 4.0, 0.0}, 0.0) == doctest::Approx(1.25));
  CHECK(mrbf::mu_parameter(1.0, Vec3{0.0, 0.0, 0.0}, 4.0) == doctest::Approx(2.0));
  CHECK(mrbf::q_coefficient(0, 0.5) == 1.0);
  CHECK(mrbf::q_coefficient(2, 0.5) == doctest::Approx(1.0 / (8.0 * std::pow(0.5, 4))));
  // Leading r^{2m} coefficient of the order-m conv-diff general solution.
  const double D = 1.0;
  const Vec3 v{1.0, 0.0, 0.0};
  const auto cd = OperatorSpec::convection_diffusion(3, D, v, 0.0);
  const double mu = mrbf::mu_parameter(D, v, 0.0);
  for (int m = 0; m <= 4; ++m) {
    const double r = 1e-2;
    const double lead = mrbf::general_solution(cd, m)->evaluate(r) / std::pow(r, 2 * m);
    double expect = mrbf::q_coefficient(m, mu) * std::pow(mu, 2 * m);
    double c = 1.0;
    for (int k = 1; k <= m; ++k) c /= (2.0 * k + 1.0);
    CAPTURE(m);
    CHECK(lead == doctest::Approx(expect * c).epsilon(1e-3));
  }
  CHECK_THROWS_AS(mrbf::mu_parameter(0.0, v, 0.0), mrbf::ParameterError);
}

TEST_CASE("Winkler zero-order general solution in higher dimensions") {
  for (int dim : {4, 5}) {
    const auto op = OperatorSpec::winkler_plate(dim, 0.9);
    const auto u = mrbf::general_solution(op, 0);
    for (double r : {0.0, 0.5, 2.0}) {
      CHECK(std::fabs(mrbf::apply_operator(op, *u, r)) < 1e-9);
    }
    CHECK_THROWS_AS(mrbf::general_solution(op, 1), mrbf::CapabilityError);
    CHECK_THROWS_AS(mrbf::fundamental_solution(op, 0), mrbf::CapabilityError);
  }
}

TEST_CASE("apply_operator on polynomials") {
  const auto r4 = mrbf::power_rbf(4.0);
  CHECK(mrbf::apply_operator(OperatorSpec::laplace(2), *r4, 0.5) == doctest::Approx(16.0 * 0.25));
  CHECK(mrbf::apply_operator(OperatorSpec::laplace(3), *r4, 0.5) == doctest::Approx(20.0 * 0.25));
  CHECK(mrbf::apply_operator(OperatorSpec::burger_plate(2, 1.0), *r4, 0.5) ==
        doctest::Approx(64.0 - 16.0 * 0.25));
  CHECK(mrbf::apply_operator(OperatorSpec::burger_plate(3, 1.0), *r4, 0.0) == doctest::Approx(120.0));
  CHECK(mrbf::apply_operator(OperatorSpec::burger_plate(3, 1.0), *r4, 0.7) ==
        doctest::Approx(120.0 - 20.0 * 0.49));
}

TEST_CASE("kernel RBF strategies") {
  const double c = 0.6;
  const auto mq = mrbf::multiquadric(c);
  CHECK_FALSE(mq->singular_at_origin());
  const double h = 1e-5;
  for (double r : {0.0, 0.2, 1.4}) {
    CHECK(mq->evaluate(r) == doctest::Approx(std::sqrt(r * r + c * c)).epsilon(1e-14));
    const auto j = mq->jet(r, 4);
    if (r > 0.0) {
      const auto jp = mq->jet(r + h, 4);
      const auto jm = mq->jet(r - h, 4);
      for (int k = 1; k <= 4; ++k) {
        CHECK(j.d[k] == doctest::Approx((jp.d[k - 1] - jm.d[k - 1]) / (2.0 * h)).epsilon(1e-6));
      }
    }
  }
  CHECK(mq->jet(0.0, 2).d[2] == doctest::Approx(1.0 / c));

  const auto tps = mrbf::thin_plate_spline(2);
  CHECK(tps->evaluate(0.0) == 0.0);
  CHECK(tps->evaluate(2.0) == doctest::Approx(16.0 * std::log(2.0)));

  // r^2 times the 3D Laplace fundamental solution is -r / (4 pi).
  const auto aug = mrbf::make_kernel_rbf(mrbf::fundamental_solution(OperatorSpec::laplace(3), 0),
                                         mrbf::KernelRbfStrategy::augment(1));
  CHECK(aug->pole_order() == 0.0);
  const auto ja = aug->jet(0.9, 3);
  CHECK(ja.d[0] == doctest::Approx(-0.9 / (4.0 * kPi)));
  CHECK(ja.d[1] == doctest::Approx(-1.0 / (4.0 * kPi)));
  CHECK(std::fabs(ja.d[2]) < 1e-14);

  // Shape-shifted log is smooth.
  const auto slog = mrbf::make_kernel_rbf(mrbf::log_rbf(), mrbf::KernelRbfStrategy::shape_shift(0.5));
  CHECK(slog->evaluate(0.0) == doctest::Approx(std::log(0.5)));
  CHECK_THROWS_AS(mrbf::log_rbf()->evaluate(0.0), mrbf::SingularityError);
  CHECK_THROWS_AS(mrbf::make_kernel_rbf(mrbf::log_rbf(), mrbf::KernelRbfStrategy::shape_shift(0.0)),
                  mrbf::ParameterError);
}

TEST_CASE("point kernel derivatives match finite differences") {
  const Vec3 v{0.6, -0.4, 0.3};
  const auto op = OperatorSpec::convection_diffusion(3, 0.7, v, 0.4);
  const auto prof = mrbf::fundamental_solution(op, 1);
  const mrbf::PointKernel k(prof, op);
  const Vec3 x{0.3, 0.8, -0.2};
  const Vec3 y{-0.5, 0.1, 0.4};
  const auto j = k.jet(x, y, 2);
  const double h = 1e-5;
  for (int i = 0; i < 3; ++i) {
    Vec3 e{0.0, 0.0, 0.0};
    e[i] = h;
    const double fd = (k.value(x + e, y) - k.value(x - e, y)) / (2.0 * h);
    CHECK(j.grad[i] == doctest::Approx(fd).epsilon(1e-7));
    const auto gp = k.jet(x + e, y, 1).grad;
    const auto gm = k.jet(x - e, y, 1).grad;
    for (int l = 0; l < 3; ++l) {
      CHECK(j.hess[l][i] == doctest::Approx((gp[l] - gm[l]) / (2.0 * h)).epsilon(1e-6));
    }
  }
  CHECK(mrbf::evaluate_kernel(*prof, x, y, op) == doctest::Approx(j.value));

  const Vec3 nx{0.0, 0.6, 0.8};
  const Vec3 ny{1.0, 0.0, 0.0};
  CHECK(mrbf::normal_derivative(*prof, x, y, nx, op) == doctest::Approx(mrbf::dot(j.grad, nx)));
  // Mixed derivative by differencing in y along ny of the x-normal derivative.
  const double fd_mixed = (mrbf::normal_derivative(*prof, x, y + h * ny, nx, op) -
                           mrbf::normal_derivative(*prof, x, y - h * ny, nx, op)) /
                          (2.0 * h);
  CHECK(mrbf::binormal_second_derivative(*prof, x, y, nx, ny, op) == doctest::Approx(fd_mixed).epsilon(1e-6));
}

TEST_CASE("radial calculus: Laplacians against finite differences and origin limits") {
  const auto mq = mrbf::multiquadric(0.8);
  for (int dim : {2, 3}) {
    const Vec3 d = dim == 2 ? Vec3{0.4, -0.3, 0.0} : Vec3{0.4, -0.3, 0.5};
    const auto rc = mrbf::radial_calculus(*mq, d, dim);
    const double h = 1e-4;
    double lap = 0.0;
    Vec3 glap{};
    for (int i = 0; i < dim; ++i) {
      Vec3 e{0.0, 0.0, 0.0};
      e[i] = h;
      lap += (mq->evaluate(mrbf::norm(d + e)) - 2.0 * rc.value + mq->evaluate(mrbf::norm(d - e))) / (h * h);
      glap[i] = (mrbf::radial_calculus(*mq, d + e, dim).laplacian -
                 mrbf::radial_calculus(*mq, d - e, dim).laplacian) / (2.0 * h);
    }
    CHECK(rc.laplacian == doctest::Approx(lap).epsilon(1e-6));
    double bilap = 0.0;
    for (int i = 0; i < dim; ++i) {
      CHECK(rc.grad_laplacian[i] == doctest::Approx(glap[i]).epsilon(1e-6));
      Vec3 e{0.0, 0.0, 0.0};
      e[i] = h;
      bilap += (mrbf::radial_calculus(*mq, d + e, dim).grad_laplacian[i] -
                mrbf::radial_calculus(*mq, d - e, dim).grad_laplacian[i]) / (2.0 * h);
    }
    CHECK(rc.bilaplacian == doctest::Approx(bilap).epsilon(1e-6));

    // Origin limits against a nearby point.
    const auto r0 = mrbf::radial_calculus(*mq, Vec3{0.0, 0.0, 0.0}, dim);
    const auto rs = mrbf::radial_calculus(*mq, Vec3{1e-4, 0.0, 0.0}, dim);
    CHECK(r0.laplacian == doctest::Approx(rs.laplacian).epsilon(1e-6));
    CHECK(r0.bilaplacian == doctest::Approx(rs.bilaplacian).epsilon(1e-5));
  }
}

TEST_CASE("parameter and capability errors") {
  CHECK_THROWS_AS(mrbf::general_solution(OperatorSpec::helmholtz(2, 0.0), 0), mrbf::ParameterError);
  CHECK_THROWS_AS(mrbf::general_solution(OperatorSpec::helmholtz(2, 1.0), -1), mrbf::ParameterError);
  CHECK_THROWS_AS(mrbf::general_solution(OperatorSpec::helmholtz(2, 1.0), mrbf::kMaxKernelOrder + 1),
                  mrbf::CapabilityError);
  CHECK_THROWS_AS(mrbf::general_solution(OperatorSpec::helmholtz(4, 1.0), 0), mrbf::CapabilityError);
  CHECK_THROWS_AS(mrbf::general_solution(OperatorSpec::laplace(1), 0), mrbf::CapabilityError);
  CHECK_THROWS_AS(OperatorSpec::convection_diffusion(2, 1.0, Vec3{0.0, 0.0, 1.0}, 0.0).validate(),
                  mrbf::ParameterError);
  CHECK_THROWS_AS(OperatorSpec::convection_diffusion(3, -1.0, Vec3{}, 0.0).validate(), mrbf::ParameterError);
}

TEST_CASE("documented scalar examples") {
  CHECK(mrbf::mu_parameter(1.0, Vec3{2.0, 0.0, 0.0}, 0.0) == doctest::Approx(1.0));
  CHECK(mrbf::mu_parameter(2.0, Vec3{2.0, 2.0, 2.0}, 1.0) == doctest::Approx(std::sqrt(0.75 + 0.5)));
  CHECK(mrbf::q_coefficient(1, 1.0) == doctest::Approx(0.5));
  CHECK(mrbf::q_coefficient(3, 2.0) == doctest::Approx(1.0 / 3072.0));

  const auto h2 = OperatorSpec::helmholtz(2, 1.0);
  const auto u = mrbf::general_solution(h2, 0);
  const Vec3 x{1.0, 0.0, 0.0};
  const Vec3 o{0.0, 0.0, 0.0};
  CHECK(mrbf::normal_derivative(*u, x, o, Vec3{1.0, 0.0, 0.0}, h2) ==
        doctest::Approx(-mrbf::specfun::bessel_j(1.0, 1.0)).epsilon(1e-12));
  CHECK(mrbf::normal_derivative(*u, x, o, Vec3{0.0, 1.0, 0.0}, h2) == 0.0);
  CHECK(mrbf::evaluate_kernel(*u, o, o, h2) == doctest::Approx(1.0));

  // Binormal projector identities.
  const auto j = u->jet(1.0, 2);
  CHECK(mrbf::binormal_second_derivative(*u, x, o, Vec3{1.0, 0.0, 0.0}, Vec3{1.0, 0.0, 0.0}, h2) ==
        doctest::Approx(-j.d[2]));
  CHECK(mrbf::binormal_second_derivative(*u, x, o, Vec3{0.0, 1.0, 0.0}, Vec3{0.0, 1.0, 0.0}, h2) ==
        doctest::Approx(-j.d[1]));

  const auto cd = OperatorSpec::convection_diffusion(2, 1.0, Vec3{1.0, 0.0, 0.0}, 0.0);
  const auto ucd = mrbf::general_solution(cd, 0);
  CHECK(mrbf::evaluate_kernel(*ucd, x, o, cd) == doctest::Approx(ucd->evaluate(1.0) * std::exp(0.5)));

  const auto sh = mrbf::make_kernel_rbf(mrbf::power_rbf(1.0), mrbf::KernelRbfStrategy::shape_shift(1.0));
  CHECK(sh->evaluate(0.0) == 1.0);
  CHECK(sh->d_dr(0.0) == 0.0);
  CHECK(mrbf::thin_plate_spline(1)->evaluate(1.0) == 0.0);
  const auto stps = mrbf::make_kernel_rbf(mrbf::thin_plate_spline(1), mrbf::KernelRbfStrategy::shape_shift(0.5));
  CHECK(stps->d_dr(0.0) == 0.0);
  CHECK_THROWS_AS(mrbf::make_kernel_rbf(mrbf::log_rbf(), mrbf::KernelRbfStrategy::augment(0)), mrbf::ParameterError);

  // Laplace m = 1 fundamental solution in 2D: r^2 (ln r - 1) / (8 pi).
  const auto l1 = mrbf::fundamental_solution(OperatorSpec::laplace(2), 1);
  for (double r : {0.3, 1.7}) {
    CHECK(l1->evaluate(r) == doctest::Approx(r * r * (std::log(r) - 1.0) / (8.0 * kPi)));
  }
}

TEST_CASE("fundamental solutions diverge at the origin while general ones stay finite") {
  for (int dim : {2, 3}) {
    for (const auto& op : all_operators(dim)) {
      const auto g = mrbf::general_solution(op, 0);
      const auto f = mrbf::fundamental_solution(op, 0);
      CAPTURE(mrbf::to_string(op.kind));
      CAPTURE(dim);
      CHECK(std::fabs(g->evaluate(1e-4) - g->evaluate(1e-2)) < 1e-3);
      if (op.fourth_order()) {
        // Plate kernels stay bounded; their Laplacian carries the singularity.
        CHECK(std::fabs(radial_laplacian(*f, 1e-4, dim)) > std::fabs(radial_laplacian(*f, 1e-2, dim)));
      } else {
        CHECK(std::fabs(f->evaluate(1e-4)) > std::fabs(f->evaluate(1e-2)));
      }
    }
  }
}
