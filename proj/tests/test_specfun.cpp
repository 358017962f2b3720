#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "mrbf/errors.hpp"
#include "mrbf/specfun.hpp"

namespace sf = mrbf::specfun;

namespace {

struct RefValue {
  double nu;
  double x;
  double value;
};

struct KelvinRef {
  double nu;
  double x;
  double ber;
  double bei;
  double ker;
  double kei;
};

#include "oracles/specfun_reference.inc"

constexpr double kPi = std::numbers::pi;

double rel_err(double got, double want) {
  return std::fabs(got - want) / std::max(std::fabs(want), 1e-300);
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> xs;
  for (int i = 0; i < n; ++i) {
    xs.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  }
  return xs;
}

}  // namespace

TEST_CASE("gamma matches factorials and the half-integer value") {
  CHECK(rel_err(sf::gamma(5.0), 24.0) < 1e-13);
  CHECK(rel_err(sf::gamma(0.5), std::sqrt(kPi)) < 1e-13);
  CHECK(rel_err(sf::gamma(10.5), 1133278.3889487855) < 1e-13);
  CHECK(rel_err(sf::gamma(-0.5), -2.0 * std::sqrt(kPi)) < 1e-13);
  CHECK_THROWS_AS(sf::gamma(-2.0), mrbf::DomainError);
}

TEST_CASE("J_nu trivial values and first zero") {
  CHECK(sf::bessel_j(0.0, 0.0) == 1.0);
  CHECK(std::fabs(sf::bessel_j(0.5, kPi)) < 1e-15);
  CHECK(std::fabs(sf::bessel_j(0.0, kJ0FirstZero)) < 1e-15);
  CHECK(sf::bessel_j(0.0, kJ0FirstZero - 1e-6) > 0.0);
  CHECK(sf::bessel_j(0.0, kJ0FirstZero + 1e-6) < 0.0);
}

TEST_CASE("J_nu against extended-precision reference") {
  for (const auto& ref : kJRef) {
    CAPTURE(ref.nu);
    CAPTURE(ref.x);
    CHECK(rel_err(sf::bessel_j(ref.nu, ref.x), ref.value) < 1e-12);
  }
}

TEST_CASE("Y_nu against extended-precision reference") {
  for (const auto& ref : kYRef) {
    CAPTURE(ref.nu);
    CAPTURE(ref.x);
    CHECK(rel_err(sf::bessel_y(ref.nu, ref.x), ref.value) < 1e-11);
  }
  CHECK_THROWS_AS(sf::bessel_y(0.0, 0.0), mrbf::SingularityError);
}

TEST_CASE("I_nu values and reference") {
  CHECK(sf::bessel_i(0.0, 0.0) == 1.0);
  CHECK(sf::bessel_i(1.0, 0.0) == 0.0);
  CHECK(rel_err(sf::bessel_i(0.5, 1.0), std::sqrt(2.0 / kPi) * std::sinh(1.0)) < 1e-12);
  for (const auto& ref : kIRef) {
    CAPTURE(ref.nu);
    CAPTURE(ref.x);
    CHECK(rel_err(sf::bessel_i(ref.nu, ref.x), ref.value) < 1e-12);
  }
  CHECK(rel_err(sf::bessel_i(0.0, 300.0), 4.4758473679350521e128) < 1e-12);
  CHECK_THROWS_AS(sf::bessel_i(0.0, 800.0), mrbf::OverflowError);
}

TEST_CASE("raw series reports non-convergence instead of a value") {
  const auto r = sf::bessel_i_series(0.0, 50.0, 5);
  CHECK_FALSE(r.converged);
  CHECK(r.terms_used >= 1);
  const auto ok = sf::bessel_i_series(0.0, 1.0);
  CHECK(ok.converged);
  CHECK(ok.terms_used >= 1);
  sf::SeriesOptions tight;
  tight.max_terms = 3;
  CHECK_THROWS_AS(sf::bessel_i(0.0, 10.0, tight), mrbf::ConvergenceError);
}

TEST_CASE("K_nu closed form, asymptotics, singularity and reference") {
  CHECK(rel_err(sf::bessel_k(0.5, 1.0), std::sqrt(kPi / 2.0) * std::exp(-1.0)) < 1e-12);
  const double k10 = sf::bessel_k(0.0, 10.0);
  CHECK(k10 > 0.0);
  CHECK(k10 < std::exp(-10.0));
  CHECK(rel_err(k10, std::sqrt(kPi / 20.0) * std::exp(-10.0)) < 0.02);
  CHECK_THROWS_AS(sf::bessel_k(1.0, 0.0), mrbf::SingularityError);
  for (const auto& ref : kKRef) {
    CAPTURE(ref.nu);
    CAPTURE(ref.x);
    CHECK(rel_err(sf::bessel_k(ref.nu, ref.x), ref.value) < 1e-10);
  }
}

TEST_CASE("half-order closed forms across [0.1, 20]") {
  for (double x : log_grid(0.1, 20.0, 40)) {
    CAPTURE(x);
    const double s = std::sqrt(2.0 / (kPi * x));
    CHECK(rel_err(sf::bessel_i(0.5, x), s * std::sinh(x)) < 1e-10);
    CHECK(rel_err(sf::bessel_k(0.5, x), std::sqrt(kPi / (2.0 * x)) * std::exp(-x)) < 1e-10);
    // Relative to the envelope: J_{1/2} has zeros on this interval.
    CHECK(std::fabs(sf::bessel_j(0.5, x) - s * std::sin(x)) < 1e-10 * s);
    CHECK(std::fabs(sf::bessel_y(0.5, x) + s * std::cos(x)) < 1e-10 * s);
  }
}

TEST_CASE("Wronskian I_nu K_{nu+1} + I_{nu+1} K_nu = 1/x") {
  for (double nu : {0.0, 0.5, 1.0, 1.5, 2.0}) {
    for (double x : log_grid(1e-3, 30.0, 50)) {
      CAPTURE(nu);
      CAPTURE(x);
      const double w = sf::bessel_i(nu, x) * sf::bessel_k(nu + 1.0, x) +
                       sf::bessel_i(nu + 1.0, x) * sf::bessel_k(nu, x);
      CHECK(rel_err(w, 1.0 / x) < 1e-9);
    }
  }
}

TEST_CASE("Wronskian J_{nu+1} Y_nu - J_nu Y_{nu+1} = 2/(pi x)") {
  for (double nu : {0.0, 0.5, 1.0, 1.5, 2.0, 0.3}) {
    for (double x : log_grid(1e-2, 30.0, 40)) {
      CAPTURE(nu);
      CAPTURE(x);
      const double w = sf::bessel_j(nu + 1.0, x) * sf::bessel_y(nu, x) -
                       sf::bessel_j(nu, x) * sf::bessel_y(nu + 1.0, x);
      CHECK(rel_err(w, 2.0 / (kPi * x)) < 1e-9);
    }
  }
}

TEST_CASE("J recurrence J_{nu-1} + J_{nu+1} = (2 nu / x) J_nu") {
  for (double nu : {0.5, 1.0, 1.5, 2.0, 3.25}) {
    for (double x : log_grid(1e-3, 30.0, 50)) {
      CAPTURE(nu);
      CAPTURE(x);
      const double lhs = sf::bessel_j(nu - 1.0, x) + sf::bessel_j(nu + 1.0, x);
      const double rhs = 2.0 * nu / x * sf::bessel_j(nu, x);
      const double scale = std::fabs(sf::bessel_j(nu - 1.0, x)) + std::fabs(sf::bessel_j(nu + 1.0, x));
      CHECK(std::fabs(lhs - rhs) <= 1e-9 * scale);
    }
  }
}

TEST_CASE("Kelvin functions: origin values and reference") {
  const auto k00 = sf::kelvin(0.0, 0.0, false);
  CHECK(k00.ber == 1.0);
  CHECK(k00.bei == 0.0);
  const auto k10 = sf::kelvin(1.0, 0.0, false);
  CHECK(k10.ber == 0.0);
  CHECK(k10.bei == 0.0);
  CHECK_THROWS_AS(sf::kelvin(0.0, 0.0, true), mrbf::SingularityError);
  for (const auto& ref : kKelvinRef) {
    CAPTURE(ref.nu);
    CAPTURE(ref.x);
    const auto v = sf::kelvin(ref.nu, ref.x);
    const double be_scale = std::hypot(ref.ber, ref.bei);
    const double ke_scale = std::hypot(ref.ker, ref.kei);
    CHECK(std::fabs(v.ber - ref.ber) < 1e-10 * be_scale);
    CHECK(std::fabs(v.bei - ref.bei) < 1e-10 * be_scale);
    CHECK(std::fabs(v.ker - ref.ker) < 1e-10 * ke_scale);
    CHECK(std::fabs(v.kei - ref.kei) < 1e-10 * ke_scale);
  }
}

TEST_CASE("ber/bei satisfy the Kelvin ODE by central differences") {
  // With w = ber + i bei: x^2 w'' + x w' - (i x^2 + nu^2) w = 0.
  const double h = 1e-4;
  for (double nu : {0.0, 0.5, 1.0}) {
    for (double x : {0.5, 1.0, 2.0, 4.0}) {
      CAPTURE(nu);
      CAPTURE(x);
      const auto wm = sf::kelvin_be(nu, x - h);
      const auto w0 = sf::kelvin_be(nu, x);
      const auto wp = sf::kelvin_be(nu, x + h);
      const auto d1 = (wp - wm) / (2.0 * h);
      const auto d2 = (wp - 2.0 * w0 + wm) / (h * h);
      const auto res = x * x * d2 + x * d1 - (std::complex<double>(0.0, x * x) + nu * nu) * w0;
      CHECK(std::abs(res) < 1e-4);
    }
  }
}

TEST_CASE("domain errors on bad orders and arguments") {
  CHECK_THROWS_AS(sf::bessel_j(-0.75, 1.0), mrbf::DomainError);
  CHECK_THROWS_AS(sf::bessel_i(0.0, -1.0), mrbf::DomainError);
  CHECK_THROWS_AS(sf::bessel_k(0.0, std::nan("")), mrbf::DomainError);
  CHECK_THROWS_AS(sf::kelvin(-1.0, 1.0), mrbf::DomainError);
}
