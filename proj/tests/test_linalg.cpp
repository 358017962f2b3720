#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "mrbf/errors.hpp"
#include "mrbf/geometry.hpp"
#include "mrbf/kernels.hpp"
#include "mrbf/linalg.hpp"

using mrbf::Matrix;
using mrbf::Structure;
using mrbf::Vector;
using mrbf::operator-;

namespace {

Matrix random_matrix(std::size_t n, std::size_t m, std::mt19937_64& rng, double diag_boost = 0.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix a(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) a(i, j) = u(rng);
  for (std::size_t i = 0; i < std::min(n, m); ++i) a(i, i) += diag_boost;
  return a;
}

Vector random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Symmetrise entrywise with the mirror element so the result is exactly centrosymmetric.
Matrix random_centro(std::size_t n, std::mt19937_64& rng) {
  Matrix a = random_matrix(n, n, rng, 2.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double v = 0.5 * (a(i, j) + a(n - 1 - i, n - 1 - j));
      a(i, j) = v;
      a(n - 1 - i, n - 1 - j) = v;
    }
  return a;
}

Eigen::MatrixXd to_eigen(const Matrix& a) {
  Eigen::MatrixXd e(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) e(i, j) = a(i, j);
  return e;
}

double norm2(const Vector& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double rel_diff(const Vector& a, const Vector& b) {
  Vector d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return norm2(d) / norm2(b);
}

double rel_residual(const Matrix& a, const Vector& x, const Vector& b) {
  Vector r = a * x;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return norm2(r) / norm2(b);
}

}  // namespace

TEST_CASE("lu solves the 2x2 example and random systems") {
  Matrix a(2, 2);
  a(0, 0) = 2;
  a(0, 1) = 1;
  a(1, 0) = 1;
  a(1, 1) = 3;
  const Vector x = mrbf::lu_solve(mrbf::lu_factor(a), {3, 5});
  CHECK(x[0] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(x[1] == doctest::Approx(1.4).epsilon(1e-15));

  std::mt19937_64 rng(7);
  for (std::size_t n : {1u, 5u, 50u, 120u}) {
    const Matrix m = random_matrix(n, n, rng, 1.0);
    const auto f = mrbf::lu_factor(m);
    for (int k = 0; k < 3; ++k) {
      const Vector b = random_vector(n, rng);
      CHECK(rel_residual(m, f.solve(b), b) <= 1e-10);
      // transpose solve against the explicit transpose
      const Vector xt = f.solve_transpose(b);
      CHECK(rel_residual(m.transpose(), xt, b) <= 1e-10);
    }
  }
}

TEST_CASE("lu reuse reproduces a fresh solve") {
  std::mt19937_64 rng(11);
  const Matrix m = random_matrix(60, 60, rng, 0.5);
  const auto f = mrbf::lu_factor(m);
  for (int k = 0; k < 5; ++k) {
    const Vector b = random_vector(60, rng);
    CHECK(rel_diff(f.solve(b), mrbf::lu_solve(mrbf::lu_factor(m), b)) <= 1e-12);
  }
}

TEST_CASE("singular matrices report the failing pivot") {
  Matrix z(2, 2);
  z(0, 0) = 1;
  z(0, 1) = 2;
  z(1, 0) = 2;
  z(1, 1) = 4;
  try {
    (void)mrbf::lu_factor(z);
    FAIL("expected SingularMatrixError");
  } catch (const mrbf::SingularMatrixError& e) {
    CHECK(e.pivot_index() == 1);
  }
  CHECK_THROWS_AS(mrbf::lu_factor(Matrix(3, 3)), mrbf::SingularMatrixError);
  CHECK_THROWS_AS(mrbf::lu_factor(Matrix(2, 3, 1.0)), mrbf::ParameterError);
}

TEST_CASE("least squares") {
  Matrix a(2, 1, 1.0);
  CHECK(mrbf::least_squares_solve(a, {0, 2})[0] == doctest::Approx(1.0).epsilon(1e-15));

  std::mt19937_64 rng(3);
  for (auto [m, n] : {std::pair<std::size_t, std::size_t>{40, 10}, {120, 60}, {30, 30}}) {
    const Matrix q = random_matrix(m, n, rng);
    const Vector b = random_vector(m, rng);
    const Vector x = mrbf::least_squares_solve(q, b);
    const Eigen::VectorXd xe =
        to_eigen(q).colPivHouseholderQr().solve(Eigen::Map<const Eigen::VectorXd>(b.data(), m));
    CHECK(rel_diff(x, Vector(xe.data(), xe.data() + n)) <= 1e-11);
  }

  // Exactly consistent overdetermined system.
  const Matrix q = random_matrix(50, 8, rng);
  const Vector xt = random_vector(8, rng);
  CHECK(rel_diff(mrbf::least_squares_solve(q, q * xt), xt) <= 1e-12);

  // Dependent columns: rank 2 out of 3.
  Matrix r(5, 3);
  for (std::size_t i = 0; i < 5; ++i) {
    r(i, 0) = 1.0 + i;
    r(i, 1) = std::sin(1.0 + i);
    r(i, 2) = 2.0 * r(i, 0) - r(i, 1);
  }
  try {
    (void)mrbf::least_squares_solve(r, Vector(5, 1.0));
    FAIL("expected RankError");
  } catch (const mrbf::RankError& e) {
    CHECK(e.numerical_rank() == 2);
  }
  CHECK_THROWS_AS(mrbf::least_squares_solve(Matrix(2, 3, 1.0), Vector(2, 1.0)), mrbf::RankError);
}

TEST_CASE("structure detection") {
  Matrix c(2, 2);
  c(0, 0) = 3;
  c(0, 1) = 5;
  c(1, 0) = 5;
  c(1, 1) = 3;
  CHECK(mrbf::detect_structure(c) == Structure::Centrosymmetric);
  Matrix s(2, 2);
  s(0, 1) = 4;
  s(1, 0) = -4;
  CHECK(mrbf::detect_structure(s) == Structure::SkewCentrosymmetric);
  Matrix g = c;
  g(0, 0) = 3.1;
  CHECK(mrbf::detect_structure(g) == Structure::General);
  CHECK(mrbf::detect_structure(Matrix(2, 3)) == Structure::General);

  // J-conjugation invariance
  std::mt19937_64 rng(5);
  for (std::size_t n : {6u, 7u}) {
    const Matrix a = random_centro(n, rng);
    Matrix jaj(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) jaj(i, j) = a(n - 1 - i, n - 1 - j);
    CHECK(mrbf::detect_structure(a) == Structure::Centrosymmetric);
    CHECK(mrbf::detect_structure(jaj) == Structure::Centrosymmetric);
  }
}

TEST_CASE("symmetric clouds give centro and skew-centro kernel matrices") {
  const auto cloud = mrbf::symmetric_ordering(
      mrbf::make_ordered_cloud(1, mrbf::sample_interval(1.0, 11).of_kind(mrbf::NodeKind::Interior)));
  const std::size_t n = cloud.size();
  REQUIRE(n == 11);
  const auto mq = mrbf::multiquadric(0.4);
  Matrix even(n, n), second(n, n), odd(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto rc = mrbf::radial_calculus(*mq, cloud[i].position - cloud[j].position, 1, 2);
      even(i, j) = rc.value;
      second(i, j) = rc.hess[0][0];
      odd(i, j) = rc.grad[0];
    }
  CHECK(mrbf::detect_structure(even, 0.0) == Structure::Centrosymmetric);
  CHECK(mrbf::detect_structure(second, 0.0) == Structure::Centrosymmetric);
  CHECK(mrbf::detect_structure(odd, 0.0) == Structure::SkewCentrosymmetric);

  // 2D distance matrix of a reordered circle cloud
  const auto circ = mrbf::symmetric_ordering(mrbf::sample_circle(1.0, 24));
  Matrix d(circ.size(), circ.size());
  for (std::size_t i = 0; i < circ.size(); ++i)
    for (std::size_t j = 0; j < circ.size(); ++j) d(i, j) = mrbf::norm(circ[i].position - circ[j].position);
  CHECK(mrbf::detect_structure(d, 0.0) == Structure::Centrosymmetric);
}

TEST_CASE("centrosymmetric split matches full LU") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 40);
    const Matrix a = random_centro(n, rng);
    const Vector b = random_vector(n, rng);
    CAPTURE(n);
    CHECK(rel_diff(mrbf::centrosymmetric_solve(a, b), mrbf::lu_solve(mrbf::lu_factor(a), b)) <= 1e-11);
    const auto f = mrbf::centrosymmetric_factor(a);
    CHECK(rel_diff(f.solve_transpose(b), mrbf::lu_factor(a).solve_transpose(b)) <= 1e-11);
  }
  const Matrix a1 = random_centro(1, rng);
  CHECK(mrbf::centrosymmetric_solve(a1, {2.0})[0] == doctest::Approx(2.0 / a1(0, 0)));

  std::mt19937_64 rng2(17);
  CHECK_THROWS_AS(mrbf::centrosymmetric_solve(random_matrix(6, 6, rng2, 1.0), Vector(6, 1.0)),
                  mrbf::StructureError);

  const Matrix c = random_centro(9, rng);
  const auto fs = mrbf::factor_system(c, true);
  CHECK(fs.structure() == Structure::Centrosymmetric);
  CHECK(mrbf::factor_system(c, false).structure() == Structure::General);
}

TEST_CASE("condition estimate against the SVD inverse") {
  std::mt19937_64 rng(19);
  auto check = [](const Matrix& a, double est) {
    const Eigen::MatrixXd e = to_eigen(a);
    // 1-norm condition with the inverse assembled from the SVD
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(e, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::MatrixXd inv =
        svd.matrixV() * svd.singularValues().cwiseInverse().asDiagonal() * svd.matrixU().transpose();
    const double k1 = e.cwiseAbs().colwise().sum().maxCoeff() * inv.cwiseAbs().colwise().sum().maxCoeff();
    CAPTURE(k1);
    CAPTURE(est);
    CHECK(est <= 10.0 * k1);
    CHECK(est >= 0.1 * k1);
    CHECK(est <= k1 * (1.0 + 1e-6));
    CHECK(est >= 0.3 * k1);
  };
  for (std::size_t n : {10u, 50u, 200u}) {
    const Matrix a = random_matrix(n, n, rng, 3.0);
    check(a, mrbf::condition_estimate(mrbf::lu_factor(a)));
  }
  // Hilbert: badly conditioned
  Matrix h(8, 8);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) h(i, j) = 1.0 / static_cast<double>(i + j + 1);
  check(h, mrbf::condition_estimate(mrbf::lu_factor(h)));
  // MQ interpolation matrix through the centrosymmetric path
  const auto cloud = mrbf::symmetric_ordering(mrbf::sample_circle(1.0, 40));
  const auto mq = mrbf::multiquadric(0.5);
  Matrix m(cloud.size(), cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i)
    for (std::size_t j = 0; j < cloud.size(); ++j)
      m(i, j) = mq->evaluate(mrbf::norm(cloud[i].position - cloud[j].position));
  const auto f = mrbf::factor_system(m, true);
  REQUIRE(f.structure() == Structure::Centrosymmetric);
  check(m, mrbf::condition_estimate(f));
  const Matrix c = random_centro(31, rng);
  check(c, mrbf::condition_estimate(mrbf::centrosymmetric_factor(c)));
}

TEST_CASE("truncated SVD") {
  std::mt19937_64 rng(23);
  const Matrix a = random_matrix(30, 20, rng);
  const auto f = mrbf::svd_factor(a);
  const Eigen::JacobiSVD<Eigen::MatrixXd> ref(to_eigen(a), Eigen::ComputeThinU | Eigen::ComputeThinV);
  REQUIRE(f.singular_values().size() == 20);
  for (std::size_t k = 0; k < 20; ++k)
    CHECK(f.singular_values()[k] == doctest::Approx(ref.singularValues()(static_cast<Eigen::Index>(k))).epsilon(1e-12));
  CHECK(f.rank() == 20);
  CHECK(f.condition() == doctest::Approx(ref.singularValues()(0) / ref.singularValues()(19)).epsilon(1e-10));

  // Full rank square: same answer as LU.
  const Matrix sq = random_matrix(25, 25, rng, 2.0);
  const Vector b = random_vector(25, rng);
  CHECK(rel_diff(mrbf::svd_factor(sq).solve(b), mrbf::lu_factor(sq).solve(b)) < 1e-12);

  // Rank 3 by construction: the minimum-norm solution from the pseudo-inverse.
  Matrix low(12, 12);
  const Matrix u = random_matrix(12, 3, rng), v = random_matrix(3, 12, rng);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 12; ++j)
      for (std::size_t k = 0; k < 3; ++k) low(i, j) += u(i, k) * v(k, j);
  const auto g = mrbf::svd_factor(low, 1e-10);
  CHECK(g.rank() == 3);
  const Vector rhs = random_vector(12, rng);
  const Eigen::VectorXd want = to_eigen(low).completeOrthogonalDecomposition().solve(Eigen::Map<const Eigen::VectorXd>(rhs.data(), 12));
  CHECK(rel_diff(g.solve(rhs), Vector(want.data(), want.data() + 12)) < 1e-10);

  CHECK_THROWS_AS(mrbf::svd_factor(random_matrix(3, 5, rng)), mrbf::ParameterError);
  CHECK_THROWS_AS(f.solve(Vector(3)), mrbf::ParameterError);
}

TEST_CASE("binary matrix dump round trip") {
  Matrix a(2, 3);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) a(i, j) = 0.1 * static_cast<double>(i * 3 + j) - 0.25;
  std::stringstream ss;
  mrbf::write_matrix_binary(a, ss);
  const std::string bytes = ss.str();
  REQUIRE(bytes.size() == 16 + 6 * 8);
  CHECK(static_cast<unsigned char>(bytes[0]) == 2);
  CHECK(static_cast<unsigned char>(bytes[8]) == 3);
  const Matrix b = mrbf::read_matrix_binary(ss);
  CHECK(b.rows() == 2);
  CHECK(b.cols() == 3);
  CHECK(b.data() == a.data());
  std::stringstream bad(bytes.substr(0, 20));
  CHECK_THROWS_AS(mrbf::read_matrix_binary(bad), mrbf::ParameterError);
}
