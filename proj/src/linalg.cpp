#include "mrbf/linalg.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "mrbf/errors.hpp"

namespace mrbf {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector Matrix::operator*(const Vector& x) const {
  if (x.size() != cols_) throw ParameterError("matrix-vector size mismatch");
  Vector y(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* a = row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += a[j] * x[j];
    y[i] = s;
  }
  return y;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::fabs(v));
  return m;
}

double Matrix::norm1() const {
  Vector col(cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) col[j] += std::fabs((*this)(i, j));
  double m = 0.0;
  for (double c : col) m = std::max(m, c);
  return m;
}

const char* to_string(Structure s) {
  switch (s) {
    case Structure::General: return "general";
    case Structure::Centrosymmetric: return "centrosymmetric";
    case Structure::SkewCentrosymmetric: return "skew-centrosymmetric";
  }
  return "?";
}

Structure detect_structure(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) return Structure::General;
  const std::size_t n = a.rows();
  const double scale = tol * a.max_abs();
  double dc = 0.0, ds = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double x = a(i, j), y = a(n - 1 - i, n - 1 - j);
      dc = std::max(dc, std::fabs(x - y));
      ds = std::max(ds, std::fabs(x + y));
    }
  }
  if (dc <= scale) return Structure::Centrosymmetric;
  if (ds <= scale) return Structure::SkewCentrosymmetric;
  return Structure::General;
}

// ---------------------------------------------------------------- LU

LuFactorization lu_factor(const Matrix& a, double pivot_tol) {
  if (a.rows() != a.cols()) throw ParameterError("lu_factor needs a square matrix");
  const std::size_t n = a.rows();
  LuFactorization f;
  f.n_ = n;
  f.lu_ = a;
  f.norm1_ = a.norm1();
  f.perm_.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.perm_[i] = i;
  const double floor = pivot_tol * a.max_abs();
  Matrix& m = f.lu_;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::fabs(m(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::fabs(m(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (!(best > floor))
      throw SingularMatrixError("matrix is singular to working precision at pivot " + std::to_string(k), k);
    if (p != k) {
      std::swap_ranges(m.row(k), m.row(k) + n, m.row(p));
      std::swap(f.perm_[k], f.perm_[p]);
    }
    const double* rk = m.row(k);
    const double inv = 1.0 / rk[k];
    for (std::size_t i = k + 1; i < n; ++i) {
      double* ri = m.row(i);
      const double l = ri[k] * inv;
      ri[k] = l;
      if (l == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) ri[j] -= l * rk[j];
    }
  }
  return f;
}

Vector LuFactorization::solve(const Vector& b) const {
  if (b.size() != n_) throw ParameterError("right-hand side has the wrong length");
  Vector x(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    const double* r = lu_.row(i);
    double s = b[perm_[i]];
    for (std::size_t j = 0; j < i; ++j) s -= r[j] * x[j];
    x[i] = s;
  }
  for (std::size_t i = n_; i-- > 0;) {
    const double* r = lu_.row(i);
    double s = x[i];
    for (std::size_t j = i + 1; j < n_; ++j) s -= r[j] * x[j];
    x[i] = s / r[i];
  }
  return x;
}

Vector LuFactorization::solve_transpose(const Vector& b) const {
  if (b.size() != n_) throw ParameterError("right-hand side has the wrong length");
  // A^T = U^T L^T P: forward with U^T, backward with unit L^T, then undo P.
  Vector z = b;
  for (std::size_t k = 0; k < n_; ++k) {
    const double* r = lu_.row(k);
    z[k] /= r[k];
    const double zk = z[k];
    for (std::size_t j = k + 1; j < n_; ++j) z[j] -= r[j] * zk;
  }
  for (std::size_t k = n_; k-- > 0;) {
    const double* r = lu_.row(k);
    const double zk = z[k];
    for (std::size_t j = 0; j < k; ++j) z[j] -= r[j] * zk;
  }
  Vector x(n_);
  for (std::size_t i = 0; i < n_; ++i) x[perm_[i]] = z[i];
  return x;
}

Vector lu_solve(const LuFactorization& f, const Vector& b) { return f.solve(b); }

// ---------------------------------------------------------------- QR

Vector least_squares_solve(const Matrix& a, const Vector& b, double rank_tol) {
  const std::size_t m = a.rows(), n = a.cols();
  if (b.size() != m) throw ParameterError("right-hand side has the wrong length");
  if (n == 0) return {};
  if (m < n) throw RankError("least squares needs at least as many rows as columns", m);
  if (rank_tol < 0.0) rank_tol = 10.0 * static_cast<double>(m) * std::numeric_limits<double>::epsilon();

  // Column-major working copy: Householder updates then run down contiguous memory.
  std::vector<Vector> col(n, Vector(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) col[j][i] = a(i, j);
  Vector rhs = b;
  std::vector<std::size_t> piv(n);
  for (std::size_t j = 0; j < n; ++j) piv[j] = j;
  Vector diag(n);
  double r00 = 0.0;

  for (std::size_t k = 0; k < n; ++k) {
    // Exact remaining column norms; downdating formulas lose accuracy on
    // the ill-conditioned matrices this is used for.
    std::size_t p = k;
    double best = -1.0;
    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += col[j][i] * col[j][i];
      if (s > best) {
        best = s;
        p = j;
      }
    }
    if (p != k) {
      std::swap(col[p], col[k]);
      std::swap(piv[p], piv[k]);
    }
    Vector& v = col[k];
    const double alpha = std::sqrt(best);
    if (k == 0) r00 = alpha;
    if (!(alpha > rank_tol * r00) || alpha == 0.0)
      throw RankError("matrix is rank deficient (numerical rank " + std::to_string(k) + ")", k);
    const double rkk = v[k] > 0.0 ? -alpha : alpha;
    v[k] -= rkk;  // v now holds the Householder vector (rows k..m-1)
    const double vnorm2 = 2.0 * alpha * (alpha + std::fabs(v[k] + rkk));  // |v|^2 = 2 alpha (alpha + |x_k|)
    auto reflect = [&](Vector& w) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += v[i] * w[i];
      s = 2.0 * s / vnorm2;
      for (std::size_t i = k; i < m; ++i) w[i] -= s * v[i];
    };
    for (std::size_t j = k + 1; j < n; ++j) reflect(col[j]);
    reflect(rhs);
    diag[k] = rkk;
  }

  Vector y(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= col[j][i] * y[j];
    y[i] = s / diag[i];
  }
  Vector x(n);
  for (std::size_t j = 0; j < n; ++j) x[piv[j]] = y[j];
  return x;
}

Vector least_squares_solve(const LinearSystem& system) {
  if (system.rhs.empty()) throw ParameterError("linear system has no right-hand side");
  return least_squares_solve(system.matrix, system.rhs.front());
}

// ------------------------------------------------------- centrosymmetric

namespace {

// Reduced systems for A = [[A11, a1, A12], [r1^T, c, r1^T J], [J A12 J, J a1, J A11 J]]
// (a1, r1, c absent for even N).  With y = x1 + J x2 and z = x1 - J x2:
//   [A11 + A12 J, 2 a1; r1^T, c] [y; xc] = [b1 + J b3; bc]
//   (A11 - A12 J) z = b1 - J b3
struct HalfSystems {
  Matrix plus, minus;
};

HalfSystems split(const Matrix& a) {
  const std::size_t n = a.rows(), h = n / 2;
  const bool odd = n % 2 == 1;
  HalfSystems s{Matrix(h + (odd ? 1 : 0), h + (odd ? 1 : 0)), Matrix(h, h)};
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < h; ++j) {
      const double a11 = a(i, j), a12j = a(i, n - 1 - j);
      s.plus(i, j) = a11 + a12j;
      s.minus(i, j) = a11 - a12j;
    }
  }
  if (odd) {
    for (std::size_t i = 0; i < h; ++i) {
      s.plus(i, h) = 2.0 * a(i, h);
      s.plus(h, i) = a(h, i);
    }
    s.plus(h, h) = a(h, h);
  }
  return s;
}

}  // namespace

CentrosymmetricFactorization centrosymmetric_factor(const Matrix& a, double tol, double pivot_tol) {
  if (a.rows() != a.cols()) throw StructureError("centrosymmetric solve needs a square matrix");
  if (detect_structure(a, tol) != Structure::Centrosymmetric)
    throw StructureError("matrix is not centrosymmetric within tolerance");
  CentrosymmetricFactorization f;
  f.n_ = a.rows();
  f.norm1_ = a.norm1();
  HalfSystems s = split(a);
  // Pivot floor relative to the full matrix, as for a full LU.
  const double rel = pivot_tol * a.max_abs();
  const double mp = s.plus.max_abs(), mm = s.minus.max_abs();
  f.plus_ = lu_factor(s.plus, mp > 0.0 ? rel / mp : pivot_tol);
  if (s.minus.rows() > 0) f.minus_ = lu_factor(s.minus, mm > 0.0 ? rel / mm : pivot_tol);
  return f;
}

Vector CentrosymmetricFactorization::solve(const Vector& b) const {
  if (b.size() != n_) throw ParameterError("right-hand side has the wrong length");
  const std::size_t h = n_ / 2;
  const bool odd = n_ % 2 == 1;
  Vector bp(h + (odd ? 1 : 0)), bm(h);
  for (std::size_t i = 0; i < h; ++i) {
    bp[i] = b[i] + b[n_ - 1 - i];
    bm[i] = b[i] - b[n_ - 1 - i];
  }
  if (odd) bp[h] = b[h];
  const Vector y = plus_.solve(bp);
  const Vector z = h > 0 ? minus_.solve(bm) : Vector{};
  Vector x(n_);
  for (std::size_t i = 0; i < h; ++i) {
    x[i] = 0.5 * (y[i] + z[i]);
    x[n_ - 1 - i] = 0.5 * (y[i] - z[i]);
  }
  if (odd) x[h] = y[h];
  return x;
}

Vector CentrosymmetricFactorization::solve_transpose(const Vector& b) const {
  // A^T is centrosymmetric; its reduced systems are the transposes of ours
  // except for the border, where the factor 2 moves from column to row:
  // M_T = D^-1 M^T D with D = diag(I, 2).
  if (b.size() != n_) throw ParameterError("right-hand side has the wrong length");
  const std::size_t h = n_ / 2;
  const bool odd = n_ % 2 == 1;
  Vector bp(h + (odd ? 1 : 0)), bm(h);
  for (std::size_t i = 0; i < h; ++i) {
    bp[i] = b[i] + b[n_ - 1 - i];
    bm[i] = b[i] - b[n_ - 1 - i];
  }
  if (odd) bp[h] = 2.0 * b[h];
  Vector y = plus_.solve_transpose(bp);
  if (odd) y[h] *= 0.5;
  const Vector z = h > 0 ? minus_.solve_transpose(bm) : Vector{};
  Vector x(n_);
  for (std::size_t i = 0; i < h; ++i) {
    x[i] = 0.5 * (y[i] + z[i]);
    x[n_ - 1 - i] = 0.5 * (y[i] - z[i]);
  }
  if (odd) x[h] = y[h];
  return x;
}

Vector centrosymmetric_solve(const Matrix& a, const Vector& b, double tol) {
  return centrosymmetric_factor(a, tol).solve(b);
}

Vector centrosymmetric_solve(const LinearSystem& system, double tol) {
  if (system.rhs.empty()) throw ParameterError("linear system has no right-hand side");
  return centrosymmetric_solve(system.matrix, system.rhs.front(), tol);
}

// ------------------------------------------------------------- facade

SystemFactorization factor_system(const Matrix& a, bool exploit_structure, double tol, double pivot_tol) {
  SystemFactorization f;
  if (exploit_structure && detect_structure(a, tol) == Structure::Centrosymmetric) {
    f.structure_ = Structure::Centrosymmetric;
    f.centro_ = std::make_shared<const CentrosymmetricFactorization>(centrosymmetric_factor(a, tol, pivot_tol));
  } else {
    f.lu_ = std::make_shared<const LuFactorization>(lu_factor(a, pivot_tol));
  }
  return f;
}

std::size_t SystemFactorization::size() const { return centro_ ? centro_->size() : lu_->size(); }

Vector SystemFactorization::solve(const Vector& b) const {
  return centro_ ? centro_->solve(b) : lu_->solve(b);
}

Vector SystemFactorization::solve_transpose(const Vector& b) const {
  return centro_ ? centro_->solve_transpose(b) : lu_->solve_transpose(b);
}

double SystemFactorization::matrix_norm1() const {
  return centro_ ? centro_->matrix_norm1() : lu_->matrix_norm1();
}

// ------------------------------------------------------------------ SVD

SvdFactorization svd_factor(const Matrix& a, double rel_tol) {
  const std::size_t m = a.rows(), n = a.cols();
  if (m < n) throw ParameterError("svd_factor needs rows >= cols");
  std::vector<Vector> w(n, Vector(m)), v(n, Vector(n, 0.0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) w[j][i] = a(i, j);
  for (std::size_t j = 0; j < n; ++j) v[j][j] = 1.0;

  auto dotv = [](const Vector& x, const Vector& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
  };
  const double eps = std::numeric_limits<double>::epsilon();
  Vector nrm(n);
  for (std::size_t j = 0; j < n; ++j) nrm[j] = dotv(w[j], w[j]);
  bool rotated = true;
  for (int sweep = 0; sweep < 60 && rotated; ++sweep) {
    rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = nrm[p], beta = nrm[q];
        const double gamma = dotv(w[p], w[q]);
        if (gamma == 0.0 || std::fabs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t), sn = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = w[p][i], y = w[q][i];
          w[p][i] = c * x - sn * y;
          w[q][i] = sn * x + c * y;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double x = v[p][i], y = v[q][i];
          v[p][i] = c * x - sn * y;
          v[q][i] = sn * x + c * y;
        }
        nrm[p] = dotv(w[p], w[p]);
        nrm[q] = dotv(w[q], w[q]);
      }
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t j = 0; j < n; ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return nrm[x] > nrm[y]; });
  SvdFactorization f;
  f.m_ = m;
  f.n_ = n;
  f.sigma_.resize(n);
  const double smax = n > 0 ? std::sqrt(nrm[order[0]]) : 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    const double sg = std::sqrt(nrm[j]);
    f.sigma_[k] = sg;
    f.v_.push_back(v[j]);
    Vector u = w[j];
    if (sg > 0.0)
      for (double& x : u) x /= sg;
    f.u_.push_back(std::move(u));
    if (sg > rel_tol * smax && sg > 0.0) f.rank_ = k + 1;
  }
  return f;
}

double SvdFactorization::condition() const {
  if (sigma_.empty()) return 0.0;
  return sigma_.back() > 0.0 ? sigma_.front() / sigma_.back() : std::numeric_limits<double>::infinity();
}

Vector SvdFactorization::solve(const Vector& b) const {
  if (b.size() != m_) throw ParameterError("right-hand side has the wrong length");
  Vector x(n_, 0.0);
  for (std::size_t k = 0; k < rank_; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < m_; ++i) s += u_[k][i] * b[i];
    s /= sigma_[k];
    for (std::size_t i = 0; i < n_; ++i) x[i] += s * v_[k][i];
  }
  return x;
}

// ---------------------------------------------------- condition number

namespace {

// Higham's refinement of Hager's method (LAPACK xLACON) for |A^-1|_1.
template <class F>
double inverse_norm1(const F& f) {
  const std::size_t n = f.size();
  if (n == 0) return 0.0;
  auto norm1 = [](const Vector& v) {
    double s = 0.0;
    for (double x : v) s += std::fabs(x);
    return s;
  };
  Vector x(n, 1.0 / static_cast<double>(n));
  double est = 0.0;
  std::size_t last = n;
  for (int iter = 0; iter < 5; ++iter) {
    Vector y = f.solve(x);
    const double ny = norm1(y);
    if (iter > 0 && ny <= est) break;
    est = ny;
    Vector s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = y[i] >= 0.0 ? 1.0 : -1.0;
    Vector z = f.solve_transpose(s);
    std::size_t j = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::fabs(z[i]) > std::fabs(z[j])) j = i;
    if (iter > 0 && j == last) break;
    last = j;
    std::fill(x.begin(), x.end(), 0.0);
    x[j] = 1.0;
  }
  // Alternative lower bound from an alternating-sign probe.
  Vector alt(n);
  for (std::size_t i = 0; i < n; ++i)
    alt[i] = (i % 2 == 0 ? 1.0 : -1.0) * (1.0 + static_cast<double>(i) / std::max<std::size_t>(n - 1, 1));
  const double t = 2.0 * norm1(f.solve(alt)) / (3.0 * static_cast<double>(n));
  return std::max(est, t);
}

}  // namespace

double condition_estimate(const LuFactorization& f) { return f.matrix_norm1() * inverse_norm1(f); }

double condition_estimate(const CentrosymmetricFactorization& f) {
  return f.matrix_norm1() * inverse_norm1(f);
}

double condition_estimate(const SystemFactorization& f) { return f.matrix_norm1() * inverse_norm1(f); }

// ------------------------------------------------------------ binary io

namespace {

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char buf[8];
  if (!is.read(reinterpret_cast<char*>(buf), 8)) throw ParameterError("truncated matrix header");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void write_matrix_binary(const Matrix& a, std::ostream& os) {
  static_assert(std::endian::native == std::endian::little, "matrix dumps assume a little-endian host");
  put_u64(os, a.rows());
  put_u64(os, a.cols());
  os.write(reinterpret_cast<const char*>(a.data().data()),
           static_cast<std::streamsize>(a.data().size() * sizeof(double)));
  if (!os) throw ParameterError("failed to write matrix");
}

Matrix read_matrix_binary(std::istream& is) {
  const std::uint64_t r = get_u64(is), c = get_u64(is);
  if (r > (1u << 24) || c > (1u << 24)) throw ParameterError("implausible matrix dimensions");
  Matrix a(r, c);
  if (!is.read(reinterpret_cast<char*>(a.data().data()),
               static_cast<std::streamsize>(a.data().size() * sizeof(double))))
    throw ParameterError("truncated matrix data");
  return a;
}

}  // namespace mrbf
