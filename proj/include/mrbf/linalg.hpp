#pragma once

// Dense direct solvers: LU with reuse, least squares by Householder QR and
// the half-size split of centrosymmetric systems.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

namespace mrbf {

using Vector = std::vector<double>;

/// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Vector operator*(const Vector& x) const;
  Matrix transpose() const;
  double max_abs() const;
  double norm1() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class Structure { General, Centrosymmetric, SkewCentrosymmetric };

const char* to_string(Structure s);

struct LinearSystem {
  Matrix matrix;
  std::vector<Vector> rhs;
  Structure structure_hint = Structure::General;
};

/// Centrosymmetric iff max|a_ij - a_{N-1-i,N-1-j}| <= tol * max|A|; skew
/// analogously with a plus sign. Centrosymmetry wins when both hold (A = 0).
Structure detect_structure(const Matrix& a, double tol = 1e-12);

/// Partial-pivoting LU, reusable across right-hand sides.
class LuFactorization {
 public:
  std::size_t size() const { return n_; }
  Vector solve(const Vector& b) const;
  /// Solves A^T x = b with the same factors.
  Vector solve_transpose(const Vector& b) const;
  double matrix_norm1() const { return norm1_; }

 private:
  friend LuFactorization lu_factor(const Matrix& a, double pivot_tol);
  std::size_t n_ = 0;
  Matrix lu_;
  std::vector<std::size_t> perm_;  // row i of PA is row perm_[i] of A
  double norm1_ = 0.0;
};

inline constexpr double kDefaultPivotTolerance = 1e-14;

/// Throws SingularMatrixError (with the pivot index) when a pivot falls
/// below pivot_tol * max|A|.
LuFactorization lu_factor(const Matrix& a, double pivot_tol = kDefaultPivotTolerance);
Vector lu_solve(const LuFactorization& f, const Vector& b);

/// Minimiser of |Ax - b|_2 via column-pivoted Householder QR. Throws
/// RankError with the numerical rank when columns are dependent.
Vector least_squares_solve(const Matrix& a, const Vector& b, double rank_tol = -1.0);
Vector least_squares_solve(const LinearSystem& system);

/// Two half-size LU factorizations of a verified centrosymmetric matrix
/// (odd N uses the bordered split for the centre row and column).
class CentrosymmetricFactorization {
 public:
  std::size_t size() const { return n_; }
  Vector solve(const Vector& b) const;
  Vector solve_transpose(const Vector& b) const;
  double matrix_norm1() const { return norm1_; }

 private:
  friend CentrosymmetricFactorization centrosymmetric_factor(const Matrix& a, double tol, double pivot_tol);
  std::size_t n_ = 0;
  LuFactorization plus_;   // A11 + A12 J  (bordered when N is odd)
  LuFactorization minus_;  // A11 - A12 J
  double norm1_ = 0.0;
};

/// Throws StructureError when `a` is not centrosymmetric within `tol`.
CentrosymmetricFactorization centrosymmetric_factor(const Matrix& a, double tol = 1e-12,
                                                    double pivot_tol = kDefaultPivotTolerance);
Vector centrosymmetric_solve(const Matrix& a, const Vector& b, double tol = 1e-12);
Vector centrosymmetric_solve(const LinearSystem& system, double tol = 1e-12);

/// Either factorization behind one interface; the centrosymmetric path is
/// taken only when requested and detected.
class SystemFactorization {
 public:
  Structure structure() const { return structure_; }
  std::size_t size() const;
  Vector solve(const Vector& b) const;
  Vector solve_transpose(const Vector& b) const;
  double matrix_norm1() const;

 private:
  friend SystemFactorization factor_system(const Matrix& a, bool exploit_structure, double tol, double pivot_tol);
  Structure structure_ = Structure::General;
  std::shared_ptr<const LuFactorization> lu_;
  std::shared_ptr<const CentrosymmetricFactorization> centro_;
};

SystemFactorization factor_system(const Matrix& a, bool exploit_structure = false, double tol = 1e-12,
                                  double pivot_tol = kDefaultPivotTolerance);

/// Thin SVD by one-sided Jacobi rotations, applied as a truncated
/// pseudo-inverse: singular values below rel_tol * sigma_max are dropped.
/// Used where a square system is numerically rank deficient by design and
/// the minimum-norm solution is wanted (boundary-type kernel matrices).
class SvdFactorization {
 public:
  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }
  std::size_t rank() const { return rank_; }
  const Vector& singular_values() const { return sigma_; }
  /// sigma_max / sigma_min over all singular values (2-norm condition).
  double condition() const;
  Vector solve(const Vector& b) const;

 private:
  friend SvdFactorization svd_factor(const Matrix& a, double rel_tol);
  std::size_t m_ = 0, n_ = 0, rank_ = 0;
  std::vector<Vector> u_;  // left singular vectors (columns), sorted by sigma
  std::vector<Vector> v_;  // right singular vectors
  Vector sigma_;
};

SvdFactorization svd_factor(const Matrix& a, double rel_tol = 1e-10);

/// Hager/Higham estimate of the 1-norm condition number.
double condition_estimate(const LuFactorization& f);
double condition_estimate(const CentrosymmetricFactorization& f);
double condition_estimate(const SystemFactorization& f);

/// 16-byte header (rows, cols as little-endian uint64) then row-major doubles.
void write_matrix_binary(const Matrix& a, std::ostream& os);
Matrix read_matrix_binary(std::istream& is);

}  // namespace mrbf
