// Lattice bases, Iwasawa coordinates and the dual norm.
//
// A lattice is X·Z^n where the columns of the invertible matrix X are the
// generators. Everything downstream takes a LatticeBasis by const reference;
// the type is immutable once built.

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace latticelab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// Raised for inputs that violate a documented precondition.
class LatticeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inputs whose determinant is below this fraction of scale^n are rejected
/// as numerically singular.
inline constexpr double kConditionGuard = 1e-12;

class UnimodularMatrix;

class LatticeBasis {
 public:
  /// Columns of `columns` generate the lattice. Throws LatticeError if the
  /// matrix is not square, n < 2, has non-finite entries or is singular.
  explicit LatticeBasis(Matrix columns);

  static LatticeBasis identity(int n);
  static LatticeBasis diagonal(std::span<const double> entries);

  int dim() const { return static_cast<int>(x_.rows()); }
  const Matrix& matrix() const { return x_; }
  double det() const { return det_; }
  double abs_det() const { return std::abs(det_); }

  /// (X^{-1})^T, the generator matrix of the dual lattice.
  const Matrix& dual() const { return dual_; }

  /// Largest singular value of X.
  double operator_norm() const;

  LatticeBasis scaled(double r) const;
  /// K·X, e.g. for rotations.
  LatticeBasis left_multiplied(const Matrix& k) const;
  /// X·U; generates the same lattice.
  LatticeBasis right_multiplied(const UnimodularMatrix& u) const;

 private:
  Matrix x_;
  Matrix dual_;
  double det_ = 0.0;
};

/// Integer matrix with determinant exactly +1 or -1.
class UnimodularMatrix {
 public:
  explicit UnimodularMatrix(IntMatrix entries);
  static UnimodularMatrix identity(int n);

  const IntMatrix& entries() const { return u_; }
  int dim() const { return static_cast<int>(u_.rows()); }
  std::int64_t det() const { return det_; }
  Matrix as_real() const { return u_.cast<double>(); }

 private:
  IntMatrix u_;
  std::int64_t det_ = 0;
};

/// Exact determinant of a small integer matrix (fraction-free elimination).
std::int64_t integer_determinant(const IntMatrix& m);

/// X^T X.
Matrix gram(const LatticeBasis& basis);

/// X = K·A·N with K orthogonal, A = diag(1/sqrt(a_i)) and N unit upper
/// triangular. `eta` lists the strict upper entries of N in row-major order,
/// so for n = 3 it is (N12, N13, N23).
struct IwasawaForm {
  Matrix k;
  Vector a;
  Vector eta;

  int dim() const { return static_cast<int>(a.size()); }
  Matrix a_matrix() const;
  Matrix n_matrix() const;
  Matrix reconstruct() const;
};

/// Builds the unit upper-triangular matrix whose strict upper entries are
/// `eta` (row-major).
Matrix unipotent_from_eta(int n, std::span<const double> eta);
int eta_count(int n);
/// Row-major index of entry (i, j), i < j, in an eta vector.
int eta_index(int n, int i, int j);

/// Modified Gram-Schmidt on the columns of X. Deterministic; throws
/// LatticeError when |det X| < kConditionGuard * (max column norm)^n.
IwasawaForm iwasawa_decompose(const LatticeBasis& x);

struct NplusReduction {
  UnimodularMatrix u;
  LatticeBasis y;
};

/// Integer column operations bringing every strict upper entry of the
/// N-factor into [1, 2). Columns are processed left to right; within
/// column j the entries N(j-1, j), ..., N(0, j) are fixed bottom-up, since
/// adding column i into column j also moves the entries above row i.
NplusReduction reduce_to_nplus(const LatticeBasis& x);

/// ||(X^{-1})^T k||.
double dual_norm(const LatticeBasis& x, std::span<const std::int64_t> k);
double dual_norm(const LatticeBasis& x, const IntVector& k);

/// k~ = (N^{-1})^T k for the unit upper-triangular N described by `eta`.
Vector transformed_coords(std::span<const double> eta, std::span<const double> k);
Vector transformed_coords(const Vector& eta, const IntVector& k);

}  // namespace latticelab
