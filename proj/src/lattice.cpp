#include "latticelab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace latticelab {

namespace {

double max_column_norm(const Matrix& x) {
  double m = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) m = std::max(m, x.col(j).norm());
  return m;
}

}  // namespace

LatticeBasis::LatticeBasis(Matrix columns) : x_(std::move(columns)) {
  if (x_.rows() != x_.cols()) throw LatticeError("lattice basis must be square");
  if (x_.rows() < 2) throw LatticeError("lattice dimension must be at least 2");
  if (!x_.allFinite()) throw LatticeError("lattice basis has non-finite entries");
  det_ = x_.partialPivLu().determinant();
  const double scale = max_column_norm(x_);
  if (!(std::abs(det_) > 0.0) || std::abs(det_) < kConditionGuard * std::pow(scale, dim())) {
    throw LatticeError("lattice basis is singular or ill-conditioned");
  }
  dual_ = x_.inverse().transpose();
}

LatticeBasis LatticeBasis::identity(int n) { return LatticeBasis(Matrix::Identity(n, n)); }

LatticeBasis LatticeBasis::diagonal(std::span<const double> entries) {
  const auto n = static_cast<Eigen::Index>(entries.size());
  Matrix d = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) d(i, i) = entries[static_cast<std::size_t>(i)];
  return LatticeBasis(std::move(d));
}

double LatticeBasis::operator_norm() const {
  Eigen::JacobiSVD<Matrix> svd(x_);
  return svd.singularValues()(0);
}

LatticeBasis LatticeBasis::scaled(double r) const {
  if (!(r > 0.0)) throw LatticeError("scale factor must be positive");
  return LatticeBasis(x_ * r);
}

LatticeBasis LatticeBasis::left_multiplied(const Matrix& k) const { return LatticeBasis(k * x_); }

LatticeBasis LatticeBasis::right_multiplied(const UnimodularMatrix& u) const {
  if (u.dim() != dim()) throw LatticeError("dimension mismatch in X·U");
  return LatticeBasis(x_ * u.as_real());
}

std::int64_t integer_determinant(const IntMatrix& m) {
  if (m.rows() != m.cols()) throw LatticeError("determinant of non-square matrix");
  const Eigen::Index n = m.rows();
  if (n == 0) return 1;
  // Bareiss fraction-free elimination; every intermediate is a minor of m.
  std::vector<__int128> a(static_cast<std::size_t>(n * n));
  auto at = [&](Eigen::Index i, Eigen::Index j) -> __int128& {
    return a[static_cast<std::size_t>(i * n + j)];
  };
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) at(i, j) = m(i, j);
  int sign = 1;
  __int128 prev = 1;
  for (Eigen::Index k = 0; k < n - 1; ++k) {
    if (at(k, k) == 0) {
      Eigen::Index p = k + 1;
      while (p < n && at(p, k) == 0) ++p;
      if (p == n) return 0;
      for (Eigen::Index j = 0; j < n; ++j) std::swap(at(k, j), at(p, j));
      sign = -sign;
    }
    for (Eigen::Index i = k + 1; i < n; ++i)
      for (Eigen::Index j = k + 1; j < n; ++j)
        at(i, j) = (at(i, j) * at(k, k) - at(i, k) * at(k, j)) / prev;
    prev = at(k, k);
  }
  return static_cast<std::int64_t>(sign * at(n - 1, n - 1));
}

UnimodularMatrix::UnimodularMatrix(IntMatrix entries) : u_(std::move(entries)) {
  if (u_.rows() != u_.cols()) throw LatticeError("unimodular matrix must be square");
  det_ = integer_determinant(u_);
  if (det_ != 1 && det_ != -1) throw LatticeError("integer matrix is not unimodular");
}

UnimodularMatrix UnimodularMatrix::identity(int n) { return UnimodularMatrix(IntMatrix::Identity(n, n)); }

Matrix gram(const LatticeBasis& basis) {
  Matrix g = basis.matrix().transpose() * basis.matrix();
  // Symmetrize so downstream Cholesky sees an exactly symmetric matrix.
  return 0.5 * (g + g.transpose());
}

int eta_count(int n) { return n * (n - 1) / 2; }

int eta_index(int n, int i, int j) {
  // Row i contributes n - 1 - i entries; rows before it sum to i*n - i(i+1)/2.
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

Matrix unipotent_from_eta(int n, std::span<const double> eta) {
  if (static_cast<int>(eta.size()) != eta_count(n)) throw LatticeError("eta has wrong length");
  Matrix nm = Matrix::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) nm(i, j) = eta[static_cast<std::size_t>(eta_index(n, i, j))];
  return nm;
}

Matrix IwasawaForm::a_matrix() const {
  Matrix am = Matrix::Zero(dim(), dim());
  for (int i = 0; i < dim(); ++i) am(i, i) = 1.0 / std::sqrt(a(i));
  return am;
}

Matrix IwasawaForm::n_matrix() const {
  return unipotent_from_eta(dim(), std::span<const double>(eta.data(), static_cast<std::size_t>(eta.size())));
}

Matrix IwasawaForm::reconstruct() const { return k * a_matrix() * n_matrix(); }

IwasawaForm iwasawa_decompose(const LatticeBasis& x) {
  const int n = x.dim();
  const Matrix& xm = x.matrix();
  Matrix q = xm;
  Matrix r = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    // Two passes of modified Gram-Schmidt keep K orthogonal to ~1e-15.
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i < j; ++i) {
        const double c = q.col(i).dot(q.col(j));
        r(i, j) += c;
        q.col(j) -= c * q.col(i);
      }
    }
    const double nrm = q.col(j).norm();
    if (!(nrm > 0.0)) throw LatticeError("iwasawa_decompose: dependent columns");
    r(j, j) = nrm;
    q.col(j) /= nrm;
  }

  IwasawaForm form;
  form.k = std::move(q);
  form.a.resize(n);
  form.eta.resize(eta_count(n));
  for (int i = 0; i < n; ++i) {
    form.a(i) = 1.0 / (r(i, i) * r(i, i));
    for (int j = i + 1; j < n; ++j) form.eta(eta_index(n, i, j)) = r(i, j) / r(i, i);
  }
  return form;
}

NplusReduction reduce_to_nplus(const LatticeBasis& x) {
  const int n = x.dim();
  IntMatrix u_total = IntMatrix::Identity(n, n);
  LatticeBasis y = x;
  // The column operations act on N exactly; re-decomposing afterwards can
  // land a hair outside [1, 2) through rounding, so repeat until stable.
  for (int pass = 0; pass < 4; ++pass) {
    const IwasawaForm form = iwasawa_decompose(y);
    Matrix nm = form.n_matrix();
    IntMatrix u = IntMatrix::Identity(n, n);
    bool changed = false;
    for (int j = 1; j < n; ++j) {
      for (int i = j - 1; i >= 0; --i) {
        const double shift = std::floor(nm(i, j) - 1.0);
        if (shift == 0.0) continue;
        const auto m = static_cast<std::int64_t>(-shift);
        // column j += m * column i, applied to both N and the running U.
        nm.col(j) += static_cast<double>(m) * nm.col(i);
        u.col(j) += m * u.col(i);
        changed = true;
      }
    }
    if (!changed) break;
    u_total = u_total * u;
    y = LatticeBasis(x.matrix() * u_total.cast<double>());
  }
  return NplusReduction{UnimodularMatrix(u_total), y};
}

double dual_norm(const LatticeBasis& x, std::span<const std::int64_t> k) {
  if (static_cast<int>(k.size()) != x.dim()) throw LatticeError("dual_norm: dimension mismatch");
  const Matrix& d = x.dual();
  double s = 0.0;
  for (int i = 0; i < x.dim(); ++i) {
    double v = 0.0;
    for (int j = 0; j < x.dim(); ++j) v += d(i, j) * static_cast<double>(k[static_cast<std::size_t>(j)]);
    s += v * v;
  }
  return std::sqrt(s);
}

double dual_norm(const LatticeBasis& x, const IntVector& k) {
  return dual_norm(x, std::span<const std::int64_t>(k.data(), static_cast<std::size_t>(k.size())));
}

Vector transformed_coords(std::span<const double> eta, std::span<const double> k) {
  const int n = static_cast<int>(k.size());
  if (static_cast<int>(eta.size()) != eta_count(n)) throw LatticeError("transformed_coords: eta length mismatch");
  // Forward substitution for N^T k~ = k.
  Vector kt(n);
  for (int i = 0; i < n; ++i) {
    double v = k[static_cast<std::size_t>(i)];
    for (int j = 0; j < i; ++j) v -= eta[static_cast<std::size_t>(eta_index(n, j, i))] * kt(j);
    kt(i) = v;
  }
  return kt;
}

Vector transformed_coords(const Vector& eta, const IntVector& k) {
  const Vector kd = k.cast<double>();
  return transformed_coords(std::span<const double>(eta.data(), static_cast<std::size_t>(eta.size())),
                            std::span<const double>(kd.data(), static_cast<std::size_t>(kd.size())));
}

}  // namespace latticelab
