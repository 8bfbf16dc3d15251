// Fourier transforms of ball indicators, the bump mollifier, and the
// Poisson-summation form of the smoothed lattice count.

#pragma once

#include "latticelab/lattice.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace latticelab {

/// J_1(x) to ~1e-14 absolute: power series below 8, Miller backward
/// recurrence on [8, 25), Hankel asymptotic expansion beyond. Odd in x.
double bessel_j1(double x);

/// Fourier transform of the unit-ball indicator in R^n (n = 2, 3) at any
/// frequency of Euclidean norm s. hat_chi_ball(n, 0) is the ball volume.
double hat_chi_ball(int n, double s);

/// Transform of the indicator of Omega_X = X^{-1} Omega at integer k:
/// |det X|^{-1} hat_chi_ball(n, ||k||_X).
double hat_chi_lattice(const LatticeBasis& x, const IntVector& k);

/// Tabulated transform of the one-dimensional bump rho_0(x) ~ exp(-1/(1-x^2))
/// on [-1, 1], normalized to unit mass. Shared, immutable.
class BumpTransformTable {
 public:
  static constexpr double kStep = 1e-3;
  static constexpr double kMaxFrequency = 200.0;

  static const BumpTransformTable& instance();

  /// rho_0-hat(y); cubic Lagrange interpolation, zero beyond kMaxFrequency.
  double operator()(double y) const;
  /// Unit-mass bump itself.
  double profile(double x) const;

 private:
  BumpTransformTable();
  std::vector<double> values_;
  double norm_ = 1.0;
};

/// Product mollifier rho(x) = prod rho_0(x_i), dilated by epsilon.
class MollifierSpec {
 public:
  MollifierSpec(int n, double epsilon);

  int dim() const { return n_; }
  double epsilon() const { return epsilon_; }
  /// supp rho lies in the ball of radius sqrt(n).
  double support_radius() const;

  /// rho-hat(xi) = prod rho_0-hat(xi_i); callers pass epsilon * k.
  double hat(std::span<const double> xi) const;
  double hat0(double y) const { return (*table_)(y); }

 private:
  int n_;
  double epsilon_;
  const BumpTransformTable* table_;
};

struct SmoothedCount {
  double t = 0.0;
  double epsilon = 0.0;
  int cutoff = 0;
  double value = 0.0;
  /// 2 x the largest per-shell sum of |term| among the last ceil(1/eps)
  /// shells; a heuristic, not a bound.
  double tail_estimate = 0.0;
  bool tail_warning = false;  // tail_estimate > 0.5
  bool converged = true;      // meaningful for the auto-cutoff variant
};

/// N_X^eps(t) = t^n vol(Omega_X) + sum over 0 < |k|_inf <= cutoff of
/// t^n hat_chi_{Omega_X}(t k) rho-hat(eps k). n must be 2 or 3.
SmoothedCount smoothed_count(const LatticeBasis& x, double t, double epsilon, int cutoff);

/// Adds shells until two consecutive shells both give tail_estimate below
/// `tail_target`; converged = false if `max_cutoff` is reached first.
SmoothedCount smoothed_count_to_tolerance(const LatticeBasis& x, double t, double epsilon,
                                          double tail_target = 1e-3, int max_cutoff = 10000);

enum class SandwichStatus { holds, violated, inconclusive };

struct SandwichReport {
  SandwichStatus status = SandwichStatus::inconclusive;
  double t = 0.0;
  double epsilon = 0.0;
  /// Radius offset R * eps * ||X||_op applied on both sides.
  double shift = 0.0;
  SmoothedCount lower;
  SmoothedCount upper;
  std::uint64_t exact = 0;
  double lower_slack = 0.0;  // exact - lower
  double upper_slack = 0.0;  // upper - exact
};

/// Checks N^eps(t - shift) <= N(t) <= N^eps(t + shift). The mollifier acts on
/// integer coordinates, where its support has radius sqrt(n) * eps; that
/// reaches at most ||X||_op * sqrt(n) * eps in space, hence the shift.
SandwichReport sandwich_check(const LatticeBasis& x, double t, double epsilon);

const char* to_string(SandwichStatus s);

}  // namespace latticelab
