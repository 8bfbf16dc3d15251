// Exact lattice point counts in closed Euclidean balls.

#pragma once

#include "latticelab/lattice.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace latticelab {

/// Relative slack in the closed-ball test ||Xk||^2 <= t^2 (1 + tol).
inline constexpr double kBoundaryTolerance = 1e-12;

class CountOverflow : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

struct CountResult {
  double t = 0.0;
  std::uint64_t count = 0;
  double volume = 0.0;
  double remainder = 0.0;  // count - volume
};

/// pi^(n/2) / Gamma(n/2 + 1).
double unit_ball_volume(int n);

/// vol(t * X^{-1} Omega) = t^n v_n / |det X|.
double ball_volume(int n, double t, double abs_det);

/// True iff ||X k||^2 <= t^2 (1 + kBoundaryTolerance).
bool in_closed_ball(const LatticeBasis& x, std::span<const std::int64_t> k, double t);

/// #{k in Z^n : ||Xk|| <= t}. Cholesky nested-interval enumeration: the
/// outer n-1 coordinates are enumerated, the innermost one is counted in
/// closed form with both interval ends re-checked against in_closed_ball.
std::uint64_t count_points(const LatticeBasis& x, double t);

/// N_X(t) - vol(t Omega_X).
double error_term(const LatticeBasis& x, double t);

CountResult count_result(const LatticeBasis& x, double t);

/// One result per radius; the grid must be nonempty and nondecreasing.
std::vector<CountResult> count_scan(const LatticeBasis& x, std::span<const double> t_grid);

/// Columns t,count,volume,remainder; reals with 17 significant digits.
void write_count_csv(std::ostream& out, std::span<const CountResult> rows);

/// Shortest nonzero vector length of the lattice.
double shortest_vector_length(const LatticeBasis& x);

/// Every nonzero k with ||Xk|| <= t, in enumeration order. Meant for small
/// radii (a few dozen points).
std::vector<IntVector> enumerate_points(const LatticeBasis& x, double t);

}  // namespace latticelab
