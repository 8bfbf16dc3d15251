// Siegel and Rogers mean values for ball counts, Monte Carlo aggregation of
// E_X(t), and log-log exponent fits.

#pragma once

#include "latticelab/lattice.hpp"
#include "latticelab/sampling.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace latticelab {

/// A formula used outside the range where it holds.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct CnResult {
  int n = 0;
  double value = 0.0;
  double tail_bound = 0.0;
  std::uint64_t terms_used = 0;  // coprime pairs summed
  int cutoff = 0;                // Q: pairs with max(q, r) <= Q
};

/// Sum of 4 / ((qr)^n max(q,r)^n) over coprime q, r in [1, Q].
double cn_partial_sum(int n, int q_max, std::uint64_t* terms = nullptr);

/// Bound on the pairs with max(q, r) > Q, coprimality dropped:
/// 4 * 2 zeta(n) * int_Q^inf x^{-2n} dx = 8 zeta(n) Q^{1-2n} / (2n - 1),
/// with zeta(n) <= n / (n - 1).
double cn_tail_bound(int n, int q_max);

/// Smallest cutoff whose tail bound is <= tol. Throws LatticeError for
/// n < 2 and for tol < 1e-14.
CnResult compute_cn(int n, double tol);

/// The same constant counted directly from the dependent pairs (v, w) =
/// (q p, r p), p primitive: by Siegel's formula each coprime (q, r) adds
/// V / max(|q|,|r|)^n, so c_n = 2 + 2 sum_{q,r>=1 coprime} max(q,r)^{-n}
/// = 4 zeta(n-1) / zeta(n). Needs n >= 3; tail_bound and terms_used are 0.
CnResult pair_count_cn(int n);

/// E[N_X(t)] over unimodular lattices: v_n t^n + 1.
double siegel_mean(int n, double t);

/// E[N_X(t)^2] = V^2 + 1 + c_n V with V = v_n t^n. Needs n >= 3.
double rogers_second_moment(int n, double t, const CnResult& cn);

/// Var[E_X(t)] = 1 + (c_n - 2) V. Needs n >= 3.
double variance_prediction(int n, double t, const CnResult& cn);

struct ExperimentStats {
  double t = 0.0;
  std::uint64_t samples = 0;
  double mean_E = 0.0;
  double rms_E = 0.0;
  double var_E = 0.0;       // unbiased
  double stderr_var = 0.0;  // sqrt((m4 - m2^2) / M), central moments
  double stderr_mean = 0.0; // sqrt(var_E / M)
  Seed seed;
};

/// Lattice for sample i of a run; must be a pure function of the seed.
using LatticeSampler = std::function<LatticeBasis(Seed)>;

/// Thread count from LATTICELAB_THREADS, else hardware concurrency.
int default_thread_count();

/// Samples i = 0..M-1 use seed.with_stream(i). E_X(t) is evaluated for every
/// t of the grid on the same samples; aggregation runs in sample order, so
/// the result does not depend on `threads`.
std::vector<ExperimentStats> mc_stats_grid(const LatticeSampler& sampler, std::span<const double> t_grid,
                                           std::uint64_t m, Seed seed, int threads = 0);

ExperimentStats mc_stats(const LatticeSampler& sampler, double t, std::uint64_t m, Seed seed, int threads = 0);

/// Importance-weighted draws (e.g. a cusp-tilted Haar proposal).
using WeightedLatticeSampler = std::function<WeightedSample(Seed)>;

/// As mc_stats_grid with self-normalized weights: every moment is a
/// weighted average with weights rescaled to mean 1.
std::vector<ExperimentStats> mc_stats_weighted(const WeightedLatticeSampler& sampler, std::span<const double> t_grid,
                                               std::uint64_t m, Seed seed, int threads = 0);

/// Aggregates already computed remainders (in sample order). With weights,
/// stderr_var is the sample deviation of w_i (E_i - mean)^2 over sqrt(M),
/// which reduces to the fourth-moment formula when all w_i = 1.
ExperimentStats aggregate_stats(double t, std::span<const double> remainders, Seed seed,
                                std::span<const double> weights = {});

/// Per-sample lattice counts at each radius (row = sample), for callers that
/// need the raw data, e.g. the Siegel calibration.
std::vector<std::vector<std::uint64_t>> mc_counts(const LatticeSampler& sampler, std::span<const double> t_grid,
                                                  std::uint64_t m, Seed seed, int threads = 0);

void write_stats_csv(std::ostream& out, std::span<const ExperimentStats> rows);

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
};

struct ScalePoint {
  double t = 0.0;
  double rms = 0.0;
};

/// Unweighted least squares of log rms against log t.
ScalingFit fit_scaling_exponent(std::span<const ScalePoint> points);

struct ScalingCheck {
  bool pass = false;
  std::uint64_t count_scaled = 0;    // N_{rX}(t)
  std::uint64_t count_original = 0;  // N_X(t/r)
  double error_scaled = 0.0;
  double error_original = 0.0;
};

/// E_{rX}(t) against E_X(t/r): counts equal and remainders within 1e-9.
ScalingCheck scaling_identity_check(const LatticeBasis& x, double r, double t);

}  // namespace latticelab
