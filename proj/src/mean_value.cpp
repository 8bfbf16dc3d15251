#include "latticelab/mean_value.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include "latticelab/counting.hpp"
#include "latticelab/format.hpp"

namespace latticelab {

namespace {

// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      c += (sum - t) + v;
    else
      c += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

}  // namespace

double cn_partial_sum(int n, int q_max, std::uint64_t* terms) {
  if (n < 2) throw LatticeError("c_n: n must be at least 2");
  if (q_max < 1) throw LatticeError("c_n: cutoff must be >= 1");
  CompensatedSum s;
  std::uint64_t used = 0;
  // Largest terms first; pairs (q, r) and (r, q) contribute equally.
  for (int q = 1; q <= q_max; ++q) {
    const double qn = std::pow(static_cast<double>(q), n);
    for (int r = 1; r <= q; ++r) {
      if (std::gcd(q, r) != 1) continue;
      const double term = 4.0 / (qn * std::pow(static_cast<double>(r), n) * qn);
      s.add(r == q ? term : 2.0 * term);
      used += r == q ? 1 : 2;
    }
  }
  if (terms) *terms = used;
  return s.value();
}

double cn_tail_bound(int n, int q_max) {
  const double zeta_bound = static_cast<double>(n) / (n - 1);
  return 8.0 * zeta_bound * std::pow(static_cast<double>(q_max), 1.0 - 2.0 * n) / (2.0 * n - 1.0);
}

CnResult compute_cn(int n, double tol) {
  if (n < 2) throw LatticeError("compute_cn: n must be at least 2");
  if (!(tol >= 1e-14)) throw LatticeError("compute_cn: tolerance below 1e-14 is not reachable in double precision");
  int q = 1;
  while (cn_tail_bound(n, q) > tol) ++q;
  CnResult res;
  res.n = n;
  res.cutoff = q;
  res.value = cn_partial_sum(n, q, &res.terms_used);
  res.tail_bound = cn_tail_bound(n, q);
  return res;
}

CnResult pair_count_cn(int n) {
  if (n < 3) throw DomainError("pair_count_cn: zeta(n - 1) diverges for n < 3");
  CnResult res;
  res.n = n;
  res.value = 4.0 * std::riemann_zeta(n - 1.0) / std::riemann_zeta(static_cast<double>(n));
  return res;
}

double siegel_mean(int n, double t) {
  if (!(t >= 0.0)) throw LatticeError("siegel_mean: t must be >= 0");
  return unit_ball_volume(n) * std::pow(t, n) + 1.0;
}

namespace {

void require_rogers(int n, const CnResult& cn) {
  if (n < 3) throw DomainError("Rogers' second moment formula requires n >= 3");
  if (cn.n != n) throw LatticeError("c_n was computed for a different dimension");
}

}  // namespace

double rogers_second_moment(int n, double t, const CnResult& cn) {
  require_rogers(n, cn);
  const double v = unit_ball_volume(n) * std::pow(t, n);
  return v * v + 1.0 + cn.value * v;
}

double variance_prediction(int n, double t, const CnResult& cn) {
  require_rogers(n, cn);
  return 1.0 + (cn.value - 2.0) * unit_ball_volume(n) * std::pow(t, n);
}

int default_thread_count() {
  if (const char* env = std::getenv("LATTICELAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 256L));
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

// Runs job(i) for i in [0, m) on `threads` workers. The first failure (by
// sample index) is rethrown after all workers stop.
template <class Job>
void parallel_for(std::uint64_t m, int threads, Job&& job) {
  if (threads <= 0) threads = default_thread_count();
  threads = static_cast<int>(std::min<std::uint64_t>(static_cast<std::uint64_t>(threads), std::max<std::uint64_t>(m, 1)));
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  std::uint64_t fail_index = m;
  std::exception_ptr error;
  auto worker = [&]() {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::uint64_t i = next.fetch_add(1);
      if (i >= m) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < fail_index) {
          fail_index = i;
          error = std::current_exception();
        }
        failed = true;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<std::vector<std::uint64_t>> mc_counts(const LatticeSampler& sampler, std::span<const double> t_grid,
                                                  std::uint64_t m, Seed seed, int threads) {
  std::vector<std::vector<std::uint64_t>> counts(m);
  parallel_for(m, threads, [&](std::uint64_t i) {
    const LatticeBasis x = sampler(seed.with_stream(i));
    std::vector<std::uint64_t> row;
    row.reserve(t_grid.size());
    for (double t : t_grid) row.push_back(count_points(x, t));
    counts[i] = std::move(row);
  });
  return counts;
}

ExperimentStats aggregate_stats(double t, std::span<const double> e, Seed seed, std::span<const double> weights) {
  const std::size_t m = e.size();
  if (m < 2) throw LatticeError("aggregate_stats: need at least two samples");
  if (!weights.empty() && weights.size() != m) throw LatticeError("aggregate_stats: weight count mismatch");
  const auto md = static_cast<double>(m);
  std::vector<double> w(m, 1.0);
  if (!weights.empty()) {
    CompensatedSum ws;
    for (double v : weights) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw LatticeError("aggregate_stats: weights must be finite and >= 0");
      ws.add(v);
    }
    if (!(ws.value() > 0.0)) throw LatticeError("aggregate_stats: all weights are zero");
    const double scale = md / ws.value();
    for (std::size_t i = 0; i < m; ++i) w[i] = weights[i] * scale;
  }
  ExperimentStats s;
  s.t = t;
  s.samples = m;
  s.seed = seed;
  CompensatedSum sum;
  for (std::size_t i = 0; i < m; ++i) sum.add(w[i] * e[i]);
  const double mean = sum.value() / md;
  CompensatedSum m2;
  for (std::size_t i = 0; i < m; ++i) {
    const double d = e[i] - mean;
    m2.add(w[i] * d * d);
  }
  const double c2 = m2.value() / md;
  CompensatedSum dev_var, dev_mean;
  for (std::size_t i = 0; i < m; ++i) {
    const double d = e[i] - mean;
    const double q = w[i] * d * d - c2;
    dev_var.add(q * q);
    dev_mean.add(w[i] * w[i] * d * d);
  }
  s.mean_E = mean;
  s.var_E = c2 * md / (md - 1.0);
  s.rms_E = std::sqrt(mean * mean + c2);
  s.stderr_var = std::sqrt(dev_var.value() / md / md);
  s.stderr_mean = std::sqrt(dev_mean.value() / (md * (md - 1.0)));
  return s;
}

namespace {

std::vector<ExperimentStats> run_grid(const WeightedLatticeSampler& sampler, std::span<const double> t_grid,
                                      std::uint64_t m, Seed seed, int threads, bool weighted) {
  if (m < 2) throw LatticeError("mc_stats: need M >= 2");
  if (t_grid.empty()) throw LatticeError("mc_stats: empty radius grid");
  std::vector<std::vector<double>> e(t_grid.size(), std::vector<double>(m));
  std::vector<double> w(m, 1.0);
  parallel_for(m, threads, [&](std::uint64_t i) {
    const WeightedSample s = sampler(seed.with_stream(i));
    w[i] = s.weight;
    for (std::size_t j = 0; j < t_grid.size(); ++j) e[j][i] = error_term(s.x, t_grid[j]);
  });
  std::vector<ExperimentStats> out;
  out.reserve(t_grid.size());
  for (std::size_t j = 0; j < t_grid.size(); ++j)
    out.push_back(aggregate_stats(t_grid[j], e[j], seed, weighted ? std::span<const double>(w) : std::span<const double>{}));
  return out;
}

}  // namespace

std::vector<ExperimentStats> mc_stats_grid(const LatticeSampler& sampler, std::span<const double> t_grid,
                                           std::uint64_t m, Seed seed, int threads) {
  return run_grid([&](Seed s) { return WeightedSample{sampler(s), 1.0}; }, t_grid, m, seed, threads, false);
}

std::vector<ExperimentStats> mc_stats_weighted(const WeightedLatticeSampler& sampler, std::span<const double> t_grid,
                                               std::uint64_t m, Seed seed, int threads) {
  return run_grid(sampler, t_grid, m, seed, threads, true);
}

ExperimentStats mc_stats(const LatticeSampler& sampler, double t, std::uint64_t m, Seed seed, int threads) {
  const double grid[] = {t};
  return mc_stats_grid(sampler, grid, m, seed, threads).front();
}

void write_stats_csv(std::ostream& out, std::span<const ExperimentStats> rows) {
  out << "t,M,mean,rms,var,stderr\n";
  for (const auto& r : rows)
    out << fmt_real(r.t) << ',' << r.samples << ',' << fmt_real(r.mean_E) << ',' << fmt_real(r.rms_E) << ','
        << fmt_real(r.var_E) << ',' << fmt_real(r.stderr_var) << '\n';
}

ScalingFit fit_scaling_exponent(std::span<const ScalePoint> points) {
  if (points.size() < 3) throw LatticeError("fit_scaling_exponent: need at least three points");
  const auto m = static_cast<double>(points.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& p : points) {
    if (!(p.t > 1.0)) throw LatticeError("fit_scaling_exponent: radii must exceed 1");
    if (!(p.rms > 0.0)) throw LatticeError("fit_scaling_exponent: degenerate data (rms = 0)");
    sx += std::log(p.t);
    sy += std::log(p.rms);
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : points) {
    const double dx = std::log(p.t) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(p.rms) - my);
  }
  if (!(sxx > 0.0)) throw LatticeError("fit_scaling_exponent: radii must not all coincide");
  ScalingFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (const auto& p : points)
    fit.max_residual =
        std::max(fit.max_residual, std::abs(std::log(p.rms) - (fit.intercept + fit.slope * std::log(p.t))));
  return fit;
}

ScalingCheck scaling_identity_check(const LatticeBasis& x, double r, double t) {
  if (!(r > 0.0)) throw LatticeError("scaling_identity_check: r must be positive");
  if (!(t >= 0.0)) throw LatticeError("scaling_identity_check: t must be >= 0");
  const LatticeBasis rx = x.scaled(r);
  ScalingCheck c;
  c.count_scaled = count_points(rx, t);
  c.count_original = count_points(x, t / r);
  c.error_scaled = static_cast<double>(c.count_scaled) - ball_volume(x.dim(), t, rx.abs_det());
  c.error_original = static_cast<double>(c.count_original) - ball_volume(x.dim(), t / r, x.abs_det());
  c.pass = c.count_scaled == c.count_original && std::abs(c.error_scaled - c.error_original) <= 1e-9;
  return c;
}

}  // namespace latticelab
