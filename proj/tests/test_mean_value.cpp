#include "doctest.h"

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "latticelab/counting.hpp"
#include "latticelab/mean_value.hpp"

using namespace latticelab;

namespace {

constexpr double kPi = std::numbers::pi;

double brute_cn(int n, int q_max) {
  // Plain double loop in the opposite order (smallest terms first).
  long double s = 0.0L;
  for (int q = q_max; q >= 1; --q)
    for (int r = q_max; r >= 1; --r)
      if (std::gcd(q, r) == 1) s += 4.0L / std::pow(static_cast<long double>(q) * r * std::max(q, r), n);
  return static_cast<double>(s);
}

}  // namespace

TEST_CASE("c_n series") {
  CHECK(cn_partial_sum(3, 1) == 4.0);
  const CnResult c3 = compute_cn(3, 1e-10);
  CHECK(c3.tail_bound <= 1e-10);
  CHECK(c3.value >= 4.0);
  CHECK(std::abs(c3.value - 4.1403) < 1e-4);
  CHECK(std::abs(c3.value - brute_cn(3, 2000)) < 1e-8);
  CHECK(std::abs(compute_cn(12, 1e-10).value - 4.0) < 1e-3);
  CHECK(compute_cn(2, 1e-8).value > compute_cn(3, 1e-8).value);
  CHECK_THROWS_AS(compute_cn(3, 1e-15), LatticeError);
  CHECK_THROWS_AS(compute_cn(1, 1e-6), LatticeError);

  double prev = 0.0;
  for (int q = 1; q <= 60; ++q) {
    const double v = cn_partial_sum(3, q);
    REQUIRE(v >= prev);
    REQUIRE(v >= 4.0);
    // The tail bound really bounds the remaining sum.
    REQUIRE(c3.value - v <= cn_tail_bound(3, q) + 1e-15);
    prev = v;
  }
}

TEST_CASE("Siegel and Rogers formulas") {
  CHECK(siegel_mean(3, 0.0) == 1.0);
  CHECK(siegel_mean(3, 1.0) == doctest::Approx(4.0 * kPi / 3.0 + 1.0));
  const CnResult c3 = compute_cn(3, 1e-12);
  const double v1 = 4.0 * kPi / 3.0;
  CHECK(rogers_second_moment(3, 0.0, c3) == 1.0);
  CHECK(rogers_second_moment(3, 1.0, c3) == doctest::Approx(v1 * v1 + 1.0 + c3.value * v1));
  CHECK(variance_prediction(3, 0.0, c3) == 1.0);
  CHECK(variance_prediction(3, 8.0, c3) == doctest::Approx(1.0 + (c3.value - 2.0) * v1 * 512.0));
  CHECK_THROWS_AS(rogers_second_moment(2, 1.0, compute_cn(2, 1e-8)), DomainError);
  CHECK_THROWS_AS(variance_prediction(2, 1.0, compute_cn(2, 1e-8)), DomainError);

  for (double t = 0.0; t <= 20.0; t += 0.37) {
    const double s = siegel_mean(3, t);
    const double lhs = variance_prediction(3, t, c3);
    const double rhs = rogers_second_moment(3, t, c3) - (s - 1.0) * (s - 1.0) - 2.0 * (s - 1.0);
    REQUIRE(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)) * 16.0);
    REQUIRE(lhs > 0.0);
  }
}

TEST_CASE("aggregate identities") {
  const double e[] = {1.5, -2.0, 0.25, 3.0, -0.75};
  const ExperimentStats s = aggregate_stats(2.0, e, Seed{1, 0});
  const double m = 5.0;
  CHECK(s.mean_E == doctest::Approx(0.4));
  CHECK(s.rms_E * s.rms_E == doctest::Approx(s.mean_E * s.mean_E + s.var_E * (m - 1.0) / m).epsilon(1e-12));
  CHECK(s.var_E >= 0.0);
  CHECK(s.stderr_mean == doctest::Approx(std::sqrt(s.var_E / m)));
  const double one[] = {1.0};
  CHECK_THROWS_AS(aggregate_stats(1.0, one, Seed{}), LatticeError);
}

TEST_CASE("mc_stats with a constant sampler") {
  const LatticeBasis x0 = LatticeBasis::identity(3);
  const ExperimentStats s = mc_stats([&](Seed) { return x0; }, 4.5, 20, Seed{5, 0}, 3);
  CHECK(s.var_E == 0.0);
  CHECK(s.mean_E == doctest::Approx(error_term(x0, 4.5)).epsilon(1e-14));
  CHECK_THROWS_AS(mc_stats([&](Seed) { return x0; }, 1.0, 1, Seed{}), LatticeError);
}

TEST_CASE("mc_stats is deterministic and thread independent") {
  const CompactFamilySpec spec{LatticeBasis::identity(3), 0.15, 0.5};
  const LatticeSampler sampler = [&](Seed s) { return sample_compact(spec, s); };
  const double grid[] = {5.001, 10.001};
  const auto a = mc_stats_grid(sampler, grid, 64, Seed{42, 0}, 1);
  const auto b = mc_stats_grid(sampler, grid, 64, Seed{42, 0}, 4);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(a[j].mean_E == b[j].mean_E);
    CHECK(a[j].var_E == b[j].var_E);
    CHECK(a[j].stderr_var == b[j].stderr_var);
    CHECK(a[j].rms_E == b[j].rms_E);
  }

  // Slow recomputation of the same seeded samples at t = 10.
  std::vector<double> direct;
  for (std::uint64_t i = 0; i < 64; ++i) {
    const LatticeBasis x = sample_compact(spec, Seed{42, i});
    direct.push_back(static_cast<double>(count_points(x, 10.001)) - ball_volume(3, 10.001, x.abs_det()));
  }
  const ExperimentStats d = aggregate_stats(10.001, direct, Seed{42, 0});
  CHECK(d.rms_E == a[1].rms_E);
  CHECK(std::isfinite(a[1].rms_E));
}

TEST_CASE("mc_stats propagates sampler failures") {
  const LatticeSampler bad = [](Seed s) -> LatticeBasis {
    if (s.stream == 7) throw ConfigError("boom");
    return LatticeBasis::identity(2);
  };
  CHECK_THROWS_AS(mc_stats(bad, 2.0, 20, Seed{1, 0}, 2), ConfigError);
}

TEST_CASE("stderr of the variance shrinks like 1/sqrt(M)") {
  const CompactFamilySpec spec{LatticeBasis::identity(2), 0.2, 0.5};
  const LatticeSampler sampler = [&](Seed s) { return sample_compact(spec, s); };
  double ratio_sum = 0.0;
  const int repeats = 6;
  for (int rep = 0; rep < repeats; ++rep) {
    const auto small = mc_stats(sampler, 20.001, 400, Seed{100u + rep, 0}, 1);
    const auto large = mc_stats(sampler, 20.001, 800, Seed{200u + rep, 0}, 1);
    ratio_sum += small.stderr_var / large.stderr_var;
  }
  const double ratio = ratio_sum / repeats;
  CHECK(ratio > std::sqrt(2.0) * 0.7);
  CHECK(ratio < std::sqrt(2.0) * 1.3);
}

TEST_CASE("fit_scaling_exponent") {
  std::vector<ScalePoint> pts;
  for (double t : {10.0, 20.0, 40.0, 80.0}) pts.push_back({t, t});
  CHECK(std::abs(fit_scaling_exponent(pts).slope - 1.0) < 1e-12);
  pts.clear();
  for (double t : {10.0, 20.0, 40.0, 80.0}) pts.push_back({t, 3.0 * std::pow(t, 1.5)});
  const ScalingFit f = fit_scaling_exponent(pts);
  CHECK(std::abs(f.slope - 1.5) < 1e-12);
  CHECK(std::abs(f.intercept - std::log(3.0)) < 1e-12);
  CHECK(f.max_residual < 1e-12);
  pts.clear();
  for (double t : {10.0, 20.0, 40.0, 80.0}) pts.push_back({t, t * std::pow(std::log(t), 2)});
  // d log(t log^2 t) / d log t = 1 + 2 / log t, so any secant slope over
  // [10, 80] lies between the endpoint values.
  const double slope = fit_scaling_exponent(pts).slope;
  CHECK(slope > 1.0 + 2.0 / std::log(80.0));
  CHECK(slope < 1.0 + 2.0 / std::log(10.0));
  pts[1].rms = 0.0;
  CHECK_THROWS_AS(fit_scaling_exponent(pts), LatticeError);
  CHECK_THROWS_AS(fit_scaling_exponent(std::span<const ScalePoint>(pts.data(), 2)), LatticeError);
}

TEST_CASE("scaling identity") {
  CHECK(scaling_identity_check(LatticeBasis::identity(3), 1.0, 3.3).pass);
  const ScalingCheck z = scaling_identity_check(LatticeBasis::identity(3), 2.0, 2.0);
  CHECK(z.pass);
  CHECK(z.error_scaled == doctest::Approx(7.0 - 4.0 * kPi / 3.0));

  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> ue(-2.0, 2.0), ur(0.5, 2.0), ut(1.0, 10.0);
  for (int i = 0; i < 100; ++i) {
    const int n = 2 + i % 2;
    Matrix m(n, n);
    do {
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) m(a, b) = ue(rng);
    } while (std::abs(m.determinant()) < 0.1);
    REQUIRE(scaling_identity_check(LatticeBasis(m), ur(rng), ut(rng)).pass);
  }
  CHECK_THROWS_AS(scaling_identity_check(LatticeBasis::identity(2), 0.0, 1.0), LatticeError);
}

TEST_CASE("stats csv") {
  const double e[] = {1.0, 2.0, 3.0};
  const ExperimentStats s = aggregate_stats(2.0, e, Seed{});
  std::ostringstream out;
  write_stats_csv(out, std::span<const ExperimentStats>(&s, 1));
  CHECK(out.str() == "t,M,mean,rms,var,stderr\n2,3,2,2.1602468994692869,1,0.27216552697590868\n");
}

TEST_CASE("pair-count c_n") {
  // Oracle: 2 + 2 * sum over coprime q, r <= Q of max(q, r)^{-n}, plus the
  // tail bound 4 sum_{m > Q} m^{1-n} <= 4 Q^{2-n} / (n - 2).
  for (int n : {3, 4, 6}) {
    const int q_max = 3000;
    long double s = 0.0L;
    for (int q = 1; q <= q_max; ++q)
      for (int r = 1; r <= q_max; ++r)
        if (std::gcd(q, r) == 1) s += 1.0L / std::pow(static_cast<long double>(std::max(q, r)), n);
    const double brute = static_cast<double>(2.0L + 2.0L * s);
    const double tail = 4.0 * std::pow(double(q_max), 2.0 - n) / (n - 2.0);
    const double c = pair_count_cn(n).value;
    CHECK(c >= brute - 1e-12);
    CHECK(c <= brute + tail + 1e-12);
  }
  CHECK(pair_count_cn(3).value == doctest::Approx(4.0 * 1.6449340668482264 / 1.2020569031595942).epsilon(1e-14));
  // Every dependent-pair term dominates the series term for the same (q, r).
  CHECK(pair_count_cn(3).value > compute_cn(3, 1e-10).value + 1.0);
  CHECK_THROWS_AS(pair_count_cn(2), DomainError);
}

TEST_CASE("weighted Haar estimate of the second moment") {
  // Siegel at t = 1: E[(v, 2v) pairs] = E[S(1/2)] = V / 8 exactly, so the
  // variance is pinned by the pair count. Cusp-tilted draws keep the
  // variance estimator's own variance finite.
  HaarSamplerConfig cfg = default_haar_config(3);
  cfg.cusp_tilt = 1.0;
  const WeightedLatticeSampler sampler = [&](Seed s) { return sample_haar_weighted(cfg, s); };
  const double grid[] = {1.0, 2.0};
  const auto st = mc_stats_weighted(sampler, grid, 200000, Seed{77, 0});
  for (const auto& s : st) {
    CHECK(std::abs(s.mean_E - 1.0) <= 4.0 * s.stderr_mean);
    const double v = ball_volume(3, s.t, 1.0);
    const double pair = (pair_count_cn(3).value - 2.0) * v;
    CHECK(std::abs(s.var_E - pair) <= 4.0 * s.stderr_var);
    const double series = variance_prediction(3, s.t, compute_cn(3, 1e-10)) - 1.0;
    CHECK(std::abs(s.var_E - series) > 10.0 * s.stderr_var);
  }
}
