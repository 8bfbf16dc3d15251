#include "latticelab/experiments.hpp"

#include <cmath>

#include "latticelab/counting.hpp"

namespace latticelab {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "PASS";
    case Verdict::fail:
      return "FAIL";
    case Verdict::calibration_fail:
      return "CALIBRATION-FAIL";
  }
  return "FAIL";
}

void Theorem1Config::validate() const {
  family.validate();
  if (t_grid.size() < 3) throw ConfigError("theorem1: need at least three radii");
  for (double t : t_grid)
    if (!(t > 1.0) || !std::isfinite(t)) throw ConfigError("theorem1: radii must exceed 1");
  if (samples < 2) throw ConfigError("theorem1: need M >= 2");
  if (!(slope_lo <= slope_hi)) throw ConfigError("theorem1: empty slope band");
}

Theorem1Config theorem1_config_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("theorem1 config must be an object");
  Theorem1Config c;
  const int n = get_field<int>(j, "n", 3);
  Json fam = j.contains("family") ? j.at("family") : Json::object();
  if (!fam.is_object()) throw InputError("family must be an object");
  if (!fam.contains("n") && !fam.contains("x0")) fam["n"] = n;
  c.family = compact_spec_from_json(fam);
  if (c.family.x0.dim() != n) throw ConfigError("theorem1: family dimension differs from n");
  c.t_grid = get_field<std::vector<double>>(j, "t", c.t_grid);
  c.samples = get_field<std::uint64_t>(j, "M", c.samples);
  if (j.contains("slope_band")) {
    const auto band = get_field<std::vector<double>>(j, "slope_band");
    if (band.size() != 2) throw InputError("slope_band must be [lo, hi]");
    c.slope_lo = band[0];
    c.slope_hi = band[1];
  }
  c.validate();
  return c;
}

Json theorem1_config_to_json(const Theorem1Config& c) {
  return Json{{"n", c.family.x0.dim()},
              {"family", compact_spec_to_json(c.family)},
              {"t", c.t_grid},
              {"M", c.samples},
              {"slope_band", Json::array({c.slope_lo, c.slope_hi})}};
}

Theorem1Result run_theorem1(const Theorem1Config& config, Seed seed, int threads) {
  config.validate();
  const LatticeSampler sampler = [&](Seed s) { return sample_compact(config.family, s); };
  Theorem1Result r;
  r.stats = mc_stats_grid(sampler, config.t_grid, config.samples, seed, threads);
  std::vector<ScalePoint> pts;
  for (const auto& s : r.stats) pts.push_back({s.t, s.rms_E});
  r.fit = fit_scaling_exponent(pts);
  r.verdict = r.fit.slope >= config.slope_lo && r.fit.slope <= config.slope_hi ? Verdict::pass : Verdict::fail;
  return r;
}

void Theorem2Config::validate() const {
  sampler.validate();
  if (sampler.n != 3) throw ConfigError("theorem2: Rogers' formula needs n = 3 here");
  if (!(t >= 2.0) || !std::isfinite(t)) throw ConfigError("theorem2: t must be >= 2");
  if (samples < 2) throw ConfigError("theorem2: need M >= 2");
  if (!(band > 0.0) || !(gap_sigmas > 0.0) || !(calibration_sigmas > 0.0))
    throw ConfigError("theorem2: band and sigma thresholds must be positive");
  if (!(cn_tolerance >= 1e-14)) throw ConfigError("theorem2: cn_tolerance must be >= 1e-14");
}

Theorem2Config theorem2_config_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("theorem2 config must be an object");
  Theorem2Config c;
  c.t = get_field<double>(j, "t", c.t);
  c.samples = get_field<std::uint64_t>(j, "M", c.samples);
  if (j.contains("sampler")) {
    Json s = j.at("sampler");
    if (!s.is_object()) throw InputError("sampler must be an object");
    if (!s.contains("cusp_tilt")) s["cusp_tilt"] = c.sampler.cusp_tilt;
    c.sampler = haar_config_from_json(s);
  }
  c.band = get_field<double>(j, "band", c.band);
  c.gap_sigmas = get_field<double>(j, "gap_sigmas", c.gap_sigmas);
  c.calibration_sigmas = get_field<double>(j, "calibration_sigmas", c.calibration_sigmas);
  c.cn_tolerance = get_field<double>(j, "cn_tolerance", c.cn_tolerance);
  c.validate();
  return c;
}

Json theorem2_config_to_json(const Theorem2Config& c) {
  return Json{{"t", c.t},
              {"M", c.samples},
              {"sampler", haar_config_to_json(c.sampler)},
              {"band", c.band},
              {"gap_sigmas", c.gap_sigmas},
              {"calibration_sigmas", c.calibration_sigmas},
              {"cn_tolerance", c.cn_tolerance}};
}

Theorem2Result run_theorem2(const Theorem2Config& config, Seed seed, int threads) {
  config.validate();
  const HaarSamplerConfig sc = config.sampler;
  const WeightedLatticeSampler sampler = [&](Seed s) { return sample_haar_weighted(sc, s); };
  const double grid[] = {config.t};
  Theorem2Result r;
  r.stats = mc_stats_weighted(sampler, grid, config.samples, seed, threads).front();
  r.cn = compute_cn(3, config.cn_tolerance);
  r.volume = ball_volume(3, config.t, 1.0);

  r.mean_count = r.stats.mean_E + r.volume;
  r.expected_count = siegel_mean(3, config.t);
  r.calibration_sigmas = r.stats.stderr_mean > 0.0 ? (r.mean_count - r.expected_count) / r.stats.stderr_mean : 0.0;
  r.calibration_pass = std::abs(r.mean_count - r.expected_count) <= config.calibration_sigmas * r.stats.stderr_mean;

  auto compare = [&](const CnResult& cn, double& pred, double& ratio, double& z) {
    pred = variance_prediction(3, config.t, cn);
    ratio = r.stats.var_E / pred;
    z = r.stats.stderr_var > 0.0 ? (r.stats.var_E - pred) / r.stats.stderr_var : 0.0;
  };
  compare(r.cn, r.prediction, r.ratio, r.gap_sigmas);
  compare(pair_count_cn(3), r.pair_prediction, r.pair_ratio, r.pair_gap_sigmas);

  r.in_band = std::abs(r.ratio - 1.0) <= config.band;
  r.gap_consistent = std::abs(r.stats.var_E - r.prediction) <= config.gap_sigmas * r.stats.stderr_var;
  if (!r.calibration_pass)
    r.verdict = Verdict::calibration_fail;
  else
    r.verdict = r.in_band && r.gap_consistent ? Verdict::pass : Verdict::fail;
  return r;
}

Json theorem2_result_to_json(const Theorem2Result& r) {
  return Json{{"stats", stats_to_json(r.stats)},
              {"volume", r.volume},
              {"cn", cn_to_json(r.cn)},
              {"prediction", r.prediction},
              {"ratio", r.ratio},
              {"gap_sigmas", r.gap_sigmas},
              {"in_band", r.in_band},
              {"gap_consistent", r.gap_consistent},
              {"pair_count_cn", pair_count_cn(3).value},
              {"pair_prediction", r.pair_prediction},
              {"pair_ratio", r.pair_ratio},
              {"pair_gap_sigmas", r.pair_gap_sigmas},
              {"calibration",
               {{"mean_count", r.mean_count},
                {"expected_count", r.expected_count},
                {"stderr", r.stats.stderr_mean},
                {"sigmas", r.calibration_sigmas},
                {"pass", r.calibration_pass}}},
              {"verdict", to_string(r.verdict)}};
}

}  // namespace latticelab
