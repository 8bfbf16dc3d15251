// End-to-end experiments behind the theorem1 / theorem2 commands, with
// their JSON configs.

#pragma once

#include "latticelab/io.hpp"
#include "latticelab/mean_value.hpp"
#include "latticelab/sampling.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace latticelab {

enum class Verdict { pass, fail, calibration_fail };
const char* to_string(Verdict v);

struct Theorem1Config {
  CompactFamilySpec family{LatticeBasis::identity(3), 0.1, 0.5};
  std::vector<double> t_grid{10.0, 20.0, 40.0, 80.0};
  std::uint64_t samples = 200;
  double slope_lo = 0.8;
  double slope_hi = 1.3;

  /// ConfigError for fewer than three radii, radii <= 1, M < 2 or an empty band.
  void validate() const;
};

Theorem1Config theorem1_config_from_json(const Json& j);
Json theorem1_config_to_json(const Theorem1Config& c);

struct Theorem1Result {
  std::vector<ExperimentStats> stats;
  ScalingFit fit;
  Verdict verdict = Verdict::fail;
};

Theorem1Result run_theorem1(const Theorem1Config& config, Seed seed, int threads = 0);

struct Theorem2Config {
  double t = 8.0;
  std::uint64_t samples = 10000;
  /// Cusp-tilted proposal with self-normalized weights; cusp_tilt = 2 gives
  /// plain Haar draws.
  HaarSamplerConfig sampler = [] {
    HaarSamplerConfig c = default_haar_config(3);
    c.cusp_tilt = 1.0;
    return c;
  }();
  double band = 0.25;              // |var / prediction - 1| <= band
  double gap_sigmas = 3.0;         // |var - prediction| <= gap_sigmas * stderr_var
  double calibration_sigmas = 3.0; // |mean N - (V + 1)| <= calibration_sigmas * stderr
  double cn_tolerance = 1e-12;

  /// ConfigError unless t >= 2, n = 3, M >= 2 and the tolerances are positive.
  void validate() const;
};

Theorem2Config theorem2_config_from_json(const Json& j);
Json theorem2_config_to_json(const Theorem2Config& c);

struct Theorem2Result {
  ExperimentStats stats;
  CnResult cn;
  double volume = 0.0;      // vol(t Omega)
  double prediction = 0.0;  // 1 + (c_n - 2) V with the series c_n
  double ratio = 0.0;
  double gap_sigmas = 0.0;  // (var - prediction) / stderr_var
  /// The same comparison with c_n counted from dependent pairs.
  double pair_prediction = 0.0;
  double pair_ratio = 0.0;
  double pair_gap_sigmas = 0.0;
  double mean_count = 0.0;
  double expected_count = 0.0;
  double calibration_sigmas = 0.0;
  bool calibration_pass = false;
  bool in_band = false;
  bool gap_consistent = false;
  Verdict verdict = Verdict::fail;
};

Theorem2Result run_theorem2(const Theorem2Config& config, Seed seed, int threads = 0);
Json theorem2_result_to_json(const Theorem2Result& r);

}  // namespace latticelab
