// Random lattices: compact perturbation families, Haar-random unimodular
// lattices and the determinant band. Every sampler is a pure function of
// (config, Seed).

#pragma once

#include "latticelab/lattice.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace latticelab {

/// A sampler configuration that cannot produce samples.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Seed {
  std::uint64_t master = 0;
  std::uint64_t stream = 0;

  /// Seed for the i-th sample of a run keyed by `master`.
  Seed with_stream(std::uint64_t s) const { return Seed{master, s}; }
  bool operator==(const Seed&) const = default;
};

/// Philox4x32-10 counter-based generator. The key is the master seed and the
/// upper counter half is the stream, so substreams never overlap.
class Philox {
 public:
  explicit Philox(Seed seed);

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// 53-bit uniform in [0, 1).
  double uniform();
  /// Uniform in (0, 1); never returns 0, safe for log.
  double uniform_open();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal by Box-Muller.
  double normal();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t block_index_ = 0;
  std::uint64_t stream_;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct CompactFamilySpec {
  LatticeBasis x0;
  double delta = 0.1;
  double det_floor = 0.5;

  /// Throws ConfigError unless delta > 0, det_floor > 0 and |det X0| >= det_floor.
  void validate() const;
};

/// X0 + D, D uniform in [-delta, delta]^{n x n}, resampled until
/// |det| >= det_floor. ConfigError after 10^6 consecutive rejections.
LatticeBasis sample_compact(const CompactFamilySpec& spec, Seed seed);

enum class HaarMethod { exact2d, siegel3d };

struct HaarSamplerConfig {
  int n = 3;
  HaarMethod method = HaarMethod::siegel3d;
  /// Siegel set: |eta_ij| <= eta_bound and b_i <= ratio_bound * b_{i+1},
  /// where b_i are the diagonal entries of A.
  double eta_bound = 0.5;
  double ratio_bound = 1.1547005383792515;  // 2 / sqrt(3)
  /// Thin the Siegel-set draw by 4 / multiplicity so the output is Haar
  /// distributed on the quotient rather than on the Siegel set.
  bool multiplicity_correction = true;
  /// Exponent kappa of the Siegel-set proposal exp(kappa (alpha1 + alpha2)).
  /// kappa = 2 is the invariant density itself. Smaller values put more
  /// draws in the cusp; sample_haar_weighted then returns the importance
  /// weight p/q, to be used self-normalized.
  double cusp_tilt = 2.0;

  void validate() const;
};

HaarSamplerConfig default_haar_config(int n);
const char* to_string(HaarMethod m);
HaarMethod haar_method_from_string(const std::string& s);

/// det = +1 lattice, Haar distributed on SL_n(R)/SL_n(Z) for n = 2, 3.
LatticeBasis sample_haar_unimodular(const HaarSamplerConfig& config, Seed seed);
LatticeBasis sample_haar_unimodular(const HaarSamplerConfig& config, Philox& rng);

struct WeightedSample {
  LatticeBasis x;
  double weight = 1.0;
};

/// As sample_haar_unimodular, with the importance weight of the draw when
/// cusp_tilt != 2 (weight 1 otherwise, and for n = 2).
WeightedSample sample_haar_weighted(const HaarSamplerConfig& config, Seed seed);

/// r * Y with Y Haar-unimodular and r^n log-uniform on [a, b].
LatticeBasis sample_det_band(double a, double b, const HaarSamplerConfig& config, Seed seed);

/// Uniform rotation in SO(n), n = 2, 3.
Matrix haar_rotation(int n, Philox& rng);

/// Number of bases of the (det 1, n = 3) lattice X Z^3 that lie in the
/// Siegel set of `config`, counting only bases related to X by SL_3(Z).
/// Always a multiple of 4 and >= 4 when X itself lies in the set.
int siegel_multiplicity(const LatticeBasis& x, const HaarSamplerConfig& config);

}  // namespace latticelab
