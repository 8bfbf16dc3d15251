#include "latticelab/sampling.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "latticelab/counting.hpp"

namespace latticelab {

// ---------------------------------------------------------------------------
// Philox4x32-10

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> Philox::block(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kPhiloxW0;
      k[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, c[0], hi0, lo0);
    mulhilo(kPhiloxM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

Philox::Philox(Seed seed)
    : key_{static_cast<std::uint32_t>(seed.master), static_cast<std::uint32_t>(seed.master >> 32)},
      stream_(seed.stream) {}

void Philox::refill() {
  buf_ = block({static_cast<std::uint32_t>(block_index_), static_cast<std::uint32_t>(block_index_ >> 32),
                static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
               key_);
  ++block_index_;
  pos_ = 0;
}

std::uint32_t Philox::next_u32() {
  if (pos_ == 4) refill();
  return buf_[static_cast<std::size_t>(pos_++)];
}

std::uint64_t Philox::next_u64() {
  const std::uint64_t hi = next_u32();
  return (hi << 32) | next_u32();
}

double Philox::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Philox::uniform_open() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

double Philox::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform_open()));
  const double th = 2.0 * std::numbers::pi * uniform();
  spare_ = r * std::sin(th);
  has_spare_ = true;
  return r * std::cos(th);
}

// ---------------------------------------------------------------------------
// Compact family

void CompactFamilySpec::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("compact family: delta must be positive");
  if (!(det_floor > 0.0)) throw ConfigError("compact family: det_floor must be positive");
  if (x0.abs_det() < det_floor) throw ConfigError("compact family: |det X0| is below det_floor");
}

LatticeBasis sample_compact(const CompactFamilySpec& spec, Seed seed) {
  spec.validate();
  Philox rng(seed);
  const int n = spec.x0.dim();
  const Matrix& x0 = spec.x0.matrix();
  for (int attempt = 0; attempt < 1000000; ++attempt) {
    Matrix x = x0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) x(i, j) += rng.uniform(-spec.delta, spec.delta);
    const double d = std::abs(x.determinant());
    if (d >= spec.det_floor) return LatticeBasis(std::move(x));
  }
  throw ConfigError("compact family: 10^6 consecutive determinant rejections");
}

// ---------------------------------------------------------------------------
// Haar-random unimodular lattices

void HaarSamplerConfig::validate() const {
  if (n == 2) {
    if (method != HaarMethod::exact2d) throw ConfigError("haar sampler: n = 2 requires method exact2d");
    return;
  }
  if (n != 3) throw ConfigError("haar sampler: only n = 2 and n = 3 are supported");
  if (method != HaarMethod::siegel3d) throw ConfigError("haar sampler: n = 3 requires method siegel3d");
  if (ratio_bound < 2.0 / std::sqrt(3.0) - 1e-12)
    throw ConfigError("haar sampler: ratio_bound below 2/sqrt(3) does not cover the quotient");
  if (!(eta_bound >= 0.5)) throw ConfigError("haar sampler: eta_bound below 1/2 does not cover the quotient");
  if (!(cusp_tilt > 0.0 && cusp_tilt <= 2.0)) throw ConfigError("haar sampler: cusp_tilt must lie in (0, 2]");
  if (multiplicity_correction && eta_bound != 0.5)
    throw ConfigError("haar sampler: multiplicity correction needs eta_bound = 1/2");
}

HaarSamplerConfig default_haar_config(int n) {
  HaarSamplerConfig c;
  c.n = n;
  c.method = n == 2 ? HaarMethod::exact2d : HaarMethod::siegel3d;
  return c;
}

const char* to_string(HaarMethod m) { return m == HaarMethod::exact2d ? "exact2d" : "siegel3d"; }

HaarMethod haar_method_from_string(const std::string& s) {
  if (s == "exact2d") return HaarMethod::exact2d;
  if (s == "siegel3d") return HaarMethod::siegel3d;
  throw ConfigError("unknown haar method '" + s + "'");
}

Matrix haar_rotation(int n, Philox& rng) {
  if (n == 2) {
    const double th = 2.0 * std::numbers::pi * rng.uniform();
    Matrix r(2, 2);
    r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    return r;
  }
  if (n != 3) throw LatticeError("haar_rotation: n must be 2 or 3");
  // Uniform unit quaternion.
  double q[4];
  double nrm = 0.0;
  do {
    nrm = 0.0;
    for (double& v : q) {
      v = rng.normal();
      nrm += v * v;
    }
  } while (nrm < 1e-12);
  nrm = std::sqrt(nrm);
  const double w = q[0] / nrm, x = q[1] / nrm, y = q[2] / nrm, z = q[3] / nrm;
  Matrix r(3, 3);
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w),  //
      2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w),   //
      2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y);
  return r;
}

namespace {

std::int64_t gcd3(std::int64_t a, std::int64_t b, std::int64_t c) { return std::gcd(std::gcd(a, b), c); }

LatticeBasis with_unit_det(Matrix x) {
  const double d = x.determinant();
  x.col(x.cols() - 1) /= d;
  return LatticeBasis(std::move(x));
}

LatticeBasis sample_exact2d(Philox& rng) {
  // tau = x + iy with density y^-2 on the modular fundamental domain.
  const double y0 = std::sqrt(3.0) / 2.0;
  double x = 0.0;
  double y = 0.0;
  do {
    x = rng.uniform(-0.5, 0.5);
    y = y0 / rng.uniform_open();
  } while (x * x + y * y < 1.0);
  Matrix b(2, 2);
  const double s = 1.0 / std::sqrt(y);
  b << s, x * s, 0.0, y * s;
  return with_unit_det(haar_rotation(2, rng) * b);
}

WeightedSample sample_siegel3d(const HaarSamplerConfig& cfg, Philox& rng) {
  // On the Siegel set the invariant density is b1^2 b3^-2 = exp(2 alpha1 +
  // 2 alpha2) with alpha_i = log(b_i / b_{i+1}) <= log(ratio_bound), and eta
  // uniform. The proposal uses exponent kappa instead of 2.
  const double log_rho = std::log(cfg.ratio_bound);
  const double kappa = cfg.cusp_tilt;
  while (true) {
    const double a1 = log_rho + std::log(rng.uniform_open()) / kappa;
    const double a2 = log_rho + std::log(rng.uniform_open()) / kappa;
    double eta[3];
    for (double& e : eta) e = rng.uniform(-cfg.eta_bound, cfg.eta_bound);
    const double beta2 = (a2 - a1) / 3.0;
    const double b[3] = {std::exp(beta2 + a1), std::exp(beta2), std::exp(beta2 - a2)};
    Matrix r = unipotent_from_eta(3, eta);
    for (int i = 0; i < 3; ++i) r.row(i) *= b[i];
    const double u = rng.uniform();
    if (cfg.multiplicity_correction) {
      const int m = siegel_multiplicity(LatticeBasis(r), cfg);
      if (u * m >= 4.0) continue;
    }
    double weight = 1.0;
    if (kappa != 2.0) weight = (4.0 / (kappa * kappa)) * std::exp((2.0 - kappa) * (a1 + a2 - 2.0 * log_rho));
    return WeightedSample{with_unit_det(haar_rotation(3, rng) * r), weight};
  }
}

}  // namespace

int siegel_multiplicity(const LatticeBasis& x, const HaarSamplerConfig& config) {
  if (x.dim() != 3) throw LatticeError("siegel_multiplicity: n must be 3");
  const double rho = config.ratio_bound;
  const double lambda1 = shortest_vector_length(x);
  // b1 = |c1| satisfies lambda1 <= b1 <= min(rho, rho^2 lambda1); the second
  // column has |x2|^2 = b2^2 + eta12^2 b1^2 with b2^2 <= rho / b1.
  const double r1 = std::min(rho, rho * rho * lambda1);
  const double r2 = std::sqrt(rho / lambda1 + 0.25 * r1 * r1);
  const auto pts = enumerate_points(x, std::max(r1, r2) * (1.0 + 1e-9));
  std::vector<Vector> vecs;
  vecs.reserve(pts.size());
  for (const IntVector& p : pts) vecs.push_back(x.matrix() * p.cast<double>());

  int count = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const IntVector& k = pts[i];
    const double b1sq = vecs[i].squaredNorm();
    if (b1sq > r1 * r1 * (1.0 + 1e-12)) continue;
    if (gcd3(k(0), k(1), k(2)) != 1) continue;
    const double b1 = std::sqrt(b1sq);
    const double lo = b1sq / (rho * rho);
    const double hi = rho / b1;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      const double eta = vecs[j].dot(vecs[i]) / b1sq;
      if (std::abs(eta) > config.eta_bound) continue;
      const double wsq = (vecs[j] - eta * vecs[i]).squaredNorm();
      if (wsq < lo || wsq > hi) continue;
      const IntVector& l = pts[j];
      const std::int64_t g =
          gcd3(k(0) * l(1) - k(1) * l(0), k(0) * l(2) - k(2) * l(0), k(1) * l(2) - k(2) * l(1));
      if (g == 1) ++count;
    }
  }
  return count;
}

LatticeBasis sample_haar_unimodular(const HaarSamplerConfig& config, Philox& rng) {
  config.validate();
  if (config.cusp_tilt != 2.0 && config.n == 3)
    throw ConfigError("haar sampler: a tilted proposal needs the weighted interface");
  return config.n == 2 ? sample_exact2d(rng) : sample_siegel3d(config, rng).x;
}

WeightedSample sample_haar_weighted(const HaarSamplerConfig& config, Seed seed) {
  config.validate();
  Philox rng(seed);
  if (config.n == 2) return WeightedSample{sample_exact2d(rng), 1.0};
  return sample_siegel3d(config, rng);
}

LatticeBasis sample_haar_unimodular(const HaarSamplerConfig& config, Seed seed) {
  Philox rng(seed);
  return sample_haar_unimodular(config, rng);
}

LatticeBasis sample_det_band(double a, double b, const HaarSamplerConfig& config, Seed seed) {
  if (!(a > 0.0) || !(b > a)) throw LatticeError("sample_det_band: need 0 < a < b");
  Philox rng(seed);
  const LatticeBasis y = sample_haar_unimodular(config, rng);
  const double n = config.n;
  const double log_r = (std::log(a) + rng.uniform() * (std::log(b) - std::log(a))) / n;
  return y.scaled(std::exp(log_r));
}

}  // namespace latticelab
