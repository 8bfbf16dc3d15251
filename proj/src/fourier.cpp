#include "latticelab/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "latticelab/counting.hpp"
#include "latticelab/quadrature.hpp"

namespace latticelab {

namespace {

constexpr double kPi = std::numbers::pi;

double j1_series(double x) {
  const double h = 0.5 * x;
  const double h2 = h * h;
  double term = h;
  double sum = term;
  for (int m = 1; m < 200; ++m) {
    term *= -h2 / (static_cast<double>(m) * (m + 1));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

double j1_miller(double x) {
  int top = 2 * (static_cast<int>(x / 2.0) + 30);
  double next = 0.0;  // J_{k+1}
  double cur = 1e-30; // J_k
  double norm = 0.0;
  double j1 = 0.0;
  for (int k = top; k >= 1; --k) {
    const double prev = (2.0 * k / x) * cur - next;  // J_{k-1}
    next = cur;
    cur = prev;
    if (k - 1 == 1) j1 = cur;
    if (k - 1 > 0 && (k - 1) % 2 == 0) norm += 2.0 * cur;
    if (std::abs(cur) > 1e250) {
      cur *= 1e-250;
      next *= 1e-250;
      norm *= 1e-250;
      j1 *= 1e-250;
    }
  }
  norm += cur;  // J_0
  return j1 / norm;
}

double j1_asymptotic(double x) {
  // Hankel expansion with mu = 4 nu^2 = 4; terms summed until they stop
  // shrinking.
  const double mu = 4.0;
  const double z = 8.0 * x;
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;
  double last = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) / (k * z);
    const double mag = std::abs(term);
    if (mag > last && k > 2) break;
    last = mag;
    // k odd feeds Q with sign (-1)^((k-1)/2); k even feeds P with sign (-1)^(k/2).
    if (k % 2 == 1) {
      q += (((k - 1) / 2) % 2 == 0 ? 1.0 : -1.0) * term;
    } else {
      p += ((k / 2) % 2 == 0 ? 1.0 : -1.0) * term;
    }
    if (mag < 1e-18) break;
  }
  const double w = x - 0.75 * kPi;
  return std::sqrt(2.0 / (kPi * x)) * (p * std::cos(w) - q * std::sin(w));
}

double hat_chi_ball3(double s) {
  if (s < 0.05) {
    // 4 pi sum_m (-1)^m (2 pi s)^(2m) / ((2m+1)! (2m+3))
    const double u2 = 4.0 * kPi * kPi * s * s;
    double fact = 1.0;  // (2m+1)!
    double pw = 1.0;
    double sum = 0.0;
    for (int m = 0; m < 12; ++m) {
      if (m > 0) fact *= (2.0 * m) * (2.0 * m + 1.0);
      sum += ((m % 2 == 0) ? 1.0 : -1.0) * pw / (fact * (2.0 * m + 3.0));
      pw *= u2;
    }
    return 4.0 * kPi * sum;
  }
  const double w = 2.0 * kPi * s;
  return -std::cos(w) / (kPi * s * s) + std::sin(w) / (2.0 * kPi * kPi * s * s * s);
}

double hat_chi_ball2(double s) {
  if (s == 0.0) return kPi;
  return bessel_j1(2.0 * kPi * s) / s;
}

}  // namespace

double bessel_j1(double x) {
  if (x < 0.0) return -bessel_j1(-x);
  if (x < 8.0) return j1_series(x);
  if (x < 25.0) return j1_miller(x);
  return j1_asymptotic(x);
}

double hat_chi_ball(int n, double s) {
  if (s < 0.0) throw LatticeError("hat_chi_ball: negative frequency norm");
  switch (n) {
    case 2:
      return hat_chi_ball2(s);
    case 3:
      return hat_chi_ball3(s);
    default:
      throw LatticeError("hat_chi_ball: closed forms exist for n = 2, 3 only");
  }
}

double hat_chi_lattice(const LatticeBasis& x, const IntVector& k) {
  return hat_chi_ball(x.dim(), dual_norm(x, k)) / x.abs_det();
}

// ---------------------------------------------------------------------------
// Bump transform table

BumpTransformTable::BumpTransformTable() {
  // Composite Gauss-Legendre on [0, 1] resolves cos(2 pi x y) for y <= 200
  // with ~13 nodes per period; the bump is flat to all orders at x = 1.
  const GaussRule rule = composite_rule(gauss_legendre(20), 0.0, 1.0, 128);
  auto bump = [](double x) { return x < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0; };

  double mass = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) mass += rule.weights[i] * bump(rule.nodes[i]);
  norm_ = 2.0 * mass;

  const auto count = static_cast<std::size_t>(std::llround(kMaxFrequency / kStep)) + 1;
  values_.assign(count, 0.0);
  constexpr std::size_t kResync = 256;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = rule.nodes[i];
    const double f = rule.weights[i] * bump(x);
    if (f < 1e-300) continue;
    const double theta = 2.0 * kPi * x * kStep;
    const double cr = std::cos(theta);
    const double sr = std::sin(theta);
    double c = 1.0;
    double s = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
      if (j % kResync == 0) {
        c = std::cos(theta * static_cast<double>(j));
        s = std::sin(theta * static_cast<double>(j));
      }
      values_[j] += f * c;
      const double cn = c * cr - s * sr;
      s = s * cr + c * sr;
      c = cn;
    }
  }
  for (double& v : values_) v = 2.0 * v / norm_;
}

const BumpTransformTable& BumpTransformTable::instance() {
  static const BumpTransformTable table;
  return table;
}

double BumpTransformTable::profile(double x) const {
  const double ax = std::abs(x);
  return ax < 1.0 ? std::exp(-1.0 / (1.0 - ax * ax)) / norm_ : 0.0;
}

double BumpTransformTable::operator()(double y) const {
  const double ay = std::abs(y);
  if (ay >= kMaxFrequency) return 0.0;
  const double u = ay / kStep;
  const auto i = static_cast<std::ptrdiff_t>(u);
  const double f = u - static_cast<double>(i);
  const auto last = static_cast<std::ptrdiff_t>(values_.size()) - 1;
  auto at = [&](std::ptrdiff_t j) {
    if (j < 0) j = -j;  // even extension
    if (j > last) return 0.0;
    return values_[static_cast<std::size_t>(j)];
  };
  const double ym1 = at(i - 1);
  const double y0 = at(i);
  const double y1 = at(i + 1);
  const double y2 = at(i + 2);
  // Cubic Lagrange through nodes -1, 0, 1, 2.
  return ym1 * (-f * (f - 1.0) * (f - 2.0) / 6.0) + y0 * ((f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0) +
         y1 * (-(f + 1.0) * f * (f - 2.0) / 2.0) + y2 * ((f + 1.0) * f * (f - 1.0) / 6.0);
}

MollifierSpec::MollifierSpec(int n, double epsilon)
    : n_(n), epsilon_(epsilon), table_(&BumpTransformTable::instance()) {
  if (n < 1) throw LatticeError("MollifierSpec: dimension must be positive");
  if (!(epsilon > 0.0)) throw LatticeError("MollifierSpec: epsilon must be positive");
}

double MollifierSpec::support_radius() const { return std::sqrt(static_cast<double>(n_)); }

double MollifierSpec::hat(std::span<const double> xi) const {
  double p = 1.0;
  for (double v : xi) p *= (*table_)(v);
  return p;
}

// ---------------------------------------------------------------------------
// Smoothed count

namespace {

// Sums shells |k|_inf = 1, 2, ... incrementally so the auto-cutoff variant
// never revisits inner frequencies. Summation order is fixed by the shell
// walk, so results are bit-reproducible.
class PoissonSum {
 public:
  PoissonSum(const LatticeBasis& x, double t, double epsilon)
      : n_(x.dim()), t_(t), scale_(std::pow(t, x.dim()) / x.abs_det()), mollifier_(x.dim(), epsilon) {
    if (n_ != 2 && n_ != 3) throw LatticeError("smoothed_count: only n = 2, 3 are supported");
    if (!(t > 0.0)) throw LatticeError("smoothed_count: radius must be positive");
    const Matrix& d = x.dual();
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) dual_[static_cast<std::size_t>(i * 3 + j)] = d(i, j);
    value_ = scale_ * unit_ball_volume(n_);
  }

  int cutoff() const { return cutoff_; }
  double value() const { return value_; }

  /// Adds shell cutoff()+1 and returns the sum of |term| over it.
  double add_shell() {
    const int shell = ++cutoff_;
    factors_.push_back(mollifier_.hat0(mollifier_.epsilon() * shell));
    if (factors_.size() == 1) factors_.insert(factors_.begin(), 1.0);
    double sum = 0.0;
    double abs_sum = 0.0;
    int k[3] = {0, 0, 0};
    auto term = [&]() {
      double m = 1.0;
      double v2 = 0.0;
      for (int i = 0; i < n_; ++i) m *= factors_[static_cast<std::size_t>(std::abs(k[i]))];
      if (m == 0.0) return;
      for (int i = 0; i < n_; ++i) {
        double v = 0.0;
        for (int j = 0; j < n_; ++j) v += dual_[static_cast<std::size_t>(i * 3 + j)] * k[j];
        v2 += v * v;
      }
      const double tm = scale_ * hat_chi_ball(n_, t_ * std::sqrt(v2)) * m;
      sum += tm;
      abs_sum += std::abs(tm);
    };
    walk_shell(0, shell, false, k, term);
    value_ += sum;
    return abs_sum;
  }

 private:
  // Visits every k in [-K, K]^n with max |k_i| == K, lexicographically.
  template <class F>
  void walk_shell(int axis, int shell, bool on_face, int* k, F& f) {
    if (axis == n_) {
      if (on_face) f();
      return;
    }
    const bool last = axis == n_ - 1;
    for (int v = -shell; v <= shell; ++v) {
      const bool face = on_face || v == -shell || v == shell;
      if (last && !face) {
        // Jump straight to the upper face value.
        v = shell - 1;
        continue;
      }
      k[axis] = v;
      walk_shell(axis + 1, shell, face, k, f);
    }
  }

  int n_;
  double t_;
  double scale_;
  MollifierSpec mollifier_;
  double dual_[9] = {};
  std::vector<double> factors_;
  double value_ = 0.0;
  int cutoff_ = 0;
};

}  // namespace

namespace {

// |rho0-hat| has isolated zeros, so a single shell can look deceptively
// small. The tail estimate takes twice the largest shell |sum| over the last
// 1/eps shells, i.e. one unit of the mollifier's frequency scale.
class TailWindow {
 public:
  explicit TailWindow(double epsilon)
      : width_(std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(1.0 / epsilon)))) {}
  double push(double shell_abs) {
    recent_.push_back(shell_abs);
    if (recent_.size() > width_) recent_.erase(recent_.begin());
    return 2.0 * *std::max_element(recent_.begin(), recent_.end());
  }

 private:
  std::size_t width_;
  std::vector<double> recent_;
};

}  // namespace

SmoothedCount smoothed_count(const LatticeBasis& x, double t, double epsilon, int cutoff) {
  if (cutoff < 1) throw LatticeError("smoothed_count: cutoff must be >= 1");
  PoissonSum sum(x, t, epsilon);
  TailWindow window(epsilon);
  double tail = 0.0;
  for (int c = 0; c < cutoff; ++c) tail = window.push(sum.add_shell());
  SmoothedCount out;
  out.t = t;
  out.epsilon = epsilon;
  out.cutoff = sum.cutoff();
  out.value = sum.value();
  out.tail_estimate = tail;
  out.tail_warning = tail > 0.5;
  return out;
}

SmoothedCount smoothed_count_to_tolerance(const LatticeBasis& x, double t, double epsilon, double tail_target,
                                          int max_cutoff) {
  if (!(tail_target > 0.0)) throw LatticeError("smoothed_count_to_tolerance: target must be positive");
  PoissonSum sum(x, t, epsilon);
  TailWindow window(epsilon);
  double prev_tail = 0.0;
  double tail = 0.0;
  bool converged = false;
  while (sum.cutoff() < max_cutoff) {
    prev_tail = tail;
    tail = window.push(sum.add_shell());
    if (sum.cutoff() >= 2 && tail < tail_target && prev_tail < tail_target) {
      converged = true;
      break;
    }
  }
  SmoothedCount out;
  out.t = t;
  out.epsilon = epsilon;
  out.cutoff = sum.cutoff();
  out.value = sum.value();
  out.tail_estimate = tail;
  out.tail_warning = tail > 0.5;
  out.converged = converged;
  return out;
}

SandwichReport sandwich_check(const LatticeBasis& x, double t, double epsilon) {
  const MollifierSpec mollifier(x.dim(), epsilon);
  SandwichReport rep;
  rep.t = t;
  rep.epsilon = epsilon;
  rep.shift = mollifier.support_radius() * epsilon * x.operator_norm();
  if (!(t - rep.shift > 0.0)) throw LatticeError("sandwich_check: t - R*eps*||X|| must be positive");

  rep.exact = count_points(x, t);
  rep.lower = smoothed_count_to_tolerance(x, t - rep.shift, epsilon);
  rep.upper = smoothed_count_to_tolerance(x, t + rep.shift, epsilon);
  const double exact = static_cast<double>(rep.exact);
  rep.lower_slack = exact - rep.lower.value;
  rep.upper_slack = rep.upper.value - exact;
  if (!rep.lower.converged || !rep.upper.converged) {
    rep.status = SandwichStatus::inconclusive;
    return rep;
  }
  const bool ok = rep.lower_slack >= -2.0 * (rep.lower.tail_estimate + 1e-6) &&
                  rep.upper_slack >= -2.0 * (rep.upper.tail_estimate + 1e-6);
  rep.status = ok ? SandwichStatus::holds : SandwichStatus::violated;
  return rep;
}

const char* to_string(SandwichStatus s) {
  switch (s) {
    case SandwichStatus::holds:
      return "holds";
    case SandwichStatus::violated:
      return "violated";
    case SandwichStatus::inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

}  // namespace latticelab
