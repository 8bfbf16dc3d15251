#include "latticelab/counting.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "latticelab/format.hpp"

namespace latticelab {

namespace {

// Outer levels only prune, so they may be generous; the innermost interval
// ends are settled by in_closed_ball.
constexpr double kOuterSlack = 1e-9;

struct Triangular {
  int n;
  std::vector<double> r;  // row-major upper-triangular factor, ||Xk|| = ||Rk||
  double operator()(int i, int j) const { return r[static_cast<std::size_t>(i * n + j)]; }
};

Triangular triangular_factor(const LatticeBasis& x) {
  const IwasawaForm form = iwasawa_decompose(x);
  const int n = x.dim();
  Triangular t{n, std::vector<double>(static_cast<std::size_t>(n * n), 0.0)};
  for (int i = 0; i < n; ++i) {
    const double d = 1.0 / std::sqrt(form.a(i));
    t.r[static_cast<std::size_t>(i * n + i)] = d;
    for (int j = i + 1; j < n; ++j) t.r[static_cast<std::size_t>(i * n + j)] = d * form.eta(eta_index(n, i, j));
  }
  return t;
}

double norm_sq(const Matrix& xm, std::span<const std::int64_t> k) {
  const auto n = xm.rows();
  double s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double v = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) v += xm(i, j) * static_cast<double>(k[static_cast<std::size_t>(j)]);
    s += v * v;
  }
  return s;
}

// Walks all outer coordinate tuples (k_1..k_{n-1}) whose slab is nonempty and
// hands the innermost interval [center - half, center + half] to `leaf`.
template <class Leaf>
void enumerate_rows(const Triangular& r, double bound, std::vector<std::int64_t>& k, Leaf&& leaf) {
  const int n = r.n;
  std::vector<double> rem(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<double> center(static_cast<std::size_t>(n), 0.0);
  std::vector<std::int64_t> hi(static_cast<std::size_t>(n), 0);
  rem[static_cast<std::size_t>(n)] = bound;

  auto slab = [&](int level) {
    double s = 0.0;
    for (int j = level + 1; j < n; ++j) s += r(level, j) * static_cast<double>(k[static_cast<std::size_t>(j)]);
    const double diag = r(level, level);
    center[static_cast<std::size_t>(level)] = -s / diag;
    const double rm = std::max(0.0, rem[static_cast<std::size_t>(level + 1)]);
    return std::sqrt(rm) / diag;
  };

  auto enter = [&](int level) {
    const double half = slab(level) * (1.0 + kOuterSlack);
    const double c = center[static_cast<std::size_t>(level)];
    k[static_cast<std::size_t>(level)] = static_cast<std::int64_t>(std::ceil(c - half));
    hi[static_cast<std::size_t>(level)] = static_cast<std::int64_t>(std::floor(c + half));
  };

  int level = n - 1;
  if (n == 1) {
    leaf(center[0], slab(0));
    return;
  }
  enter(level);
  while (true) {
    const auto lv = static_cast<std::size_t>(level);
    if (k[lv] > hi[lv]) {
      if (level == n - 1) return;
      ++level;
      ++k[static_cast<std::size_t>(level)];
      continue;
    }
    const double y = r(level, level) * (static_cast<double>(k[lv]) - center[lv]);
    rem[lv] = rem[lv + 1] - y * y;
    if (level == 1) {
      const double half = slab(0);
      leaf(center[0], half);
      ++k[lv];
      continue;
    }
    --level;
    enter(level);
  }
}

}  // namespace

double unit_ball_volume(int n) {
  return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

double ball_volume(int n, double t, double abs_det) {
  if (t < 0.0) throw LatticeError("ball_volume: negative radius");
  if (!(abs_det > 0.0)) throw LatticeError("ball_volume: determinant must be positive");
  return std::pow(t, n) * unit_ball_volume(n) / abs_det;
}

bool in_closed_ball(const LatticeBasis& x, std::span<const std::int64_t> k, double t) {
  return norm_sq(x.matrix(), k) <= t * t * (1.0 + kBoundaryTolerance);
}

std::uint64_t count_points(const LatticeBasis& x, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw LatticeError("count_points: radius must be finite and >= 0");
  const int n = x.dim();
  if (ball_volume(n, t, x.abs_det()) > 1e18) throw CountOverflow("count_points: count would overflow 64 bits");

  const Triangular r = triangular_factor(x);
  const double exact_bound = t * t * (1.0 + kBoundaryTolerance);
  const double bound = exact_bound * (1.0 + kOuterSlack) + 1e-300;
  const Matrix& xm = x.matrix();
  std::vector<std::int64_t> k(static_cast<std::size_t>(n), 0);
  std::uint64_t total = 0;

  auto inside = [&](std::int64_t v) {
    k[0] = v;
    return norm_sq(xm, k) <= exact_bound;
  };

  enumerate_rows(r, bound, k, [&](double c, double half) {
    auto lo = static_cast<std::int64_t>(std::ceil(c - half));
    auto hi = static_cast<std::int64_t>(std::floor(c + half));
    if (lo > hi) {
      const auto m = static_cast<std::int64_t>(std::llround(c));
      if (!inside(m)) return;
      lo = hi = m;
    }
    while (inside(lo - 1)) --lo;
    while (lo <= hi && !inside(lo)) ++lo;
    while (inside(hi + 1)) ++hi;
    while (hi >= lo && !inside(hi)) --hi;
    if (hi >= lo) total += static_cast<std::uint64_t>(hi - lo + 1);
  });
  return total;
}

double error_term(const LatticeBasis& x, double t) {
  return static_cast<double>(count_points(x, t)) - ball_volume(x.dim(), t, x.abs_det());
}

CountResult count_result(const LatticeBasis& x, double t) {
  CountResult res;
  res.t = t;
  res.count = count_points(x, t);
  res.volume = ball_volume(x.dim(), t, x.abs_det());
  res.remainder = static_cast<double>(res.count) - res.volume;
  return res;
}

std::vector<CountResult> count_scan(const LatticeBasis& x, std::span<const double> t_grid) {
  if (t_grid.empty()) throw LatticeError("count_scan: empty radius grid");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (t_grid[i] < t_grid[i - 1]) throw LatticeError("count_scan: radius grid must be nondecreasing");
  std::vector<CountResult> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) out.push_back(count_result(x, t));
  return out;
}

void write_count_csv(std::ostream& out, std::span<const CountResult> rows) {
  out << "t,count,volume,remainder\n";
  for (const auto& r : rows)
    out << fmt_real(r.t) << ',' << r.count << ',' << fmt_real(r.volume) << ',' << fmt_real(r.remainder) << '\n';
}

std::vector<IntVector> enumerate_points(const LatticeBasis& x, double t) {
  const int n = x.dim();
  const Triangular r = triangular_factor(x);
  const double exact_bound = t * t * (1.0 + kBoundaryTolerance);
  const Matrix& xm = x.matrix();
  std::vector<std::int64_t> k(static_cast<std::size_t>(n), 0);
  std::vector<IntVector> pts;
  enumerate_rows(r, exact_bound * (1.0 + kOuterSlack) + 1e-300, k, [&](double c, double half) {
    const auto lo = static_cast<std::int64_t>(std::ceil(c - half * (1.0 + kOuterSlack))) - 1;
    const auto hi = static_cast<std::int64_t>(std::floor(c + half * (1.0 + kOuterSlack))) + 1;
    for (std::int64_t v = lo; v <= hi; ++v) {
      k[0] = v;
      if (norm_sq(xm, k) > exact_bound) continue;
      if (std::all_of(k.begin(), k.end(), [](std::int64_t e) { return e == 0; })) continue;
      IntVector p(n);
      for (int i = 0; i < n; ++i) p(i) = k[static_cast<std::size_t>(i)];
      pts.push_back(std::move(p));
    }
  });
  return pts;
}

double shortest_vector_length(const LatticeBasis& x) {
  double radius = x.matrix().col(0).norm();
  for (Eigen::Index j = 1; j < x.matrix().cols(); ++j) radius = std::min(radius, x.matrix().col(j).norm());
  double best = radius;
  for (const IntVector& p : enumerate_points(x, radius)) {
    const double len = (x.matrix() * p.cast<double>()).norm();
    best = std::min(best, len);
  }
  return best;
}

}  // namespace latticelab
