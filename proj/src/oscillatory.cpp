#include "latticelab/oscillatory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "json.hpp"
#include "latticelab/format.hpp"
#include "latticelab/quadrature.hpp"

namespace latticelab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double euclid(std::span<const std::int64_t> v) {
  double s = 0.0;
  for (auto x : v) s += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(s);
}

Vector tilde(std::span<const double> eta, std::span<const std::int64_t> k) {
  std::vector<double> kd(k.begin(), k.end());
  return transformed_coords(eta, kd);
}

// Everything the integrand needs, computed once per spec.
struct Prepared {
  int n = 0;
  std::vector<double> kt2, lt2;  // squared transformed coordinates
  double nk2 = 0.0, nl2 = 0.0;   // ||k||^2, ||l||^2
  double half_power = 1.0;       // weight exponent / 2, applied to squared ratios
  double s1 = 1.0, s2 = -1.0;

  explicit Prepared(const OscillatorySpec& spec) : n(spec.n) {
    const Vector kt = tilde(spec.eta, spec.k);
    const Vector lt = tilde(spec.eta, spec.l);
    for (int i = 0; i < n; ++i) {
      kt2.push_back(kt(i) * kt(i));
      lt2.push_back(lt(i) * lt(i));
    }
    nk2 = std::pow(euclid(spec.k), 2);
    nl2 = std::pow(euclid(spec.l), 2);
    half_power = n == 3 ? 1.0 : 0.75;
    s1 = spec.s1;
    s2 = spec.s2;
  }

  double ratio_weight(double u, double v) const {
    const double r = (nk2 / u) * (nl2 / v);
    return half_power == 1.0 ? r : std::pow(r, half_power);
  }
};

void check_point(const OscillatorySpec& spec, std::span<const double> a) {
  if (static_cast<int>(a.size()) != spec.n) throw LatticeError("oscillatory: a has the wrong dimension");
  for (double x : a)
    if (!(x > 0.0) || !std::isfinite(x)) throw LatticeError("oscillatory: a must be positive");
}

std::vector<int> grid_points(const std::vector<double>& periods, double ppp, const QuadratureOptions& opts) {
  std::vector<int> pts;
  for (double p : periods) {
    const double want = std::max<double>(opts.min_points_per_axis, std::ceil(ppp * p));
    pts.push_back(static_cast<int>(std::min(want, 1e9)));
  }
  return pts;
}

std::vector<int> halved(const std::vector<int>& pts, int order) {
  std::vector<int> h;
  for (int p : pts) h.push_back(std::max(order, (p + 1) / 2));
  return h;
}

int panels_for(int points, int order) { return std::max(1, (points + order - 1) / order); }

}  // namespace

void OscillatorySpec::validate() const {
  if (n != 2 && n != 3) throw LatticeError("oscillatory spec: n must be 2 or 3");
  if (static_cast<int>(k.size()) != n || static_cast<int>(l.size()) != n)
    throw LatticeError("oscillatory spec: k and l need n entries");
  if (std::all_of(k.begin(), k.end(), [](auto x) { return x == 0; }) ||
      std::all_of(l.begin(), l.end(), [](auto x) { return x == 0; }))
    throw LatticeError("oscillatory spec: k and l must be nonzero");
  if ((s1 != 1 && s1 != -1) || (s2 != 1 && s2 != -1)) throw LatticeError("oscillatory spec: signs must be +1 or -1");
  if (static_cast<int>(eta.size()) != eta_count(n)) throw LatticeError("oscillatory spec: wrong number of eta entries");
  for (double e : eta)
    if (!std::isfinite(e)) throw LatticeError("oscillatory spec: eta must be finite");
  if (static_cast<int>(psi.size()) != n) throw LatticeError("oscillatory spec: need one psi interval per axis");
  for (const auto& iv : psi)
    if (!(iv.lo > 0.0) || !(iv.hi > iv.lo) || !std::isfinite(iv.hi))
      throw LatticeError("oscillatory spec: psi intervals must satisfy 0 < lo < hi < inf");
}

double OscillatorySpec::box_volume() const {
  double v = 1.0;
  for (const auto& iv : psi) v *= iv.length();
  return v;
}

double phase(const OscillatorySpec& spec, std::span<const double> a) {
  spec.validate();
  check_point(spec, a);
  const Prepared p(spec);
  double u = 0.0, v = 0.0;
  for (int i = 0; i < spec.n; ++i) {
    u += a[i] * p.kt2[i];
    v += a[i] * p.lt2[i];
  }
  return p.s1 * std::sqrt(u) + p.s2 * std::sqrt(v);
}

double weight(const OscillatorySpec& spec, std::span<const double> a) {
  spec.validate();
  check_point(spec, a);
  for (int i = 0; i < spec.n; ++i)
    if (a[i] < spec.psi[i].lo || a[i] > spec.psi[i].hi) return 0.0;
  const Prepared p(spec);
  double u = 0.0, v = 0.0;
  for (int i = 0; i < spec.n; ++i) {
    u += a[i] * p.kt2[i];
    v += a[i] * p.lt2[i];
  }
  return p.ratio_weight(u, v);
}

std::vector<double> periods_per_axis(const OscillatorySpec& spec, double t) {
  spec.validate();
  if (!(t >= 0.0) || !std::isfinite(t)) throw LatticeError("oscillatory: t must be finite and >= 0");
  const Prepared p(spec);
  double u_min = 0.0, v_min = 0.0;
  for (int i = 0; i < spec.n; ++i) {
    u_min += spec.psi[i].lo * p.kt2[i];
    v_min += spec.psi[i].lo * p.lt2[i];
  }
  std::vector<double> out;
  for (int i = 0; i < spec.n; ++i) {
    const double x = p.kt2[i] / (2.0 * std::sqrt(u_min));
    const double y = p.lt2[i] / (2.0 * std::sqrt(v_min));
    // Opposite signs partly cancel; |x - y| <= max(x, y).
    const double f = spec.s1 == spec.s2 ? x + y : std::max(x, y);
    out.push_back(t * f * spec.psi[i].length());
  }
  return out;
}

std::complex<double> oscillatory_integral_fixed(const OscillatorySpec& spec, double t, std::span<const int> points,
                                                int panel_order) {
  spec.validate();
  if (!(t >= 0.0) || !std::isfinite(t)) throw LatticeError("oscillatory: t must be finite and >= 0");
  if (static_cast<int>(points.size()) != spec.n) throw LatticeError("oscillatory: need points for every axis");
  const Prepared p(spec);
  const GaussRule base = gauss_legendre(panel_order);
  std::vector<GaussRule> rules;
  for (int i = 0; i < spec.n; ++i)
    rules.push_back(composite_rule(base, spec.psi[i].lo, spec.psi[i].hi, panels_for(points[i], panel_order)));
  const double omega = kTwoPi * t;

  auto term = [&](double u, double v) {
    const double ang = omega * (p.s1 * std::sqrt(u) + p.s2 * std::sqrt(v));
    const double w = p.ratio_weight(u, v);
    return std::complex<double>(w * std::cos(ang), w * std::sin(ang));
  };

  std::complex<double> total = 0.0;
  const GaussRule& r0 = rules[0];
  const GaussRule& r1 = rules[1];
  for (std::size_t i = 0; i < r0.nodes.size(); ++i) {
    const double u0 = r0.nodes[i] * p.kt2[0];
    const double v0 = r0.nodes[i] * p.lt2[0];
    std::complex<double> row = 0.0;
    for (std::size_t j = 0; j < r1.nodes.size(); ++j) {
      const double u1 = u0 + r1.nodes[j] * p.kt2[1];
      const double v1 = v0 + r1.nodes[j] * p.lt2[1];
      if (spec.n == 2) {
        row += r1.weights[j] * term(u1, v1);
        continue;
      }
      const GaussRule& r2 = rules[2];
      std::complex<double> inner = 0.0;
      for (std::size_t m = 0; m < r2.nodes.size(); ++m)
        inner += r2.weights[m] * term(u1 + r2.nodes[m] * p.kt2[2], v1 + r2.nodes[m] * p.lt2[2]);
      row += r1.weights[j] * inner;
    }
    total += r0.weights[i] * row;
  }
  return total;
}

OscillatoryResult oscillatory_integral(const OscillatorySpec& spec, double t, const QuadratureOptions& opts) {
  if (!(opts.points_per_period >= 2.0)) throw LatticeError("oscillatory: points_per_period must be >= 2");
  if (opts.panel_order < 2 || opts.max_points_per_axis < opts.panel_order)
    throw LatticeError("oscillatory: invalid quadrature budget");
  const std::vector<double> periods = periods_per_axis(spec, t);
  const double target = opts.tolerance * spec.box_volume();
  double ppp = opts.points_per_period;
  std::vector<int> coarse_pts;
  std::complex<double> coarse;
  bool have_coarse = false;
  for (;;) {
    const std::vector<int> pts = grid_points(periods, ppp, opts);
    for (int i = 0; i < spec.n; ++i)
      if (pts[i] > opts.max_points_per_axis)
        throw ResolutionError("oscillatory integral needs " + std::to_string(pts[i]) + " points on axis " +
                              std::to_string(i) + " (budget " + std::to_string(opts.max_points_per_axis) +
                              ") at t = " + fmt_real(t));
    if (!have_coarse) {
      coarse_pts = halved(pts, opts.panel_order);
      coarse = oscillatory_integral_fixed(spec, t, coarse_pts, opts.panel_order);
    }
    const std::complex<double> fine = oscillatory_integral_fixed(spec, t, pts, opts.panel_order);
    const double err = std::abs(fine - coarse);
    if (err <= target) return OscillatoryResult{fine, err, pts};
    coarse = fine;
    coarse_pts = pts;
    have_coarse = true;
    ppp *= 2.0;
  }
}

OscillatoryResult eta_averaged_integral(const OscillatorySpec& spec, double t, const QuadratureOptions& opts) {
  spec.validate();
  const GaussRule g = composite_rule(gauss_legendre(8), 1.0, 2.0, 1);
  const int m = eta_count(spec.n);
  OscillatorySpec s = spec;
  OscillatoryResult out;
  out.value = 0.0;
  std::vector<int> idx(m, 0);
  for (;;) {
    double w = 1.0;
    for (int d = 0; d < m; ++d) {
      s.eta[d] = g.nodes[idx[d]];
      w *= g.weights[idx[d]];
    }
    const OscillatoryResult r = oscillatory_integral(s, t, opts);
    out.value += w * r.value;
    out.error += w * r.error;
    if (out.points.empty()) out.points = r.points;
    for (int i = 0; i < spec.n; ++i) out.points[i] = std::max(out.points[i], r.points[i]);
    int d = 0;
    while (d < m && ++idx[d] == static_cast<int>(g.nodes.size())) idx[d++] = 0;
    if (d == m) break;
  }
  return out;
}

Discriminant discriminant(std::span<const std::int64_t> k, std::span<const std::int64_t> l,
                          std::span<const double> eta) {
  if (k.size() < 2 || k.size() != l.size()) throw LatticeError("discriminant: k and l need equal size >= 2");
  if (static_cast<int>(eta.size()) != eta_count(static_cast<int>(k.size())))
    throw LatticeError("discriminant: wrong number of eta entries");
  const Vector kt = tilde(eta, k);
  const Vector lt = tilde(eta, l);
  Discriminant d;
  d.direct = kt(0) * kt(0) * lt(1) * lt(1) - kt(1) * kt(1) * lt(0) * lt(0);
  const double k1 = static_cast<double>(k[0]), k2 = static_cast<double>(k[1]);
  const double l1 = static_cast<double>(l[0]), l2 = static_cast<double>(l[1]);
  const double gamma = -eta[0];
  d.factored = (k1 * l2 - k2 * l1) * (k1 * l2 + k2 * l1 + 2.0 * gamma * k1 * l1);
  return d;
}

BoundCheckReport hessian_bound_check(const OscillatorySpec& spec, std::span<const double> t_grid,
                                     const QuadratureOptions& opts) {
  spec.validate();
  const double disc = discriminant(spec.k, spec.l, spec.eta).direct;
  if (!(std::abs(disc) > 1e-9)) throw LatticeError("hessian_bound_check: discriminant vanishes");
  if (t_grid.empty()) throw LatticeError("hessian_bound_check: empty t grid");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0) || !std::isfinite(t_grid[i])) throw LatticeError("hessian_bound_check: t must be positive");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw LatticeError("hessian_bound_check: t grid must increase");
  }
  const double scale = std::pow(euclid(spec.k), 1.5) * std::pow(euclid(spec.l), 1.5) / std::abs(disc);
  BoundCheckReport r;
  for (double t : t_grid) {
    const double m = std::abs(oscillatory_integral(spec, t, opts).value);
    const double b = scale / t;
    r.t_grid.push_back(t);
    r.measured.push_back(m);
    r.bound.push_back(b);
    r.ratio.push_back(m / b);
    r.max_ratio = std::max(r.max_ratio, m / b);
  }
  return r;
}

void write_bound_csv(std::ostream& out, const BoundCheckReport& r) {
  out << "t,measured,bound,ratio\n";
  for (std::size_t i = 0; i < r.t_grid.size(); ++i)
    out << fmt_real(r.t_grid[i]) << ',' << fmt_real(r.measured[i]) << ',' << fmt_real(r.bound[i]) << ','
        << fmt_real(r.ratio[i]) << '\n';
}

std::string bound_report_json(const BoundCheckReport& r) {
  nlohmann::json j;
  j["t"] = r.t_grid;
  j["measured"] = r.measured;
  j["bound"] = r.bound;
  j["ratio"] = r.ratio;
  j["max_ratio"] = r.max_ratio;
  return j.dump(2);
}

VdcReport vdc_check(const VdcProblem& pr, std::span<const double> t_grid, const QuadratureOptions& opts) {
  if (!pr.phi || !pr.dphi || !pr.psi0 || !pr.dpsi0) throw LatticeError("vdc_check: all four functions are required");
  if (!(pr.b > pr.a) || !std::isfinite(pr.a) || !std::isfinite(pr.b)) throw LatticeError("vdc_check: need a < b");
  if (pr.check_points < 2) throw LatticeError("vdc_check: need at least two check points");
  std::vector<double> d(pr.check_points);
  for (int j = 0; j < pr.check_points; ++j)
    d[j] = pr.dphi(pr.a + (pr.b - pr.a) * j / (pr.check_points - 1.0));
  const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
  const double slack = 1e-12 * std::max(1.0, std::abs(*hi));
  bool up = true, down = true;
  for (int j = 1; j < pr.check_points; ++j) {
    up = up && d[j] >= d[j - 1] - slack;
    down = down && d[j] <= d[j - 1] + slack;
  }
  if (!up && !down) throw LatticeError("vdc_check: phi' is not monotone on the check grid");
  if (!(*lo > 0.0)) throw LatticeError("vdc_check: phi' must be bounded below by a positive c0");

  VdcReport r;
  r.c0 = *lo;
  const double max_slope = std::max(std::abs(*lo), std::abs(*hi));
  // Total variation of psi0 on [a, b]: |psi0'| has kinks, so many panels.
  const GaussRule tv_rule = composite_rule(gauss_legendre(10), pr.a, pr.b, 200);
  const double tv = integrate([&](double x) { return std::abs(pr.dpsi0(x)); }, tv_rule);
  const double edge = std::abs(pr.psi0(pr.b)) + tv;
  const GaussRule base = gauss_legendre(opts.panel_order);

  for (double t : t_grid) {
    if (!(t > 0.0) || !std::isfinite(t)) throw LatticeError("vdc_check: t must be positive");
    auto eval = [&](int points) {
      const GaussRule g = composite_rule(base, pr.a, pr.b, panels_for(points, opts.panel_order));
      std::complex<double> s = 0.0;
      for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const double x = g.nodes[i];
        const double ang = t * pr.phi(x);
        s += g.weights[i] * pr.psi0(x) * std::complex<double>(std::cos(ang), std::sin(ang));
      }
      return s;
    };
    const double periods = t * max_slope * (pr.b - pr.a) / kTwoPi;
    double ppp = opts.points_per_period;
    int pts = static_cast<int>(std::max<double>(opts.min_points_per_axis, std::ceil(ppp * periods)));
    std::complex<double> coarse = eval(std::max(opts.panel_order, (pts + 1) / 2));
    for (;;) {
      if (pts > pr.max_points)
        throw ResolutionError("vdc_check needs " + std::to_string(pts) + " points at t = " + fmt_real(t));
      const std::complex<double> fine = eval(pts);
      if (std::abs(fine - coarse) <= opts.tolerance * (pr.b - pr.a)) {
        const double m = std::abs(fine);
        const double b = edge / (r.c0 * t);
        const double ratio = b > 0.0 ? m / b : 0.0;
        r.t_grid.push_back(t);
        r.measured.push_back(m);
        r.bound.push_back(b);
        r.ratio.push_back(ratio);
        r.max_ratio = std::max(r.max_ratio, ratio);
        break;
      }
      coarse = fine;
      pts *= 2;
    }
  }
  return r;
}

void write_vdc_csv(std::ostream& out, const VdcReport& r) {
  out << "t,measured,bound,ratio\n";
  for (std::size_t i = 0; i < r.t_grid.size(); ++i)
    out << fmt_real(r.t_grid[i]) << ',' << fmt_real(r.measured[i]) << ',' << fmt_real(r.bound[i]) << ','
        << fmt_real(r.ratio[i]) << '\n';
}

OscillatorySpec sample_oscillatory_spec(const OscillatoryPopulation& pop, Seed seed) {
  if (pop.n != 2 && pop.n != 3) throw ConfigError("oscillatory population: n must be 2 or 3");
  if (pop.max_entry < 1) throw ConfigError("oscillatory population: max_entry must be >= 1");
  if (!(pop.box.lo > 0.0) || !(pop.box.hi > pop.box.lo)) throw ConfigError("oscillatory population: bad psi box");
  if (!(pop.eta_range.hi >= pop.eta_range.lo)) throw ConfigError("oscillatory population: bad eta range");
  Philox rng(seed);
  const int span = 2 * pop.max_entry + 1;
  auto entry = [&]() {
    return static_cast<std::int64_t>(std::min(span - 1, static_cast<int>(rng.uniform() * span))) - pop.max_entry;
  };
  for (int attempt = 0; attempt < 100000; ++attempt) {
    OscillatorySpec s;
    s.n = pop.n;
    for (int i = 0; i < pop.n; ++i) {
      s.k.push_back(entry());
      s.l.push_back(entry());
    }
    s.s1 = rng.uniform() < 0.5 ? 1 : -1;
    s.s2 = rng.uniform() < 0.5 ? 1 : -1;
    for (int i = 0; i < eta_count(pop.n); ++i) s.eta.push_back(rng.uniform(pop.eta_range.lo, pop.eta_range.hi));
    s.psi.assign(pop.n, pop.box);
    if (std::all_of(s.k.begin(), s.k.end(), [](auto x) { return x == 0; })) continue;
    if (std::all_of(s.l.begin(), s.l.end(), [](auto x) { return x == 0; })) continue;
    if (std::abs(discriminant(s.k, s.l, s.eta).direct) > pop.min_discriminant) return s;
  }
  throw ConfigError("oscillatory population: discriminant floor is never met");
}

}  // namespace latticelab
