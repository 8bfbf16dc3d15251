// Phase and weight functions of the (k, l) oscillatory integrals, their
// numerical evaluation over the psi-box, and empirical decay-bound checks.

#pragma once

#include "latticelab/lattice.hpp"
#include "latticelab/sampling.hpp"

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace latticelab {

/// The quadrature budget cannot reach the requested accuracy.
class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Interval {
  double lo = 1.0;
  double hi = 2.0;
  double length() const { return hi - lo; }
};

struct OscillatorySpec {
  int n = 3;
  std::vector<std::int64_t> k;
  std::vector<std::int64_t> l;
  int s1 = 1;  // +1 or -1
  int s2 = -1;
  std::vector<double> eta;    // strict upper entries of N, row-major
  std::vector<Interval> psi;  // support of psi_i in a_i

  /// Throws LatticeError on wrong sizes, k = 0 or l = 0, signs other than
  /// +-1, non-finite eta, or intervals that are empty or not in (0, inf).
  void validate() const;
  double box_volume() const;
};

/// s1 ||k||_AN + s2 ||l||_AN with ||k||_AN^2 = sum a_i k~_i^2.
double phase(const OscillatorySpec& spec, std::span<const double> a);

/// (||k|| / ||k||_AN)^e (||l|| / ||l||_AN)^e on the psi-box, 0 outside;
/// e = 2 for n = 3 and 3/2 for n = 2.
double weight(const OscillatorySpec& spec, std::span<const double> a);

struct QuadratureOptions {
  double points_per_period = 40.0;
  int max_points_per_axis = 2000;
  /// Target for |fine - coarse| relative to the box volume.
  double tolerance = 1e-6;
  /// Gauss-Legendre points per panel.
  int panel_order = 10;
  /// Lower bound on points per axis, so the smooth weight alone is resolved.
  int min_points_per_axis = 20;
};

struct OscillatoryResult {
  std::complex<double> value;
  double error = 0.0;  // |I(ppp) - I(ppp / 2)|
  std::vector<int> points;  // per axis, finest resolution used
};

/// Highest oscillation count of e^{2 pi i t Phi} along each box axis, from
/// the maximum of |dPhi/da_i| over the box.
std::vector<double> periods_per_axis(const OscillatorySpec& spec, double t);

/// Integral over the psi-box of e^{2 pi i t Phi} * weight at fixed eta, by
/// tensor Gauss-Legendre. The resolution doubles until the coarse/fine gap
/// is within tolerance * volume; ResolutionError if that needs more than
/// max_points_per_axis.
OscillatoryResult oscillatory_integral(const OscillatorySpec& spec, double t, const QuadratureOptions& opts = {});

/// Same integral on one fixed tensor grid: `points` per axis (rounded up to
/// whole panels). No error estimate.
std::complex<double> oscillatory_integral_fixed(const OscillatorySpec& spec, double t, std::span<const int> points,
                                                int panel_order = 10);

/// Average of the integral over eta in [1, 2)^{n(n-1)/2}, 8-point Gauss per
/// eta axis. The eta stored in `spec` is ignored. `error` sums the node errors
/// times their weights.
OscillatoryResult eta_averaged_integral(const OscillatorySpec& spec, double t, const QuadratureOptions& opts = {});

struct Discriminant {
  double direct = 0.0;    // k~1^2 l~2^2 - k~2^2 l~1^2
  double factored = 0.0;  // (k1 l2 - k2 l1)(k1 l2 + k2 l1 + 2 gamma k1 l1), gamma = -eta_1
};

Discriminant discriminant(std::span<const std::int64_t> k, std::span<const std::int64_t> l,
                          std::span<const double> eta);

struct BoundCheckReport {
  std::vector<double> t_grid;
  std::vector<double> measured;  // |I(t)|
  std::vector<double> bound;     // ||k||^{3/2} ||l||^{3/2} / (t |disc|)
  std::vector<double> ratio;
  double max_ratio = 0.0;
};

/// |I(t)| against the Hessian-lemma right side on t_grid. Throws
/// LatticeError when |disc| <= 1e-9, t_grid is not increasing or holds
/// t <= 0; ResolutionError propagates.
BoundCheckReport hessian_bound_check(const OscillatorySpec& spec, std::span<const double> t_grid,
                                     const QuadratureOptions& opts = {});

void write_bound_csv(std::ostream& out, const BoundCheckReport& report);
std::string bound_report_json(const BoundCheckReport& report);

struct VdcProblem {
  std::function<double(double)> phi;
  std::function<double(double)> dphi;
  std::function<double(double)> psi0;
  std::function<double(double)> dpsi0;
  double a = 0.0;
  double b = 1.0;
  /// Samples used to verify that phi' is monotone and bounded below.
  int check_points = 1001;
  /// One-dimensional, so far above the per-axis budget of the tensor rules.
  int max_points = 1000000;
};

struct VdcReport {
  double c0 = 0.0;  // min phi' on the check grid
  std::vector<double> t_grid;
  std::vector<double> measured;  // |int_a^b e^{i t phi} psi0|
  std::vector<double> bound;     // (|psi0(b)| + int |psi0'|) / (c0 t)
  std::vector<double> ratio;     // 0 where the bound is 0
  double max_ratio = 0.0;
};

/// Throws LatticeError if phi' is not monotone on the check grid, if its
/// minimum is <= 0, or for t <= 0.
VdcReport vdc_check(const VdcProblem& problem, std::span<const double> t_grid, const QuadratureOptions& opts = {});

void write_vdc_csv(std::ostream& out, const VdcReport& report);

struct OscillatoryPopulation {
  int n = 3;
  int max_entry = 1;         // k, l entries in [-max_entry, max_entry]
  Interval eta_range{1.0, 2.0};
  Interval box{1.0, 1.25};   // the same psi interval on every axis
  double min_discriminant = 0.5;
};

/// Random spec: k, l nonzero, signs and eta uniform, |disc| above the floor
/// (redrawn otherwise). Pure function of the seed.
OscillatorySpec sample_oscillatory_spec(const OscillatoryPopulation& pop, Seed seed);

}  // namespace latticelab
