// Acceptance suite: `acceptance <id>` runs one criterion, no argument runs
// all of them. Each criterion prints one PASS/FAIL line; extra context goes
// on indented lines below it.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "latticelab/counting.hpp"
#include "latticelab/experiments.hpp"
#include "latticelab/format.hpp"
#include "latticelab/fourier.hpp"
#include "latticelab/io.hpp"
#include "latticelab/mean_value.hpp"
#include "latticelab/oscillatory.hpp"

using namespace latticelab;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string summary;
  std::vector<std::string> notes;
};

Json config(const std::string& name) { return read_json_file(std::string(LATTICELAB_CONFIG_DIR) + "/" + name); }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Matrix random_matrix(int n, Philox& rng, double lo, double hi) {
  Matrix m(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) m(i, j) = rng.uniform(lo, hi);
  return m;
}

// Random basis with entries in [lo, hi] and smallest singular value above
// `sigma_min`, so the oracle's box stays small.
LatticeBasis random_basis(int n, Philox& rng, double lo, double hi, double sigma_min) {
  for (;;) {
    Matrix m = random_matrix(n, rng, lo, hi);
    const auto sv = Eigen::JacobiSVD<Matrix>(m).singularValues();
    if (sv(n - 1) >= sigma_min) return LatticeBasis(std::move(m));
  }
}

// Naive oracle: every k with |k_i| <= t ||X^{-1}||, squared norms sorted.
std::vector<double> box_norms(const LatticeBasis& x, double t_max) {
  const Matrix& m = x.matrix();
  const int n = x.dim();
  const double inv = Eigen::JacobiSVD<Matrix>(m.inverse()).singularValues()(0);
  const auto b = static_cast<long>(std::ceil(t_max * inv)) + 1;
  std::vector<double> out;
  std::vector<long> k(n, -b);
  for (;;) {
    Vector v = Vector::Zero(n);
    for (int i = 0; i < n; ++i) v += static_cast<double>(k[i]) * m.col(i);
    out.push_back(v.squaredNorm());
    int d = 0;
    while (d < n && ++k[d] > b) k[d++] = -b;
    if (d == n) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

Outcome counting_oracle() {
  const Json c = config("counting_oracle.json");
  const int trials = get_field<int>(c, "trials");
  const auto dims = get_field<std::vector<int>>(c, "dims");
  const auto grid = get_field<std::vector<double>>(c, "t");
  const auto range = get_field<std::vector<double>>(c, "entry_range");
  const double sigma_min = get_field<double>(c, "min_singular_value");
  Philox rng(Seed{get_field<std::uint64_t>(c, "seed"), 0});
  int mismatches = 0, checks = 0;
  for (int i = 0; i < trials; ++i) {
    const int n = dims[i % dims.size()];
    const LatticeBasis x = random_basis(n, rng, range[0], range[1], sigma_min);
    const auto norms = box_norms(x, grid.back());
    for (double t : grid) {
      const double lim = t * t * (1.0 + kBoundaryTolerance);
      const auto naive = static_cast<std::uint64_t>(std::upper_bound(norms.begin(), norms.end(), lim) - norms.begin());
      ++checks;
      if (naive != count_points(x, t)) ++mismatches;
    }
  }
  return {mismatches == 0, std::to_string(trials) + " bases, " + std::to_string(checks) + " counts, " +
                               std::to_string(mismatches) + " mismatches"};
}

Outcome fourier_closed_forms() {
  const Json c = config("fourier_closed_forms.json");
  const auto dims = get_field<std::vector<int>>(c, "dims");
  const auto range = get_field<std::vector<double>>(c, "s_range");
  const int points = get_field<int>(c, "points");
  const double tol = get_field<double>(c, "tolerance");
  using boost::math::quadrature::gauss_kronrod;
  double worst = 0.0;
  for (int n : dims) {
    for (int i = 0; i < points; ++i) {
      const double s = range[0] + (range[1] - range[0]) * i / (points - 1.0);
      // Slices perpendicular to the frequency: area of the (n-1)-ball
      // section times cos(2 pi s z).
      auto slice = [&](double z) {
        const double r2 = std::max(0.0, 1.0 - z * z);
        const double area = n == 2 ? 2.0 * std::sqrt(r2) : kPi * r2;
        return area * std::cos(2.0 * kPi * s * z);
      };
      const double oracle = gauss_kronrod<double, 61>::integrate(slice, -1.0, 1.0, 15, 1e-13);
      worst = std::max(worst, std::abs(hat_chi_ball(n, s) - oracle));
    }
  }
  return {worst <= tol, std::to_string(points) + " points per dimension, max |error| " + num(worst) + " (limit " +
                            num(tol) + ")"};
}

Outcome sandwich_population() {
  const Json c = config("sandwich_population.json");
  const int trials = get_field<int>(c, "trials");
  const auto dims = get_field<std::vector<int>>(c, "dims");
  const auto er = get_field<std::vector<double>>(c, "epsilon_range");
  const auto tr = get_field<std::vector<double>>(c, "t_range");
  const double delta = get_field<double>(c, "delta");
  Philox rng(Seed{get_field<std::uint64_t>(c, "seed"), 0});
  int holds = 0, violated = 0, inconclusive = 0;
  Outcome o;
  for (int i = 0; i < trials; ++i) {
    const int n = dims[i % dims.size()];
    Matrix m = Matrix::Identity(n, n) + random_matrix(n, rng, -delta, delta);
    const LatticeBasis x(std::move(m));
    const double t = rng.uniform(tr[0], tr[1]);
    const double eps = rng.uniform(er[0], er[1]);
    const SandwichReport r = sandwich_check(x, t, eps);
    if (r.status == SandwichStatus::holds) {
      ++holds;
    } else {
      (r.status == SandwichStatus::violated ? violated : inconclusive) += 1;
      o.notes.push_back("trial " + std::to_string(i) + " n=" + std::to_string(n) + " t=" + num(t) + " eps=" + num(eps) +
                        ": " + to_string(r.status));
    }
  }
  o.pass = holds == trials;
  o.summary = std::to_string(holds) + "/" + std::to_string(trials) + " hold, " + std::to_string(violated) +
              " violated, " + std::to_string(inconclusive) + " unconverged";
  return o;
}

Outcome theorem1() {
  Outcome o;
  o.pass = true;
  for (const char* name : {"theorem1_n3.json", "theorem1_n2.json"}) {
    const Json c = config(name);
    const Theorem1Config tc = theorem1_config_from_json(c);
    const Theorem1Result r = run_theorem1(tc, Seed{get_field<std::uint64_t>(c, "seed"), 0});
    o.pass = o.pass && r.verdict == Verdict::pass;
    o.summary += (o.summary.empty() ? "" : "; ") + std::string("n=") + std::to_string(tc.family.x0.dim()) +
                 " slope " + num(r.fit.slope) + " in [" + num(tc.slope_lo) + ", " + num(tc.slope_hi) + "]";
    std::string rms = "n=" + std::to_string(tc.family.x0.dim()) + " rms:";
    for (const auto& s : r.stats) rms += " t=" + num(s.t) + ":" + num(s.rms_E);
    o.notes.push_back(rms);
  }
  return o;
}

Outcome theorem2() {
  const Json c = config("theorem2.json");
  const Theorem2Config tc = theorem2_config_from_json(c);
  const Theorem2Result r = run_theorem2(tc, Seed{get_field<std::uint64_t>(c, "seed"), 0});
  Outcome o;
  o.pass = r.verdict == Verdict::pass;
  o.summary = "var " + num(r.stats.var_E) + " +- " + num(r.stats.stderr_var) + " vs prediction " + num(r.prediction) +
              ": ratio " + num(r.ratio) + " (band +-" + num(tc.band) + "), gap " + num(r.gap_sigmas) +
              " sigma, calibration " + num(r.calibration_sigmas) + " sigma -> " + to_string(r.verdict);
  o.notes.push_back("pair-count c_3 = " + num(pair_count_cn(3).value) + ": prediction " + num(r.pair_prediction) +
                    ", ratio " + num(r.pair_ratio) + ", gap " + num(r.pair_gap_sigmas) + " sigma");
  o.notes.push_back("Siegel mean " + num(r.mean_count) + " vs " + num(r.expected_count) + " (stderr " +
                    num(r.stats.stderr_mean) + ")");
  return o;
}

Outcome cn_self_consistency() {
  const Json c = config("cn3.json");
  const int n = get_field<int>(c, "n");
  const int q_max = get_field<int>(c, "brute_force_cutoff");
  const double agreement = get_field<double>(c, "agreement");
  const CnResult cn = compute_cn(n, get_field<double>(c, "tol"));
  // Independent double loop over the full square, smallest terms first.
  long double s = 0.0L;
  for (int q = q_max; q >= 1; --q) {
    const long double qn = std::pow(static_cast<long double>(q), n);
    for (int r = q_max; r >= 1; --r)
      if (std::gcd(q, r) == 1)
        s += 4.0L / (qn * std::pow(static_cast<long double>(r), n) * std::pow(static_cast<long double>(std::max(q, r)), n));
  }
  const double diff = std::abs(cn.value - static_cast<double>(s));
  return {diff <= agreement && cn.tail_bound <= 1e-10,
          "c_" + std::to_string(n) + " = " + fmt_real(cn.value) + ", brute force " + fmt_real(static_cast<double>(s)) +
              ", |diff| " + num(diff) + " (limit " + num(agreement) + "), tail bound " + num(cn.tail_bound)};
}

Outcome scaling_identity() {
  const Json c = config("scaling_identity.json");
  const int trials = get_field<int>(c, "trials");
  const auto dims = get_field<std::vector<int>>(c, "dims");
  const auto rr = get_field<std::vector<double>>(c, "r_range");
  const auto tr = get_field<std::vector<double>>(c, "t_range");
  Philox rng(Seed{get_field<std::uint64_t>(c, "seed"), 0});
  int failures = 0;
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    const int n = dims[i % dims.size()];
    const LatticeBasis x = random_basis(n, rng, -1.5, 1.5, 0.2);
    const double r = std::exp(rng.uniform(std::log(rr[0]), std::log(rr[1])));
    const double t = rng.uniform(tr[0], tr[1]);
    const ScalingCheck s = scaling_identity_check(x, r, t);
    worst = std::max(worst, std::abs(s.error_scaled - s.error_original));
    if (!s.pass) ++failures;
  }
  return {failures == 0, std::to_string(trials - failures) + "/" + std::to_string(trials) +
                             " exact count matches, max remainder gap " + num(worst)};
}

Outcome hessian_decay() {
  const Json c = config("hessian_population.json");
  const OscillatoryPopulation pop = population_from_json(c.at("population"));
  const int count = get_field<int>(c, "count");
  const auto grid = get_field<std::vector<double>>(c, "t");
  const double max_growth = get_field<double>(c, "max_growth");
  const std::uint64_t seed = get_field<std::uint64_t>(c, "seed");
  std::vector<double> max_ratio(grid.size(), 0.0);
  for (int i = 0; i < count; ++i) {
    const OscillatorySpec spec = sample_oscillatory_spec(pop, Seed{seed, static_cast<std::uint64_t>(i)});
    const BoundCheckReport r = hessian_bound_check(spec, grid);
    for (std::size_t j = 0; j < grid.size(); ++j) max_ratio[j] = std::max(max_ratio[j], r.ratio[j]);
  }
  const double growth = max_ratio.back() / max_ratio.front();
  Outcome o;
  o.pass = std::isfinite(max_ratio.back()) && max_ratio.front() > 0.0 && growth <= max_growth;
  o.summary = std::to_string(count) + " specs, max ratio t=" + num(grid.front()) + ": " + num(max_ratio.front()) +
              ", t=" + num(grid.back()) + ": " + num(max_ratio.back()) + ", growth " + num(growth) + " (limit " +
              num(max_growth) + ")";
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Directory contents with the manifest's wall_time dropped.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name == "manifest.json") {
      Json m = Json::parse(slurp(e.path()));
      m.erase("wall_time");
      files[name] = m.dump();
    } else {
      files[name] = slurp(e.path());
    }
  }
  return files;
}

int run_command(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  const Json c = config("determinism.json");
  const auto threads = get_field<std::vector<int>>(c, "threads");
  const fs::path root = fs::temp_directory_path() / ("latticelab_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  Outcome o;
  o.pass = true;
  int runs = 0;
  for (const auto& run : c.at("runs")) {
    const std::string command = get_field<std::string>(run, "command");
    Json cfg = config(get_field<std::string>(run, "config"));
    if (run.contains("override"))
      for (const auto& [k, v] : run.at("override").items()) cfg[k] = v;
    const fs::path cfg_path = root / (command + "_config.json");
    write_text_file(cfg_path.string(), cfg.dump(2));
    const std::string seed = run.contains("seed") ? " --seed " + std::to_string(run.at("seed").get<std::uint64_t>()) : "";

    std::vector<std::map<std::string, std::string>> snaps;
    std::vector<int> codes;
    auto invoke = [&](int thr, const fs::path& config_path, const std::string& extra, const std::string& tag) {
      const fs::path out = root / (command + "_" + tag);
      const std::string cmd = "LATTICELAB_THREADS=" + std::to_string(thr) + " '" + LATTICELAB_CLI_PATH + "' " +
                              command + " --config '" + config_path.string() + "'" + extra + " --out '" +
                              out.string() + "' > /dev/null 2>&1";
      codes.push_back(run_command(cmd));
      snaps.push_back(snapshot(out));
      return out;
    };
    fs::path first;
    for (std::size_t i = 0; i < threads.size(); ++i) {
      const fs::path out = invoke(threads[i], cfg_path, seed, "threads" + std::to_string(threads[i]));
      if (i == 0) first = out;
    }
    // Replay from the manifest alone.
    invoke(threads.back(), first / "manifest.json", "", "replay");
    ++runs;
    bool same = true;
    for (std::size_t i = 1; i < snaps.size(); ++i) same = same && snaps[i] == snaps[0] && codes[i] == codes[0];
    const bool ran = codes[0] >= 0 && codes[0] <= 1 && snaps[0].size() >= 2;
    if (!same || !ran) {
      o.pass = false;
      o.notes.push_back(command + ": " + (ran ? "outputs differ" : "run failed (exit " + std::to_string(codes[0]) + ")"));
    }
  }
  fs::remove_all(root);
  o.summary = std::to_string(runs) + " commands, " + std::to_string(threads.size()) +
              " thread counts plus manifest replay" + (o.pass ? ", byte-identical" : "");
  return o;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "counting oracle equivalence", counting_oracle},
      {2, "Fourier closed forms", fourier_closed_forms},
      {3, "sandwich inequalities", sandwich_population},
      {4, "RMS remainder scaling slopes", theorem1},
      {5, "Haar remainder variance", theorem2},
      {6, "c_3 self-consistency", cn_self_consistency},
      {7, "scaling identity", scaling_identity},
      {8, "Hessian-bound decay", hessian_decay},
      {9, "CLI determinism", determinism},
  };
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  if (ids.empty())
    for (const auto& c : all) ids.push_back(c.id);

  bool ok = true;
  for (int id : ids) {
    const auto it = std::find_if(all.begin(), all.end(), [&](const Criterion& c) { return c.id == id; });
    if (it == all.end()) {
      std::printf("FAIL [%d] unknown criterion\n", id);
      ok = false;
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.summary = std::string("error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s [%d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, it->name, o.summary.c_str(), secs);
    for (const auto& n : o.notes) std::printf("    %s\n", n.c_str());
    std::fflush(stdout);
    ok = ok && o.pass;
  }
  return ok ? 0 : 1;
}
