#include "latticelab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "latticelab/counting.hpp"
#include "latticelab/experiments.hpp"
#include "latticelab/format.hpp"
#include "latticelab/fourier.hpp"
#include "latticelab/io.hpp"
#include "latticelab/oscillatory.hpp"

namespace latticelab {

namespace {

namespace fs = std::filesystem;

struct Context {
  std::string command;
  Json config;     // as given, flags merged in
  Json resolved;   // after defaults; echoed into the manifest
  std::uint64_t seed = 0;
  fs::path out;
  std::vector<std::string> outputs;

  void write(const std::string& name, const std::string& text) {
    write_text_file((out / name).string(), text);
    outputs.push_back(name);
  }
};

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

std::vector<double> number_list(const Json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("missing key \"") + key + "\"");
  const Json& v = j.at(key);
  if (v.is_number()) return {v.get<double>()};
  return get_field<std::vector<double>>(j, key);
}

std::string csv_of(const std::function<void(std::ostream&)>& fill) {
  std::ostringstream ss;
  fill(ss);
  return ss.str();
}

int cmd_count(Context& ctx) {
  const LatticeBasis x = basis_from_json(get_field<Json>(ctx.config, "basis"));
  const std::vector<double> grid = number_list(ctx.config, "t");
  const auto rows = count_scan(x, grid);
  ctx.resolved = Json{{"basis", basis_to_json(x)}, {"t", grid}};
  ctx.write("count.csv", csv_of([&](std::ostream& o) { write_count_csv(o, rows); }));
  for (const auto& r : rows) std::cout << "t=" << fmt_real(r.t) << " count=" << r.count << '\n';
  return kExitOk;
}

int cmd_theorem1(Context& ctx) {
  const Theorem1Config c = theorem1_config_from_json(ctx.config);
  ctx.resolved = theorem1_config_to_json(c);
  const Theorem1Result r = run_theorem1(c, Seed{ctx.seed, 0});
  ctx.write("theorem1_stats.csv", csv_of([&](std::ostream& o) { write_stats_csv(o, r.stats); }));
  const Json fit{{"slope", r.fit.slope},
                 {"intercept", r.fit.intercept},
                 {"max_residual", r.fit.max_residual},
                 {"slope_band", Json::array({c.slope_lo, c.slope_hi})},
                 {"verdict", to_string(r.verdict)}};
  ctx.write("theorem1_fit.json", fit.dump(2) + "\n");
  std::cout << "slope=" << fmt_real(r.fit.slope) << " band=[" << fmt_real(c.slope_lo) << ", " << fmt_real(c.slope_hi)
            << "] verdict=" << to_string(r.verdict) << '\n';
  return r.verdict == Verdict::pass ? kExitOk : kExitVerdictFail;
}

int cmd_theorem2(Context& ctx) {
  const Theorem2Config c = theorem2_config_from_json(ctx.config);
  ctx.resolved = theorem2_config_to_json(c);
  const Theorem2Result r = run_theorem2(c, Seed{ctx.seed, 0});
  ctx.write("theorem2.json", theorem2_result_to_json(r).dump(2) + "\n");
  std::cout << "var=" << fmt_real(r.stats.var_E) << " stderr=" << fmt_real(r.stats.stderr_var)
            << " prediction=" << fmt_real(r.prediction) << " ratio=" << fmt_real(r.ratio)
            << " pair_ratio=" << fmt_real(r.pair_ratio) << " calibration_sigmas=" << fmt_real(r.calibration_sigmas)
            << " verdict=" << to_string(r.verdict) << '\n';
  switch (r.verdict) {
    case Verdict::pass:
      return kExitOk;
    case Verdict::calibration_fail:
      return kExitCalibration;
    default:
      return kExitVerdictFail;
  }
}

int cmd_cn(Context& ctx) {
  const int n = get_field<int>(ctx.config, "n", 3);
  const double tol = get_field<double>(ctx.config, "tol", 1e-10);
  const CnResult c = compute_cn(n, tol);
  ctx.resolved = Json{{"n", n}, {"tol", tol}};
  Json out = cn_to_json(c);
  if (n >= 3) out["pair_count_value"] = pair_count_cn(n).value;
  ctx.write("cn.json", out.dump(2) + "\n");
  std::cout << "c_" << n << "=" << fmt_real(c.value) << " tail_bound=" << fmt_real(c.tail_bound) << '\n';
  return kExitOk;
}

int cmd_fourier(Context& ctx) {
  const int n = get_field<int>(ctx.config, "n", 3);
  const std::vector<double> grid = number_list(ctx.config, "s");
  ctx.resolved = Json{{"n", n}, {"s", grid}};
  std::ostringstream csv;
  csv << "s,value\n";
  for (double s : grid) csv << fmt_real(s) << ',' << fmt_real(hat_chi_ball(n, s)) << '\n';
  ctx.write("fourier.csv", csv.str());
  std::cout << csv.str();
  return kExitOk;
}

int cmd_sandwich(Context& ctx) {
  const LatticeBasis x = basis_from_json(get_field<Json>(ctx.config, "basis"));
  const double t = get_field<double>(ctx.config, "t");
  const double eps = get_field<double>(ctx.config, "epsilon");
  ctx.resolved = Json{{"basis", basis_to_json(x)}, {"t", t}, {"epsilon", eps}};
  const SandwichReport r = sandwich_check(x, t, eps);
  ctx.write("sandwich.json", sandwich_to_json(r).dump(2) + "\n");
  std::cout << "lower=" << fmt_real(r.lower.value) << " exact=" << r.exact << " upper=" << fmt_real(r.upper.value)
            << " status=" << to_string(r.status) << '\n';
  switch (r.status) {
    case SandwichStatus::holds:
      return kExitOk;
    case SandwichStatus::violated:
      return kExitVerdictFail;
    default:
      return kExitResolution;
  }
}

int cmd_oscint(Context& ctx) {
  const std::vector<double> grid = number_list(ctx.config, "t");
  const QuadratureOptions q =
      ctx.config.contains("quadrature") ? quadrature_from_json(ctx.config.at("quadrature")) : QuadratureOptions{};
  if (!ctx.config.contains("population")) {
    const OscillatorySpec spec = oscillatory_spec_from_json(get_field<Json>(ctx.config, "spec"));
    ctx.resolved = Json{{"spec", oscillatory_spec_to_json(spec)}, {"t", grid}, {"quadrature", quadrature_to_json(q)}};
    const BoundCheckReport r = hessian_bound_check(spec, grid, q);
    ctx.write("oscint.csv", csv_of([&](std::ostream& o) { write_bound_csv(o, r); }));
    ctx.write("oscint.json", bound_report_json(r) + "\n");
    std::cout << "max_ratio=" << fmt_real(r.max_ratio) << '\n';
    return kExitOk;
  }

  // Population study: max and median ratio over random specs at each t.
  const OscillatoryPopulation pop = population_from_json(ctx.config.at("population"));
  const int count = get_field<int>(ctx.config, "count", 50);
  if (count < 1) throw ConfigError("oscint: count must be >= 1");
  const std::optional<double> max_growth =
      ctx.config.contains("max_growth") ? std::optional<double>(get_field<double>(ctx.config, "max_growth"))
                                        : std::nullopt;
  ctx.resolved = Json{{"population", population_to_json(pop)},
                      {"count", count},
                      {"t", grid},
                      {"quadrature", quadrature_to_json(q)}};
  if (max_growth) ctx.resolved["max_growth"] = *max_growth;

  std::ostringstream csv;
  csv << "spec,t,measured,bound,ratio\n";
  std::vector<std::vector<double>> ratios(grid.size());
  for (int i = 0; i < count; ++i) {
    const OscillatorySpec spec = sample_oscillatory_spec(pop, Seed{ctx.seed, static_cast<std::uint64_t>(i)});
    const BoundCheckReport r = hessian_bound_check(spec, grid, q);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      csv << i << ',' << fmt_real(r.t_grid[j]) << ',' << fmt_real(r.measured[j]) << ',' << fmt_real(r.bound[j]) << ','
          << fmt_real(r.ratio[j]) << '\n';
      ratios[j].push_back(r.ratio[j]);
    }
  }
  Json summary{{"t", grid}, {"max_ratio", Json::array()}, {"median_ratio", Json::array()}};
  for (auto& col : ratios) {
    summary["max_ratio"].push_back(*std::max_element(col.begin(), col.end()));
    std::sort(col.begin(), col.end());
    const std::size_t m = col.size();
    summary["median_ratio"].push_back(m % 2 ? col[m / 2] : 0.5 * (col[m / 2 - 1] + col[m / 2]));
  }
  const double first = summary["max_ratio"].front().get<double>();
  const double last = summary["max_ratio"].back().get<double>();
  const double growth = first > 0.0 ? last / first : 0.0;
  summary["growth"] = growth;
  int code = kExitOk;
  if (max_growth) {
    const bool pass = std::isfinite(last) && growth <= *max_growth;
    summary["verdict"] = pass ? "PASS" : "FAIL";
    code = pass ? kExitOk : kExitVerdictFail;
  }
  ctx.write("oscint_population.csv", csv.str());
  ctx.write("oscint.json", summary.dump(2) + "\n");
  std::cout << "max_ratio first=" << fmt_real(first) << " last=" << fmt_real(last) << " growth=" << fmt_real(growth)
            << '\n';
  return code;
}

// Coefficients in ascending powers.
double poly(const std::vector<double>& c, double x) {
  double s = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * x + *it;
  return s;
}

std::vector<double> derivative(const std::vector<double>& c) {
  std::vector<double> d;
  for (std::size_t i = 1; i < c.size(); ++i) d.push_back(static_cast<double>(i) * c[i]);
  return d;
}

int cmd_vdc(Context& ctx) {
  const auto phi = get_field<std::vector<double>>(ctx.config, "phi");
  const auto psi = get_field<std::vector<double>>(ctx.config, "psi0");
  const auto iv = get_field<std::vector<double>>(ctx.config, "interval", {0.0, 1.0});
  if (iv.size() != 2) throw InputError("interval must be [a, b]");
  const std::vector<double> grid = number_list(ctx.config, "t");
  ctx.resolved = Json{{"phi", phi}, {"psi0", psi}, {"interval", iv}, {"t", grid}};
  const auto dphi = derivative(phi), dpsi = derivative(psi);
  VdcProblem p;
  p.phi = [&](double x) { return poly(phi, x); };
  p.dphi = [&](double x) { return poly(dphi, x); };
  p.psi0 = [&](double x) { return poly(psi, x); };
  p.dpsi0 = [&](double x) { return poly(dpsi, x); };
  p.a = iv[0];
  p.b = iv[1];
  const VdcReport r = vdc_check(p, grid);
  ctx.write("vdc.csv", csv_of([&](std::ostream& o) { write_vdc_csv(o, r); }));
  const Json j{{"c0", r.c0}, {"t", r.t_grid}, {"measured", r.measured}, {"bound", r.bound},
               {"ratio", r.ratio}, {"max_ratio", r.max_ratio}};
  ctx.write("vdc.json", j.dump(2) + "\n");
  std::cout << "c0=" << fmt_real(r.c0) << " max_ratio=" << fmt_real(r.max_ratio) << '\n';
  return kExitOk;
}

// A manifest given as --config replays its own config and seed.
Json load_config(const std::string& path, const std::string& command, std::optional<std::uint64_t>& manifest_seed) {
  if (path.empty()) return Json::object();
  Json j = read_json_file(path);
  if (!j.is_object()) throw InputError(path + ": config must be a JSON object");
  if (j.contains("config") && j.contains("command")) {
    if (j.at("command") != command) throw InputError(path + ": manifest is for command " + j.at("command").dump());
    if (j.contains("seed")) manifest_seed = get_field<std::uint64_t>(j, "seed");
    return j.at("config");
  }
  return j;
}

using Handler = int (*)(Context&);

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Lattice point counting laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CommonOptions common;
  std::string basis_path;
  std::vector<double> t_flag, s_flag;
  std::optional<int> n_flag;
  std::optional<double> tol_flag;

  struct Entry {
    const char* name;
    const char* help;
    Handler handler;
  };
  const Entry entries[] = {
      {"count", "exact lattice point counts", cmd_count},
      {"theorem1", "RMS remainder scaling over a compact family", cmd_theorem1},
      {"theorem2", "remainder variance over Haar-random unimodular lattices", cmd_theorem2},
      {"cn", "the constant c_n", cmd_cn},
      {"fourier", "Fourier transform of the unit ball", cmd_fourier},
      {"sandwich", "smoothed-count sandwich check", cmd_sandwich},
      {"oscint", "oscillatory integrals against the Hessian bound", cmd_oscint},
      {"vdc", "van der Corput bound check", cmd_vdc},
  };
  std::vector<std::pair<CLI::App*, Handler>> subs;
  for (const auto& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    sub->add_option("--config", common.config_path, "JSON config or a manifest to replay")->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "master seed (overrides the config)");
    sub->add_option("--out", common.out, "output directory")->capture_default_str();
    const std::string name = e.name;
    if (name == "count") {
      sub->add_option("--basis", basis_path, "basis JSON file")->check(CLI::ExistingFile);
      sub->add_option("--t", t_flag, "radii");
    } else if (name == "cn") {
      sub->add_option("--n", n_flag, "dimension");
      sub->add_option("--tol", tol_flag, "tail tolerance");
    } else if (name == "fourier") {
      sub->add_option("--n", n_flag, "dimension");
      sub->add_option("--s", s_flag, "frequencies");
    }
    subs.emplace_back(sub, e.handler);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  const auto started = std::chrono::steady_clock::now();
  try {
    Context ctx;
    Handler handler = nullptr;
    for (const auto& [sub, h] : subs)
      if (sub->parsed()) {
        ctx.command = sub->get_name();
        handler = h;
      }
    std::optional<std::uint64_t> manifest_seed;
    ctx.config = load_config(common.config_path, ctx.command, manifest_seed);
    if (!basis_path.empty()) ctx.config["basis"] = read_json_file(basis_path);
    if (!t_flag.empty()) ctx.config["t"] = t_flag;
    if (!s_flag.empty()) ctx.config["s"] = s_flag;
    if (n_flag) ctx.config["n"] = *n_flag;
    if (tol_flag) ctx.config["tol"] = *tol_flag;
    if (common.seed)
      ctx.seed = *common.seed;
    else if (ctx.config.contains("seed"))
      ctx.seed = get_field<std::uint64_t>(ctx.config, "seed");
    else if (manifest_seed)
      ctx.seed = *manifest_seed;
    ctx.out = common.out;
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec) throw InputError("cannot create " + ctx.out.string() + ": " + ec.message());

    const int code = handler(ctx);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    Json manifest{{"command", ctx.command},
                  {"version", kVersion},
                  {"seed", ctx.seed},
                  {"config", ctx.resolved},
                  {"outputs", ctx.outputs},
                  {"exit_code", code},
                  {"wall_time", wall}};
    write_text_file((ctx.out / "manifest.json").string(), manifest.dump(2) + "\n");
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ResolutionError& e) {
    std::cerr << "resolution error: " << e.what() << '\n';
    return kExitResolution;
  } catch (const CountOverflow& e) {
    std::cerr << "resolution error: " << e.what() << '\n';
    return kExitResolution;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    // InputError, LatticeError, DomainError and the rest: bad input.
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace latticelab
