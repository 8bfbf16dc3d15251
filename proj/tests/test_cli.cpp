#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <unistd.h>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli() {
  const char* p = std::getenv("LATTICELAB_CLI");
  REQUIRE_MESSAGE(p != nullptr, "LATTICELAB_CLI must point at the latticelab executable");
  return p;
}

fs::path scratch() {
  static const fs::path root = [] {
    const fs::path p = fs::temp_directory_path() / ("latticelab_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " '" + cli() + "' " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

std::string out_dir(const std::string& name) { return (scratch() / name).string(); }

}  // namespace

TEST_CASE("count") {
  const auto cfg = write_config("count.json", R"({"basis": {"n": 3, "columns": [[1,0,0],[0,1,0],[0,0,1]]}, "t": [0, 1]})");
  REQUIRE(run("count --config '" + cfg.string() + "' --out '" + out_dir("count_a") + "'") == 0);
  const std::string csv = slurp(fs::path(out_dir("count_a")) / "count.csv");
  CHECK(csv.rfind("t,count,volume,remainder\n0,1,0,1\n1,7,", 0) == 0);

  REQUIRE(run("count --config '" + cfg.string() + "' --out '" + out_dir("count_b") + "'") == 0);
  CHECK(slurp(fs::path(out_dir("count_b")) / "count.csv") == csv);

  const auto m = nlohmann::json::parse(slurp(fs::path(out_dir("count_a")) / "manifest.json"));
  CHECK(m["command"] == "count");
  CHECK(m["outputs"][0] == "count.csv");
  CHECK(m.contains("wall_time"));
  CHECK(m.contains("version"));
  CHECK(m["config"]["t"].size() == 2);

  // Flags instead of a config file.
  const auto basis = write_config("basis.json", R"({"n": 2, "columns": [[1,0],[0,1]]})");
  REQUIRE(run("count --basis '" + basis.string() + "' --t 2 --out '" + out_dir("count_c") + "'") == 0);
  CHECK(slurp(fs::path(out_dir("count_c")) / "count.csv").rfind("t,count,volume,remainder\n2,13,", 0) == 0);
}

TEST_CASE("input errors exit with 2") {
  const auto bad = write_config("bad.json", R"({"basis": {"n": 3, "columns": [[1,0],[0,1]]}, "t": [1]})");
  CHECK(run("count --config '" + bad.string() + "' --out '" + out_dir("bad") + "'") == 2);
  const auto garbage = write_config("garbage.json", "{not json");
  CHECK(run("count --config '" + garbage.string() + "' --out '" + out_dir("bad") + "'") == 2);
  CHECK(run("count --config /nonexistent/file.json") == 2);
  CHECK(run("nosuchcommand") == 2);
  const auto singular = write_config("singular.json", R"({"basis": {"n": 2, "columns": [[1,1],[2,2]]}, "t": [1]})");
  CHECK(run("count --config '" + singular.string() + "' --out '" + out_dir("bad") + "'") == 2);
  const auto wiggly = write_config("wiggly.json", R"({"phi": [0, 1, -3, 2], "psi0": [1], "t": [10]})");
  CHECK(run("vdc --config '" + wiggly.string() + "' --out '" + out_dir("bad") + "'") == 2);
  CHECK(run("cn --n 2 --tol 1e-20 --out '" + out_dir("bad") + "'") == 2);
}

TEST_CASE("cn and fourier") {
  REQUIRE(run("cn --n 3 --tol 1e-10 --out '" + out_dir("cn") + "'") == 0);
  const auto cn = nlohmann::json::parse(slurp(fs::path(out_dir("cn")) / "cn.json"));
  CHECK(std::abs(cn["value"].get<double>() - 4.1403) < 1e-4);
  CHECK(cn["tail_bound"].get<double>() <= 1e-10);
  CHECK(cn.contains("pair_count_value"));

  REQUIRE(run("fourier --n 3 --s 0 0.5 --out '" + out_dir("fourier") + "'") == 0);
  std::istringstream csv(slurp(fs::path(out_dir("fourier")) / "fourier.csv"));
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  CHECK(header == "s,value");
  CHECK(std::abs(std::stod(row.substr(2)) - 4.0 * std::numbers::pi / 3.0) < 1e-14);
}

TEST_CASE("theorem1 smoke run") {
  const auto cfg = write_config("t1.json", R"({"n": 3, "t": [10, 20, 40, 80], "M": 2})");
  const int code = run("theorem1 --config '" + cfg.string() + "' --seed 9 --out '" + out_dir("t1") + "'");
  CHECK((code == 0 || code == 1));
  std::istringstream csv(slurp(fs::path(out_dir("t1")) / "theorem1_stats.csv"));
  std::string line;
  int rows = 0;
  std::getline(csv, line);
  CHECK(line == "t,M,mean,rms,var,stderr");
  while (std::getline(csv, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 5);
  }
  CHECK(rows == 4);
  const auto fit = nlohmann::json::parse(slurp(fs::path(out_dir("t1")) / "theorem1_fit.json"));
  CHECK(fit.contains("slope"));

  REQUIRE(run("theorem1 --config '" + cfg.string() + "' --seed 9 --out '" + out_dir("t1b") + "'") == code);
  CHECK(slurp(fs::path(out_dir("t1b")) / "theorem1_fit.json") == slurp(fs::path(out_dir("t1")) / "theorem1_fit.json"));

  const auto two = write_config("t1_two.json", R"({"n": 3, "t": [10, 20], "M": 2})");
  CHECK(run("theorem1 --config '" + two.string() + "' --out '" + out_dir("t1c") + "'") == 3);
}

TEST_CASE("theorem2 config and calibration errors") {
  const auto small_t = write_config("t2_small.json", R"({"t": 1, "M": 10})");
  CHECK(run("theorem2 --config '" + small_t.string() + "' --out '" + out_dir("t2") + "'") == 3);
  const auto n2 = write_config("t2_n2.json", R"({"t": 4, "M": 10, "sampler": {"n": 2}})");
  CHECK(run("theorem2 --config '" + n2.string() + "' --out '" + out_dir("t2") + "'") == 3);
  // Without the multiplicity correction the Siegel-set draw over-weights
  // lattices with short vectors, and the Siegel mean check catches it.
  const auto biased = write_config(
      "t2_biased.json",
      R"({"t": 2, "M": 40000, "sampler": {"n": 3, "multiplicity_correction": false, "cusp_tilt": 2}})");
  CHECK(run("theorem2 --config '" + biased.string() + "' --seed 1 --out '" + out_dir("t2b") + "'") == 4);
  const auto r = nlohmann::json::parse(slurp(fs::path(out_dir("t2b")) / "theorem2.json"));
  CHECK(r["verdict"] == "CALIBRATION-FAIL");
}

TEST_CASE("oscint and vdc") {
  const auto cfg = write_config("osc.json", R"({
    "spec": {"n": 3, "k": [1, 1, 0], "l": [1, 2, 1], "signs": ["+", "-"], "eta": [1.25, 1.5, 1.75], "psi": [1, 1.25]},
    "t": [4, 8, 16, 32]})");
  REQUIRE(run("oscint --config '" + cfg.string() + "' --out '" + out_dir("osc") + "'") == 0);
  std::istringstream csv(slurp(fs::path(out_dir("osc")) / "oscint.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "t,measured,bound,ratio");
  double prev = 1e300;
  int rows = 0;
  while (std::getline(csv, line)) {
    std::istringstream ls(line);
    std::string t, m, b;
    std::getline(ls, t, ',');
    std::getline(ls, m, ',');
    std::getline(ls, b, ',');
    CHECK(std::stod(b) < prev);
    prev = std::stod(b);
    ++rows;
  }
  CHECK(rows == 4);

  const auto huge = write_config("osc_huge.json", R"({
    "spec": {"n": 3, "k": [1, 1, 0], "l": [1, 2, 1], "signs": ["+", "+"], "eta": [1, 1, 1], "psi": [1, 2]},
    "t": [10000]})");
  CHECK(run("oscint --config '" + huge.string() + "' --out '" + out_dir("osc_huge") + "'") == 5);
  const auto degenerate = write_config("osc_deg.json", R"({
    "spec": {"n": 3, "k": [1, 1, 0], "l": [1, 1, 0], "signs": ["+", "-"], "eta": [1, 1, 1], "psi": [1, 2]},
    "t": [4]})");
  CHECK(run("oscint --config '" + degenerate.string() + "' --out '" + out_dir("osc_deg") + "'") == 2);

  const auto pop = write_config("osc_pop.json", R"({"population": {"n": 3}, "count": 3, "t": [2, 4], "max_growth": 1e9})");
  REQUIRE(run("oscint --config '" + pop.string() + "' --seed 2 --out '" + out_dir("osc_pop") + "'") == 0);
  const auto summary = nlohmann::json::parse(slurp(fs::path(out_dir("osc_pop")) / "oscint.json"));
  CHECK(summary["max_ratio"].size() == 2);
  CHECK(summary["verdict"] == "PASS");

  const auto vdc = write_config("vdc.json", R"({"phi": [0, 3, 1], "psi0": [1], "interval": [0, 1], "t": [10, 100]})");
  REQUIRE(run("vdc --config '" + vdc.string() + "' --out '" + out_dir("vdc") + "'") == 0);
  const auto v = nlohmann::json::parse(slurp(fs::path(out_dir("vdc")) / "vdc.json"));
  CHECK(v["c0"].get<double>() == doctest::Approx(3.0));
  CHECK(v["max_ratio"].get<double>() <= 2.0);
}

TEST_CASE("sandwich") {
  const auto cfg = write_config("sw.json", R"({"basis": {"n": 2, "columns": [[1, 0.2], [0.3, 1.1]]}, "t": 4.2, "epsilon": 0.1})");
  REQUIRE(run("sandwich --config '" + cfg.string() + "' --out '" + out_dir("sw") + "'") == 0);
  const auto r = nlohmann::json::parse(slurp(fs::path(out_dir("sw")) / "sandwich.json"));
  CHECK(r["status"] == "holds");
}

TEST_CASE("manifest replay and thread independence") {
  const auto cfg = write_config("t2.json", R"({"t": 3, "M": 300})");
  const int code = run("theorem2 --config '" + cfg.string() + "' --seed 4 --out '" + out_dir("rep_a") + "'",
                       "LATTICELAB_THREADS=1");
  REQUIRE(code >= 0);
  const fs::path manifest = fs::path(out_dir("rep_a")) / "manifest.json";
  CHECK(run("theorem2 --config '" + manifest.string() + "' --out '" + out_dir("rep_b") + "'", "LATTICELAB_THREADS=4") ==
        code);
  CHECK(slurp(fs::path(out_dir("rep_a")) / "theorem2.json") == slurp(fs::path(out_dir("rep_b")) / "theorem2.json"));
  auto ma = nlohmann::json::parse(slurp(manifest));
  auto mb = nlohmann::json::parse(slurp(fs::path(out_dir("rep_b")) / "manifest.json"));
  ma.erase("wall_time");
  mb.erase("wall_time");
  CHECK(ma == mb);
  // A manifest of another command is rejected.
  CHECK(run("count --config '" + manifest.string() + "' --out '" + out_dir("rep_c") + "'") == 2);
}
