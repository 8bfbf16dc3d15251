#include "latticelab/io.hpp"

#include <fstream>
#include <sstream>

namespace latticelab {

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
  if (!out) throw InputError("write failed: " + path);
}

Json basis_to_json(const LatticeBasis& x) {
  Json cols = Json::array();
  for (int j = 0; j < x.dim(); ++j) {
    Json c = Json::array();
    for (int i = 0; i < x.dim(); ++i) c.push_back(x.matrix()(i, j));
    cols.push_back(c);
  }
  return Json{{"n", x.dim()}, {"columns", cols}};
}

LatticeBasis basis_from_json(const Json& j) {
  const int n = get_field<int>(j, "n");
  const auto cols = get_field<std::vector<std::vector<double>>>(j, "columns");
  if (n < 2) throw InputError("basis: n must be at least 2");
  if (static_cast<int>(cols.size()) != n) throw InputError("basis: need n columns");
  Matrix m(n, n);
  for (int c = 0; c < n; ++c) {
    if (static_cast<int>(cols[c].size()) != n) throw InputError("basis: every column needs n entries");
    for (int r = 0; r < n; ++r) m(r, c) = cols[c][r];
  }
  return LatticeBasis(std::move(m));
}

Json haar_config_to_json(const HaarSamplerConfig& c) {
  return Json{{"n", c.n},
              {"method", to_string(c.method)},
              {"eta_bound", c.eta_bound},
              {"ratio_bound", c.ratio_bound},
              {"multiplicity_correction", c.multiplicity_correction},
              {"cusp_tilt", c.cusp_tilt}};
}

HaarSamplerConfig haar_config_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("sampler config must be an object");
  HaarSamplerConfig c = default_haar_config(get_field<int>(j, "n", 3));
  if (j.contains("method")) c.method = haar_method_from_string(get_field<std::string>(j, "method"));
  c.eta_bound = get_field<double>(j, "eta_bound", c.eta_bound);
  c.ratio_bound = get_field<double>(j, "ratio_bound", c.ratio_bound);
  c.multiplicity_correction = get_field<bool>(j, "multiplicity_correction", c.multiplicity_correction);
  c.cusp_tilt = get_field<double>(j, "cusp_tilt", c.cusp_tilt);
  c.validate();
  return c;
}

Json compact_spec_to_json(const CompactFamilySpec& s) {
  return Json{{"x0", basis_to_json(s.x0)}, {"delta", s.delta}, {"det_floor", s.det_floor}};
}

CompactFamilySpec compact_spec_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("family config must be an object");
  CompactFamilySpec s{j.contains("x0") ? basis_from_json(j.at("x0")) : LatticeBasis::identity(get_field<int>(j, "n", 3)),
                      get_field<double>(j, "delta", 0.1), get_field<double>(j, "det_floor", 0.5)};
  s.validate();
  return s;
}

namespace {

Json interval_json(const Interval& iv) { return Json::array({iv.lo, iv.hi}); }

Interval interval_from(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw InputError(std::string(what) + ": intervals are [lo, hi] pairs");
  return Interval{j[0].get<double>(), j[1].get<double>()};
}

int sign_from(const Json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "+") return 1;
    if (s == "-") return -1;
  } else if (j.is_number_integer()) {
    return j.get<int>();
  }
  throw InputError("signs are \"+\" or \"-\"");
}

}  // namespace

Json oscillatory_spec_to_json(const OscillatorySpec& s) {
  Json psi = Json::array();
  for (const auto& iv : s.psi) psi.push_back(interval_json(iv));
  return Json{{"n", s.n},
              {"k", s.k},
              {"l", s.l},
              {"signs", Json::array({s.s1 > 0 ? "+" : "-", s.s2 > 0 ? "+" : "-"})},
              {"eta", s.eta},
              {"psi", psi}};
}

OscillatorySpec oscillatory_spec_from_json(const Json& j) {
  OscillatorySpec s;
  s.n = get_field<int>(j, "n", 3);
  s.k = get_field<std::vector<std::int64_t>>(j, "k");
  s.l = get_field<std::vector<std::int64_t>>(j, "l");
  if (j.contains("signs")) {
    const Json& sg = j.at("signs");
    if (!sg.is_array() || sg.size() != 2) throw InputError("signs must be a pair");
    s.s1 = sign_from(sg[0]);
    s.s2 = sign_from(sg[1]);
  }
  s.eta = get_field<std::vector<double>>(j, "eta");
  const Json psi = j.contains("psi") ? j.at("psi") : Json();
  if (!psi.is_array()) throw InputError("missing key \"psi\"");
  // A single [lo, hi] applies to every axis.
  if (psi.size() == 2 && psi[0].is_number()) {
    s.psi.assign(s.n, interval_from(psi, "psi"));
  } else {
    for (const auto& iv : psi) s.psi.push_back(interval_from(iv, "psi"));
  }
  s.validate();
  return s;
}

Json population_to_json(const OscillatoryPopulation& p) {
  return Json{{"n", p.n},
              {"max_entry", p.max_entry},
              {"eta_range", interval_json(p.eta_range)},
              {"box", interval_json(p.box)},
              {"min_discriminant", p.min_discriminant}};
}

OscillatoryPopulation population_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("population must be an object");
  OscillatoryPopulation p;
  p.n = get_field<int>(j, "n", p.n);
  p.max_entry = get_field<int>(j, "max_entry", p.max_entry);
  if (j.contains("eta_range")) p.eta_range = interval_from(j.at("eta_range"), "eta_range");
  if (j.contains("box")) p.box = interval_from(j.at("box"), "box");
  p.min_discriminant = get_field<double>(j, "min_discriminant", p.min_discriminant);
  return p;
}

Json quadrature_to_json(const QuadratureOptions& q) {
  return Json{{"points_per_period", q.points_per_period},
              {"max_points_per_axis", q.max_points_per_axis},
              {"tolerance", q.tolerance},
              {"panel_order", q.panel_order},
              {"min_points_per_axis", q.min_points_per_axis}};
}

QuadratureOptions quadrature_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("quadrature options must be an object");
  QuadratureOptions q;
  q.points_per_period = get_field<double>(j, "points_per_period", q.points_per_period);
  q.max_points_per_axis = get_field<int>(j, "max_points_per_axis", q.max_points_per_axis);
  q.tolerance = get_field<double>(j, "tolerance", q.tolerance);
  q.panel_order = get_field<int>(j, "panel_order", q.panel_order);
  q.min_points_per_axis = get_field<int>(j, "min_points_per_axis", q.min_points_per_axis);
  return q;
}

Json stats_to_json(const ExperimentStats& s) {
  return Json{{"t", s.t},
              {"samples", s.samples},
              {"mean_E", s.mean_E},
              {"rms_E", s.rms_E},
              {"var_E", s.var_E},
              {"stderr_var", s.stderr_var},
              {"stderr_mean", s.stderr_mean},
              {"seed", s.seed.master}};
}

Json cn_to_json(const CnResult& c) {
  return Json{{"n", c.n},
              {"value", c.value},
              {"tail_bound", c.tail_bound},
              {"terms_used", c.terms_used},
              {"cutoff", c.cutoff}};
}

Json smoothed_to_json(const SmoothedCount& s) {
  return Json{{"t", s.t},
              {"epsilon", s.epsilon},
              {"cutoff", s.cutoff},
              {"value", s.value},
              {"tail_estimate", s.tail_estimate},
              {"tail_warning", s.tail_warning},
              {"converged", s.converged}};
}

Json sandwich_to_json(const SandwichReport& r) {
  return Json{{"status", to_string(r.status)},
              {"t", r.t},
              {"epsilon", r.epsilon},
              {"shift", r.shift},
              {"exact", r.exact},
              {"lower", smoothed_to_json(r.lower)},
              {"upper", smoothed_to_json(r.upper)},
              {"lower_slack", r.lower_slack},
              {"upper_slack", r.upper_slack}};
}

}  // namespace latticelab
