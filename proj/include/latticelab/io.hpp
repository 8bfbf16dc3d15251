// JSON forms of bases, sampler and experiment configs, and results.

#pragma once

#include "json.hpp"
#include "latticelab/fourier.hpp"
#include "latticelab/lattice.hpp"
#include "latticelab/mean_value.hpp"
#include "latticelab/oscillatory.hpp"
#include "latticelab/sampling.hpp"

#include <stdexcept>
#include <string>

namespace latticelab {

using Json = nlohmann::ordered_json;

/// Malformed input: unreadable file, invalid JSON, missing or mistyped keys.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// {"n": n, "columns": [[x11, x21, ...], [x12, x22, ...], ...]}: every inner
/// array is one generator.
Json basis_to_json(const LatticeBasis& x);
LatticeBasis basis_from_json(const Json& j);

Json haar_config_to_json(const HaarSamplerConfig& c);
/// Missing keys take the defaults of default_haar_config(n).
HaarSamplerConfig haar_config_from_json(const Json& j);

Json compact_spec_to_json(const CompactFamilySpec& s);
/// "x0" defaults to the identity of dimension "n"; delta and det_floor to
/// 0.1 and 0.5.
CompactFamilySpec compact_spec_from_json(const Json& j);

Json oscillatory_spec_to_json(const OscillatorySpec& s);
OscillatorySpec oscillatory_spec_from_json(const Json& j);

Json population_to_json(const OscillatoryPopulation& p);
OscillatoryPopulation population_from_json(const Json& j);

Json quadrature_to_json(const QuadratureOptions& q);
QuadratureOptions quadrature_from_json(const Json& j);

Json stats_to_json(const ExperimentStats& s);
Json cn_to_json(const CnResult& c);
Json smoothed_to_json(const SmoothedCount& s);
Json sandwich_to_json(const SandwichReport& r);

/// Typed field access with InputError naming the key on failure.
template <class T>
T get_field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing key \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(std::string("key \"") + key + "\" has the wrong type");
  }
}

template <class T>
T get_field(const Json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return get_field<T>(j, key);
}

}  // namespace latticelab
