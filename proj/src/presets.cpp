#include "hnls/presets.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace hnls {

using nlohmann::json;

cplx amplitude_from_json(const json& spec, const char* key) {
  if (!spec.contains(key)) return 1.0;
  const json& a = spec.at(key);
  if (a.is_number()) return a.get<double>();
  if (a.is_array() && a.size() == 2) return {a[0].get<double>(), a[1].get<double>()};
  throw ConfigError(std::string("preset: ") + key + " must be a number or [re, im]");
}

ComplexField gaussian_bump(const GridSpec& g, double center, double width, cplx amplitude) {
  if (!(width > 0.0)) throw ConfigError("gaussian: width must be positive");
  ComplexField f(g.nodes());
  for (int j = 0; j < g.nodes(); ++j) {
    double z = (g.x(j) - center) / width;
    f[j] = amplitude * std::exp(-z * z);
  }
  return f;
}

ComplexField sine_mode(const GridSpec& g, int n, cplx amplitude) {
  ComplexField f(g.nodes());
  for (int j = 0; j < g.nodes(); ++j) f[j] = amplitude * std::sin(n * std::numbers::pi * g.x(j) / g.R);
  f[0] = 0.0;
  f[g.Nx + 1] = 0.0;
  return f;
}

namespace {

Vec read_column_file(const std::string& path, Eigen::Index expected) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read data file: " + path);
  std::vector<cplx> vals;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    double re = 0.0, im = 0.0;
    if (!(ss >> re)) throw ConfigError("malformed row in " + path);
    ss >> im;
    vals.emplace_back(re, im);
  }
  if (static_cast<Eigen::Index>(vals.size()) != expected)
    throw ConfigError("data file " + path + " has " + std::to_string(vals.size()) +
                      " rows, expected " + std::to_string(expected));
  Vec v(expected);
  for (Eigen::Index i = 0; i < expected; ++i) v[i] = vals[i];
  return v;
}

std::string preset_name(const json& spec) {
  if (spec.is_null()) return "zero";
  if (!spec.is_object()) throw ConfigError("preset must be an object");
  if (spec.contains("file")) return "file";
  return spec.value("preset", std::string("zero"));
}

}  // namespace

ComplexField field_from_json(const json& spec, const GridSpec& g) {
  const std::string name = preset_name(spec);
  if (name == "zero") return zero_field(g);
  if (name == "file") return read_column_file(spec.at("file").get<std::string>(), g.nodes());
  if (name == "gaussian") {
    ComplexField f = gaussian_bump(g, spec.value("center", g.R / 2), spec.value("width", g.R / 10),
                                   amplitude_from_json(spec));
    if (spec.value("zero_ends", false)) f[0] = f[g.Nx + 1] = 0.0;
    return f;
  }
  if (name == "sine") return sine_mode(g, spec.value("n", 1), amplitude_from_json(spec));
  throw ConfigError("unknown field preset: " + name);
}

TimeSeries series_from_json(const json& spec, const GridSpec& g) {
  const std::string name = preset_name(spec);
  if (name == "zero") return zero_series(g);
  if (name == "file") return read_column_file(spec.at("file").get<std::string>(), g.Nt + 1);
  const cplx amp = amplitude_from_json(spec);
  TimeSeries s(g.Nt + 1);
  for (int n = 0; n <= g.Nt; ++n) {
    double t = g.t(n);
    if (name == "constant") {
      s[n] = amp;
    } else if (name == "sine") {
      s[n] = amp * std::sin(spec.value("n", 1) * std::numbers::pi * t / g.T);
    } else if (name == "pulse") {
      double v = std::sin(std::numbers::pi * t / g.T);
      s[n] = amp * v * v;
    } else {
      throw ConfigError("unknown series preset: " + name);
    }
  }
  return s;
}

SpaceTimeField source_from_json(const json& spec, const GridSpec& g) {
  const std::string name = preset_name(spec);
  if (name == "zero" && !(spec.is_object() && spec.contains("space"))) return SpaceTimeField(g, false);
  if (name == "file") throw ConfigError("file references are not supported for sources");
  ComplexField shape = field_from_json(spec.contains("space") ? spec.at("space") : spec, g);
  json time = spec.value("time", json::object());
  std::string kind = time.value("preset", std::string("constant"));
  double omega = time.value("omega", 1.0);
  SpaceTimeField f(g);
  for (int n = 0; n <= g.Nt; ++n) {
    double t = g.t(n);
    cplx factor;
    if (kind == "constant")
      factor = 1.0;
    else if (kind == "cosine")
      factor = std::cos(omega * t);
    else if (kind == "phase")
      factor = std::polar(1.0, omega * t);
    else
      throw ConfigError("unknown time factor: " + kind);
    f.snapshots[n] = factor * shape;
  }
  return f;
}

}  // namespace hnls
