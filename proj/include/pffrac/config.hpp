#pragma once

// Run configuration: a flat `key = value` file with `#` comments.
//
//   preset = "hole_plate"
//   p = 3
//   schedule = [[5, 1.4e-2], [25, 2.2e-3]]
//
// Unknown keys, duplicate keys and type mismatches are errors.

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "assembly.hpp"
#include "material.hpp"
#include "mesh.hpp"
#include "solver.hpp"

namespace pffrac {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& what) : std::runtime_error(format(key, what)), key_(key) {}
  [[nodiscard]] const std::string& key() const { return key_; }

 private:
  static std::string format(const std::string& key, const std::string& what) {
    return key.empty() ? "config: " + what : "config key '" + key + "': " + what;
  }
  std::string key_;
};

struct RunConfig {
  std::string preset;
  std::string mesh_file;
  int p = 2;
  std::optional<double> gamma;
  double E = 200.0;
  double nu = 0.2;
  double Gc = 1.0;
  double l0 = 0.02;
  double k_res = 1e-6;
  PlaneAssumption plane = PlaneAssumption::plane_strain;
  double hole_center_x = 0.5;
  double hole_center_y = 0.5;
  double hole_radius = 0.2;
  int grid_n = 20;
  LoadSchedule schedule = hole_plate_schedule();
  StaggerConfig stagger;
  BoundaryOptions boundary;

  [[nodiscard]] double penalty_gamma() const { return gamma ? *gamma : default_penalty(p); }
  [[nodiscard]] PenaltyConfig penalty() const { return PenaltyConfig{penalty_gamma(), true}; }
  [[nodiscard]] MaterialParams material() const { return make_material(E, nu, Gc, l0, k_res, plane); }

  /// Mesh from the preset or the mesh file (read relative to `base_dir`
  /// unless absolute).
  [[nodiscard]] Mesh build_mesh(const std::string& base_dir = {}) const {
    if (preset == "hole_plate") return build_square_with_hole(grid_n, hole_radius, Point{hole_center_x, hole_center_y});
    std::string path = mesh_file;
    if (!base_dir.empty() && !path.empty() && path.front() != '/') path = base_dir + "/" + path;
    std::ifstream in(path);
    if (!in) throw ConfigError("mesh_file", "cannot open '" + path + "'");
    return read_mesh(in);
  }
};

namespace detail {

struct ConfigValue {
  std::variant<std::string, double, std::vector<std::vector<double>>> data;
  bool quoted = false;
  bool integral = false;
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

inline std::optional<double> parse_number(const std::string& s, bool* integral = nullptr) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  if (integral) *integral = s.find_first_of(".eE") == std::string::npos;
  return v;
}

inline std::vector<std::vector<double>> parse_pair_list(const std::string& key, const std::string& text) {
  std::vector<std::vector<double>> out;
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') throw ConfigError(key, "expected a list '[[a, b], ...]'");
  s = s.substr(1, s.size() - 2);
  std::size_t pos = 0;
  while (pos < s.size()) {
    if (s[pos] != '[') throw ConfigError(key, "expected '[' in list");
    const auto close = s.find(']', pos);
    if (close == std::string::npos) throw ConfigError(key, "unterminated list element");
    std::vector<double> item;
    std::stringstream ss(s.substr(pos + 1, close - pos - 1));
    for (std::string tok; std::getline(ss, tok, ',');) {
      const auto v = parse_number(tok);
      if (!v) throw ConfigError(key, "non-numeric list entry '" + tok + "'");
      item.push_back(*v);
    }
    out.push_back(item);
    pos = close + 1;
    if (pos < s.size()) {
      if (s[pos] != ',') throw ConfigError(key, "expected ',' between list elements");
      ++pos;
    }
  }
  return out;
}

inline ConfigValue parse_value(const std::string& key, const std::string& raw) {
  ConfigValue v;
  if (raw.empty()) throw ConfigError(key, "missing value");
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') throw ConfigError(key, "unterminated string");
    v.data = raw.substr(1, raw.size() - 2);
    v.quoted = true;
  } else if (raw.front() == '[') {
    v.data = parse_pair_list(key, raw);
  } else if (auto num = parse_number(raw, &v.integral)) {
    v.data = *num;
  } else {
    v.data = raw;  // bare word
  }
  return v;
}

inline double as_double(const std::string& key, const ConfigValue& v) {
  if (const auto* d = std::get_if<double>(&v.data)) return *d;
  throw ConfigError(key, "expected a number");
}

inline int as_int(const std::string& key, const ConfigValue& v) {
  const double d = as_double(key, v);
  if (!v.integral || d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError(key, "expected an integer");
  return static_cast<int>(d);
}

inline std::string as_string(const std::string& key, const ConfigValue& v) {
  if (const auto* s = std::get_if<std::string>(&v.data)) return *s;
  throw ConfigError(key, "expected a string");
}

inline void require_positive(const std::string& key, double v) {
  if (!(v > 0.0)) throw ConfigError(key, "must be positive");
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  using namespace detail;
  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("", "line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const ConfigValue val = parse_value(key, trim(line.substr(eq + 1)));
    if (!seen.insert(key).second) throw ConfigError(key, "duplicate key");

    if (key == "preset") {
      cfg.preset = as_string(key, val);
      if (cfg.preset != "hole_plate") throw ConfigError(key, "unknown preset '" + cfg.preset + "'");
    } else if (key == "mesh_file") {
      cfg.mesh_file = as_string(key, val);
    } else if (key == "p") {
      cfg.p = as_int(key, val);
      if (cfg.p < 2 || cfg.p > 4) throw ConfigError(key, "polynomial degree must be in 2..4");
    } else if (key == "gamma") {
      cfg.gamma = as_double(key, val);
      require_positive(key, *cfg.gamma);
    } else if (key == "E") {
      cfg.E = as_double(key, val);
      require_positive(key, cfg.E);
    } else if (key == "nu") {
      cfg.nu = as_double(key, val);
      if (!(cfg.nu > -1.0 && cfg.nu < 0.5)) throw ConfigError(key, "must lie in (-1, 0.5)");
    } else if (key == "Gc") {
      cfg.Gc = as_double(key, val);
      require_positive(key, cfg.Gc);
    } else if (key == "l0") {
      cfg.l0 = as_double(key, val);
      require_positive(key, cfg.l0);
    } else if (key == "k_res") {
      cfg.k_res = as_double(key, val);
      if (!(cfg.k_res >= 0.0 && cfg.k_res < 1.0)) throw ConfigError(key, "must lie in [0, 1)");
    } else if (key == "plane") {
      const auto s = as_string(key, val);
      if (s == "plane_strain" || s == "strain") {
        cfg.plane = PlaneAssumption::plane_strain;
      } else if (s == "plane_stress" || s == "stress") {
        cfg.plane = PlaneAssumption::plane_stress;
      } else {
        throw ConfigError(key, "expected plane_strain or plane_stress");
      }
    } else if (key == "hole_center_x") {
      cfg.hole_center_x = as_double(key, val);
    } else if (key == "hole_center_y") {
      cfg.hole_center_y = as_double(key, val);
    } else if (key == "hole_radius") {
      cfg.hole_radius = as_double(key, val);
      require_positive(key, cfg.hole_radius);
    } else if (key == "grid_n") {
      cfg.grid_n = as_int(key, val);
      if (cfg.grid_n < 1) throw ConfigError(key, "must be >= 1");
    } else if (key == "schedule") {
      const auto* list = std::get_if<std::vector<std::vector<double>>>(&val.data);
      if (!list) throw ConfigError(key, "expected a list of [steps, delta_uy] pairs");
      LoadSchedule s;
      for (const auto& item : *list) {
        if (item.size() != 2) throw ConfigError(key, "each entry must be [steps, delta_uy]");
        if (item[0] < 1.0 || item[0] != std::floor(item[0])) throw ConfigError(key, "step count must be a positive integer");
        s.phases.push_back({static_cast<int>(item[0]), item[1]});
      }
      if (s.phases.empty()) throw ConfigError(key, "schedule is empty");
      cfg.schedule = s;
    } else if (key == "stagger_tol") {
      cfg.stagger.stagger_tol = as_double(key, val);
      require_positive(key, cfg.stagger.stagger_tol);
    } else if (key == "max_stagger_iters") {
      cfg.stagger.max_stagger_iters = as_int(key, val);
      if (cfg.stagger.max_stagger_iters < 1) throw ConfigError(key, "must be >= 1");
    } else if (key == "top_tangential") {
      const auto s = as_string(key, val);
      if (s != "fixed" && s != "free") throw ConfigError(key, "expected fixed or free");
      cfg.boundary.top_tangential_fixed = s == "fixed";
    } else if (key == "hole_bc") {
      const auto s = as_string(key, val);
      if (s != "rim" && s != "center_point") throw ConfigError(key, "expected rim or center_point");
      cfg.boundary.hole = s == "rim" ? HoleCondition::rim : HoleCondition::center_point;
    } else if (key == "phase_space") {
      const auto s = as_string(key, val);
      if (s != "natural" && s != "zero_trace") throw ConfigError(key, "expected natural or zero_trace");
      cfg.boundary.phase_space = s == "natural" ? PhaseSpaceKind::natural : PhaseSpaceKind::zero_trace;
    } else {
      throw ConfigError(key, "unknown key");
    }
  }

  if (cfg.preset.empty() && cfg.mesh_file.empty()) throw ConfigError("", "one of 'preset' or 'mesh_file' is required");
  if (!cfg.preset.empty() && !cfg.mesh_file.empty())
    throw ConfigError("mesh_file", "cannot be combined with 'preset'");
  return cfg;
}

}  // namespace pffrac
