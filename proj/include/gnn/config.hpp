#pragma once

// Run configuration: flat dotted keys (problem.name, schedules.width.base,
// quadrature.interior.n, ...) read from `key = value` text or from JSON, and
// resolved against the catalog defaults of the chosen problem.

#include "gnn/catalog.hpp"
#include "gnn/schedules.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gnn {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raw key/value pairs with the line each came from (0 when not from a file).
struct ConfigEntry {
  std::string value;
  int line = 0;
};
using ConfigMap = std::map<std::string, ConfigEntry>;

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline void flatten_json(const nlohmann::json& j, const std::string& prefix, ConfigMap& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten_json(v, prefix.empty() ? k : prefix + "." + k, out);
    return;
  }
  std::string text;
  if (j.is_string()) {
    text = j.get<std::string>();
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i) text += ",";
      text += j[i].is_string() ? j[i].get<std::string>() : j[i].dump();
    }
  } else {
    text = j.dump();
  }
  out[prefix] = {text, 0};
}

}  // namespace detail

/// `key = value` lines; '#' starts a comment; blank lines are ignored.
inline ConfigMap parse_key_values(std::istream& in) {
  ConfigMap out;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line) + ": expected key = value");
    const std::string key = detail::trim(text.substr(0, eq));
    const std::string value = detail::trim(text.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line) + ": empty key");
    if (out.count(key)) throw ConfigError("line " + std::to_string(line) + ": duplicate key '" + key + "'");
    out[key] = {value, line};
  }
  return out;
}

/// JSON object whose nested objects flatten to dotted keys. A run manifest is
/// accepted too: its "config" member is used.
inline ConfigMap parse_json_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("JSON config must be an object");
  if (j.contains("config") && j["config"].is_object()) j = j["config"];
  ConfigMap out;
  detail::flatten_json(j, "", out);
  return out;
}

inline ConfigMap load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_json_config(text);
  std::istringstream is(text);
  return parse_key_values(is);
}

enum class Verbosity { quiet, normal, verbose };

struct ReportOptions {
  bool timing = false;  // wall_time columns are 0 unless set, keeping reruns byte-identical
  int grid = 0;         // solution-sample points per axis (0: 201 in 1-D, 81 in 2-D)
  bool basis = true;    // per-basis-function sample CSVs and checkpoints
  bool rules = false;   // quadrature rules as CSV
  Verbosity verbosity = Verbosity::normal;
};

struct RunConfig {
  std::string problem;
  std::uint64_t seed = 1;
  std::string output_dir;  // empty: runs/<problem>
  Schedules schedules;
  QuadratureSizes quadrature;
  ReportOptions report;
  ConfigMap source;  // the keys as given
};

namespace detail {

struct KeyReader {
  const ConfigMap& map;
  std::map<std::string, bool> used;

  [[nodiscard]] std::string where(const std::string& key) const {
    const auto it = map.find(key);
    if (it != map.end() && it->second.line > 0) return "line " + std::to_string(it->second.line) + ", key '" + key + "'";
    return "key '" + key + "'";
  }

  const std::string* get(const std::string& key) {
    const auto it = map.find(key);
    if (it == map.end()) return nullptr;
    used[key] = true;
    return &it->second.value;
  }

  template <class F>
  auto convert(const std::string& key, const std::string& v, F f) {
    try {
      std::size_t pos = 0;
      auto x = f(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing characters");
      return x;
    } catch (const std::exception&) {
      throw ConfigError(where(key) + ": cannot parse '" + v + "'");
    }
  }

  void number(const std::string& key, double& out) {
    if (const auto* v = get(key)) out = convert(key, *v, [](const std::string& s, std::size_t* p) { return std::stod(s, p); });
  }
  void integer(const std::string& key, int& out) {
    if (const auto* v = get(key)) out = convert(key, *v, [](const std::string& s, std::size_t* p) { return std::stoi(s, p); });
  }
  void unsigned64(const std::string& key, std::uint64_t& out) {
    if (const auto* v = get(key)) {
      if (!v->empty() && (*v)[0] == '-') throw ConfigError(where(key) + ": must be non-negative");
      out = convert(key, *v, [](const std::string& s, std::size_t* p) { return std::stoull(s, p); });
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (const auto* v = get(key)) {
      if (*v == "true" || *v == "1" || *v == "yes") {
        out = true;
      } else if (*v == "false" || *v == "0" || *v == "no") {
        out = false;
      } else {
        throw ConfigError(where(key) + ": expected true or false, got '" + *v + "'");
      }
    }
  }
  void text(const std::string& key, std::string& out) {
    if (const auto* v = get(key)) out = *v;
  }
  template <class T>
  void list(const std::string& key, std::vector<T>& out) {
    const auto* v = get(key);
    if (!v) return;
    out.clear();
    std::string s = *v;
    if (!s.empty() && s.front() == '[') s = s.substr(1);
    if (!s.empty() && s.back() == ']') s.pop_back();
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      if constexpr (std::is_same_v<T, int>) {
        out.push_back(convert(key, item, [](const std::string& t, std::size_t* p) { return std::stoi(t, p); }));
      } else {
        out.push_back(convert(key, item, [](const std::string& t, std::size_t* p) { return std::stod(t, p); }));
      }
    }
    if (out.empty()) throw ConfigError(where(key) + ": empty list");
  }
  template <class F>
  void choice(const std::string& key, F parse) {
    if (const auto* v = get(key)) {
      try {
        parse(*v);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(where(key) + ": " + e.what());
      }
    }
  }
};

}  // namespace detail

/// Every key a config may contain.
inline const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys{
      "problem.name", "seed", "output.dir",
      "schedules.width.kind", "schedules.width.base", "schedules.width.ratio", "schedules.width.step",
      "schedules.width.period", "schedules.width.values",
      "schedules.beta.kind", "schedules.beta.a", "schedules.beta.b", "schedules.beta.ratio", "schedules.beta.values",
      "schedules.activation", "schedules.lr.A", "schedules.lr.rho", "schedules.init", "schedules.epochs",
      "schedules.tol", "schedules.max_iterations",
      "quadrature.interior.n", "quadrature.interior.rule", "quadrature.angular.n", "quadrature.boundary.n",
      "quadrature.interface.n", "quadrature.validation.n", "quadrature.split_at_interface",
      "report.timing", "report.grid", "report.basis", "report.rules", "report.verbosity"};
  return keys;
}

/// Resolve raw keys into a validated RunConfig (catalog defaults first, then overrides).
inline RunConfig resolve_config(const ConfigMap& map) {
  detail::KeyReader r{map, {}};
  for (const auto& [k, e] : map) {
    bool known = false;
    for (const auto& kk : known_config_keys()) known = known || kk == k;
    if (!known) throw ConfigError(r.where(k) + ": unknown key");
  }
  RunConfig cfg;
  cfg.source = map;
  const auto* name = r.get("problem.name");
  if (!name || name->empty()) throw ConfigError("missing required key 'problem.name'");
  CatalogEntry entry;
  try {
    entry = find_problem(*name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(r.where("problem.name") + ": " + e.what());
  }
  cfg.problem = entry.name;
  cfg.schedules = entry.schedules;
  cfg.quadrature = entry.sizes;

  r.unsigned64("seed", cfg.seed);
  r.text("output.dir", cfg.output_dir);

  auto& s = cfg.schedules;
  r.choice("schedules.width.kind", [&](const std::string& v) {
    if (v == "geometric") {
      s.width.kind = WidthSchedule::Kind::geometric;
    } else if (v == "stepped") {
      s.width.kind = WidthSchedule::Kind::stepped;
    } else if (v == "list") {
      s.width.kind = WidthSchedule::Kind::list;
    } else {
      throw std::invalid_argument("unknown width schedule '" + v + "' (geometric, stepped, list)");
    }
  });
  r.number("schedules.width.base", s.width.base);
  r.number("schedules.width.ratio", s.width.ratio);
  r.integer("schedules.width.step", s.width.step);
  r.integer("schedules.width.period", s.width.period);
  r.list("schedules.width.values", s.width.values);
  if (map.count("schedules.width.values") && !map.count("schedules.width.kind")) s.width.kind = WidthSchedule::Kind::list;

  r.choice("schedules.beta.kind", [&](const std::string& v) {
    if (v == "constant") {
      s.activation_scale.kind = ScaleSchedule::Kind::constant;
    } else if (v == "affine") {
      s.activation_scale.kind = ScaleSchedule::Kind::affine;
    } else if (v == "geometric") {
      s.activation_scale.kind = ScaleSchedule::Kind::geometric;
    } else if (v == "list") {
      s.activation_scale.kind = ScaleSchedule::Kind::list;
    } else {
      throw std::invalid_argument("unknown beta schedule '" + v + "' (constant, affine, geometric, list)");
    }
  });
  r.number("schedules.beta.a", s.activation_scale.a);
  r.number("schedules.beta.b", s.activation_scale.b);
  r.number("schedules.beta.ratio", s.activation_scale.ratio);
  r.list("schedules.beta.values", s.activation_scale.values);
  if (map.count("schedules.beta.values") && !map.count("schedules.beta.kind"))
    s.activation_scale.kind = ScaleSchedule::Kind::list;

  r.choice("schedules.activation", [&](const std::string& v) { s.activation = parse_activation_base(v); });
  r.number("schedules.lr.A", s.learning_rate.A);
  r.number("schedules.lr.rho", s.learning_rate.rho);
  r.choice("schedules.init", [&](const std::string& v) { s.init = parse_init_strategy(v); });
  r.integer("schedules.epochs", s.epochs);
  r.number("schedules.tol", s.tol);
  r.integer("schedules.max_iterations", s.max_iterations);

  auto& q = cfg.quadrature;
  r.integer("quadrature.interior.n", q.interior);
  r.choice("quadrature.interior.rule", [&](const std::string& v) { q.interior_rule = parse_interior_rule(v); });
  r.integer("quadrature.angular.n", q.angular);
  r.integer("quadrature.boundary.n", q.boundary);
  r.integer("quadrature.interface.n", q.interface);
  r.integer("quadrature.validation.n", q.validation);
  r.boolean("quadrature.split_at_interface", q.split_at_interface);

  r.boolean("report.timing", cfg.report.timing);
  r.integer("report.grid", cfg.report.grid);
  r.boolean("report.basis", cfg.report.basis);
  r.boolean("report.rules", cfg.report.rules);
  r.choice("report.verbosity", [&](const std::string& v) {
    if (v == "quiet") {
      cfg.report.verbosity = Verbosity::quiet;
    } else if (v == "normal") {
      cfg.report.verbosity = Verbosity::normal;
    } else if (v == "verbose") {
      cfg.report.verbosity = Verbosity::verbose;
    } else {
      throw std::invalid_argument("unknown verbosity '" + v + "' (quiet, normal, verbose)");
    }
  });

  try {
    s.validate();
    q.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  if (cfg.report.grid < 0) throw ConfigError(r.where("report.grid") + ": must be >= 0");
  if (s.activation == ActivationBase::relu && entry.form_kind != FormKind::l2_fit)
    throw ConfigError("relu cannot supply the derivatives problem '" + entry.name + "' needs");
  return cfg;
}

/// The resolved configuration as dotted keys (what a rerun needs to reproduce it).
inline nlohmann::ordered_json config_to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  const auto& s = c.schedules;
  j["problem.name"] = c.problem;
  j["seed"] = c.seed;
  if (!c.output_dir.empty()) j["output.dir"] = c.output_dir;
  switch (s.width.kind) {
    case WidthSchedule::Kind::geometric:
      j["schedules.width.kind"] = "geometric";
      j["schedules.width.base"] = s.width.base;
      j["schedules.width.ratio"] = s.width.ratio;
      break;
    case WidthSchedule::Kind::stepped:
      j["schedules.width.kind"] = "stepped";
      j["schedules.width.base"] = s.width.base;
      j["schedules.width.step"] = s.width.step;
      j["schedules.width.period"] = s.width.period;
      break;
    case WidthSchedule::Kind::list:
      j["schedules.width.kind"] = "list";
      j["schedules.width.values"] = s.width.values;
      break;
  }
  switch (s.activation_scale.kind) {
    case ScaleSchedule::Kind::constant:
      j["schedules.beta.kind"] = "constant";
      j["schedules.beta.a"] = s.activation_scale.a;
      break;
    case ScaleSchedule::Kind::affine:
      j["schedules.beta.kind"] = "affine";
      j["schedules.beta.a"] = s.activation_scale.a;
      j["schedules.beta.b"] = s.activation_scale.b;
      break;
    case ScaleSchedule::Kind::geometric:
      j["schedules.beta.kind"] = "geometric";
      j["schedules.beta.a"] = s.activation_scale.a;
      j["schedules.beta.b"] = s.activation_scale.b;
      j["schedules.beta.ratio"] = s.activation_scale.ratio;
      break;
    case ScaleSchedule::Kind::list:
      j["schedules.beta.kind"] = "list";
      j["schedules.beta.values"] = s.activation_scale.values;
      break;
  }
  j["schedules.activation"] = to_string(s.activation);
  j["schedules.lr.A"] = s.learning_rate.A;
  j["schedules.lr.rho"] = s.learning_rate.rho;
  j["schedules.init"] = to_string(s.init);
  j["schedules.epochs"] = s.epochs;
  j["schedules.tol"] = s.tol;
  j["schedules.max_iterations"] = s.max_iterations;
  const auto& q = c.quadrature;
  j["quadrature.interior.n"] = q.interior;
  j["quadrature.interior.rule"] = to_string(q.interior_rule);
  j["quadrature.angular.n"] = q.angular;
  j["quadrature.boundary.n"] = q.boundary;
  j["quadrature.interface.n"] = q.interface;
  j["quadrature.validation.n"] = q.validation;
  j["quadrature.split_at_interface"] = q.split_at_interface;
  j["report.timing"] = c.report.timing;
  j["report.grid"] = c.report.grid;
  j["report.basis"] = c.report.basis;
  j["report.rules"] = c.report.rules;
  const char* verb[] = {"quiet", "normal", "verbose"};
  j["report.verbosity"] = verb[static_cast<int>(c.report.verbosity)];
  return j;
}

}  // namespace gnn
