#ifndef CFL_CONFIG_HPP
#define CFL_CONFIG_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cfl/output.hpp"
#include "cfl/types.hpp"

namespace cfl {

// Flat key-value experiment description. Everything the CLI can do is
// expressible here; command-line --set pairs and flags override file keys.
struct ExperimentConfig {
  std::string experiment = "compare";
  double omega1 = 1.0;
  double omega2 = 1.0;
  double mass1 = 1.0;
  double mass2 = 1.0;
  double beta = 1.0;  // inverse temperature, "inf" encodes T = 0
  std::vector<double> beta_list;
  double gamma = 1e-3;
  std::vector<double> gamma_list;
  double eta = 0.1;
  std::vector<double> eta_list;
  std::string drive = "ramp_exp";  // ramp_exp | gaussian_pulse | tabulated
  double tau = 2.0;
  std::string drive_file;
  std::string coupling = "rwa";  // rwa | full
  int n_max = 0;                 // 0 = pick from thermal occupancy
  double dt = 0.01;
  double horizon = 0.0;  // 0 = extend until the drive has decayed
  double detuning_span = 0.0;  // 0 = ten linewidths
  int detuning_points = 101;
  double weight_cutoff = 1e-12;
  std::string routes = "spectral,kubo_freq,kubo_time";
  std::string history_out;         // optional CSV dump of (t, q, v, F_f)
  std::string energy_history_out;  // optional CSV dump of (t, energy, norm)
  int jobs = 1;
  std::string out;
  std::string format = "csv";
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& text) {
  try {
    size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw config_error("key '" + key + "': cannot parse '" + text + "' as a number");
  }
}

inline int parse_int(const std::string& key, const std::string& text) {
  try {
    size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw config_error("key '" + key + "': cannot parse '" + text + "' as an integer");
  }
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw config_error("key '" + key + "': empty list entry");
    out.push_back(parse_double(key, item));
  }
  if (out.empty()) throw config_error("key '" + key + "': empty list");
  return out;
}

}  // namespace detail

// `key = value` lines, '#' starts a comment, blank lines ignored
inline std::map<std::string, std::string> parse_kv_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw config_error("line " + std::to_string(lineno) + ": empty key");
    if (kv.count(key))
      throw config_error("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    kv[key] = value;
  }
  return kv;
}

inline std::map<std::string, std::string> load_kv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_kv_text(buf.str());
}

inline ExperimentConfig config_from_kv(const std::map<std::string, std::string>& kv) {
  ExperimentConfig c;
  for (const auto& [key, value] : kv) {
    if (key == "experiment") c.experiment = value;
    else if (key == "omega1") c.omega1 = detail::parse_double(key, value);
    else if (key == "omega2") c.omega2 = detail::parse_double(key, value);
    else if (key == "mass1") c.mass1 = detail::parse_double(key, value);
    else if (key == "mass2") c.mass2 = detail::parse_double(key, value);
    else if (key == "beta") c.beta = detail::parse_double(key, value);
    else if (key == "beta_list") c.beta_list = detail::parse_list(key, value);
    else if (key == "gamma") c.gamma = detail::parse_double(key, value);
    else if (key == "gamma_list") c.gamma_list = detail::parse_list(key, value);
    else if (key == "eta") c.eta = detail::parse_double(key, value);
    else if (key == "eta_list") c.eta_list = detail::parse_list(key, value);
    else if (key == "drive") c.drive = value;
    else if (key == "tau") c.tau = detail::parse_double(key, value);
    else if (key == "drive_file") c.drive_file = value;
    else if (key == "coupling") c.coupling = value;
    else if (key == "n_max") c.n_max = detail::parse_int(key, value);
    else if (key == "dt") c.dt = detail::parse_double(key, value);
    else if (key == "horizon") c.horizon = detail::parse_double(key, value);
    else if (key == "detuning_span") c.detuning_span = detail::parse_double(key, value);
    else if (key == "detuning_points") c.detuning_points = detail::parse_int(key, value);
    else if (key == "weight_cutoff") c.weight_cutoff = detail::parse_double(key, value);
    else if (key == "routes") c.routes = value;
    else if (key == "history_out") c.history_out = value;
    else if (key == "energy_history_out") c.energy_history_out = value;
    else if (key == "jobs") c.jobs = detail::parse_int(key, value);
    else if (key == "out") c.out = value;
    else if (key == "format") c.format = value;
    else throw config_error("unknown config key '" + key + "'");
  }
  return c;
}

inline std::vector<std::string> split_routes(const std::string& routes) {
  std::vector<std::string> out;
  std::stringstream ss(routes);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = detail::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline void validate_config(const ExperimentConfig& c) {
  static const std::set<std::string> experiments{"compare",   "sweep-temperature",
                                                 "sweep-detuning", "sweep-eta",
                                                 "propagate", "audit-counter-rotating"};
  if (!experiments.count(c.experiment))
    throw config_error("unknown experiment '" + c.experiment + "'");
  if (!(c.omega1 > 0.0) || !(c.omega2 > 0.0))
    throw config_error("omega1 and omega2 must be positive");
  if (!(c.mass1 > 0.0) || !(c.mass2 > 0.0)) throw config_error("mass1 and mass2 must be positive");
  if (!(c.beta > 0.0)) throw config_error("beta must be positive (or inf for T = 0)");
  for (double b : c.beta_list)
    if (!(b > 0.0)) throw config_error("beta_list entries must be positive");
  if (!std::isfinite(c.gamma)) throw config_error("gamma must be finite");
  for (double g : c.gamma_list)
    if (!std::isfinite(g)) throw config_error("gamma_list entries must be finite");
  if (c.drive == "ramp_exp") {
    if (!(c.eta > 0.0)) throw config_error("eta must be positive for the ramp_exp drive");
  } else if (c.drive == "gaussian_pulse") {
    if (!(c.tau > 0.0)) throw config_error("tau must be positive for the gaussian_pulse drive");
  } else if (c.drive == "tabulated") {
    if (c.drive_file.empty()) throw config_error("tabulated drive requires drive_file");
  } else {
    throw config_error("unknown drive '" + c.drive + "'");
  }
  for (double e : c.eta_list)
    if (!(e > 0.0)) throw config_error("eta_list entries must be positive");
  if (c.coupling != "rwa" && c.coupling != "full")
    throw config_error("coupling must be 'rwa' or 'full'");
  if (c.n_max < 0) throw config_error("n_max must be nonnegative (0 = automatic)");
  if (!(c.dt > 0.0)) throw config_error("dt must be positive");
  if (c.horizon < 0.0) throw config_error("horizon must be nonnegative (0 = automatic)");
  if (c.detuning_span < 0.0) throw config_error("detuning_span must be nonnegative");
  if (c.detuning_points < 5 || c.detuning_points % 2 == 0)
    throw config_error("detuning_points must be odd and at least 5");
  if (!(c.weight_cutoff > 0.0) || c.weight_cutoff >= 1.0)
    throw config_error("weight_cutoff must lie in (0, 1)");
  static const std::set<std::string> routes{"spectral", "kubo_freq", "kubo_time", "propagator"};
  const auto requested = split_routes(c.routes);
  if (requested.empty()) throw config_error("routes must name at least one route");
  for (const auto& r : requested)
    if (!routes.count(r)) throw config_error("unknown route '" + r + "'");
  if (c.jobs < 0) throw config_error("jobs must be nonnegative (0 = all processors)");
  if (c.format != "csv" && c.format != "json")
    throw config_error("format must be 'csv' or 'json'");
}

// canonical echo, fixed key order: feeds the provenance header and the
// sidecar, so it must not depend on which keys the user spelled out
inline std::map<std::string, std::string> config_echo(const ExperimentConfig& c) {
  std::map<std::string, std::string> m;
  const auto put_list = [&](const std::string& key, const std::vector<double>& v) {
    if (v.empty()) return;
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
      if (i) s += ',';
      s += format_float(v[i]);
    }
    m[key] = s;
  };
  m["experiment"] = c.experiment;
  m["omega1"] = format_float(c.omega1);
  m["omega2"] = format_float(c.omega2);
  m["mass1"] = format_float(c.mass1);
  m["mass2"] = format_float(c.mass2);
  m["beta"] = format_float(c.beta);
  put_list("beta_list", c.beta_list);
  m["gamma"] = format_float(c.gamma);
  put_list("gamma_list", c.gamma_list);
  m["eta"] = format_float(c.eta);
  put_list("eta_list", c.eta_list);
  m["drive"] = c.drive;
  m["tau"] = format_float(c.tau);
  if (!c.drive_file.empty()) m["drive_file"] = c.drive_file;
  m["coupling"] = c.coupling;
  m["n_max"] = std::to_string(c.n_max);
  m["dt"] = format_float(c.dt);
  m["horizon"] = format_float(c.horizon);
  m["detuning_span"] = format_float(c.detuning_span);
  m["detuning_points"] = std::to_string(c.detuning_points);
  m["weight_cutoff"] = format_float(c.weight_cutoff);
  m["routes"] = c.routes;
  if (!c.history_out.empty()) m["history_out"] = c.history_out;
  if (!c.energy_history_out.empty()) m["energy_history_out"] = c.energy_history_out;
  return m;
}

inline std::string provenance_line(const ExperimentConfig& c) {
  std::string s = std::string(kToolName) + " " + kToolVersion;
  for (const auto& [k, v] : config_echo(c)) s += " " + k + "=" + v;
  return s;
}

}  // namespace cfl

#endif
