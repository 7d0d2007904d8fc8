#pragma once

// JSON run configuration: parameter record, per-command blocks, strict
// unknown-key rejection and dotted-path overrides. Missing parameters fall
// back to the reference operating point of the detector.

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "optoforce/analysis.hpp"
#include "optoforce/errors.hpp"
#include "optoforce/moment_oracle.hpp"
#include "optoforce/params.hpp"

namespace optoforce {

using json = nlohmann::ordered_json;

struct EvalConfig {
  bool at_first_minimum = true;
  double time = 0;  // seconds, when at_first_minimum is false
};

struct OptimizeConfig {
  // Optional override of the first-minimum search bracket (seconds).
  std::optional<std::pair<double, double>> time_bracket;
};

struct SqlConfig {
  std::optional<double> tau;       // extra user-supplied tau [s]
  double nominal_n = 1.22e-17;     // reference value flagged in the output
};

struct VerifyConfig {
  VerifySettings settings;
  std::vector<double> temperatures_k{0.0, 3.0};  // mapped onto nbar values
  std::vector<double> dampings_hz{0.0, 1.0};
};

struct OutputConfig {
  std::string path;    // empty: stdout
  std::string format;  // "csv", "json" or "" (command default)
};

struct RunConfig {
  PhysicalParams params;
  EvalConfig eval;
  SweepSpec sweep;
  bool sweep_present = false;
  VerifyConfig verify;
  OptimizeConfig optimize;
  SqlConfig sql;
  OutputConfig output;
};

namespace detail {

inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw validation_error("unknown key \"" + it.key() + "\" in " + where);
}

inline double get_number(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw validation_error(key + " must be a number");
  return j[key].get<double>();
}

inline std::vector<double> get_number_list(const json& j, const std::string& key,
                                           std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_array()) throw validation_error(key + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j[key]) {
    if (!v.is_number()) throw validation_error(key + " must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace detail

inline PhysicalParams params_from_json(const json& j) {
  detail::check_keys(j,
                     {"wavelength_m", "mech_freq_rad_s", "laser_power_w", "eff_mass_kg",
                      "det_bandwidth_hz", "mode_bandwidth_hz", "damping_hz", "temperature_k",
                      "incidence_angle_rad", "squeezing", "force", "bandwidth_convention"},
                     "params");
  PhysicalParams p;
  p.wavelength = detail::get_number(j, "wavelength_m", p.wavelength);
  p.mech_freq = detail::get_number(j, "mech_freq_rad_s", p.mech_freq);
  p.laser_power = detail::get_number(j, "laser_power_w", p.laser_power);
  p.eff_mass = detail::get_number(j, "eff_mass_kg", p.eff_mass);
  p.det_bandwidth = detail::get_number(j, "det_bandwidth_hz", p.det_bandwidth);
  p.mode_bandwidth = detail::get_number(j, "mode_bandwidth_hz", p.mode_bandwidth);
  p.damping = detail::get_number(j, "damping_hz", p.damping);
  p.temperature = detail::get_number(j, "temperature_k", p.temperature);
  p.incidence_angle = detail::get_number(j, "incidence_angle_rad", p.incidence_angle);
  p.squeezing = detail::get_number(j, "squeezing", p.squeezing);
  p.force = detail::get_number(j, "force", p.force);
  if (j.contains("bandwidth_convention")) {
    if (!j["bandwidth_convention"].is_string())
      throw validation_error("bandwidth_convention must be a string");
    p.convention = bandwidth_convention_from_string(j["bandwidth_convention"].get<std::string>());
  }
  p.validate();
  return p;
}

inline json params_to_json(const PhysicalParams& p) {
  json j;
  j["wavelength_m"] = p.wavelength;
  j["mech_freq_rad_s"] = p.mech_freq;
  j["laser_power_w"] = p.laser_power;
  j["eff_mass_kg"] = p.eff_mass;
  j["det_bandwidth_hz"] = p.det_bandwidth;
  j["mode_bandwidth_hz"] = p.mode_bandwidth;
  j["damping_hz"] = p.damping;
  j["temperature_k"] = p.temperature;
  j["incidence_angle_rad"] = p.incidence_angle;
  j["squeezing"] = p.squeezing;
  j["force"] = p.force;
  j["bandwidth_convention"] = to_string(p.convention);
  return j;
}

inline SweepAxis axis_from_json(const json& j, const std::string& where) {
  detail::check_keys(j, {"name", "min", "max", "count", "scale"}, where);
  SweepAxis a;
  if (!j.contains("name") || !j["name"].is_string())
    throw validation_error(where + ": axis needs a string \"name\"");
  a.name = sweep_axis_from_string(j["name"].get<std::string>());
  if (!j.contains("min") || !j.contains("max") || !j.contains("count"))
    throw validation_error(where + ": axis needs min, max and count");
  a.min = j["min"].get<double>();
  a.max = j["max"].get<double>();
  a.count = j["count"].get<int>();
  if (j.contains("scale")) {
    const std::string s = j["scale"].get<std::string>();
    if (s == "log")
      a.log_scale = true;
    else if (s != "linear")
      throw validation_error(where + ": scale must be \"linear\" or \"log\"");
  }
  a.validate();
  return a;
}

inline RunConfig config_from_json(const json& j) {
  detail::check_keys(j, {"params", "eval", "sweep", "verify", "optimize", "sql", "output"}, "config");
  RunConfig c;
  if (j.contains("params")) c.params = params_from_json(j["params"]);

  if (j.contains("eval")) {
    detail::check_keys(j["eval"], {"time"}, "eval");
    if (j["eval"].contains("time")) {
      const auto& t = j["eval"]["time"];
      if (t.is_string()) {
        if (t.get<std::string>() != "first_min")
          throw validation_error("eval.time: expected a number of seconds or \"first_min\"");
        c.eval.at_first_minimum = true;
      } else if (t.is_number()) {
        c.eval.at_first_minimum = false;
        c.eval.time = t.get<double>();
      } else {
        throw validation_error("eval.time: expected a number of seconds or \"first_min\"");
      }
    }
  }

  if (j.contains("sweep")) {
    const json& js = j["sweep"];
    detail::check_keys(js, {"axis1", "axis2", "output", "eval_time", "sql_tau_s", "fixed"}, "sweep");
    if (!js.contains("axis1")) throw validation_error("sweep: axis1 is required");
    c.sweep.axis1 = axis_from_json(js["axis1"], "sweep.axis1");
    if (js.contains("axis2")) c.sweep.axis2 = axis_from_json(js["axis2"], "sweep.axis2");
    if (js.contains("output")) c.sweep.output = sweep_output_from_string(js["output"].get<std::string>());
    if (js.contains("eval_time")) {
      const auto& t = js["eval_time"];
      if (t.is_string()) {
        if (t.get<std::string>() != "first_min")
          throw validation_error("sweep.eval_time: expected a number of seconds or \"first_min\"");
        c.sweep.at_first_minimum = true;
      } else {
        c.sweep.at_first_minimum = false;
        c.sweep.eval_time = t.get<double>();
      }
    }
    c.sweep.sql_tau = detail::get_number(js, "sql_tau_s", -1.0);
    if (js.contains("fixed")) {
      // Re-read the base record with the overrides merged on top.
      json merged = params_to_json(c.params);
      for (auto it = js["fixed"].begin(); it != js["fixed"].end(); ++it) merged[it.key()] = it.value();
      c.params = params_from_json(merged);
    }
    c.sweep_present = true;
  }

  if (j.contains("verify")) {
    const json& jv = j["verify"];
    detail::check_keys(jv,
                       {"t_count", "t_max_s", "t_points_s", "s_values", "temperatures_k",
                        "nbar_values", "dampings_hz", "tolerance", "mean_steps_per_fast_cycle",
                        "cov_steps_per_slow_cycle"},
                       "verify");
    VerifyConfig& v = c.verify;
    v.settings.t_count = static_cast<int>(detail::get_number(jv, "t_count", v.settings.t_count));
    v.settings.t_max = detail::get_number(jv, "t_max_s", v.settings.t_max);
    v.settings.t_points = detail::get_number_list(jv, "t_points_s", {});
    v.settings.s_values = detail::get_number_list(jv, "s_values", v.settings.s_values);
    v.settings.tolerance = detail::get_number(jv, "tolerance", v.settings.tolerance);
    v.settings.mean_steps_per_fast_cycle = static_cast<int>(
        detail::get_number(jv, "mean_steps_per_fast_cycle", v.settings.mean_steps_per_fast_cycle));
    v.settings.cov_steps_per_slow_cycle = static_cast<int>(
        detail::get_number(jv, "cov_steps_per_slow_cycle", v.settings.cov_steps_per_slow_cycle));
    v.temperatures_k = detail::get_number_list(jv, "temperatures_k", v.temperatures_k);
    if (jv.contains("nbar_values")) {
      v.settings.nbar_values = detail::get_number_list(jv, "nbar_values", {});
      v.temperatures_k.clear();
    }
    v.dampings_hz = detail::get_number_list(jv, "dampings_hz", v.dampings_hz);
  }

  if (j.contains("optimize")) {
    detail::check_keys(j["optimize"], {"time_bracket_s"}, "optimize");
    if (j["optimize"].contains("time_bracket_s")) {
      const auto b = detail::get_number_list(j["optimize"], "time_bracket_s", {});
      if (b.size() != 2 || !(b[0] < b[1]))
        throw validation_error("optimize.time_bracket_s must be [low, high] with low < high");
      c.optimize.time_bracket = std::make_pair(b[0], b[1]);
    }
  }

  if (j.contains("sql")) {
    detail::check_keys(j["sql"], {"tau_s", "nominal_n"}, "sql");
    if (j["sql"].contains("tau_s")) c.sql.tau = j["sql"]["tau_s"].get<double>();
    c.sql.nominal_n = detail::get_number(j["sql"], "nominal_n", c.sql.nominal_n);
  }

  if (j.contains("output")) {
    detail::check_keys(j["output"], {"path", "format"}, "output");
    if (j["output"].contains("path")) c.output.path = j["output"]["path"].get<std::string>();
    if (j["output"].contains("format")) {
      c.output.format = j["output"]["format"].get<std::string>();
      if (c.output.format != "csv" && c.output.format != "json" && c.output.format != "text")
        throw validation_error("output.format must be \"csv\", \"json\" or \"text\"");
    }
  }
  return c;
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw validation_error("config parse error in " + path + ": " + e.what());
  }
  return j;
}

// Apply a "--set a.b.c=value" override onto a JSON document. The value is
// parsed as JSON when possible, otherwise taken as a string.
inline void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw validation_error("--set expects key.path=value, got \"" + assignment + "\"");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  json value;
  try {
    value = json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    value = raw;  // bare string
  }

  json* node = &doc;
  std::istringstream keys(path);
  std::string key, next;
  if (!std::getline(keys, key, '.')) throw validation_error("--set: empty key path");
  while (std::getline(keys, next, '.')) {
    if (!node->contains(key) || !(*node)[key].is_object()) (*node)[key] = json::object();
    node = &(*node)[key];
    key = next;
  }
  (*node)[key] = value;
}

}  // namespace optoforce
