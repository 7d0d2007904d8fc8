// Command-line front end: evaluation at an operating point, parameter
// sweeps, operating-point optimization, moment-oracle verification and SQL
// reference values. Exit codes: 0 success, 1 validation error, 2 physics
// error, 3 verification failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "optoforce/analysis.hpp"
#include "optoforce/config.hpp"
#include "optoforce/io.hpp"
#include "optoforce/moment_oracle.hpp"

namespace of = optoforce;

namespace {

struct CliOptions {
  std::string config_path;
  std::string format;
  std::string out_path;
  std::vector<std::string> overrides;
};

of::RunConfig load_config(const CliOptions& opt) {
  of::json doc = of::json::object();
  if (!opt.config_path.empty()) doc = of::load_json_file(opt.config_path);
  for (const std::string& s : opt.overrides) of::apply_override(doc, s);
  of::RunConfig cfg = of::config_from_json(doc);
  if (!opt.format.empty()) {
    if (opt.format != "csv" && opt.format != "json" && opt.format != "text")
      throw of::validation_error("--format must be csv, json or text");
    cfg.output.format = opt.format;
  }
  if (!opt.out_path.empty()) cfg.output.path = opt.out_path;
  return cfg;
}

void emit(const of::OutputConfig& out, const std::string& text) {
  if (out.path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out.path, std::ios::binary);
  if (!f) throw of::validation_error("cannot open output path: " + out.path);
  f << text;
}

double other_convention_theta(const of::PhysicalParams& p) {
  of::PhysicalParams q = p;
  q.convention = p.convention == of::BandwidthConvention::literal
                     ? of::BandwidthConvention::angular_det
                     : of::BandwidthConvention::literal;
  return of::DerivedParams::derive(q).effective_freq;
}

of::json derived_to_json(const of::PhysicalParams& p, const of::DerivedParams& d) {
  of::json j;
  j["laser_freq_rad_s"] = d.laser_freq;
  j["stokes_coupling_hz"] = d.stokes_coupling;
  j["antistokes_coupling_hz"] = d.antistokes_coupling;
  j["effective_freq_hz"] = d.effective_freq;
  j["effective_freq_other_convention_hz"] = other_convention_theta(p);
  j["bandwidth_convention"] = of::to_string(p.convention);
  j["damped_freq_hz"] = d.damped_freq;
  j["thermal_phonons"] = d.thermal_phonons;
  j["force_scale_n"] = d.force_scale_n;
  const double tau2pi = of::default_tau(d.effective_freq);
  j["sql_tau_2pi_s"] = tau2pi;
  j["sql_force_tau_2pi_n"] = of::sql_force(p.eff_mass, p.mech_freq, tau2pi);
  j["sql_tau_pi_s"] = 0.5 * tau2pi;
  j["sql_force_tau_pi_n"] = of::sql_force(p.eff_mass, p.mech_freq, 0.5 * tau2pi);
  return j;
}

void print_kv(std::ostream& os, const of::json& j, int indent = 2) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    os << std::string(indent, ' ') << it.key() << ": ";
    if (it->is_number_float())
      os << of::format_sci(it->get<double>());
    else
      os << it->dump();
    os << '\n';
  }
}

int cmd_eval(const of::RunConfig& cfg) {
  const of::DerivedParams d = of::DerivedParams::derive(cfg.params);
  const double t = cfg.eval.at_first_minimum ? of::find_first_minimum(cfg.params).t : cfg.eval.time;
  const double tau = of::default_tau(d.effective_freq);
  const of::SensitivityResult r = of::evaluate_point(d, t, cfg.params.squeezing, d.thermal_phonons,
                                                     cfg.params.force, cfg.params.eff_mass, tau);
  const of::EnvelopeSensitivity env =
      of::envelope_f_min(d, t, cfg.params.squeezing, d.thermal_phonons);

  of::json result;
  result["t_s"] = r.t;
  result["squeezing"] = r.squeezing;
  result["nbar"] = r.nbar;
  result["signal"] = r.signal;
  result["noise_var"] = r.noise_var;
  result["f_min"] = r.f_min;
  result["force_min_n"] = r.force_min_n;
  result["sql_tau_s"] = r.sql_tau;
  result["force_sql_n"] = r.force_sql_n;
  result["sql_ratio"] = r.sql_ratio;
  result["envelope_f_min_lower"] = env.lower;
  if (env.upper_finite)
    result["envelope_f_min_upper"] = env.upper;
  else
    result["envelope_f_min_upper"] = nullptr;

  of::json doc;
  doc["derived"] = derived_to_json(cfg.params, d);
  doc["result"] = result;

  if (cfg.output.format == "json") {
    emit(cfg.output, doc.dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << "derived:\n";
    print_kv(os, doc["derived"]);
    os << "result:\n";
    print_kv(os, doc["result"]);
    emit(cfg.output, os.str());
  }
  return 0;
}

int cmd_sweep(const of::RunConfig& cfg) {
  if (!cfg.sweep_present) throw of::validation_error("sweep: config has no sweep block");
  const of::SweepTable table = of::sweep(cfg.sweep, cfg.params);
  std::size_t flagged = 0;
  for (const auto& r : table.rows)
    if (r.flag != of::RowFlag::ok) ++flagged;

  std::string text;
  if (cfg.output.format == "json") {
    text = of::table_to_json(table).dump(2) + "\n";
  } else {
    std::ostringstream os;
    of::write_csv(os, table);
    text = os.str();
  }
  emit(cfg.output, text);
  std::cerr << "sweep: " << table.rows.size() << " rows, " << flagged << " flagged\n";
  return 0;
}

int cmd_optimize(const of::RunConfig& cfg) {
  const of::DerivedParams d = of::DerivedParams::derive(cfg.params);
  const of::MinimumResult first = of::find_first_minimum(cfg.params);
  const of::SqueezingOptimum opt = of::optimal_squeezing(d, first.t, d.thermal_phonons);
  const double tau = of::default_tau(d.effective_freq);
  const double f_sql = of::sql_force(cfg.params.eff_mass, cfg.params.mech_freq, tau);

  of::json doc;
  doc["derived"] = derived_to_json(cfg.params, d);
  of::json r;
  r["t1_s"] = first.t;
  r["f_min_at_t1"] = first.f_min;
  r["force_min_at_t1_n"] = first.f_min * d.force_scale_n;
  r["sql_ratio_at_t1"] = first.f_min * d.force_scale_n / f_sql;
  r["optimal_squeezing"] = opt.s;
  r["f_min_at_optimal_squeezing"] = opt.f_min;
  r["force_min_at_optimal_squeezing_n"] = opt.f_min * d.force_scale_n;
  r["sql_ratio_at_optimal_squeezing"] = opt.f_min * d.force_scale_n / f_sql;
  doc["result"] = r;

  if (cfg.output.format == "json") {
    emit(cfg.output, doc.dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << "derived:\n";
    print_kv(os, doc["derived"]);
    os << "result:\n";
    print_kv(os, doc["result"]);
    emit(cfg.output, os.str());
  }
  return 0;
}

int cmd_verify(const of::RunConfig& cfg) {
  of::VerifySettings settings = cfg.verify.settings;
  if (!cfg.verify.temperatures_k.empty()) {
    settings.nbar_values.clear();
    for (double temp : cfg.verify.temperatures_k)
      settings.nbar_values.push_back(of::thermal_occupation(temp, cfg.params.mech_freq));
  }

  of::VerifyReport merged;
  merged.tolerance = settings.tolerance;
  merged.pass = true;
  std::size_t total = 0;
  for (double gamma : cfg.verify.dampings_hz) {
    of::PhysicalParams p = cfg.params;
    p.damping = gamma;
    const of::VerifyReport rep = of::verify_against_closed_form(p, settings);
    merged.dt_mean = rep.dt_mean;
    merged.dt_cov = rep.dt_cov;
    for (const auto& pt : rep.points) {
      if (pt.rel_err_signal > merged.max_rel_err_signal) {
        merged.max_rel_err_signal = pt.rel_err_signal;
        merged.worst_signal_index = total;
      }
      if (pt.rel_err_var > merged.max_rel_err_var) {
        merged.max_rel_err_var = pt.rel_err_var;
        merged.worst_var_index = total;
      }
      merged.points.push_back(pt);
      ++total;
    }
    merged.pass = merged.pass && rep.pass;
  }

  emit(cfg.output, of::report_to_json(merged).dump(2) + "\n");
  std::cerr << "verify: " << merged.points.size() << " points, max rel err signal "
            << of::format_sci(merged.max_rel_err_signal) << ", variance "
            << of::format_sci(merged.max_rel_err_var) << ", tolerance "
            << of::format_sci(merged.tolerance) << (merged.pass ? " -> pass" : " -> FAIL") << "\n";
  return merged.pass ? 0 : 3;
}

int cmd_sql(const of::RunConfig& cfg) {
  const of::DerivedParams d = of::DerivedParams::derive(cfg.params);
  const double tau2pi = of::default_tau(d.effective_freq);

  of::json rows = of::json::array();
  auto add = [&](const std::string& label, double tau) {
    of::json r;
    r["tau_label"] = label;
    r["tau_s"] = tau;
    const double f = of::sql_force(cfg.params.eff_mass, cfg.params.mech_freq, tau);
    r["force_sql_n"] = f;
    r["matches_nominal"] = std::abs(f / cfg.sql.nominal_n - 1.0) <= 0.02;
    rows.push_back(r);
  };
  add("2pi_over_theta", tau2pi);
  add("pi_over_theta", 0.5 * tau2pi);
  if (cfg.sql.tau) add("user", *cfg.sql.tau);

  of::json doc;
  doc["nominal_n"] = cfg.sql.nominal_n;
  doc["effective_freq_hz"] = d.effective_freq;
  doc["effective_freq_other_convention_hz"] = other_convention_theta(cfg.params);
  doc["values"] = rows;

  if (cfg.output.format == "json") {
    emit(cfg.output, doc.dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << "effective_freq_hz: " << of::format_sci(d.effective_freq) << "\n";
    os << "effective_freq_other_convention_hz: "
       << of::format_sci(doc["effective_freq_other_convention_hz"].get<double>()) << "\n";
    os << "nominal_n: " << of::format_sci(cfg.sql.nominal_n) << "\n";
    for (const auto& r : rows) {
      os << r["tau_label"].get<std::string>() << ": tau_s=" << of::format_sci(r["tau_s"].get<double>())
         << " force_sql_n=" << of::format_sci(r["force_sql_n"].get<double>())
         << (r["matches_nominal"].get<bool>() ? " (matches nominal)" : "") << "\n";
    }
    emit(cfg.output, os.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optoforce: sensitivity analysis for a single-mirror sideband force sensor"};
  app.require_subcommand(1);

  CliOptions opt;
  app.add_option("--config", opt.config_path, "JSON config path");
  app.add_option("--format", opt.format, "output format: csv, json or text");
  app.add_option("--out", opt.out_path, "output file (default: stdout)");
  app.add_option("--set", opt.overrides, "config override key.path=value (repeatable)");

  auto* eval = app.add_subcommand("eval", "evaluate sensitivity at one operating point");
  auto* sweep = app.add_subcommand("sweep", "run the configured parameter sweep");
  auto* optimize = app.add_subcommand("optimize", "locate the first minimum and the optimal squeezing");
  auto* verify = app.add_subcommand("verify", "check closed forms against the moment integration");
  auto* sql = app.add_subcommand("sql", "print SQL reference forces for the tau conventions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const of::RunConfig cfg = load_config(opt);
    if (eval->parsed()) return cmd_eval(cfg);
    if (sweep->parsed()) return cmd_sweep(cfg);
    if (optimize->parsed()) return cmd_optimize(cfg);
    if (verify->parsed()) return cmd_verify(cfg);
    if (sql->parsed()) return cmd_sql(cfg);
    return 1;
  } catch (const of::validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const of::physics_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
