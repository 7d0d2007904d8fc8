#pragma once

// Deterministic serialization of sweep tables and verification reports:
// CSV with scientific notation (16 significant digits, LF line endings) and
// JSON documents with fixed key order. Undefined cells of flagged rows are
// written empty (CSV) or null (JSON), never as sentinel numbers.

#include <cstdio>
#include <ostream>
#include <string>

#include <json.hpp>

#include "optoforce/analysis.hpp"
#include "optoforce/moment_oracle.hpp"

namespace optoforce {

inline std::string format_sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15e", v);
  return buf;
}

inline void write_csv(std::ostream& os, const SweepTable& table) {
  for (const auto& name : table.axis_names) os << name << ',';
  os << "value,f_min,F_newton,F_sql_newton,sql_ratio,flag\n";
  for (const SweepRow& r : table.rows) {
    for (std::size_t a = 0; a < table.axis_names.size(); ++a) os << format_sci(r.axis[a]) << ',';
    const bool ok = r.flag == RowFlag::ok;
    auto cell = [&](double v) { return ok ? format_sci(v) : std::string(); };
    os << cell(r.value) << ',' << cell(r.f_min) << ',' << cell(r.force_n) << ','
       << cell(r.force_sql_n) << ',' << cell(r.sql_ratio) << ',' << to_string(r.flag) << '\n';
  }
}

inline nlohmann::ordered_json table_to_json(const SweepTable& table) {
  nlohmann::ordered_json doc;
  nlohmann::ordered_json cols = nlohmann::ordered_json::array();
  for (const auto& n : table.axis_names) cols.push_back(n);
  for (const char* n : {"value", "f_min", "F_newton", "F_sql_newton", "sql_ratio", "flag"})
    cols.push_back(n);
  doc["columns"] = cols;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const SweepRow& r : table.rows) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (std::size_t a = 0; a < table.axis_names.size(); ++a) row.push_back(r.axis[a]);
    const bool ok = r.flag == RowFlag::ok;
    auto cell = [&](double v) {
      return ok ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
    };
    row.push_back(cell(r.value));
    row.push_back(cell(r.f_min));
    row.push_back(cell(r.force_n));
    row.push_back(cell(r.force_sql_n));
    row.push_back(cell(r.sql_ratio));
    row.push_back(to_string(r.flag));
    rows.push_back(row);
  }
  doc["rows"] = rows;
  return doc;
}

inline nlohmann::ordered_json report_to_json(const VerifyReport& rep) {
  nlohmann::ordered_json doc;
  doc["pass"] = rep.pass;
  doc["tolerance"] = rep.tolerance;
  doc["max_rel_err_signal"] = rep.max_rel_err_signal;
  doc["max_rel_err_variance"] = rep.max_rel_err_var;
  doc["dt_mean_s"] = rep.dt_mean;
  doc["dt_cov_s"] = rep.dt_cov;
  auto point_json = [](const VerifyPoint& p) {
    nlohmann::ordered_json q;
    q["gamma_hz"] = p.gamma;
    q["squeezing"] = p.s;
    q["nbar"] = p.nbar;
    q["t_s"] = p.t;
    q["signal_closed"] = p.signal_closed;
    q["signal_oracle"] = p.signal_oracle;
    q["rel_err_signal"] = p.rel_err_signal;
    q["var_closed"] = p.var_closed;
    q["var_oracle"] = p.var_oracle;
    q["rel_err_var"] = p.rel_err_var;
    return q;
  };
  if (!rep.points.empty()) {
    doc["worst_signal_point"] = point_json(rep.points[rep.worst_signal_index]);
    doc["worst_variance_point"] = point_json(rep.points[rep.worst_var_index]);
  }
  nlohmann::ordered_json pts = nlohmann::ordered_json::array();
  for (const VerifyPoint& p : rep.points) pts.push_back(point_json(p));
  doc["points"] = pts;
  return doc;
}

}  // namespace optoforce
