#pragma once

// Figure-reproduction layer: analytic envelope of the fast-oscillating
// sensitivity, location of the envelope minima, optimal input squeezing and
// parameter sweeps over time / squeezing / damping / temperature.

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "optoforce/closed_form.hpp"
#include "optoforce/params.hpp"

namespace optoforce {

// Delta(t) splits into a slow part P(t) = (Om^2-Theta^2) ups_p - 2 gamma Om^2 sin_d/omega
// and a fast oscillation of constant amplitude R = sqrt((Om^2-Theta^2)^2 + 4 gamma^2 Om^2),
// so within one optical cycle |Delta| ranges over [max(|P|-R, 0), |P|+R].
struct EnvelopePoint {
  double t_slow = 0;
  double slow_part = 0;       // P(t)
  double fast_amplitude = 0;  // R
  double delta_abs_max = 0;   // drives the lower (best) sensitivity envelope
  double delta_abs_min = 0;   // drives the upper envelope; 0 => divergent
  bool upper_divergent = false;
};

inline EnvelopePoint delta_envelope(const DerivedParams& d, double t) {
  const CoefficientSet c = coefficients(d, t);
  const double om2 = d.mech_freq * d.mech_freq;
  const double theta2 = d.effective_freq * d.effective_freq;
  EnvelopePoint e;
  e.t_slow = t;
  e.slow_part = (om2 - theta2) * c.ups_p -
                2.0 * d.damping * om2 * c.sin_d / d.damped_freq;
  e.fast_amplitude = std::sqrt(c.r4);
  e.delta_abs_max = std::abs(e.slow_part) + e.fast_amplitude;
  e.delta_abs_min = std::max(std::abs(e.slow_part) - e.fast_amplitude, 0.0);
  e.upper_divergent = e.delta_abs_min == 0.0;
  return e;
}

struct EnvelopeSensitivity {
  double lower = 0;          // best f_min within the fast cycle
  double upper = 0;          // worst; infinity() when the cycle crosses Delta = 0
  bool upper_finite = true;
};

inline EnvelopeSensitivity envelope_f_min(const DerivedParams& d, double t, double s, double nbar) {
  const CoefficientSet c = coefficients(d, t);
  const EnvelopePoint e = delta_envelope(d, t);
  const double rad = std::sqrt(sensitivity_radical(c, s, nbar));
  EnvelopeSensitivity r;
  r.lower = c.r4 * rad / (2.0 * d.mech_freq * e.delta_abs_max);
  if (e.delta_abs_min > 0.0) {
    r.upper = c.r4 * rad / (2.0 * d.mech_freq * e.delta_abs_min);
  } else {
    r.upper = std::numeric_limits<double>::infinity();
    r.upper_finite = false;
  }
  return r;
}

namespace detail {

// Golden-section refinement of a bracketed minimum.
template <typename F>
double golden_min(F f, double a, double b, double tol) {
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

struct MinimumResult {
  double t = 0;
  double f_min = 0;  // lower-envelope value at t
};

// k-th local minimum (k = 0, 1, ...) of the lower-envelope sensitivity,
// expected near t = (2k+1) pi/omega. Coarse grid over the surrounding
// bracket, then golden-section refinement.
inline MinimumResult find_envelope_minimum(const PhysicalParams& p, int k = 0) {
  const DerivedParams d = DerivedParams::derive(p);
  const double nbar = d.thermal_phonons;
  const double s = p.squeezing;
  const double half_period = std::numbers::pi / d.damped_freq;
  const double lo = (2.0 * k + 0.2) * half_period;
  const double hi = (2.0 * k + 1.8) * half_period;
  auto value = [&](double t) { return envelope_f_min(d, t, s, nbar).lower; };

  constexpr int coarse = 241;
  int best = -1;
  double best_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i < coarse; ++i) {
    const double t = lo + (hi - lo) * static_cast<double>(i) / (coarse - 1);
    const double v = value(t);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  if (best <= 0 || best >= coarse - 1)
    throw physics_error("envelope not unimodal in bracket");
  const double step = (hi - lo) / (coarse - 1);
  const double a = lo + step * (best - 1);
  const double b = lo + step * (best + 1);
  const double t_min = detail::golden_min(value, a, b, 1e-4 * half_period);
  return {t_min, value(t_min)};
}

inline MinimumResult find_first_minimum(const PhysicalParams& p) {
  return find_envelope_minimum(p, 0);
}

struct SqueezingOptimum {
  double s = 0;
  double f_min = 0;  // lower-envelope value at (t, s)
};

// Stationary input squeezing of the sensitivity at fixed time: the radical
// (a_diff^2 e^{2s} + a_sum^2 e^{-2s})/2 + const is minimal at s* = ln(a_sum/a_diff)/2.
inline SqueezingOptimum optimal_squeezing(const DerivedParams& d, double t, double nbar) {
  const CoefficientSet c = coefficients(d, t);
  const double u = std::abs(c.a_diff);
  const double v = std::abs(c.a_sum);
  if (u <= 0.0 || v <= 0.0 || u == v)
    throw physics_error("unbounded optimal squeezing (undamped degeneracy)");
  SqueezingOptimum r;
  r.s = 0.5 * std::log(v / u);
  r.f_min = envelope_f_min(d, t, r.s, nbar).lower;
  return r;
}

// ---------------------------------------------------------------------------
// Parameter sweeps.

enum class SweepOutput { f_min, F_newton, sql_ratio, log10_sql_ratio };

inline std::string to_string(SweepOutput o) {
  switch (o) {
    case SweepOutput::f_min: return "f_min";
    case SweepOutput::F_newton: return "F_newton";
    case SweepOutput::sql_ratio: return "sql_ratio";
    case SweepOutput::log10_sql_ratio: return "log10_sql_ratio";
  }
  return "f_min";
}

inline SweepOutput sweep_output_from_string(const std::string& s) {
  if (s == "f_min") return SweepOutput::f_min;
  if (s == "F_newton") return SweepOutput::F_newton;
  if (s == "sql_ratio") return SweepOutput::sql_ratio;
  if (s == "log10_sql_ratio") return SweepOutput::log10_sql_ratio;
  throw validation_error("sweep output: unknown value \"" + s + "\"");
}

enum class SweepAxisName { time, squeezing, damping, temperature };

inline std::string to_string(SweepAxisName n) {
  switch (n) {
    case SweepAxisName::time: return "time";
    case SweepAxisName::squeezing: return "squeezing";
    case SweepAxisName::damping: return "damping";
    case SweepAxisName::temperature: return "temperature";
  }
  return "time";
}

inline SweepAxisName sweep_axis_from_string(const std::string& s) {
  if (s == "time") return SweepAxisName::time;
  if (s == "squeezing") return SweepAxisName::squeezing;
  if (s == "damping") return SweepAxisName::damping;
  if (s == "temperature") return SweepAxisName::temperature;
  throw validation_error("sweep axis: unknown name \"" + s + "\"");
}

struct SweepAxis {
  SweepAxisName name = SweepAxisName::time;
  double min = 0;
  double max = 1;
  int count = 2;
  bool log_scale = false;

  void validate() const {
    if (count < 2) throw validation_error("sweep axis: count must be at least 2");
    if (!(min < max)) throw validation_error("sweep axis: min must be below max");
    if (log_scale && !(min > 0)) throw validation_error("sweep axis: log scale requires min > 0");
  }

  double at(int i) const {
    const double u = static_cast<double>(i) / (count - 1);
    if (log_scale) return min * std::pow(max / min, u);
    return min + (max - min) * u;
  }
};

struct SweepSpec {
  SweepAxis axis1;
  std::optional<SweepAxis> axis2;
  SweepOutput output = SweepOutput::f_min;
  bool at_first_minimum = true;  // time policy for non-time axes
  double eval_time = 0;          // used when at_first_minimum is false
  double sql_tau = -1;           // <0: 2 pi / Theta per operating point
};

enum class RowFlag { ok, singular_delta, invalid_params };

inline std::string to_string(RowFlag f) {
  switch (f) {
    case RowFlag::ok: return "ok";
    case RowFlag::singular_delta: return "singular_delta";
    case RowFlag::invalid_params: return "invalid_params";
  }
  return "ok";
}

struct SweepRow {
  std::array<double, 2> axis{0, 0};
  double value = 0;
  double f_min = 0;
  double force_n = 0;
  double force_sql_n = 0;
  double sql_ratio = 0;
  RowFlag flag = RowFlag::ok;
};

struct SweepTable {
  std::vector<std::string> axis_names;  // one or two entries
  std::string value_name;
  std::vector<SweepRow> rows;
};

namespace detail {

inline void apply_axis(PhysicalParams& p, SweepAxisName name, double v, double& t_override, bool& has_t) {
  switch (name) {
    case SweepAxisName::time:
      t_override = v;
      has_t = true;
      break;
    case SweepAxisName::squeezing: p.squeezing = v; break;
    case SweepAxisName::damping: p.damping = v; break;
    case SweepAxisName::temperature: p.temperature = v; break;
  }
}

}  // namespace detail

inline SweepTable sweep(const SweepSpec& spec, const PhysicalParams& base) {
  spec.axis1.validate();
  if (spec.axis2) spec.axis2->validate();

  SweepTable table;
  table.axis_names.push_back(to_string(spec.axis1.name));
  if (spec.axis2) table.axis_names.push_back(to_string(spec.axis2->name));
  table.value_name = to_string(spec.output);

  const int n2 = spec.axis2 ? spec.axis2->count : 1;
  for (int i1 = 0; i1 < spec.axis1.count; ++i1) {
    for (int i2 = 0; i2 < n2; ++i2) {
      SweepRow row;
      row.axis[0] = spec.axis1.at(i1);
      if (spec.axis2) row.axis[1] = spec.axis2->at(i2);

      PhysicalParams p = base;
      double t_override = 0;
      bool has_t = false;
      detail::apply_axis(p, spec.axis1.name, row.axis[0], t_override, has_t);
      if (spec.axis2) detail::apply_axis(p, spec.axis2->name, row.axis[1], t_override, has_t);

      try {
        const DerivedParams d = DerivedParams::derive(p);
        const double nbar = d.thermal_phonons;
        double t;
        if (has_t) {
          t = t_override;
        } else if (spec.at_first_minimum) {
          t = find_first_minimum(p).t;
        } else {
          t = spec.eval_time;
        }
        row.f_min = envelope_f_min(d, t, p.squeezing, nbar).lower;
        row.force_n = row.f_min * d.force_scale_n;
        const double tau = spec.sql_tau > 0 ? spec.sql_tau : default_tau(d.effective_freq);
        row.force_sql_n = sql_force(p.eff_mass, p.mech_freq, tau);
        row.sql_ratio = row.force_n / row.force_sql_n;
        switch (spec.output) {
          case SweepOutput::f_min: row.value = row.f_min; break;
          case SweepOutput::F_newton: row.value = row.force_n; break;
          case SweepOutput::sql_ratio: row.value = row.sql_ratio; break;
          case SweepOutput::log10_sql_ratio: row.value = std::log10(row.sql_ratio); break;
        }
        row.flag = RowFlag::ok;
      } catch (const physics_error& e) {
        row.flag = e.code == physics_error::kind::singular_configuration
                       ? RowFlag::singular_delta
                       : RowFlag::invalid_params;
        row.value = row.f_min = row.force_n = row.force_sql_n = row.sql_ratio =
            std::numeric_limits<double>::quiet_NaN();
      }
      table.rows.push_back(row);
    }
  }
  return table;
}

}  // namespace optoforce
