#pragma once

// Independent ground-truth path: first and second moments of the driven
// linear quadrature dynamics, integrated with classical fixed-step RK4, and
// the heterodyne statistics derived from them. Everything here is exact for
// the linear Gaussian model up to integrator truncation, which makes it a
// deterministic oracle for the closed forms.
//
// Quadrature ordering of the public state: (X1, Y1, Xb, Yb, X2, Y2), i.e.
// Stokes sideband, mirror, anti-Stokes sideband.

#include <cmath>
#include <future>
#include <vector>

#include "optoforce/closed_form.hpp"
#include "optoforce/linalg.hpp"
#include "optoforce/params.hpp"

namespace optoforce {

struct DriftModel {
  Mat6 drift = Mat6::zero();
  Mat6 diffusion = Mat6::zero();
  double mech_freq = 0;   // Omega, drive frequency
  double drive_amp = 0;   // Omega * f
  double slow_freq = 0;   // omega, for the step-size precondition

  // (0, 0, -Om f sin(Om t), +Om f cos(Om t), 0, 0)
  Vec6 drive(double t) const {
    Vec6 g{};
    g[2] = -drive_amp * std::sin(mech_freq * t);
    g[3] = drive_amp * std::cos(mech_freq * t);
    return g;
  }
};

inline DriftModel build_drift(const DerivedParams& d, double f, double nbar) {
  DriftModel m;
  const double chi = d.stokes_coupling;
  const double theta = d.antistokes_coupling;
  const double gamma = d.damping;
  m.drift(0, 2) = chi;    // X1' = chi Xb
  m.drift(1, 3) = -chi;   // Y1' = -chi Yb
  m.drift(2, 0) = chi;    // Xb' = chi X1 - theta X2 - 2 gamma Xb - drive
  m.drift(2, 4) = -theta;
  m.drift(2, 2) = -2.0 * gamma;
  m.drift(3, 1) = -chi;   // Yb' = -chi Y1 - theta Y2 - 2 gamma Yb + drive
  m.drift(3, 5) = -theta;
  m.drift(3, 3) = -2.0 * gamma;
  m.drift(4, 2) = theta;  // X2' = theta Xb
  m.drift(5, 3) = theta;  // Y2' = theta Yb
  m.diffusion(2, 2) = gamma * (2.0 * nbar + 1.0);
  m.diffusion(3, 3) = gamma * (2.0 * nbar + 1.0);
  m.mech_freq = d.mech_freq;
  m.drive_amp = d.mech_freq * f;
  m.slow_freq = d.damped_freq;
  return m;
}

struct MomentState {
  double t = 0;
  Vec6 mean{};
  Mat6 cov = Mat6::zero();
};

// Two-mode squeezed sidebands (parameter s), thermal mirror (nbar).
inline MomentState initial_moments(double s, double nbar) {
  if (!(nbar >= 0.0)) throw physics_error("initial_moments: nbar must be non-negative");
  MomentState st;
  const double c2 = 0.25 * std::cosh(2.0 * s);
  const double s2 = 0.25 * std::sinh(2.0 * s);
  st.cov(0, 0) = st.cov(1, 1) = st.cov(4, 4) = st.cov(5, 5) = c2;
  st.cov(2, 2) = st.cov(3, 3) = 0.25 * (2.0 * nbar + 1.0);
  st.cov(0, 4) = st.cov(4, 0) = s2;    // <X1 X2>
  st.cov(1, 5) = st.cov(5, 1) = -s2;   // <Y1 Y2>
  return st;
}

namespace detail {

inline void rk4_moment_step(const DriftModel& m, double t, double h, Vec6& mean, Mat6& cov) {
  auto mean_rhs = [&m](double tt, const Vec6& y) {
    Vec6 r = mat_vec(m.drift, y);
    const Vec6 g = m.drive(tt);
    for (int i = 0; i < 6; ++i) r[static_cast<size_t>(i)] += g[static_cast<size_t>(i)];
    return r;
  };
  const Vec6 k1 = mean_rhs(t, mean);
  Vec6 tmp;
  for (int i = 0; i < 6; ++i) tmp[static_cast<size_t>(i)] = mean[static_cast<size_t>(i)] + 0.5 * h * k1[static_cast<size_t>(i)];
  const Vec6 k2 = mean_rhs(t + 0.5 * h, tmp);
  for (int i = 0; i < 6; ++i) tmp[static_cast<size_t>(i)] = mean[static_cast<size_t>(i)] + 0.5 * h * k2[static_cast<size_t>(i)];
  const Vec6 k3 = mean_rhs(t + 0.5 * h, tmp);
  for (int i = 0; i < 6; ++i) tmp[static_cast<size_t>(i)] = mean[static_cast<size_t>(i)] + h * k3[static_cast<size_t>(i)];
  const Vec6 k4 = mean_rhs(t + h, tmp);
  for (int i = 0; i < 6; ++i)
    mean[static_cast<size_t>(i)] += h / 6.0 * (k1[static_cast<size_t>(i)] + 2.0 * (k2[static_cast<size_t>(i)] + k3[static_cast<size_t>(i)]) + k4[static_cast<size_t>(i)]);

  const Mat6 c1 = lyapunov_rhs(m.drift, cov, m.diffusion);
  Mat6 cw;
  for (int i = 0; i < 36; ++i) cw.m[static_cast<size_t>(i)] = cov.m[static_cast<size_t>(i)] + 0.5 * h * c1.m[static_cast<size_t>(i)];
  const Mat6 c2 = lyapunov_rhs(m.drift, cw, m.diffusion);
  for (int i = 0; i < 36; ++i) cw.m[static_cast<size_t>(i)] = cov.m[static_cast<size_t>(i)] + 0.5 * h * c2.m[static_cast<size_t>(i)];
  const Mat6 c3 = lyapunov_rhs(m.drift, cw, m.diffusion);
  for (int i = 0; i < 36; ++i) cw.m[static_cast<size_t>(i)] = cov.m[static_cast<size_t>(i)] + h * c3.m[static_cast<size_t>(i)];
  const Mat6 c4 = lyapunov_rhs(m.drift, cw, m.diffusion);
  for (int i = 0; i < 36; ++i)
    cov.m[static_cast<size_t>(i)] += h / 6.0 * (c1.m[static_cast<size_t>(i)] + 2.0 * (c2.m[static_cast<size_t>(i)] + c3.m[static_cast<size_t>(i)]) + c4.m[static_cast<size_t>(i)]);
  symmetrize(cov);
}

}  // namespace detail

// Fixed-step RK4 advance of the full moment state to t_end. The requested dt
// must resolve the fastest scale; the actual step is t_span/N with
// N = ceil(span/dt), so runs are bit-reproducible for given arguments.
inline MomentState integrate(const DriftModel& m, const MomentState& state, double t_end, double dt) {
  if (!(dt > 0.0)) throw physics_error("integrate: dt must be positive");
  const double fast = constants::two_pi / m.mech_freq;
  const double slow = constants::two_pi / m.slow_freq;
  if (dt > std::min(fast, slow) / 20.0 * (1.0 + 1e-12))
    throw physics_error("fast scale under-resolved: dt must be at most min(2pi/Omega, 2pi/omega)/20");
  if (!(t_end >= state.t)) throw physics_error("integrate: t_end must not precede the state time");

  MomentState st = state;
  const double span = t_end - st.t;
  if (span == 0.0) return st;
  const auto steps = static_cast<long long>(std::ceil(span / dt - 1e-12));
  const double h = span / static_cast<double>(steps);
  for (long long k = 0; k < steps; ++k) {
    const double t = st.t + h * static_cast<double>(k);
    detail::rk4_moment_step(m, t, h, st.mean, st.cov);
    if ((k & 0x3FF) == 0 || k == steps - 1) {
      double trace = 0;
      for (int i = 0; i < 6; ++i) trace += st.cov(i, i);
      if (!std::isfinite(trace) || !std::isfinite(st.mean[0]))
        throw physics_error("integration diverged: non-finite moments");
    }
  }
  st.t = t_end;

  double trace = 0;
  for (int i = 0; i < 6; ++i) {
    trace += st.cov(i, i);
    if (st.cov(i, i) < -1e-9 * std::max(1.0, trace))
      throw physics_error("integration diverged: negative variance");
  }
  if (min_eigenvalue(st.cov) < -1e-9 * std::max(1.0, trace))
    throw physics_error("integration diverged: covariance lost positive semidefiniteness");
  return st;
}

struct ObservableStats {
  double mean = 0;
  double variance = 0;
};

// Statistics of the measured quadrature sum Z = -(Y1 + Y2).
inline ObservableStats observable_stats(const MomentState& st) {
  ObservableStats o;
  o.mean = -(st.mean[1] + st.mean[5]);
  o.variance = st.cov(1, 1) + st.cov(5, 5) + 2.0 * st.cov(1, 5);
  return o;
}

// ---------------------------------------------------------------------------
// Verification of the closed forms against the moment dynamics.
//
// At production parameters the anti-squeezed quadratures are amplified by
// ~chi^2/Theta^2 (~1e7), so reading the squeezed combination Y1+Y2 out of the
// raw-basis covariance would require ~20 digits of cancellation. The verifier
// therefore integrates the same moment ODEs in the sum/difference basis
//   w = (X1+X2, Y1+Y2, X1-X2, Y1-Y2, Xb, Yb),
// where the measured combination is a state component and its dynamics carry
// the (theta-chi) suppression explicitly. The mean is advanced at a step
// resolving the optical drive; the covariance has no fast scale (drift and
// diffusion are time independent) and is advanced on the slow grid.

struct VerifySettings {
  std::vector<double> t_points;          // explicit grid; empty -> automatic
  int t_count = 5;                       // points of the automatic grid
  double t_max = -1.0;                   // <0 -> three slow periods
  bool snap_to_delta_max = true;         // move each t to a fast-cycle |Delta| max
  std::vector<double> s_values{0.0, 1.0, 2.0};
  std::vector<double> nbar_values{0.0};
  double tolerance = 1e-6;
  int mean_steps_per_fast_cycle = 192;
  int cov_steps_per_slow_cycle = 32768;
};

struct VerifyPoint {
  double gamma = 0, s = 0, nbar = 0, t = 0;
  double signal_closed = 0, signal_oracle = 0, rel_err_signal = 0;
  double var_closed = 0, var_oracle = 0, rel_err_var = 0;
};

struct VerifyReport {
  std::vector<VerifyPoint> points;
  double max_rel_err_signal = 0;
  double max_rel_err_var = 0;
  double tolerance = 1e-6;
  bool pass = false;
  double dt_mean = 0, dt_cov = 0;
  std::size_t worst_signal_index = 0, worst_var_index = 0;
};

namespace detail {

struct WDrift {
  // w = (X1+X2, Y1+Y2, X1-X2, Y1-Y2, Xb, Yb); identical physics to
  // build_drift, expressed in the transformed basis.
  double sum = 0;    // theta + chi
  double diff = 0;   // theta - chi
  double gamma = 0;
  double om = 0;     // Omega
  double amp = 0;    // Omega * f

  // drive_s/drive_c are sin/cos of the drive phase Omega*t, supplied by the
  // caller so the fast phase can be tracked by rotation instead of large-
  // argument trig at every stage.
  Vec6 mean_rhs(double drive_s, double drive_c, const Vec6& w) const {
    Vec6 r{};
    r[0] = sum * w[4];
    r[1] = diff * w[5];
    r[2] = -diff * w[4];
    r[3] = -sum * w[5];
    r[4] = -0.5 * diff * w[0] + 0.5 * sum * w[2] - 2.0 * gamma * w[4] - amp * drive_s;
    r[5] = -0.5 * sum * w[1] + 0.5 * diff * w[3] - 2.0 * gamma * w[5] + amp * drive_c;
    return r;
  }

  Mat6 drift_matrix() const {
    Mat6 a = Mat6::zero();
    a(0, 4) = sum;
    a(1, 5) = diff;
    a(2, 4) = -diff;
    a(3, 5) = -sum;
    a(4, 0) = -0.5 * diff;
    a(4, 2) = 0.5 * sum;
    a(4, 4) = -2.0 * gamma;
    a(5, 1) = -0.5 * sum;
    a(5, 3) = 0.5 * diff;
    a(5, 5) = -2.0 * gamma;
    return a;
  }
};

inline WDrift make_wdrift(const DerivedParams& d, double f) {
  WDrift w;
  w.sum = d.antistokes_coupling + d.stokes_coupling;
  w.diff = d.coupling_diff;
  w.gamma = d.damping;
  w.om = d.mech_freq;
  w.amp = d.mech_freq * f;
  return w;
}

// Mean trajectory in the w basis, sampled at the (sorted) grid times.
// Two precision measures matter over the ~1e8 steps of a production run:
//  - the RK4 increments are accumulated with Kahan compensation (the measured
//    combination sits ~1e6 below the per-step increments, so rounding bias of
//    a plain sum would dominate the 1e-6 comparison), and
//  - the drive phase advances by a half-step unit rotation instead of
//    evaluating trig at arguments ~1e6 rad, whose argument rounding would
//    inject ~1e-9 rad of phase noise per call.
inline std::vector<Vec6> w_mean_trajectory(const WDrift& w, const std::vector<double>& ts, double dt) {
  std::vector<Vec6> out;
  out.reserve(ts.size());
  Vec6 y{};
  Vec6 comp{};
  // The phase pair is carried across segment boundaries: re-seeding it from
  // cos/sin(Omega*t) would jump the drive phase by the argument rounding
  // (~1e-9 rad), and at gamma = 0 the transient excited by such a jump never
  // decays out of the measured combination.
  double c = 1.0;
  double s = 0.0;
  double t0 = 0.0;
  for (double target : ts) {
    const double span = target - t0;
    if (span > 0) {
      const auto steps = static_cast<long long>(std::ceil(span / dt - 1e-12));
      const double h = span / static_cast<double>(steps);
      const double rot_c = std::cos(0.5 * h * w.om);
      const double rot_s = std::sin(0.5 * h * w.om);
      for (long long k = 0; k < steps; ++k) {
        const double ch = c * rot_c - s * rot_s;  // phase at t + h/2
        const double sh = s * rot_c + c * rot_s;
        const double cf = ch * rot_c - sh * rot_s;  // phase at t + h
        const double sf = sh * rot_c + ch * rot_s;
        const Vec6 k1 = w.mean_rhs(s, c, y);
        Vec6 tmp;
        for (int i = 0; i < 6; ++i) tmp[static_cast<size_t>(i)] = y[static_cast<size_t>(i)] + 0.5 * h * k1[static_cast<size_t>(i)];
        const Vec6 k2 = w.mean_rhs(sh, ch, tmp);
        for (int i = 0; i < 6; ++i) tmp[static_cast<size_t>(i)] = y[static_cast<size_t>(i)] + 0.5 * h * k2[static_cast<size_t>(i)];
        const Vec6 k3 = w.mean_rhs(sh, ch, tmp);
        for (int i = 0; i < 6; ++i) tmp[static_cast<size_t>(i)] = y[static_cast<size_t>(i)] + h * k3[static_cast<size_t>(i)];
        const Vec6 k4 = w.mean_rhs(sf, cf, tmp);
        for (int i = 0; i < 6; ++i) {
          const std::size_t ii = static_cast<size_t>(i);
          const double incr = h / 6.0 * (k1[ii] + 2.0 * (k2[ii] + k3[ii]) + k4[ii]) - comp[ii];
          const double sum = y[ii] + incr;
          comp[ii] = (sum - y[ii]) - incr;
          y[ii] = sum;
        }
        c = cf;
        s = sf;
        if ((k & 0xFFF) == 0xFFF) {
          const double norm = std::sqrt(c * c + s * s);
          c /= norm;
          s /= norm;
        }
      }
    }
    t0 = target;
    out.push_back(y);
  }
  return out;
}

// Covariance trajectory (variance of Y1+Y2) in the w basis.
inline std::vector<double> w_var_trajectory(const WDrift& w, double s, double nbar,
                                            const std::vector<double>& ts, double dt) {
  const Mat6 a = w.drift_matrix();
  Mat6 d = Mat6::zero();
  d(4, 4) = w.gamma * (2.0 * nbar + 1.0);
  d(5, 5) = w.gamma * (2.0 * nbar + 1.0);

  Mat6 cov = Mat6::zero();
  const double e2s = std::exp(2.0 * s);
  cov(0, 0) = 0.5 * e2s;        // var(X1+X2)
  cov(1, 1) = 0.5 / e2s;        // var(Y1+Y2), squeezed
  cov(2, 2) = 0.5 / e2s;        // var(X1-X2), squeezed
  cov(3, 3) = 0.5 * e2s;        // var(Y1-Y2)
  cov(4, 4) = cov(5, 5) = 0.25 * (2.0 * nbar + 1.0);

  std::vector<double> out;
  out.reserve(ts.size());
  double t0 = 0.0;
  for (double target : ts) {
    const double span = target - t0;
    if (span > 0) {
      const auto steps = static_cast<long long>(std::ceil(span / dt - 1e-12));
      const double h = span / static_cast<double>(steps);
      for (long long k = 0; k < steps; ++k) {
        const Mat6 c1 = lyapunov_rhs(a, cov, d);
        Mat6 cw;
        for (int i = 0; i < 36; ++i) cw.m[static_cast<size_t>(i)] = cov.m[static_cast<size_t>(i)] + 0.5 * h * c1.m[static_cast<size_t>(i)];
        const Mat6 c2 = lyapunov_rhs(a, cw, d);
        for (int i = 0; i < 36; ++i) cw.m[static_cast<size_t>(i)] = cov.m[static_cast<size_t>(i)] + 0.5 * h * c2.m[static_cast<size_t>(i)];
        const Mat6 c3 = lyapunov_rhs(a, cw, d);
        for (int i = 0; i < 36; ++i) cw.m[static_cast<size_t>(i)] = cov.m[static_cast<size_t>(i)] + h * c3.m[static_cast<size_t>(i)];
        const Mat6 c4 = lyapunov_rhs(a, cw, d);
        for (int i = 0; i < 36; ++i)
          cov.m[static_cast<size_t>(i)] += h / 6.0 * (c1.m[static_cast<size_t>(i)] + 2.0 * (c2.m[static_cast<size_t>(i)] + c3.m[static_cast<size_t>(i)]) + c4.m[static_cast<size_t>(i)]);
        symmetrize(cov);
      }
    }
    t0 = target;
    out.push_back(cov(1, 1));
  }
  return out;
}

inline double rel_err(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

}  // namespace detail

inline VerifyReport verify_against_closed_form(const PhysicalParams& p, const VerifySettings& settings) {
  const DerivedParams d = DerivedParams::derive(p);
  const double slow_period = constants::two_pi / d.damped_freq;
  const double fast_period = constants::two_pi / d.mech_freq;
  if (settings.mean_steps_per_fast_cycle < 20 || settings.cov_steps_per_slow_cycle < 20)
    throw physics_error("fast scale under-resolved: need at least 20 integration steps per cycle");

  std::vector<double> ts = settings.t_points;
  if (ts.empty()) {
    const double t_max = settings.t_max > 0 ? settings.t_max : 3.0 * slow_period;
    const int n = std::max(1, settings.t_count);
    for (int j = 1; j <= n; ++j) ts.push_back(t_max * static_cast<double>(j) / static_cast<double>(n));
  }
  if (settings.snap_to_delta_max) {
    // Within one fast cycle around each grid point, sample 32 phases and keep
    // the one with the largest |Delta|; relative signal comparisons at zero
    // crossings of the fast oscillation would be meaningless.
    for (double& t : ts) {
      double best_t = t, best = -1.0;
      for (int k = 0; k < 32; ++k) {
        const double cand = t + fast_period * static_cast<double>(k) / 32.0;
        const double val = std::abs(coefficients(d, cand).delta);
        if (val > best) {
          best = val;
          best_t = cand;
        }
      }
      t = best_t;
    }
  }
  std::sort(ts.begin(), ts.end());

  VerifyReport rep;
  rep.tolerance = settings.tolerance;
  rep.dt_mean = fast_period / static_cast<double>(settings.mean_steps_per_fast_cycle);
  rep.dt_cov = slow_period / static_cast<double>(settings.cov_steps_per_slow_cycle);

  const detail::WDrift w = detail::make_wdrift(d, p.force);
  const std::vector<Vec6> means = detail::w_mean_trajectory(w, ts, rep.dt_mean);

  // Covariance passes are independent; fan out across the (s, nbar) grid.
  struct CovJob {
    double s, nbar;
    std::vector<double> vars;
  };
  std::vector<CovJob> jobs;
  for (double s : settings.s_values)
    for (double nbar : settings.nbar_values) jobs.push_back({s, nbar, {}});
  {
    std::vector<std::future<std::vector<double>>> futs;
    futs.reserve(jobs.size());
    for (const CovJob& j : jobs)
      futs.push_back(std::async(std::launch::async, [&w, &ts, &rep](double s, double nbar) {
        return detail::w_var_trajectory(w, s, nbar, ts, rep.dt_cov);
      }, j.s, j.nbar));
    for (std::size_t i = 0; i < jobs.size(); ++i) jobs[i].vars = futs[i].get();
  }

  for (const CovJob& j : jobs) {
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double t = ts[i];
      const CoefficientSet c = coefficients(d, t);
      VerifyPoint pt;
      pt.gamma = d.damping;
      pt.s = j.s;
      pt.nbar = j.nbar;
      pt.t = t;
      pt.signal_closed = signal(d, c, p.force);
      pt.signal_oracle = std::abs(means[i][1]);  // |mean(Y1+Y2)| = |<Z>|
      pt.rel_err_signal = detail::rel_err(pt.signal_closed, pt.signal_oracle);
      pt.var_closed = noise_variance(d, c, j.s, j.nbar);
      pt.var_oracle = j.vars[i];
      pt.rel_err_var = detail::rel_err(pt.var_closed, pt.var_oracle);
      if (pt.rel_err_signal > rep.max_rel_err_signal) {
        rep.max_rel_err_signal = pt.rel_err_signal;
        rep.worst_signal_index = rep.points.size();
      }
      if (pt.rel_err_var > rep.max_rel_err_var) {
        rep.max_rel_err_var = pt.rel_err_var;
        rep.worst_var_index = rep.points.size();
      }
      rep.points.push_back(pt);
    }
  }
  rep.pass = std::max(rep.max_rel_err_signal, rep.max_rel_err_var) <= rep.tolerance;
  return rep;
}

}  // namespace optoforce
