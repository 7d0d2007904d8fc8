#pragma once

// Closed-form solution of the damped three-mode dynamics: time-dependent
// coefficients of the heterodyne observable, signal, noise variance and
// minimum detectable force.
//
// Notation used throughout (all rates in 1/s):
//   chi, theta  Stokes / anti-Stokes couplings, Theta^2 = theta^2 - chi^2
//   gamma       mechanical damping, omega = sqrt(Theta^2 - gamma^2)
//   sin_d(t) = e^{-gamma t} sin(omega t),  cos_d(t) = e^{-gamma t} cos(omega t)
//   ups_p/m  = cos_d +- (gamma/omega) sin_d
//   a1 = (theta + chi*ups_p)/Theta^2,  a2 = (chi + theta*ups_p)/Theta^2
//   b_coef   = sin_d/omega
//   e_sq(t)  = accumulated thermal-noise integral, (4 gamma/omega^2) Int sin_d^2
//   delta(t) = (Om^2-Theta^2)(ups_p - cos Om t) - 2 gamma Om ((Om/omega) sin_d - sin Om t)
//   g_per_f  = Om * delta / r4,  r4 = (Theta^2-Om^2)^2 + 4 gamma^2 Om^2
//
// The mean of the measured quadrature sum is (chi-theta) G(t) f and its
// variance is (theta-chi)^2 * radical/4, with the radical assembled in the
// cancellation-free split ((a1-a2)^2 e^{2s} + (a1+a2)^2 e^{-2s})/2 + ...

#include <array>
#include <cmath>
#include <complex>

#include "optoforce/params.hpp"

namespace optoforce {

struct CoefficientSet {
  double t = 0;
  double sin_d = 0, cos_d = 1;
  double ups_p = 1, ups_m = 1;
  double a1 = 0, a2 = 0;
  double a_diff = 0, a_sum = 0;  // a1 - a2 and a1 + a2, formed without cancellation
  double b_coef = 0;
  double e_sq = 0;
  double delta = 0;
  double g_per_f = 0;
  double r4 = 0;
  std::complex<double> f_plus{0, 0}, f_minus{0, 0};  // F+-, per unit force
};

inline CoefficientSet coefficients(const DerivedParams& d, double t) {
  if (!(t >= 0.0)) throw physics_error("coefficients: time must be non-negative");
  const double gamma = d.damping;
  const double omega = d.damped_freq;
  const double theta2 = d.effective_freq * d.effective_freq;
  const double om = d.mech_freq;
  const double om2 = om * om;

  if (gamma == 0.0 && std::abs(theta2 - om2) < 1e-6 * om2)
    throw physics_error(
        "singular configuration: undamped sideband dynamics resonant with the mechanical frequency",
        physics_error::kind::singular_configuration);

  CoefficientSet c;
  c.t = t;
  const double decay = std::exp(-gamma * t);
  const double ph = omega * t;
  c.sin_d = decay * std::sin(ph);
  c.cos_d = decay * std::cos(ph);
  const double go = gamma / omega;
  c.ups_p = c.cos_d + go * c.sin_d;
  c.ups_m = c.cos_d - go * c.sin_d;
  c.b_coef = c.sin_d / omega;

  const double chi = d.stokes_coupling;
  const double theta = d.antistokes_coupling;
  c.a1 = (theta + chi * c.ups_p) / theta2;
  c.a2 = (chi + theta * c.ups_p) / theta2;
  c.a_diff = d.coupling_diff * (1.0 - c.ups_p) / theta2;
  c.a_sum = (theta + chi) * (1.0 + c.ups_p) / theta2;

  if (gamma == 0.0) {
    c.e_sq = 0.0;
  } else {
    // -expm1 keeps the t->infinity limit 1/Theta^2 exact and avoids forming
    // it as a difference of comparable exponentials.
    c.e_sq = -std::expm1(-2.0 * gamma * t) / theta2 -
             2.0 * gamma * c.sin_d * (gamma * c.sin_d + omega * c.cos_d) / (omega * omega * theta2);
    if (c.e_sq < 0.0) c.e_sq = 0.0;  // guard roundoff at gamma*t ~ eps
  }

  c.r4 = (theta2 - om2) * (theta2 - om2) + 4.0 * gamma * gamma * om2;
  c.f_plus = om / std::complex<double>(theta2 - om2, 2.0 * gamma * om);
  c.f_minus = om / std::complex<double>(theta2 - om2, -2.0 * gamma * om);

  const double fast_s = std::sin(om * t);
  const double fast_c = std::cos(om * t);
  c.delta = (om2 - theta2) * (c.ups_p - fast_c) - 2.0 * gamma * om * ((om / omega) * c.sin_d - fast_s);
  c.g_per_f = om * c.delta / c.r4;
  return c;
}

// Shared radical of the noise variance and the minimum detectable force:
//   (a_diff^2 e^{2s} + a_sum^2 e^{-2s})/2 + (2 nbar + 1)(B^2 + E^2)
inline double sensitivity_radical(const CoefficientSet& c, double s, double nbar) {
  const double ep = std::exp(2.0 * s);
  return 0.5 * (c.a_diff * c.a_diff * ep + c.a_sum * c.a_sum / ep) +
         (2.0 * nbar + 1.0) * (c.b_coef * c.b_coef + c.e_sq);
}

// |<Z>| of the heterodyne phase-quadrature sum; linear in |f|.
inline double signal(const DerivedParams& d, double t, double f) {
  const CoefficientSet c = coefficients(d, t);
  return std::abs(d.coupling_diff * c.g_per_f * f);
}

inline double signal(const DerivedParams& d, const CoefficientSet& c, double f) {
  return std::abs(d.coupling_diff * c.g_per_f * f);
}

// Variance of the same observable for a two-mode squeezed input (parameter s)
// and mirror thermal occupation nbar.
inline double noise_variance(const DerivedParams& d, const CoefficientSet& c, double s, double nbar) {
  const double diff2 = d.coupling_diff * d.coupling_diff;
  return diff2 * 0.25 * sensitivity_radical(c, s, nbar);
}

inline double noise_variance(const DerivedParams& d, double t, double s, double nbar) {
  return noise_variance(d, coefficients(d, t), s, nbar);
}

// Pointwise minimum detectable dimensionless force (unit signal-to-noise).
inline double f_min(const DerivedParams& d, const CoefficientSet& c, double s, double nbar) {
  if (c.delta == 0.0)
    throw physics_error("sensitivity undefined (zero signal)", physics_error::kind::singular_configuration);
  return c.r4 / (2.0 * d.mech_freq * std::abs(c.delta)) * std::sqrt(sensitivity_radical(c, s, nbar));
}

inline double f_min(const DerivedParams& d, double t, double s, double nbar) {
  return f_min(d, coefficients(d, t), s, nbar);
}

struct SensitivityResult {
  double t = 0;
  double squeezing = 0;
  double nbar = 0;
  double signal = 0;        // at the supplied force amplitude
  double noise_var = 0;
  double f_min = 0;         // dimensionless
  double force_min_n = 0;   // newtons
  double sql_tau = 0;       // tau used for the SQL reference
  double force_sql_n = 0;
  double sql_ratio = 0;     // force_min / force_sql
};

inline SensitivityResult evaluate_point(const DerivedParams& d, double t, double s, double nbar,
                                        double f, double eff_mass, double tau) {
  const CoefficientSet c = coefficients(d, t);
  SensitivityResult r;
  r.t = t;
  r.squeezing = s;
  r.nbar = nbar;
  r.signal = signal(d, c, f);
  r.noise_var = noise_variance(d, c, s, nbar);
  r.f_min = f_min(d, c, s, nbar);
  r.force_min_n = r.f_min * d.force_scale_n;
  r.sql_tau = tau;
  r.force_sql_n = sql_force(eff_mass, d.mech_freq, tau);
  r.sql_ratio = r.force_min_n / r.force_sql_n;
  return r;
}

// ---------------------------------------------------------------------------
// Heisenberg-picture evolution map of (a1, a1+, a2, a2+, b, b+).

struct HeisenbergMap {
  // Row-major 6x6: row i gives the decomposition of v_i(t) over v_j(0),
  // with v = (a1, a1+, a2, a2+, b, b+).
  std::array<std::complex<double>, 36> map{};
  // Additive c-number drive of each row, per unit dimensionless force.
  std::array<std::complex<double>, 6> drive{};
  double t = 0;
  double gamma = 0, omega = 0;

  std::complex<double> at(int i, int j) const { return map[static_cast<size_t>(6 * i + j)]; }

  // Memory kernel of the mirror noise integral: K(tau) = 2 sqrt(gamma) ups_m(tau).
  double kernel(double tau) const {
    const double dec = std::exp(-gamma * tau);
    return 2.0 * std::sqrt(gamma) *
           dec * (std::cos(omega * tau) - (gamma / omega) * std::sin(omega * tau));
  }
};

inline HeisenbergMap heisenberg_map(const DerivedParams& d, double t) {
  const CoefficientSet c = coefficients(d, t);
  const double chi = d.stokes_coupling;
  const double theta = d.antistokes_coupling;
  const double theta2 = d.effective_freq * d.effective_freq;
  const double omega = d.damped_freq;
  const double om = d.mech_freq;
  const std::complex<double> i1{0.0, 1.0};
  const std::complex<double> e_pos = std::polar(1.0, om * t);   // e^{+i Om t}
  const std::complex<double> e_neg = std::conj(e_pos);

  HeisenbergMap h;
  h.t = t;
  h.gamma = d.damping;
  h.omega = omega;
  auto set = [&h](int i, int j, std::complex<double> v) { h.map[static_cast<size_t>(6 * i + j)] = v; };

  // a1(t)
  set(0, 0, (theta * theta - chi * chi * c.ups_p) / theta2);
  set(0, 3, chi * theta / theta2 * (c.ups_p - 1.0));
  set(0, 5, chi / omega * c.sin_d);
  h.drive[0] = i1 * chi * c.f_minus * (c.ups_p - i1 * (om / omega) * c.sin_d - e_neg);
  // a2(t)
  set(2, 1, chi * theta / theta2 * (1.0 - c.ups_p));
  set(2, 2, (theta * theta * c.ups_p - chi * chi) / theta2);
  set(2, 4, theta / omega * c.sin_d);
  h.drive[2] = -i1 * theta * c.f_plus * (c.ups_p + i1 * (om / omega) * c.sin_d - e_pos);
  // b(t)
  set(4, 1, chi / omega * c.sin_d);
  set(4, 2, -theta / omega * c.sin_d);
  set(4, 4, c.ups_m);
  h.drive[4] = om * c.f_plus *
               (c.cos_d - (d.damping / omega) * c.sin_d + i1 * (theta2 / (omega * om)) * c.sin_d - e_pos);

  // Conjugate rows: v_{2k+1} = v_{2k}^+ with creation/annihilation slots swapped.
  for (int i : {0, 2, 4}) {
    for (int j = 0; j < 6; ++j) {
      const int jc = (j % 2 == 0) ? j + 1 : j - 1;
      set(i + 1, jc, std::conj(h.at(i, j)));
    }
    h.drive[static_cast<size_t>(i + 1)] = std::conj(h.drive[static_cast<size_t>(i)]);
  }
  return h;
}

}  // namespace optoforce
