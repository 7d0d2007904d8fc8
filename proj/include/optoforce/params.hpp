#pragma once

// Raw experimental knobs of the single-mirror sideband force sensor and the
// constants derived from them: sideband couplings, effective oscillation
// frequencies, thermal occupation, force scale and SQL reference.

#include <cmath>
#include <string>

#include "optoforce/constants.hpp"
#include "optoforce/errors.hpp"

namespace optoforce {

// The detection/mode bandwidths can be read either as plain Hz ("literal")
// or with the detection bandwidth promoted to an angular rate
// ("angular_det", the default calibration; it scales the Stokes coupling by
// exactly 2*pi and puts the first sensitivity minimum at ~15 ms).
enum class BandwidthConvention { literal, angular_det };

inline std::string to_string(BandwidthConvention c) {
  return c == BandwidthConvention::literal ? "literal" : "angular_det";
}

inline BandwidthConvention bandwidth_convention_from_string(const std::string& s) {
  if (s == "literal") return BandwidthConvention::literal;
  if (s == "angular_det") return BandwidthConvention::angular_det;
  throw validation_error("bandwidth_convention: expected \"literal\" or \"angular_det\", got \"" + s + "\"");
}

struct PhysicalParams {
  double wavelength = 600e-9;       // laser wavelength [m]
  double mech_freq = constants::two_pi * 1e7;  // vibrational mode angular frequency [rad/s]
  double laser_power = 50e-3;       // incident beam power [W]
  double eff_mass = 5e-12;          // effective mass of the vibrational mode [kg]
  double det_bandwidth = 1e6;       // detection bandwidth [Hz]
  double mode_bandwidth = 1e2;      // incident beam bandwidth [Hz]
  double damping = 1.0;             // mechanical damping rate [1/s]
  double temperature = 0.0;         // mirror equilibrium temperature [K]
  double incidence_angle = 0.0;     // beam incidence angle [rad], |angle| < pi/2
  double squeezing = 0.0;           // input two-mode squeezing parameter s
  double force = 1.0;               // dimensionless force amplitude f
  BandwidthConvention convention = BandwidthConvention::angular_det;

  double laser_freq() const { return constants::two_pi * constants::light_speed / wavelength; }

  // Throws validation_error naming the offending field.
  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw validation_error(std::string(name) + " must be positive and finite");
    };
    positive(wavelength, "wavelength_m");
    positive(mech_freq, "mech_freq_rad_s");
    positive(laser_power, "laser_power_w");
    positive(eff_mass, "eff_mass_kg");
    positive(det_bandwidth, "det_bandwidth_hz");
    positive(mode_bandwidth, "mode_bandwidth_hz");
    if (!(damping >= 0.0) || !std::isfinite(damping))
      throw validation_error("damping_hz must be non-negative and finite");
    if (!(temperature >= 0.0) || !std::isfinite(temperature))
      throw validation_error("temperature_k must be non-negative and finite");
    if (!(std::abs(incidence_angle) < std::numbers::pi / 2.0))
      throw validation_error("incidence_angle_rad must satisfy |angle| < pi/2");
    if (!std::isfinite(squeezing)) throw validation_error("squeezing must be finite");
    if (!std::isfinite(force)) throw validation_error("force must be finite");
  }
};

// Mean phonon number of the mirror mode in equilibrium at temperature T.
// T = 0 handled as an explicit branch (the exponent overflows well before
// the occupation becomes distinguishable from zero).
inline double thermal_occupation(double temperature, double mech_freq) {
  if (temperature <= 0.0) return 0.0;
  const double x = constants::hbar * mech_freq / (constants::boltzmann * temperature);
  const double e = std::expm1(x);
  return std::isfinite(e) ? 1.0 / e : 0.0;
}

// Conversion from the dimensionless force amplitude f to newtons.
inline double force_scale(double eff_mass, double mech_freq) {
  return mech_freq * std::sqrt(2.0 * constants::hbar * eff_mass * mech_freq);
}

// Standard quantum limit for a constant force measured over time tau.
inline double sql_force(double eff_mass, double mech_freq, double tau) {
  if (!(tau > 0.0)) throw physics_error("sql_force: tau must be positive");
  return std::sqrt(constants::hbar * mech_freq * eff_mass) / tau;
}

// Interaction time matched to the slow timescale of the coupled dynamics.
inline double default_tau(double effective_freq) {
  if (!(effective_freq > 0.0)) throw physics_error("default_tau: effective frequency must be positive");
  return constants::two_pi / effective_freq;
}

struct DerivedParams {
  double laser_freq = 0;           // omega_0 [rad/s]
  double stokes_coupling = 0;      // chi, parametric (down-shifted) sideband rate [1/s]
  double antistokes_coupling = 0;  // theta, beam-splitter (up-shifted) sideband rate [1/s]
  double coupling_diff = 0;        // theta - chi; the heterodyne observable lives on this scale
  double effective_freq = 0;       // Theta = sqrt(theta^2 - chi^2) [1/s]
  double damped_freq = 0;          // omega = sqrt(Theta^2 - gamma^2) [1/s]
  double damping = 0;              // gamma [1/s]
  double mech_freq = 0;            // Omega [rad/s]
  double thermal_phonons = 0;      // nbar at the source temperature
  double force_scale_n = 0;        // newtons per unit dimensionless force

  // Couplings from the raw knobs. Errors: inverted sidebands, overdamping.
  static DerivedParams derive(const PhysicalParams& p) {
    p.validate();
    const double omega0 = p.laser_freq();
    const double omega_mech = p.mech_freq;
    if (!(omega0 > omega_mech))
      throw physics_error("invalid sideband structure: laser frequency must exceed the mechanical frequency");

    const double dv_det = p.convention == BandwidthConvention::angular_det
                              ? constants::two_pi * p.det_bandwidth
                              : p.det_bandwidth;
    const double c2 = constants::light_speed * constants::light_speed;
    const double chi = std::cos(p.incidence_angle) *
                       std::sqrt(p.laser_power * dv_det * dv_det * (omega0 - omega_mech) /
                                 (2.0 * p.eff_mass * omega_mech * c2 * p.mode_bandwidth));
    // theta/chi = sqrt((w0+Om)/(w0-Om)); the ratio is 1 + O(Om/w0), so the
    // squared difference is formed from 2*Om/(w0-Om) rather than theta^2-chi^2.
    const double ratio2 = (omega0 + omega_mech) / (omega0 - omega_mech);
    const double theta = chi * std::sqrt(ratio2);
    const double theta2_minus_chi2 = chi * chi * (2.0 * omega_mech / (omega0 - omega_mech));

    DerivedParams d;
    d.laser_freq = omega0;
    d.stokes_coupling = chi;
    d.antistokes_coupling = theta;
    d.coupling_diff = theta - chi;
    d.effective_freq = std::sqrt(theta2_minus_chi2);
    d.damping = p.damping;
    d.mech_freq = omega_mech;
    d.thermal_phonons = thermal_occupation(p.temperature, omega_mech);
    d.force_scale_n = force_scale(p.eff_mass, omega_mech);
    d.finish_validate();
    return d;
  }

  // Direct construction from couplings, for synthetic operating points.
  static DerivedParams from_couplings(double chi, double theta, double gamma,
                                      double omega_mech, double eff_mass = 1.0,
                                      double nbar = 0.0) {
    if (!(theta > chi) || !(chi > 0.0))
      throw physics_error("couplings must satisfy theta > chi > 0");
    if (!(omega_mech > 0.0)) throw physics_error("mechanical frequency must be positive");
    DerivedParams d;
    d.stokes_coupling = chi;
    d.antistokes_coupling = theta;
    d.coupling_diff = theta - chi;
    d.effective_freq = std::sqrt((theta - chi) * (theta + chi));
    d.damping = gamma;
    d.mech_freq = omega_mech;
    const double r2 = (theta / chi) * (theta / chi);
    d.laser_freq = omega_mech * (r2 + 1.0) / (r2 - 1.0);
    d.thermal_phonons = nbar;
    d.force_scale_n = force_scale(eff_mass, omega_mech);
    d.finish_validate();
    return d;
  }

 private:
  void finish_validate() {
    if (!(damping >= 0.0)) throw physics_error("damping must be non-negative");
    if (!(damping < effective_freq))
      throw physics_error("overdamped regime unsupported: damping must stay below the effective frequency");
    damped_freq = std::sqrt((effective_freq - damping) * (effective_freq + damping));
  }
};

}  // namespace optoforce
