// Acceptance suite: one test case per release criterion, each printing a
// single PASS line (or failing with the measured numbers in the log).

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "optoforce/analysis.hpp"
#include "optoforce/closed_form.hpp"
#include "optoforce/moment_oracle.hpp"
#include "optoforce/params.hpp"

using namespace optoforce;
namespace cn = optoforce::constants;

namespace {

PhysicalParams reference_point(double gamma = 1.0, double squeezing = 0.0,
                               double temperature = 0.0) {
  PhysicalParams p;
  p.damping = gamma;
  p.squeezing = squeezing;
  p.temperature = temperature;
  return p;
}

double sql_ratio_at(const DerivedParams& d, const PhysicalParams& p, double t, double s,
                    double nbar, double tau) {
  const double fm = envelope_f_min(d, t, s, nbar).lower;
  return fm * d.force_scale_n / sql_force(p.eff_mass, p.mech_freq, tau);
}

}  // namespace

TEST_CASE("criterion 01: standard quantum limit reference value") {
  const PhysicalParams p = reference_point();
  const double value = sql_force(p.eff_mass, p.mech_freq, 15e-3);
  const double rel = std::abs(value / 1.22e-17 - 1.0);
  REQUIRE(rel <= 0.02);
  std::printf("[acceptance] criterion 01 (SQL reference force): PASS  F_SQL(15 ms) = %.4e N, off nominal by %.2f%%\n",
              value, 100 * rel);
}

TEST_CASE("criterion 02: first-minimum timing") {
  const PhysicalParams p = reference_point();  // angular_det calibration
  PhysicalParams lit = p;
  lit.convention = BandwidthConvention::literal;
  const double theta_ang = DerivedParams::derive(p).effective_freq;
  const double theta_lit = DerivedParams::derive(lit).effective_freq;
  const MinimumResult r = find_first_minimum(p);
  // Both calibrations are part of the report either way: the ~15 ms target
  // only holds for the angular reading of the detection bandwidth.
  std::printf("[acceptance] criterion 02: effective freq angular_det = %.4f 1/s, literal = %.4f 1/s, t1 = %.6f s\n",
              theta_ang, theta_lit, r.t);
  REQUIRE(std::abs(r.t / 15e-3 - 1.0) <= 0.20);
  std::printf("[acceptance] criterion 02 (first-minimum timing): PASS  t1 = %.4f ms\n", r.t * 1e3);
}

TEST_CASE("criterion 03: closed form matches the moment-ODE oracle") {
  VerifySettings settings;  // defaults: 5 times over three slow periods, s in {0,1,2}
  const PhysicalParams base = reference_point();
  // occupations for T = 0 and T = 3 K, plus two fixed reference occupations
  settings.nbar_values = {thermal_occupation(0.0, base.mech_freq),
                          thermal_occupation(3.0, base.mech_freq), 10.0, 1e5};

  std::size_t points = 0;
  double worst_signal = 0, worst_var = 0;
  for (double gamma : {0.0, 1.0}) {
    PhysicalParams p = base;
    p.damping = gamma;
    const VerifyReport rep = verify_against_closed_form(p, settings);
    points += rep.points.size();
    worst_signal = std::max(worst_signal, rep.max_rel_err_signal);
    worst_var = std::max(worst_var, rep.max_rel_err_var);
  }
  std::printf("[acceptance] criterion 03: %zu grid points, max rel err signal %.3e, variance %.3e\n",
              points, worst_signal, worst_var);
  REQUIRE(points >= 50);
  REQUIRE(worst_signal <= 1e-6);
  REQUIRE(worst_var <= 1e-6);
  std::printf("[acceptance] criterion 03 (oracle equivalence): PASS\n");
}

TEST_CASE("criterion 04: damping ordering of the envelope minima") {
  const std::vector<double> gammas{0.01, 0.1, 1.0};
  double values[3][3];
  for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
    const PhysicalParams p = reference_point(gammas[gi]);
    const DerivedParams d = DerivedParams::derive(p);
    const double tau = 0.5 * default_tau(d.effective_freq);
    for (int k = 0; k < 3; ++k) {
      const MinimumResult r = find_envelope_minimum(p, k);
      values[gi][k] = std::log10(r.f_min * d.force_scale_n /
                                 sql_force(p.eff_mass, p.mech_freq, tau));
    }
  }
  for (int k = 0; k < 3; ++k)
    std::printf("[acceptance] criterion 04: minimum %d, log10(F/F_SQL) = {%.4f, %.4f, %.4f} over damping {0.01, 0.1, 1}\n",
                k + 1, values[0][k], values[1][k], values[2][k]);
  for (int k = 0; k < 3; ++k) {
    REQUIRE(values[0][k] < values[1][k]);
    REQUIRE(values[1][k] < values[2][k]);
  }
  for (int gi = 0; gi < 3; ++gi) {
    REQUIRE(values[gi][0] < values[gi][1]);
    REQUIRE(values[gi][1] < values[gi][2]);
  }
  std::printf("[acceptance] criterion 04 (damping/time ordering of minima): PASS\n");
}

TEST_CASE("criterion 05: squeezing response at the first minimum") {
  const PhysicalParams p = reference_point(1.0, 0.0, 0.0);
  const DerivedParams d = DerivedParams::derive(p);
  const double t1 = find_first_minimum(p).t;
  const double nbar = 0.0;

  // interior minimum of f_min(s): closed-form stationary point vs grid search
  const SqueezingOptimum opt = optimal_squeezing(d, t1, nbar);
  double grid_s = 0, grid_v = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 10000; ++k) {
    const double s = 1e-3 * k;
    const double v = envelope_f_min(d, t1, s, nbar).lower;
    if (v < grid_v) {
      grid_v = v;
      grid_s = s;
    }
  }
  const bool interior = grid_s > 0.0 && grid_s < 10.0 &&
                        grid_v < envelope_f_min(d, t1, 0.0, nbar).lower;
  std::printf("[acceptance] criterion 05: optimal squeezing s* = %.4f (grid argmin %.4f), f_min(s*) = %.6e\n",
              opt.s, grid_s, opt.f_min);

  // SQL crossing of sql_ratio(s) for s in [1, 2], under both tau readings
  const double tau2pi = default_tau(d.effective_freq);
  double best_ratio = std::numeric_limits<double>::infinity();
  bool crossing = false;
  for (double tau : {tau2pi, 0.5 * tau2pi}) {
    double prev = sql_ratio_at(d, p, t1, 1.0, nbar, tau);
    for (int k = 1; k <= 1000; ++k) {
      const double s = 1.0 + 1e-3 * k;
      const double cur = sql_ratio_at(d, p, t1, s, nbar, tau);
      if ((prev - 1.0) * (cur - 1.0) <= 0.0) crossing = true;
      prev = cur;
    }
    for (int k = 0; k <= 500; ++k)
      best_ratio = std::min(best_ratio, sql_ratio_at(d, p, t1, 0.01 * k, nbar, tau));
  }
  std::printf("[acceptance] criterion 05: min F/F_SQL over s in [0,5] = %.4e (both tau conventions), crossing of 1 in s [1,2]: %s\n",
              best_ratio, crossing ? "yes" : "no");

  REQUIRE(std::abs(grid_s - opt.s) <= 2e-3);
  REQUIRE(interior);
  REQUIRE_MESSAGE(crossing,
                  "sql_ratio(s) never reaches 1: the closed-form sensitivity floor at the "
                  "first minimum sits ~10 orders of magnitude above the SQL at these parameters");
  std::printf("[acceptance] criterion 05 (squeezing response): PASS\n");
}

TEST_CASE("criterion 06: temperature dependence of the squeezing gain") {
  struct TempResult {
    double temperature;
    double min_ratio;
  };
  std::vector<TempResult> results;
  for (double temperature : {0.0, 0.03, 3.0, 300.0}) {
    const PhysicalParams p = reference_point(1.0, 0.0, temperature);
    const DerivedParams d = DerivedParams::derive(p);
    const double nbar = d.thermal_phonons;
    const double t1 = find_first_minimum(p).t;
    const double tau2pi = default_tau(d.effective_freq);
    double best = std::numeric_limits<double>::infinity();
    for (double tau : {tau2pi, 0.5 * tau2pi})
      for (int k = 0; k <= 500; ++k)
        best = std::min(best, sql_ratio_at(d, p, t1, 0.01 * k, nbar, tau));
    results.push_back({temperature, best});
    std::printf("[acceptance] criterion 06: T = %.2f K, min F/F_SQL over s in [0,5] = %.4e\n",
                temperature, best);
  }
  REQUIRE(results.back().min_ratio >= 1.0);  // no sub-SQL point at room temperature
  for (std::size_t i = 0; i + 1 < results.size(); ++i)
    REQUIRE_MESSAGE(results[i].min_ratio < 1.0,
                    "no squeezing value reaches the SQL at this temperature: the closed-form "
                    "floor is ~10 orders of magnitude above it at these parameters");
  std::printf("[acceptance] criterion 06 (temperature behavior): PASS\n");
}

TEST_CASE("criterion 07: unit signal-to-noise at the sensitivity point") {
  std::mt19937 rng(20240617);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  double worst = 0.0;
  while (checked < 1000) {
    const double gamma = 0.01 * std::pow(500.0, u(rng));  // 0.01 .. 5 Hz
    const PhysicalParams p = reference_point(gamma);
    const DerivedParams d = DerivedParams::derive(p);
    const double t = (0.05 + 3.0 * u(rng)) * std::numbers::pi / d.damped_freq;
    const CoefficientSet c = coefficients(d, t);
    if (std::abs(c.delta) < 1e-8 * c.r4 / (d.mech_freq * d.mech_freq)) continue;
    const double s = 3.0 * u(rng);
    const double nbar = std::pow(10.0, 6.0 * u(rng)) - 1.0;
    const double fm = f_min(d, c, s, nbar);
    const double ratio = signal(d, c, fm) / std::sqrt(noise_variance(d, c, s, nbar));
    worst = std::max(worst, std::abs(ratio - 1.0));
    ++checked;
  }
  std::printf("[acceptance] criterion 07: 1000 random operating points, max |R - 1| = %.3e\n", worst);
  REQUIRE(worst <= 1e-9);
  std::printf("[acceptance] criterion 07 (unit signal-to-noise): PASS\n");
}

TEST_CASE("criterion 08: thermal noise integral monotonicity") {
  const DerivedParams d = DerivedParams::derive(reference_point());
  const double t_max = 10.0 * cn::two_pi / d.damped_freq;
  double prev = -1.0;
  bool ok = true;
  for (int i = 0; i <= 10000 && ok; ++i) {
    const double e = coefficients(d, t_max * i / 10000.0).e_sq;
    ok = e >= 0.0 && e >= prev;
    prev = e;
  }
  std::printf("[acceptance] criterion 08: E^2 sampled on 10^4 points over [0, 10 periods], final value %.6e\n",
              prev);
  REQUIRE(ok);
  std::printf("[acceptance] criterion 08 (thermal noise monotonicity): PASS\n");
}

TEST_CASE("criterion 09: analytic envelope matches dense extrema") {
  const DerivedParams d = DerivedParams::derive(reference_point());
  const double fast_period = cn::two_pi / d.mech_freq;
  std::mt19937 rng(31337);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double t0 = (0.05 + 9.5 * u(rng)) * std::numbers::pi / d.damped_freq;
    const EnvelopePoint e = delta_envelope(d, t0);
    double dmax = 0, dmin = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 10000; ++k) {
      const double v = std::abs(coefficients(d, t0 + fast_period * k / 10000.0).delta);
      dmax = std::max(dmax, v);
      dmin = std::min(dmin, v);
    }
    worst = std::max(worst, std::abs(dmax - e.delta_abs_max) / e.delta_abs_max);
    if (e.delta_abs_min > 1e-3 * e.delta_abs_max)
      worst = std::max(worst, std::abs(dmin - e.delta_abs_min) / e.delta_abs_max);
    else if (dmin > 1e-3 * e.delta_abs_max)
      worst = std::max(worst, dmin / e.delta_abs_max);
  }
  std::printf("[acceptance] criterion 09: 100 random slow times, worst envelope mismatch %.3e\n", worst);
  REQUIRE(worst <= 1e-3);
  std::printf("[acceptance] criterion 09 (envelope extrema): PASS\n");
}

TEST_CASE("criterion 10: commutator preservation of the undamped map") {
  auto defect = [](const HeisenbergMap& h) {
    std::array<std::array<std::complex<double>, 6>, 6> j{};
    for (int m = 0; m < 3; ++m) {
      j[static_cast<size_t>(2 * m)][static_cast<size_t>(2 * m + 1)] = 1.0;
      j[static_cast<size_t>(2 * m + 1)][static_cast<size_t>(2 * m)] = -1.0;
    }
    double worst = 0.0;
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b) {
        std::complex<double> acc = -j[static_cast<size_t>(a)][static_cast<size_t>(b)];
        for (int pp = 0; pp < 6; ++pp)
          for (int q = 0; q < 6; ++q)
            acc += h.at(a, pp) * j[static_cast<size_t>(pp)][static_cast<size_t>(q)] * h.at(b, q);
        worst = std::max(worst, std::abs(acc));
      }
    return worst;
  };

  // Moderate parametric gain keeps the check conditioned near machine
  // precision; the production-scale map (gain ~1e7 amplifies the products by
  // ~1e14) is checked in relative form below.
  const DerivedParams mild =
      DerivedParams::from_couplings(100.0, std::sqrt(100.0 * 100.0 + 30.0 * 30.0), 0.0, 300.0);
  std::mt19937 rng(55);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_abs = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double t = 3.0 * cn::two_pi / mild.effective_freq * u(rng);
    worst_abs = std::max(worst_abs, defect(heisenberg_map(mild, t)));
  }
  double worst_rel = 0.0;
  const DerivedParams big = DerivedParams::derive(reference_point(0.0));
  for (int i = 0; i < 20; ++i) {
    const double t = 3.0 * cn::two_pi / big.effective_freq * u(rng);
    const HeisenbergMap h = heisenberg_map(big, t);
    double norm2 = 0.0;
    for (const auto& v : h.map) norm2 = std::max(norm2, std::norm(v));
    worst_rel = std::max(worst_rel, defect(h) / norm2);
  }
  std::printf("[acceptance] criterion 10: 20 random times, worst |MJM^T - J| = %.3e (moderate gain), %.3e relative (production gain)\n",
              worst_abs, worst_rel);
  REQUIRE(worst_abs <= 1e-10);
  REQUIRE(worst_rel <= 1e-12);
  std::printf("[acceptance] criterion 10 (commutator preservation): PASS\n");
}
