#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "optoforce/closed_form.hpp"

using namespace optoforce;
namespace cn = optoforce::constants;

TEST_SUITE_BEGIN("closed_form");

namespace {

DerivedParams table_derived(double gamma = 1.0) {
  PhysicalParams p;
  p.damping = gamma;
  return DerivedParams::derive(p);
}

// Mild synthetic operating point: Theta = chi, Omega only 3x Theta, so all
// coefficients stay O(10) and identities can be checked near machine precision.
DerivedParams mild_point(double gamma) {
  const double chi = 100.0;
  const double theta = std::sqrt(chi * chi + 30.0 * 30.0);
  return DerivedParams::from_couplings(chi, theta, gamma, 300.0);
}

// Composite Simpson quadrature of (4 gamma/omega^2) Int_0^t e^{-2 gamma u} sin^2(omega u) du,
// the defining integral of the accumulated thermal-noise term.
double e_sq_quadrature(const DerivedParams& d, double t, int n = 20000) {
  const double g = d.damping, w = d.damped_freq;
  auto f = [&](double u) {
    const double s = std::sin(w * u);
    return std::exp(-2.0 * g * u) * s * s;
  };
  const double h = t / (2 * n);
  double acc = f(0.0) + f(t);
  for (int i = 1; i < 2 * n; ++i) acc += f(h * i) * (i % 2 ? 4.0 : 2.0);
  return 4.0 * g / (w * w) * acc * h / 3.0;
}

}  // namespace

TEST_CASE("initial instant") {
  const DerivedParams d = table_derived();
  const CoefficientSet c = coefficients(d, 0.0);
  CHECK(c.sin_d == 0.0);
  CHECK(c.cos_d == 1.0);
  CHECK(c.ups_p == 1.0);
  CHECK(c.ups_m == 1.0);
  CHECK(c.b_coef == 0.0);
  CHECK(c.e_sq == 0.0);
  CHECK(c.delta == 0.0);
  CHECK(c.g_per_f == 0.0);
  const double expect_a = (d.antistokes_coupling + d.stokes_coupling) /
                          (d.effective_freq * d.effective_freq);
  CHECK(c.a1 == doctest::Approx(expect_a).epsilon(1e-14));
  CHECK(c.a2 == doctest::Approx(expect_a).epsilon(1e-14));
  CHECK(c.a_diff == 0.0);
}

TEST_CASE("vacuum input noise at t = 0 is exactly one half") {
  const DerivedParams d = table_derived();
  // the theta - chi cancellation costs ~8 digits at production couplings
  CHECK(noise_variance(d, 0.0, 0.0, 0.0) == doctest::Approx(0.5).epsilon(1e-6));
  for (double s : {0.5, 1.0, 2.0})
    CHECK(noise_variance(d, 0.0, s, 0.0) == doctest::Approx(0.5 * std::exp(-2 * s)).epsilon(1e-6));
}

TEST_CASE("signal is linear in the force") {
  const DerivedParams d = table_derived();
  for (double t : {1e-3, 7e-3, 2.3e-2}) {
    CHECK(signal(d, t, 0.0) == 0.0);
    CHECK(signal(d, t, 2.0) == doctest::Approx(2.0 * signal(d, t, 1.0)).epsilon(1e-14));
  }
}

TEST_CASE("noise variance grows with thermal occupation") {
  const DerivedParams d = table_derived();
  const double t = 9e-3;
  double prev = noise_variance(d, t, 0.7, 0.0);
  for (double nbar : {1.0, 10.0, 1e3, 1e6}) {
    const double nv = noise_variance(d, t, 0.7, nbar);
    CHECK(nv > prev);
    prev = nv;
  }
}

TEST_CASE("damped envelope bounds the oscillators") {
  const DerivedParams d = mild_point(2.5);
  for (double t : {0.01, 0.1, 0.5, 1.0, 3.0}) {
    const CoefficientSet c = coefficients(d, t);
    const double bound = std::exp(-d.damping * t) * (1.0 + 1e-12);
    CHECK(std::abs(c.sin_d) <= bound);
    CHECK(std::abs(c.cos_d) <= bound);
  }
}

TEST_CASE("thermal noise integral matches direct quadrature") {
  for (double gamma : {0.3, 2.0}) {
    const DerivedParams d = mild_point(gamma);
    for (double t : {0.05, 0.4, 1.3}) {
      const double closed = coefficients(d, t).e_sq;
      const double quad = e_sq_quadrature(d, t);
      CHECK(closed == doctest::Approx(quad).epsilon(1e-8));
    }
  }
  // production scale, including gamma t >> 1 where the expression must
  // approach 1/Theta^2 from below without cancellation artifacts
  const DerivedParams d = table_derived(1.0);
  const double t_late = 40.0;
  const double limit = 1.0 / (d.effective_freq * d.effective_freq);
  CHECK(coefficients(d, t_late).e_sq == doctest::Approx(limit).epsilon(1e-12));
  CHECK(coefficients(d, t_late).e_sq <= limit * (1 + 1e-12));
}

TEST_CASE("thermal noise integral is non-negative and non-decreasing") {
  const DerivedParams d = table_derived(1.0);
  const double t_max = 10.0 * cn::two_pi / d.damped_freq;
  double prev = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double e = coefficients(d, t_max * i / 2000.0).e_sq;
    CHECK(e >= 0.0);
    CHECK(e >= prev);
    prev = e;
  }
}

TEST_CASE("undamped branch is the continuous limit") {
  PhysicalParams p;
  p.damping = 0.0;
  const DerivedParams d0 = DerivedParams::derive(p);
  const double t_ref = cn::two_pi / d0.damped_freq;

  struct Probe {
    double s, nbar;
  };
  const Probe probes[] = {{0.0, 0.0}, {1.0, 10.0}, {2.0, 1e5}};
  for (double eps_gamma : {1e-6, 1e-8}) {
    p.damping = eps_gamma * d0.effective_freq;
    const DerivedParams dg = DerivedParams::derive(p);
    const double tol = eps_gamma == 1e-6 ? 1e-4 : 1e-6;
    for (double tf : {0.37, 1.11, 2.79}) {
      const double t = tf * t_ref;
      for (const Probe& pr : probes) {
        CHECK(signal(dg, t, 1.0) == doctest::Approx(signal(d0, t, 1.0)).epsilon(tol));
        CHECK(noise_variance(dg, t, pr.s, pr.nbar) ==
              doctest::Approx(noise_variance(d0, t, pr.s, pr.nbar)).epsilon(tol));
        CHECK(f_min(dg, t, pr.s, pr.nbar) ==
              doctest::Approx(f_min(d0, t, pr.s, pr.nbar)).epsilon(tol));
      }
    }
  }
}

TEST_CASE("unit signal-to-noise at the sensitivity point") {
  const DerivedParams d = table_derived();
  std::mt19937 rng(777);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double half_period = std::numbers::pi / d.damped_freq;
  for (int i = 0; i < 200; ++i) {
    const double t = (0.02 + 3.0 * u(rng)) * half_period;
    const CoefficientSet c = coefficients(d, t);
    if (std::abs(c.delta) < 1e-9 * c.r4 / (d.mech_freq * d.mech_freq)) continue;
    const double s = 3.0 * u(rng);
    const double nbar = std::pow(10.0, 6.0 * u(rng)) - 1.0;
    const double fm = f_min(d, c, s, nbar);
    const double ratio = signal(d, c, fm) / std::sqrt(noise_variance(d, c, s, nbar));
    CHECK(ratio == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("sensitivity diverges at the start") {
  const DerivedParams d = table_derived();
  CHECK_THROWS_WITH_AS(f_min(d, 0.0, 0.0, 0.0), doctest::Contains("zero signal"), physics_error);
  CHECK(f_min(d, 1e-12, 0.0, 0.0) > 1e15);
}

TEST_CASE("undamped resonance guard") {
  // Theta == Omega with no damping makes the drive response singular.
  CHECK_THROWS_AS(coefficients(DerivedParams::from_couplings(100.0, std::sqrt(100.0 * 100.0 + 300.0 * 300.0),
                                                             0.0, 300.0), 0.1),
                  physics_error);
  // with damping the same point is finite
  const DerivedParams d = DerivedParams::from_couplings(
      100.0, std::sqrt(100.0 * 100.0 + 300.0 * 300.0), 1.0, 300.0);
  CHECK(std::isfinite(coefficients(d, 0.1).g_per_f));
}

TEST_CASE("drive response coefficients") {
  const DerivedParams d = mild_point(1.5);
  const CoefficientSet c = coefficients(d, 0.42);
  const double om2 = d.mech_freq * d.mech_freq;
  const double th2 = d.effective_freq * d.effective_freq;
  CHECK(std::norm(c.f_plus) == doctest::Approx(om2 / c.r4).epsilon(1e-13));
  CHECK(c.f_minus == std::conj(c.f_plus));
  CHECK(c.r4 == doctest::Approx((th2 - om2) * (th2 - om2) +
                                4.0 * d.damping * d.damping * om2).epsilon(1e-14));
}

TEST_CASE("evolution map is the identity at t = 0") {
  const DerivedParams d = mild_point(1.5);
  const HeisenbergMap h = heisenberg_map(d, 0.0);
  for (int i = 0; i < 6; ++i) {
    CHECK(std::abs(h.drive[static_cast<size_t>(i)]) <= 1e-14);
    for (int j = 0; j < 6; ++j)
      CHECK(std::abs(h.at(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-12);
  }
}

TEST_CASE("undamped sideband-sideband coefficient") {
  // At gamma = 0 the creation-operator admixture of the opposite sideband is
  // chi theta (cos Theta t - 1)/Theta^2.
  const DerivedParams d = mild_point(0.0);
  for (double t : {0.013, 0.12, 0.57}) {
    const HeisenbergMap h = heisenberg_map(d, t);
    const double expect = d.stokes_coupling * d.antistokes_coupling *
                          (std::cos(d.effective_freq * t) - 1.0) /
                          (d.effective_freq * d.effective_freq);
    CHECK(h.at(0, 3).real() == doctest::Approx(expect).epsilon(1e-12));
    CHECK(std::abs(h.at(0, 3).imag()) <= 1e-14);
  }
}

TEST_CASE("undamped map preserves commutators") {
  auto defect = [](const HeisenbergMap& h) {
    // J has [a, a+] = 1 blocks on each mode.
    std::array<std::array<std::complex<double>, 6>, 6> j{};
    for (int m = 0; m < 3; ++m) {
      j[static_cast<size_t>(2 * m)][static_cast<size_t>(2 * m + 1)] = 1.0;
      j[static_cast<size_t>(2 * m + 1)][static_cast<size_t>(2 * m)] = -1.0;
    }
    double worst = 0.0;
    for (int i = 0; i < 6; ++i)
      for (int k = 0; k < 6; ++k) {
        std::complex<double> acc = -j[static_cast<size_t>(i)][static_cast<size_t>(k)];
        for (int p = 0; p < 6; ++p)
          for (int q = 0; q < 6; ++q)
            acc += h.at(i, p) * j[static_cast<size_t>(p)][static_cast<size_t>(q)] * h.at(k, q);
        worst = std::max(worst, std::abs(acc));
      }
    return worst;
  };

  const DerivedParams mild = mild_point(0.0);
  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const double t = 3.0 * cn::two_pi / mild.effective_freq * u(rng);
    CHECK(defect(heisenberg_map(mild, t)) <= 1e-12);
  }

  // Production-scale couplings amplify the map by ~chi^2/Theta^2, so the
  // identity is checked relative to the squared map norm there.
  PhysicalParams p;
  p.damping = 0.0;
  const DerivedParams big = DerivedParams::derive(p);
  for (int i = 0; i < 5; ++i) {
    const double t = 3.0 * cn::two_pi / big.effective_freq * u(rng);
    const HeisenbergMap h = heisenberg_map(big, t);
    double norm2 = 0.0;
    for (const auto& v : h.map) norm2 = std::max(norm2, std::norm(v));
    CHECK(defect(h) <= 1e-12 * norm2);
  }

  // a damped map is contractive, not symplectic
  CHECK(defect(heisenberg_map(mild_point(5.0), 0.3)) > 1e-3);
}

TEST_SUITE_END();
