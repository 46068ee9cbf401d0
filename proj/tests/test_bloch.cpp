#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "mavg/bloch.hpp"
#include "mavg/model.hpp"
#include "mavg/semiclassical.hpp"

using namespace mavg;
using bloch::cplx;
using bloch::SystemState;

namespace {

DriveConfig drive_at(const SystemParams& p, double dr, double dq, double xi, double w) {
  DriveConfig d;
  d.xi = xi;
  d.omega_p = probe_frequency_for(p, dr);
  d.omega_d = drive_frequency_for(p, dq);
  d.omega_rabi = w;
  return d;
}

double max_diff(const SystemState& a, const SystemState& b) {
  const auto pa = a.pack(), pb = b.pack();
  double m = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) m = std::max(m, std::abs(pa[i] - pb[i]));
  return m;
}

}  // namespace

TEST_CASE("packing round trip") {
  SystemState s;
  s.sx = 0.1;
  s.sy = -0.2;
  s.sz = 0.3;
  s.a = {1.0, -2.0};
  s.n_ph = 5.0;
  s.asx = {0.5, 0.6};
  s.asy = {-0.7, 0.8};
  s.asz = {0.9, -1.1};
  const auto v = s.pack();
  CHECK(v[0] == 0.1);
  CHECK(v[3] == 1.0);
  CHECK(v[4] == -2.0);
  CHECK(v[5] == 5.0);
  CHECK(v[11] == -1.1);
  CHECK(max_diff(SystemState::unpack(v), s) == 0.0);
}

TEST_CASE("rhs anchors") {
  const SystemParams p = default_params();
  SUBCASE("empty state relaxes at gamma1") {
    const SystemState d = bloch::rhs(p, drive_at(p, 0.3, 0.0, 0.0, 0.0), SystemState{});
    CHECK(d.sz == doctest::Approx(-p.gamma1));
    CHECK(d.a == cplx{});
    CHECK(d.n_ph == 0.0);
    CHECK(d.asx == cplx{});
    CHECK(d.asy == cplx{});
    CHECK(d.asz == cplx{});
  }
  SUBCASE("ground vacuum is a fixed point without tones") {
    const SystemState d = bloch::rhs(p, drive_at(p, 2.0, 1.0, 0.0, 0.0), bloch::ground_vacuum(p));
    for (double x : d.pack()) CHECK(x == 0.0);
  }
  SUBCASE("probe drives the field at -i xi") {
    const double xi = 0.4;
    const SystemState d = bloch::rhs(p, drive_at(p, 2.0, 1.0, xi, 0.0), bloch::ground_vacuum(p));
    CHECK(d.a.real() == doctest::Approx(0.0));
    CHECK(d.a.imag() == doctest::Approx(-xi));
  }
}

TEST_CASE("free longitudinal decay follows the closed form") {
  for (double z0 : {1.0, 0.8}) {
    SystemParams p = default_params();
    p.z0 = z0;
    SystemState s0;
    s0.sz = 1.0;
    const double tf = p.t1() * z0;
    const auto traj = bloch::evolve(p, drive_at(p, 0.0, 0.0, 0.0, 0.0), s0, tf, 0.05);
    REQUIRE(traj.size() > 2);
    for (const auto& smp : traj) {
      const double exact = -z0 + (1.0 + z0) * std::exp(-p.gamma1 * smp.t / z0);
      CHECK(std::abs(smp.state.sz - exact) < 1e-6);
    }
    CHECK(traj.back().t == doctest::Approx(tf));
  }
}

TEST_CASE("evolve rejects a non-positive horizon") {
  const SystemParams p = default_params();
  CHECK_THROWS_AS(bloch::evolve(p, DriveConfig{}, bloch::ground_vacuum(p), 0.0, 0.1),
                  InvalidParameter);
}

TEST_CASE("undriven qubit: field relaxes to the dispersive Lorentzian") {
  const SystemParams p = default_params();
  const double xi = 0.1 * p.kappa;
  for (double dr : {-p.chi, 0.0, 0.5 * p.chi, p.chi}) {
    const DriveConfig d = drive_at(p, dr, 0.0, xi, 0.0);
    const auto traj = bloch::evolve(p, d, bloch::ground_vacuum(p), 30.0 / p.kappa * 4.0, 0.1);
    const cplx exact = -cplx(0.0, 1.0) * xi / cplx(p.kappa, dr - p.chi * p.z0);
    CHECK(std::abs(traj.back().state.a - exact) < 1e-9);
  }
}

TEST_CASE("zero-drive steady state matches the factorised solution") {
  const SystemParams p = default_params();
  for (double xi_k : {0.05, 0.5, 1.0}) {
    for (int i = 0; i < 11; ++i) {
      const double dr = -2.0 * p.chi + 0.4 * p.chi * i;
      const double xi = xi_k * p.kappa;
      const DriveConfig d = drive_at(p, dr, 0.0, xi, 0.0);
      const auto r = bloch::steady_state(p, d, bloch::Strategy::NewtonRoot);
      const double sc = std::sqrt(cavity_intensity(p, dr, xi, 0.0));
      CHECK(std::abs(r.state.a) == doctest::Approx(sc).epsilon(1e-6));
      CHECK(r.state.sz == doctest::Approx(-1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("probe on the ground-state line transmits fully") {
  const SystemParams p = default_params();
  const double xi = 0.05 * p.kappa;
  const auto r = bloch::steady_state(p, drive_at(p, p.chi, 0.0, xi, 0.0), bloch::Strategy::NewtonRoot);
  CHECK(std::abs(r.state.a) == doctest::Approx(xi / p.kappa).epsilon(1e-6));
}

TEST_CASE("probe-free saturation matches the resonant Bloch solution") {
  const SystemParams p = default_params();
  const double w = 5.0 * p.gamma1;
  const auto r = bloch::steady_state(p, drive_at(p, 0.0, 0.0, 0.0, w), bloch::Strategy::NewtonRoot);
  const double exact = -1.0 / (1.0 + w * w / (p.gamma1 * p.gamma2));
  CHECK(r.state.sz > -p.z0);
  CHECK(r.state.sz < 0.0);
  CHECK(r.state.sz == doctest::Approx(exact).epsilon(1e-9));
  CHECK(r.state.sx == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("strong drive merges the line at the bare resonator") {
  const SystemParams p = default_params();
  const double xi = 0.05 * p.kappa;
  const double w = 3000.0 * omega1_resonant(p);
  const auto r = bloch::steady_state(p, drive_at(p, 0.0, 0.0, xi, w), bloch::Strategy::NewtonRoot);
  CHECK(std::abs(r.state.a) == doctest::Approx(xi / p.kappa).epsilon(0.02));
  CHECK(std::abs(r.state.sz) < 1e-2);
}

TEST_CASE("Newton and time evolution agree") {
  const SystemParams p = default_params();
  const double xi = 0.05 * p.kappa;
  const double w1 = omega1_resonant(p);
  for (double w : {0.0, 0.3 * w1, 3.0 * w1, 30.0 * w1}) {
    for (double dr : {-p.chi, 0.0, 0.7 * p.chi}) {
      const DriveConfig d = drive_at(p, dr, 0.0, xi, w);
      const auto rn = bloch::steady_state(p, d, bloch::Strategy::NewtonRoot);
      const auto rt = bloch::steady_state(p, d, bloch::Strategy::TimeEvolution);
      CHECK(rn.method == bloch::Strategy::NewtonRoot);
      CHECK(rt.method == bloch::Strategy::TimeEvolution);
      CHECK(rn.residual_norm < 1e-9);
      const auto a = rn.state.pack(), b = rt.state.pack();
      for (std::size_t k = 0; k < a.size(); ++k) {
        // Components that vanish are compared on the scale of their group:
        // z0 for the Bloch vector, xi/kappa for field amplitudes, its square
        // for the photon number.
        const double group = k < 3 ? p.z0 : k == 5 ? std::pow(xi / p.kappa, 2) : xi / p.kappa;
        const double scale = std::max({std::abs(a[k]), std::abs(b[k]), group});
        INFO("w=" << w << " dr=" << dr << " k=" << k << " newton " << a[k] << " time " << b[k]);
        CHECK(std::abs(a[k] - b[k]) / scale < 1e-6);
      }
    }
  }
}

TEST_CASE("steady state is a fixed point of the flow") {
  const SystemParams p = default_params();
  const DriveConfig d = drive_at(p, 0.2 * p.chi, 0.0, 0.3 * p.kappa, 2.0 * omega1_resonant(p));
  const auto r = bloch::steady_state(p, d, bloch::Strategy::NewtonRoot);
  REQUIRE(r.residual_norm < 1e-10);
  const auto traj = bloch::evolve(p, d, r.state, 10.0 / p.kappa, 0.05);
  for (const auto& smp : traj) CHECK(max_diff(smp.state, r.state) < 1e-8);
}

TEST_CASE("photon number balance and weak-probe linearity") {
  const SystemParams p = default_params();
  const double w1 = omega1_resonant(p);
  for (double w : {0.0, 0.5 * w1, 5.0 * w1}) {
    for (double dr : {-0.8 * p.chi, 0.1, p.chi}) {
      const double xi = 0.2 * p.kappa;
      const auto r = bloch::steady_state(p, drive_at(p, dr, 0.0, xi, w), bloch::Strategy::NewtonRoot);
      CHECK(r.state.n_ph ==
            doctest::Approx(p.n_th - xi / p.kappa * r.state.a.imag()).epsilon(1e-10));
    }
  }
  for (double dr : {-p.chi, 0.0, p.chi}) {
    const double xi = 0.05 * p.kappa;
    const auto full = bloch::steady_state(p, drive_at(p, dr, 0.0, xi, 0.0), bloch::Strategy::NewtonRoot);
    const auto half =
        bloch::steady_state(p, drive_at(p, dr, 0.0, xi / 2.0, 0.0), bloch::Strategy::NewtonRoot);
    CHECK(std::abs(full.state.a) / std::abs(half.state.a) == doctest::Approx(2.0).epsilon(0.01));
  }
}

TEST_CASE("Bloch vector stays inside the unit ball") {
  const SystemParams p = default_params();
  const double w1 = omega1_resonant(p);
  for (double w : {0.1 * w1, w1, 10.0 * w1}) {
    for (double dq : {-p.chi, 0.0, 0.5}) {
      const auto r = bloch::steady_state(p, drive_at(p, 0.0, dq, 0.5 * p.kappa, w),
                                         bloch::Strategy::NewtonRoot);
      CHECK(r.state.bloch_norm_sq() <= 1.0 + 1e-6);
    }
  }
}

TEST_CASE("semiclassical seed is close to the converged state at weak probe") {
  const SystemParams p = default_params();
  const DriveConfig d = drive_at(p, p.chi, 0.0, 0.01 * p.kappa, 0.0);
  const SystemState seed = bloch::semiclassical_seed(p, d);
  const auto r = bloch::steady_state(p, d, bloch::Strategy::NewtonRoot);
  CHECK(max_diff(seed, r.state) < 1e-8);
}
