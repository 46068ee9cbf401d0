#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "mavg/model.hpp"
#include "mavg/semiclassical.hpp"

using namespace mavg;

namespace {

// Independent transcription of the self-consistency map, used as the oracle.
double oracle_map(const SystemParams& p, double dr, double dq, double xi, double w, double n) {
  const double x = dq + 2.0 * p.chi * n;
  const double w1sq = 4.0 * p.gamma1 * p.gamma2 + 4.0 * (p.gamma1 / p.gamma2) * x * x;
  const double pp = 0.5 * w * w / (w * w + w1sq);
  const double b = p.chi * (2.0 * pp - 1.0) + dr;
  return xi * xi / (b * b + p.kappa * p.kappa);
}

// Exhaustive sign-change scan on a uniform grid, refined by bisection.
std::vector<double> oracle_roots(const SystemParams& p, double dr, double dq, double xi, double w,
                                 double upper, int points) {
  std::vector<double> roots;
  auto g = [&](double n) { return n - oracle_map(p, dr, dq, xi, w, n); };
  double a = 0.0, ga = g(a);
  for (int i = 1; i <= points; ++i) {
    const double b = upper * i / points;
    const double gb = g(b);
    if (ga == 0.0) roots.push_back(a);
    if (ga * gb < 0.0) {
      double lo = a, hi = b, glo = ga;
      for (int k = 0; k < 200 && hi - lo > 0.0; ++k) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if ((gm < 0.0) == (glo < 0.0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    a = b;
    ga = gb;
  }
  return roots;
}

DriveConfig drive_at(const SystemParams& p, double dr, double dq, double xi, double w) {
  DriveConfig d;
  d.xi = xi;
  d.omega_p = probe_frequency_for(p, dr);
  d.omega_d = drive_frequency_for(p, dq);
  d.omega_rabi = w;
  return d;
}

}  // namespace

TEST_CASE("omega1_squared anchors") {
  const SystemParams p = default_params();
  const double ref = 4.0 / (p.t1() * p.t2());
  CHECK(omega1_squared(p, 0.0, 0.0) == doctest::Approx(ref).epsilon(1e-15));
  CHECK(std::sqrt(omega1_squared(p, 0.0, 0.0)) == doctest::Approx(0.98683).epsilon(1e-4));
  const double n = 0.37;
  CHECK(omega1_squared(p, -2.0 * p.chi * n, n) == doctest::Approx(ref).epsilon(1e-14));
}

TEST_CASE("p_plus anchors") {
  CHECK(p_plus(0.0, 1.3) == 0.0);
  CHECK(p_plus(1.7, 1.7 * 1.7) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(p_plus(100.0, 1.0) == doctest::Approx(0.5 * 1e4 / (1e4 + 1.0)).epsilon(1e-15));
  CHECK(p_plus(100.0, 1.0) == doctest::Approx(0.49995).epsilon(1e-7));
  CHECK(p_plus(1e200, 1.0) == doctest::Approx(0.5));
}

TEST_CASE("p_plus monotonicity") {
  const SystemParams p = default_params();
  const double n = 0.01;
  double prev = -1.0;
  for (double w = 0.0; w < 20.0; w += 0.25) {
    const double v = p_plus(w, omega1_squared(p, 0.0, n));
    CHECK(v > prev);
    prev = v;
  }
  prev = 1.0;
  for (double x = 0.0; x < 20.0; x += 0.5) {
    const double v = p_plus(1.0, omega1_squared(p, x - 2.0 * p.chi * n, n));
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("cavity_intensity anchors") {
  const SystemParams p = default_params();
  const double xi = 0.1 * p.kappa;
  const double r = xi * xi / (p.kappa * p.kappa);
  CHECK(cavity_intensity(p, p.chi, xi, 0.0) == doctest::Approx(r).epsilon(1e-15));
  CHECK(cavity_intensity(p, 0.0, xi, 0.5) == doctest::Approx(r).epsilon(1e-15));
  CHECK(cavity_intensity(p, 0.0, xi, 0.0) ==
        doctest::Approx(xi * xi / (p.chi * p.chi + p.kappa * p.kappa)).epsilon(1e-15));
}

TEST_CASE("self-consistent solution closed forms") {
  const SystemParams p = default_params();
  SUBCASE("zero drive") {
    for (double dr : {-20.0, -1.0, 0.0, 3.0, p.chi}) {
      const double xi = 0.3 * p.kappa;
      const auto s = solve_self_consistent(p, drive_at(p, dr, 0.0, xi, 0.0));
      CHECK(s.p_plus == 0.0);
      CHECK(s.n == doctest::Approx(xi * xi / (std::pow(dr - p.chi, 2) + p.kappa * p.kappa))
                       .epsilon(1e-12));
    }
  }
  SUBCASE("zero probe") {
    const double w = 0.8;
    const auto s = solve_self_consistent(p, drive_at(p, 0.0, 0.0, 0.0, w));
    CHECK(s.n == 0.0);
    CHECK(s.p_plus == doctest::Approx(0.5 * w * w / (w * w + 4.0 * p.gamma1 * p.gamma2)));
  }
}

TEST_CASE("strong resonant drive against brute-force scan") {
  const SystemParams p = default_params();
  const double xi = 0.1 * p.kappa;
  const double w = 10.0 * omega1_resonant(p);
  const auto s = solve_self_consistent(p, drive_at(p, 0.0, 0.0, xi, w));
  const double scale = xi * xi / (p.kappa * p.kappa);
  const auto roots = oracle_roots(p, 0.0, 0.0, xi, w, 10.0 * scale, 1000000);
  REQUIRE(roots.size() == 1);
  CHECK(s.n == doctest::Approx(roots[0]).epsilon(1e-8));
  // The photon-number shift of the qubit line lowers P+ slightly below
  // the n = 0 value 0.495.
  CHECK(s.p_plus == doctest::Approx(0.495).epsilon(0.02));
  CHECK(s.p_plus == doctest::Approx(p_plus(w, omega1_squared(p, 0.0, roots[0]))).epsilon(1e-9));
  CHECK(s.n == doctest::Approx(scale).epsilon(0.01));
}

TEST_CASE("roots satisfy both equations") {
  const SystemParams p = default_params();
  for (double dq : {-30.0, -5.0, 0.0, 2.0}) {
    for (double xi_k : {0.05, 0.5, 2.0}) {
      const double xi = xi_k * p.kappa;
      const DriveConfig d = drive_at(p, 1.0, dq, xi, 3.0);
      const auto s = solve_self_consistent(p, d);
      const double w1sq = omega1_squared(p, dq, s.n);
      const double pp = p_plus(3.0, w1sq);
      CHECK(std::abs(pp - s.p_plus) < 1e-10);
      const double n_back = cavity_intensity(p, 1.0, xi, pp);
      CHECK(std::abs(n_back - s.n) / (xi * xi / (p.kappa * p.kappa)) < 1e-10);
      CHECK(s.residual < 1e-10);
      CHECK(s.omega1 == doctest::Approx(std::sqrt(w1sq)));
    }
  }
}

TEST_CASE("iteration agrees with exhaustive scan on random draws") {
  const SystemParams base = default_params();
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int multi = 0;
  for (int trial = 0; trial < 100; ++trial) {
    SystemParams p = base;
    p.chi *= 0.5 + u(rng);
    p.kappa *= 0.5 + u(rng);
    p.gamma1 *= 0.5 + u(rng);
    p.gamma2 = std::max(p.gamma1 / 2.0, base.gamma2 * (0.5 + u(rng)));
    const double dr = (u(rng) * 4.0 - 2.0) * p.chi;
    const double dq = (u(rng) * 2.0 - 1.0) * p.chi;
    const double xi = p.kappa * std::pow(10.0, -2.0 + 2.5 * u(rng));
    const double w = omega1_resonant(p) * std::pow(10.0, -1.0 + 3.0 * u(rng));
    const auto s = solve_self_consistent(p, drive_at(p, dr, dq, xi, w));
    const auto roots = oracle_roots(p, dr, dq, xi, w, 4.0 * xi * xi / (p.kappa * p.kappa), 200000);
    REQUIRE(!roots.empty());
    if (roots.size() > 1) ++multi;
    double best = 1e300;
    for (double r : roots) best = std::min(best, std::abs(r - s.n) / std::max(r, 1e-300));
    INFO("trial " << trial << " n = " << s.n);
    CHECK(best < 1e-8);
    CHECK(s.branch_count >= 1);
  }
  MESSAGE("draws with several roots: " << multi);
}

TEST_CASE("bistable regime reports every branch") {
  const SystemParams p = default_params();
  // Strong probe on the excited-state side of a weakly driven, detuned qubit.
  bool found = false;
  for (double xi_k = 1.0; xi_k <= 8.0 && !found; xi_k += 0.5) {
    for (double dq = -60.0; dq <= 0.0 && !found; dq += 2.0) {
      const double xi = xi_k * p.kappa;
      const auto oracle = oracle_roots(p, 0.0, dq, xi, 5.0, 4.0 * xi * xi / (p.kappa * p.kappa),
                                       100000);
      // Pairs of roots closer than the scan resolution are not guaranteed.
      if (oracle.size() < 3 || oracle[2] - oracle[1] < 2.0 * 4.0 * xi * xi / (p.kappa * p.kappa) / 1000.0)
        continue;
      found = true;
      INFO("xi/kappa = " << xi_k << " dq = " << dq << " roots " << oracle[0] << " " << oracle[1]
                         << " " << oracle[2]);
      const auto s = solve_self_consistent(p, drive_at(p, 0.0, dq, xi, 5.0));
      CHECK(s.branch_count == static_cast<int>(oracle.size()));
      REQUIRE(s.roots.size() == oracle.size());
      for (std::size_t i = 0; i < oracle.size(); ++i)
        CHECK(s.roots[i] == doctest::Approx(oracle[i]).epsilon(1e-8));
    }
  }
  CHECK(found);
}

TEST_CASE("partial and averaged amplitudes") {
  const SystemParams p = default_params();
  const double xi = p.kappa;
  CHECK(partial_amplitude(p, p.chi, xi, -1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(partial_amplitude(p, -p.chi, xi, +1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(partial_amplitude(p, 0.0, xi, +1) == doctest::Approx(0.2370).epsilon(2e-4));
  SystemParams q = p;
  q.chi = 0.0;
  for (double dr : {-3.0, 0.0, 5.0}) CHECK(partial_amplitude(q, dr, xi, 1) == partial_amplitude(q, dr, xi, -1));

  CHECK(probabilistic_average(0.0, 0.7, 0.2) == 0.7);
  CHECK(probabilistic_average(0.5, 0.7, 0.2) == doctest::Approx(0.45));
  CHECK(probabilistic_average(0.25, 1.0, 0.5) == doctest::Approx(0.875));

  CHECK(shifted_partial_amplitude(p, -p.chi / 2.0, xi, 0.25) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(merged_amplitude(p, 0.0, xi) == doctest::Approx(1.0));
  CHECK(merged_amplitude(p, p.kappa, xi) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(merged_amplitude(p, p.chi, xi) ==
        doctest::Approx(xi / std::sqrt(p.chi * p.chi + p.kappa * p.kappa)));
}

TEST_CASE("line-shape identities hold on a dense grid") {
  const SystemParams p = default_params();
  const double xi = 0.05 * p.kappa;
  for (int i = 0; i <= 400; ++i) {
    const double dr = -2.0 * p.chi + 4.0 * p.chi * i / 400.0;
    CHECK(shifted_partial_amplitude(p, dr, xi, 0.5) == merged_amplitude(p, dr, xi));
    CHECK(shifted_partial_amplitude(p, dr, xi, 0.0) == partial_amplitude(p, dr, xi, +1));
    const double am = partial_amplitude(p, dr, xi, -1), ap = partial_amplitude(p, dr, xi, +1);
    for (double pp : {0.0, 0.1, 0.3, 0.5}) {
      const double a = probabilistic_average(pp, am, ap);
      CHECK(a >= std::min(am, ap));
      CHECK(a <= std::max(am, ap));
    }
  }
}

TEST_CASE("two fixed Lorentzians peak at the dispersive positions") {
  const SystemParams p = default_params();
  const double xi = 0.05 * p.kappa;
  for (double pp : {0.1, 0.25, 0.45}) {
    auto a = [&](double dr) {
      return probabilistic_average(pp, partial_amplitude(p, dr, xi, -1),
                                   partial_amplitude(p, dr, xi, +1));
    };
    const double bound = std::max(a(p.chi), a(-p.chi));
    for (int i = 0; i <= 400; ++i) {
      const double dr = -2.0 * p.chi + 4.0 * p.chi * i / 400.0;
      CHECK(a(dr) <= bound * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("shifted average under mirroring and population exchange") {
  const SystemParams p = default_params();
  const double xi = 0.05 * p.kappa;
  for (double pp : {0.0, 0.1, 0.3, 0.5}) {
    for (int i = 0; i <= 100; ++i) {
      const double dr = -2.0 * p.chi + 4.0 * p.chi * i / 100.0;
      const double s_minus = shifted_partial_amplitude(p, dr, xi, 1.0 - pp);
      const double s_plus = shifted_partial_amplitude(p, dr, xi, pp);
      // Mirrored cut: the lines trade places and keep their weights, so the
      // heights at the two positions swap.
      CHECK(shifted_average_amplitude(p, -dr, xi, pp) ==
            doctest::Approx((1.0 - pp) * s_plus + pp * s_minus).epsilon(1e-14));
      CHECK(shifted_average_amplitude(p, dr, xi, 1.0 - pp) ==
            doctest::Approx(shifted_average_amplitude(p, dr, xi, pp)).epsilon(1e-14));
    }
  }
}
