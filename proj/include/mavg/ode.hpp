#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

// Dormand-Prince 5(4) embedded pair with FSAL and PI step-size control.
namespace mavg::ode {

class StepSizeUnderflow : public std::runtime_error {
 public:
  StepSizeUnderflow(const std::string& what, double t)
      : std::runtime_error(what), t_(t) {}
  double time() const { return t_; }

 private:
  double t_;
};

struct StepControl {
  double rtol = 1e-9;
  double atol = 1e-12;
  double dt_max = 1.0;
  double dt_initial = 0.0;  // 0 picks a starting step from the derivative scale
  double dt_min = 1e-13;
  long max_steps = 50'000'000;

  bool operator==(const StepControl&) const = default;
};

struct IntegrationStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evaluations = 0;
  double t_end = 0.0;
};

template <std::size_t N>
using Vec = std::array<double, N>;

namespace detail {

// Butcher tableau of DOPRI5.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
// Difference between the 5th-order and embedded 4th-order weights.
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace detail

// Integrate y' = f(t, y) from t0 to t1 in place. After every accepted step
// observer(t, y, dydt) is called; returning false stops the integration early.
template <std::size_t N, class Rhs, class Observer>
IntegrationStats integrate(Rhs&& f, double t0, Vec<N>& y, double t1, const StepControl& ctl,
                           Observer&& observer) {
  using namespace detail;
  IntegrationStats stats;
  Vec<N> k1, k2, k3, k4, k5, k6, k7, ytmp, ynew;

  auto stage = [&](double t, Vec<N>& out) {
    f(t, ytmp, out);
    ++stats.rhs_evaluations;
  };

  double t = t0;
  f(t, y, k1);
  ++stats.rhs_evaluations;
  if (!observer(t, static_cast<const Vec<N>&>(y), static_cast<const Vec<N>&>(k1))) {
    stats.t_end = t;
    return stats;
  }

  double h = ctl.dt_initial;
  if (h <= 0.0) {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = ctl.atol + ctl.rtol * std::abs(y[i]);
      d0 = std::max(d0, std::abs(y[i]) / sc);
      d1 = std::max(d1, std::abs(k1[i]) / sc);
    }
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  }
  h = std::min({h, ctl.dt_max, t1 - t0});

  double err_prev = 1e-4;
  constexpr double safety = 0.9, beta = 0.04, alpha = 0.2 - beta * 0.75;

  while (t < t1) {
    if (stats.accepted + stats.rejected >= ctl.max_steps) {
      throw StepSizeUnderflow("ode: step budget exhausted", t);
    }
    if (h < ctl.dt_min) {
      throw StepSizeUnderflow("ode: step size underflow", t);
    }
    bool last = false;
    if (t + h >= t1) {
      h = t1 - t;
      last = true;
    }

    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    stage(t + c2 * h, k2);
    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    stage(t + c3 * h, k3);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    stage(t + c4 * h, k4);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    stage(t + c5 * h, k5);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] =
          y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    stage(t + h, k6);
    for (std::size_t i = 0; i < N; ++i)
      ynew[i] =
          y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    ytmp = ynew;
    stage(t + h, k7);

    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                            e7 * k7[i]);
      const double sc = ctl.atol + ctl.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err = std::max(err, std::abs(e) / sc);
    }
    if (!std::isfinite(err)) {
      h *= 0.1;
      ++stats.rejected;
      continue;
    }

    if (err <= 1.0) {
      t = last ? t1 : t + h;
      y = ynew;
      k1 = k7;
      ++stats.accepted;
      const double fac = err == 0.0 ? 5.0
                                    : std::clamp(safety * std::pow(err, -alpha) *
                                                     std::pow(err_prev, beta),
                                                 0.2, 5.0);
      err_prev = std::max(err, 1e-4);
      if (!observer(t, static_cast<const Vec<N>&>(y), static_cast<const Vec<N>&>(k1))) break;
      h = std::min(h * fac, ctl.dt_max);
    } else {
      ++stats.rejected;
      h *= std::max(0.2, safety * std::pow(err, -0.2));
    }
  }
  stats.t_end = t;
  return stats;
}

}  // namespace mavg::ode
