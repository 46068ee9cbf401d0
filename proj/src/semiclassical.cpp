#include "mavg/semiclassical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mavg {

double omega1_squared(const SystemParams& params, double d_omega_q, double n) {
  const double shift = d_omega_q + 2.0 * params.chi * n;
  return 4.0 * params.gamma1 * params.gamma2 +
         4.0 * (params.gamma1 / params.gamma2) * shift * shift;
}

double p_plus(double omega_rabi, double omega1_sq) {
  const double w2 = omega_rabi * omega_rabi;
  if (!std::isfinite(w2)) return 0.5;
  return 0.5 * w2 / (w2 + omega1_sq);
}

double cavity_intensity(const SystemParams& params, double d_omega_r, double xi,
                        double p) {
  const double centre = params.chi * (2.0 * p - 1.0) + d_omega_r;
  return xi * xi / (centre * centre + params.kappa * params.kappa);
}

double fixed_point_map(const SystemParams& params, const DriveConfig& drive, double n) {
  const Detunings det = detunings(params, drive);
  const double p = p_plus(drive.omega_rabi, omega1_squared(params, det.d_omega_q, n));
  return cavity_intensity(params, det.d_omega_r, drive.xi, p);
}

namespace {

double gap(const SystemParams& params, const DriveConfig& drive, double n) {
  return n - fixed_point_map(params, drive, n);
}

double bisect(const SystemParams& params, const DriveConfig& drive, double lo, double hi,
              double g_lo) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double g_mid = gap(params, drive, mid);
    if (g_mid == 0.0) return mid;
    if ((g_mid < 0.0) == (g_lo < 0.0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

SemiclassicalSolution finish(const SystemParams& params, const DriveConfig& drive, double n,
                             std::vector<double> roots) {
  const Detunings det = detunings(params, drive);
  SemiclassicalSolution s;
  s.n = n;
  const double w1sq = omega1_squared(params, det.d_omega_q, n);
  s.omega1 = std::sqrt(w1sq);
  s.p_plus = p_plus(drive.omega_rabi, w1sq);
  const double scale = std::max(drive.xi * drive.xi / (params.kappa * params.kappa),
                                std::numeric_limits<double>::min());
  const double r_n = std::abs(n - cavity_intensity(params, det.d_omega_r, drive.xi, s.p_plus)) / scale;
  const double r_p = std::abs(s.p_plus - p_plus(drive.omega_rabi, w1sq));
  s.residual = std::max(r_n, r_p);
  s.branch_count = static_cast<int>(roots.size());
  s.roots = std::move(roots);
  return s;
}

}  // namespace

std::vector<double> scan_roots(const SystemParams& params, const DriveConfig& drive,
                               int points) {
  std::vector<double> roots;
  const double peak = drive.xi * drive.xi / (params.kappa * params.kappa);
  if (peak == 0.0) {
    roots.push_back(0.0);
    return roots;
  }
  const double upper = 4.0 * peak;
  // n = F(n) forces n <= peak. The log grid resolves roots far below it, the
  // uniform grid resolves neighbouring roots of the upper branches.
  const double lower = upper * 1e-14;
  const int m = std::max(points, 3);
  std::vector<double> grid;
  grid.reserve(2 * m);
  grid.push_back(0.0);
  const double ratio = std::log(upper / lower) / (m - 2);
  for (int i = 1; i < m - 1; ++i) grid.push_back(lower * std::exp(ratio * (i - 1)));
  for (int i = 1; i <= m; ++i) grid.push_back(upper * i / m);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  double g_prev = gap(params, drive, grid[0]);
  if (g_prev == 0.0) roots.push_back(grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double g = gap(params, drive, grid[i]);
    if (g == 0.0) {
      roots.push_back(grid[i]);
    } else if (g_prev != 0.0 && (g < 0.0) != (g_prev < 0.0)) {
      roots.push_back(bisect(params, drive, grid[i - 1], grid[i], g_prev));
    }
    g_prev = g;
  }
  return roots;
}

SemiclassicalSolution solve_self_consistent(const SystemParams& params,
                                            const DriveConfig& drive,
                                            const FixedPointOptions& opts) {
  std::vector<double> roots = scan_roots(params, drive, opts.scan_points);

  double n = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opts.max_iterations; ++it) {
    const double f = fixed_point_map(params, drive, n);
    const double err = std::abs(n - f);
    best = std::min(best, err / std::max(1.0, n));
    if (err < opts.tolerance * std::max(1.0, n)) {
      // The iteration picks the branch; the bracketed root on it is sharper.
      for (double r : roots) {
        if (std::abs(r - n) <= 1e-6 * std::max(r, n)) {
          n = r;
          break;
        }
      }
      return finish(params, drive, n, std::move(roots));
    }
    n = (1.0 - opts.damping) * n + opts.damping * f;
  }

  if (roots.empty()) {
    throw NoConvergence("semiclassical fixed point: iteration stalled and scan found no root",
                        best);
  }
  // Lowest branch is the one reached by an adiabatic ramp from n = 0.
  const double lowest = roots.front();
  return finish(params, drive, lowest, std::move(roots));
}

double partial_amplitude(const SystemParams& params, double d_omega_r, double xi,
                         int shift_sign) {
  const double centre = (shift_sign >= 0 ? 1.0 : -1.0) * params.chi + d_omega_r;
  return xi / std::sqrt(centre * centre + params.kappa * params.kappa);
}

double probabilistic_average(double p, double a_minus, double a_plus) {
  return (1.0 - p) * a_minus + p * a_plus;
}

double shifted_partial_amplitude(const SystemParams& params, double d_omega_r, double xi,
                                 double p) {
  const double centre = params.chi * (1.0 - 2.0 * p) + d_omega_r;
  return xi / std::sqrt(centre * centre + params.kappa * params.kappa);
}

double merged_amplitude(const SystemParams& params, double d_omega_r, double xi) {
  return xi / std::sqrt(d_omega_r * d_omega_r + params.kappa * params.kappa);
}

double shifted_average_amplitude(const SystemParams& params, double d_omega_r, double xi,
                                 double p) {
  const double a_minus = shifted_partial_amplitude(params, d_omega_r, xi, 1.0 - p);
  const double a_plus = shifted_partial_amplitude(params, d_omega_r, xi, p);
  return probabilistic_average(p, a_minus, a_plus);
}

}  // namespace mavg
