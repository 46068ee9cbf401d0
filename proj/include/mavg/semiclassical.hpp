#pragma once

#include <stdexcept>
#include <vector>

#include "mavg/model.hpp"

// Factorised (first-moment) steady state of the probed and driven
// qubit-resonator system, plus the closed-form transmission models built on
// the qubit occupation probabilities.
namespace mavg {

class NoConvergence : public std::runtime_error {
 public:
  NoConvergence(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

struct SemiclassicalSolution {
  double n = 0.0;         // |<a>|^2
  double p_plus = 0.0;    // excited-level occupation
  double omega1 = 0.0;    // characteristic drive amplitude at this n
  double residual = 0.0;  // max of the per-equation normalised residuals
  int branch_count = 0;   // distinct roots of n = F(n)
  std::vector<double> roots;  // all roots found by the scan, ascending
};

struct FixedPointOptions {
  double damping = 0.5;
  int max_iterations = 10000;
  double tolerance = 1e-12;  // on |n - F(n)| / max(1, n)
  int scan_points = 1000;
};

// 4/(T1 T2) + 4 (T2/T1) (d_omega_q + 2 chi n)^2
double omega1_squared(const SystemParams& params, double d_omega_q, double n);

// (1/2) W^2 / (W^2 + W1^2)
double p_plus(double omega_rabi, double omega1_sq);

// xi^2 / ([chi (2 P+ - 1) + d_omega_r]^2 + kappa^2)
double cavity_intensity(const SystemParams& params, double d_omega_r, double xi,
                        double p_plus);

// Right-hand side F(n) of the scalar self-consistency condition n = F(n).
double fixed_point_map(const SystemParams& params, const DriveConfig& drive, double n);

// Damped iteration from n = 0, with a bracketed scan of n - F(n) over
// [0, 4 xi^2/kappa^2] that counts every branch and serves as the fallback
// when the iteration stalls (limit cycles in the bistable regime).
SemiclassicalSolution solve_self_consistent(const SystemParams& params,
                                            const DriveConfig& drive,
                                            const FixedPointOptions& opts = {});

// All sign-change roots of n - F(n) on a log-spaced plus a uniform grid of
// `points` each over [0, 4 xi^2/kappa^2], refined by bisection. Roots closer
// than the grid spacing can be missed.
std::vector<double> scan_roots(const SystemParams& params, const DriveConfig& drive,
                               int points = 1000);

// Single-state Lorentzian amplitude xi / sqrt((shift_sign chi + d_omega_r)^2 + kappa^2).
// shift_sign = -1 is the ground-state line (centred at d_omega_r = +chi).
double partial_amplitude(const SystemParams& params, double d_omega_r, double xi,
                         int shift_sign);

// P- A- + P+ A+ with P- = 1 - P+.
double probabilistic_average(double p_plus, double a_minus, double a_plus);

// Lorentzian centred at d_omega_r = -chi (1 - 2p).
double shifted_partial_amplitude(const SystemParams& params, double d_omega_r, double xi,
                                 double p);

// Equal-population line xi / sqrt(d_omega_r^2 + kappa^2).
double merged_amplitude(const SystemParams& params, double d_omega_r, double xi);

// Probability-shifted two-line model: P- A-(P-) + P+ A+(P+).
double shifted_average_amplitude(const SystemParams& params, double d_omega_r, double xi,
                                 double p_plus);

}  // namespace mavg
