#pragma once

#include <array>
#include <complex>
#include <vector>

#include "mavg/model.hpp"
#include "mavg/ode.hpp"
#include "mavg/semiclassical.hpp"

// Semi-quantum (Maxwell-Bloch) equations of motion: qubit Bloch vector,
// coherent field, photon number and the second-order qubit-field correlators.
namespace mavg::bloch {

using cplx = std::complex<double>;
inline constexpr std::size_t kDim = 12;
using Packed = ode::Vec<kDim>;

struct SystemState {
  double sx = 0.0, sy = 0.0, sz = 0.0;
  cplx a{};
  double n_ph = 0.0;
  cplx asx{}, asy{}, asz{};

  // Canonical packing: sx, sy, sz, Re a, Im a, n_ph, asx, asy, asz (re, im).
  Packed pack() const;
  static SystemState unpack(const Packed& v);

  double bloch_norm_sq() const { return sx * sx + sy * sy + sz * sz; }
  bool finite() const;
};

// Undriven, empty-cavity equilibrium: sz = -z0, everything else zero.
SystemState ground_vacuum(const SystemParams& params);

// omega_q is the observed (dispersively Lamb-shifted) qubit line, so the
// bare qubit-drive detuning entering the equations of motion is
// d_omega_q - chi. The undriven qubit then precesses at d_omega_q + 2 chi n,
// the same detuning that enters omega1_squared().
inline double bare_qubit_detuning(const SystemParams& params, const Detunings& det) {
  return det.d_omega_q - params.chi;
}

SystemState rhs(const SystemParams& params, const DriveConfig& drive, const SystemState& s);

// Max-norm over the 12 packed real components.
double residual_norm(const SystemParams& params, const DriveConfig& drive,
                     const SystemState& s);

struct Sample {
  double t = 0.0;
  SystemState state;
};

// Adaptive DOPRI5 trajectory, one sample per accepted step (plus the initial
// state). Throws ode::StepSizeUnderflow.
std::vector<Sample> evolve(const SystemParams& params, const DriveConfig& drive,
                           const SystemState& state0, double t_final, double dt_max,
                           const ode::StepControl& ctl = {});

enum class Strategy { TimeEvolution, NewtonRoot };

struct SteadyStateOptions {
  // Time evolution settles once the rhs max-norm stays below this many units
  // of max(kappa, gamma1, |chi|, omega_rabi).
  double time_tolerance = 1e-11;
  double time_window = 1.0;  // us the residual must stay below threshold
  double time_cap_factor = 200.0;  // cap = factor * max(T1, T2, 1/kappa)
  double newton_tolerance = 1e-11;  // units of max(kappa, gamma1)
  int newton_max_iterations = 60;
  ode::StepControl step{.rtol = 1e-12, .atol = 1e-15};

  bool operator==(const SteadyStateOptions&) const = default;
};

struct SteadyStateResult {
  SystemState state;
  Strategy method = Strategy::TimeEvolution;
  double iterations_or_time = 0.0;
  double residual_norm = 0.0;
};

// Factorised guess built from the semiclassical root.
SystemState semiclassical_seed(const SystemParams& params, const DriveConfig& drive);

// Integrate from the ground-state vacuum until the trailing-window residual
// criterion is met. Throws NoConvergence at the time cap.
SteadyStateResult steady_state_time(const SystemParams& params, const DriveConfig& drive,
                                    const SteadyStateOptions& opts = {});

// Damped Newton on rhs = 0 with a finite-difference Jacobian.
SteadyStateResult steady_state_newton(const SystemParams& params, const DriveConfig& drive,
                                      const SystemState& seed,
                                      const SteadyStateOptions& opts = {});

// TimeEvolution integrates from the ground vacuum. NewtonRoot seeds from the
// semiclassical solution and falls back to a time-evolution seed.
SteadyStateResult steady_state(const SystemParams& params, const DriveConfig& drive,
                               Strategy strategy, const SteadyStateOptions& opts = {});

}  // namespace mavg::bloch
