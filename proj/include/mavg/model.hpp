#pragma once

#include <numbers>
#include <stdexcept>
#include <string>

// Physical parameters of a resonator dispersively coupled to a driven
// two-level system. Every frequency-like quantity is an angular frequency in
// rad/us and every rate is in 1/us.
namespace mavg {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Ordinary frequency (MHz, i.e. cycles per us) to angular rad/us.
constexpr double from_mhz(double f_mhz) { return kTwoPi * f_mhz; }
constexpr double from_ghz(double f_ghz) { return kTwoPi * 1.0e3 * f_ghz; }
constexpr double to_mhz(double w) { return w / kTwoPi; }

class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SystemParams {
  double omega_r = 0.0;  // resonator mode
  double omega_q = 0.0;  // observed qubit transition, includes the chi Lamb shift
  double chi = 0.0;      // dispersive shift, any sign
  double kappa = 0.0;    // resonator relaxation
  double gamma1 = 0.0;   // 1/T1
  double gamma2 = 0.0;   // 1/T2, includes gamma1/2
  double z0 = 1.0;       // equilibrium |<sigma_z>| of the undriven qubit
  double n_th = 0.0;     // thermal photon number

  double t1() const { return 1.0 / gamma1; }
  double t2() const { return 1.0 / gamma2; }
  double gamma_phi() const { return gamma2 - 0.5 * gamma1; }

  bool operator==(const SystemParams&) const = default;
};

struct DriveConfig {
  double xi = 0.0;          // probe amplitude
  double omega_p = 0.0;     // probe frequency
  double omega_d = 0.0;     // qubit drive frequency
  double omega_rabi = 0.0;  // qubit drive amplitude

  bool operator==(const DriveConfig&) const = default;
};

struct Detunings {
  double d_omega_r = 0.0;  // omega_r - omega_p
  double d_omega_q = 0.0;  // omega_q - omega_d
};

// Parameter set of the reference transmon sample (7.643 GHz resonator,
// 6.440 GHz qubit, chi/2pi = 4.1 MHz, T1 = 1.55 us, T2 = 2.65 us,
// kappa/2pi = 1 MHz) at zero temperature.
SystemParams default_params();

Detunings detunings(const SystemParams& params, const DriveConfig& drive);

// Inverse of detunings(): carrier frequencies that realise the given offsets.
double probe_frequency_for(const SystemParams& params, double d_omega_r);
double drive_frequency_for(const SystemParams& params, double d_omega_q);

// Resonant threshold 2/sqrt(T1 T2).
double omega1_resonant(const SystemParams& params);

// Throw InvalidParameter naming the first violated constraint.
void validate(const SystemParams& params);
void validate(const DriveConfig& drive);

}  // namespace mavg
