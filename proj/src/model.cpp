#include "mavg/model.hpp"

#include <cmath>

namespace mavg {

SystemParams default_params() {
  SystemParams p;
  p.omega_r = from_ghz(7.643);
  p.omega_q = from_ghz(6.440);
  p.chi = from_mhz(4.1);
  p.kappa = from_mhz(1.0);
  p.gamma1 = 1.0 / 1.55;
  p.gamma2 = 1.0 / 2.65;
  p.z0 = 1.0;
  p.n_th = 0.0;
  return p;
}

Detunings detunings(const SystemParams& params, const DriveConfig& drive) {
  return {params.omega_r - drive.omega_p, params.omega_q - drive.omega_d};
}

double probe_frequency_for(const SystemParams& params, double d_omega_r) {
  return params.omega_r - d_omega_r;
}

double drive_frequency_for(const SystemParams& params, double d_omega_q) {
  return params.omega_q - d_omega_q;
}

double omega1_resonant(const SystemParams& params) {
  return 2.0 * std::sqrt(params.gamma1 * params.gamma2);
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidParameter(what);
}

}  // namespace

void validate(const SystemParams& p) {
  require(std::isfinite(p.omega_r) && p.omega_r > 0.0, "omega_r must be positive");
  require(std::isfinite(p.omega_q) && p.omega_q > 0.0, "omega_q must be positive");
  require(std::isfinite(p.chi), "chi must be finite");
  require(std::isfinite(p.kappa) && p.kappa > 0.0, "kappa must be positive");
  require(std::isfinite(p.gamma1) && p.gamma1 > 0.0, "gamma1 must be positive");
  require(std::isfinite(p.gamma2) && p.gamma2 >= 0.5 * p.gamma1,
          "gamma2 must be at least gamma1/2 (pure dephasing rate is negative)");
  require(p.z0 > 0.0 && p.z0 <= 1.0, "z0 must lie in (0, 1]");
  require(std::isfinite(p.n_th) && p.n_th >= 0.0, "n_th must be non-negative");
}

void validate(const DriveConfig& d) {
  require(std::isfinite(d.xi) && d.xi >= 0.0, "probe amplitude xi must be non-negative");
  require(std::isfinite(d.omega_rabi) && d.omega_rabi >= 0.0,
          "drive amplitude must be non-negative");
  require(std::isfinite(d.omega_p), "probe frequency must be finite");
  require(std::isfinite(d.omega_d), "drive frequency must be finite");
}

}  // namespace mavg
