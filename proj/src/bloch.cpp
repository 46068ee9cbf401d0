#include "mavg/bloch.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mavg::bloch {

namespace {

constexpr cplx I{0.0, 1.0};

double rate_scale(const SystemParams& p) { return std::max(p.kappa, p.gamma1); }

// Fastest rate of the flow; the integrator's noise floor on the rhs grows
// with it.
double flow_rate_scale(const SystemParams& p, const DriveConfig& d) {
  return std::max({p.kappa, p.gamma1, std::abs(p.chi), d.omega_rabi});
}

}  // namespace

Packed SystemState::pack() const {
  return {sx, sy, sz, a.real(), a.imag(), n_ph,
          asx.real(), asx.imag(), asy.real(), asy.imag(), asz.real(), asz.imag()};
}

SystemState SystemState::unpack(const Packed& v) {
  SystemState s;
  s.sx = v[0];
  s.sy = v[1];
  s.sz = v[2];
  s.a = {v[3], v[4]};
  s.n_ph = v[5];
  s.asx = {v[6], v[7]};
  s.asy = {v[8], v[9]};
  s.asz = {v[10], v[11]};
  return s;
}

bool SystemState::finite() const {
  const Packed v = pack();
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

SystemState ground_vacuum(const SystemParams& params) {
  SystemState s;
  s.sz = -params.z0;
  return s;
}

SystemState rhs(const SystemParams& p, const DriveConfig& drive, const SystemState& s) {
  const Detunings det = detunings(p, drive);
  const double dr = det.d_omega_r;
  const double dqd = bare_qubit_detuning(p, det);
  const double xi = drive.xi;
  const double w = drive.omega_rabi;
  const double chi = p.chi;

  // Qubit precession frequency seen by the first moments and by the
  // field-qubit correlators.
  const double precession = 2.0 * chi * s.n_ph + dqd + chi;
  const double corr_precession = dqd + 2.0 * chi * (s.n_ph + 1.0);
  const double g1 = p.gamma1;
  const double g2z = p.gamma2 / p.z0;

  SystemState d;
  d.sz = w * s.sy - g1 * (1.0 + s.sz / p.z0);
  d.sx = -precession * s.sy - g2z * s.sx;
  d.sy = precession * s.sx - g2z * s.sy - w * s.sz;
  d.a = -I * (dr * s.a + chi * s.asz + xi) - p.kappa * s.a;
  d.n_ph = -2.0 * xi * s.a.imag() + 2.0 * p.kappa * (p.n_th - s.n_ph);
  d.asz = -I * (dr * s.asz + chi * s.a + xi * s.sz) + w * s.asy - g1 * s.a -
          (g1 / p.z0 + p.kappa) * s.asz;
  d.asx = -I * dr * s.asx - (g2z + p.kappa) * s.asx - corr_precession * s.asy -
          I * xi * s.sx;
  d.asy = -I * dr * s.asy - (g2z + p.kappa) * s.asy - I * xi * s.sy - w * s.asz +
          corr_precession * s.asx;
  return d;
}

double residual_norm(const SystemParams& params, const DriveConfig& drive,
                     const SystemState& s) {
  const Packed d = rhs(params, drive, s).pack();
  double m = 0.0;
  for (double x : d) m = std::max(m, std::abs(x));
  return m;
}

namespace {

auto packed_rhs(const SystemParams& params, const DriveConfig& drive) {
  return [&params, &drive](double, const Packed& y, Packed& dy) {
    dy = rhs(params, drive, SystemState::unpack(y)).pack();
  };
}

}  // namespace

std::vector<Sample> evolve(const SystemParams& params, const DriveConfig& drive,
                           const SystemState& state0, double t_final, double dt_max,
                           const ode::StepControl& ctl) {
  if (!(t_final > 0.0)) throw InvalidParameter("evolve: t_final must be positive");
  ode::StepControl c = ctl;
  c.dt_max = std::min(c.dt_max, dt_max);
  std::vector<Sample> out;
  Packed y = state0.pack();
  ode::integrate<kDim>(packed_rhs(params, drive), 0.0, y, t_final, c,
                       [&out](double t, const Packed& yy, const Packed&) {
                         out.push_back({t, SystemState::unpack(yy)});
                         return true;
                       });
  return out;
}

SystemState semiclassical_seed(const SystemParams& params, const DriveConfig& drive) {
  const SemiclassicalSolution sc = solve_self_consistent(params, drive);
  const Detunings det = detunings(params, drive);
  SystemState s;
  s.sz = -params.z0 * (1.0 - 2.0 * sc.p_plus);
  // Bloch steady state of the qubit at the photon-shifted precession.
  const double delta = 2.0 * params.chi * sc.n + bare_qubit_detuning(params, det) + params.chi;
  const double g2 = params.gamma2 / params.z0;
  s.sy = -drive.omega_rabi * s.sz * g2 / (g2 * g2 + delta * delta);
  s.sx = -delta * s.sy / g2;
  s.a = -I * drive.xi / (params.kappa + I * (det.d_omega_r + params.chi * s.sz));
  s.n_ph = std::norm(s.a) + params.n_th;
  s.asx = s.a * s.sx;
  s.asy = s.a * s.sy;
  s.asz = s.a * s.sz;
  return s;
}

SteadyStateResult steady_state_time(const SystemParams& params, const DriveConfig& drive,
                                    const SteadyStateOptions& opts) {
  const double threshold = opts.time_tolerance * flow_rate_scale(params, drive);
  const double t_cap = opts.time_cap_factor *
                       std::max({params.t1(), params.t2(), 1.0 / params.kappa});
  Packed y = ground_vacuum(params).pack();
  double last_bad = 0.0;
  double best = std::numeric_limits<double>::infinity();
  bool converged = false;
  const auto stats = ode::integrate<kDim>(
      packed_rhs(params, drive), 0.0, y, t_cap, opts.step,
      [&](double t, const Packed&, const Packed& dy) {
        double m = 0.0;
        for (double x : dy) m = std::max(m, std::abs(x));
        best = std::min(best, m);
        if (m >= threshold) {
          last_bad = t;
        } else if (t - last_bad >= opts.time_window) {
          converged = true;
          return false;
        }
        return true;
      });
  if (!converged) {
    throw NoConvergence("steady state: time evolution reached t = " +
                            std::to_string(stats.t_end) + " us without settling",
                        best);
  }
  SteadyStateResult r;
  r.state = SystemState::unpack(y);
  r.method = Strategy::TimeEvolution;
  r.iterations_or_time = stats.t_end;
  r.residual_norm = residual_norm(params, drive, r.state);
  return r;
}

SteadyStateResult steady_state_newton(const SystemParams& params, const DriveConfig& drive,
                                      const SystemState& seed,
                                      const SteadyStateOptions& opts) {
  using Vector = Eigen::Matrix<double, kDim, 1>;
  using Matrix = Eigen::Matrix<double, kDim, kDim>;

  auto eval = [&](const Vector& x) {
    Packed p;
    for (std::size_t i = 0; i < kDim; ++i) p[i] = x[i];
    const Packed d = rhs(params, drive, SystemState::unpack(p)).pack();
    Vector f;
    for (std::size_t i = 0; i < kDim; ++i) f[i] = d[i];
    return f;
  };

  const double tol = opts.newton_tolerance * rate_scale(params);
  const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
  const Packed s0 = seed.pack();
  Vector x;
  for (std::size_t i = 0; i < kDim; ++i) x[i] = s0[i];
  Vector f = eval(x);
  double norm = f.lpNorm<Eigen::Infinity>();
  int it = 0;
  for (; it < opts.newton_max_iterations && !(norm < tol); ++it) {
    Matrix jac;
    for (std::size_t j = 0; j < kDim; ++j) {
      const double h = sqrt_eps * std::max(1.0, std::abs(x[j]));
      Vector xp = x;
      xp[j] += h;
      jac.col(j) = (eval(xp) - f) / (xp[j] - x[j]);
    }
    const Vector dx = jac.partialPivLu().solve(-f);
    if (!dx.allFinite()) break;

    double lambda = 1.0;
    Vector x_try = x + dx;
    Vector f_try = eval(x_try);
    double n_try = f_try.lpNorm<Eigen::Infinity>();
    while (!(n_try < (1.0 - 1e-4 * lambda) * norm) && lambda > 1e-6) {
      lambda *= 0.5;
      x_try = x + lambda * dx;
      f_try = eval(x_try);
      n_try = f_try.lpNorm<Eigen::Infinity>();
    }
    if (!(n_try < norm)) break;  // stalled at the finite-difference noise floor
    x = x_try;
    f = f_try;
    norm = n_try;
  }

  if (!(norm < tol)) {
    throw NoConvergence("steady state: Newton stalled at residual " + std::to_string(norm),
                        norm);
  }
  Packed p;
  for (std::size_t i = 0; i < kDim; ++i) p[i] = x[i];
  SteadyStateResult r;
  r.state = SystemState::unpack(p);
  r.method = Strategy::NewtonRoot;
  r.iterations_or_time = it;
  r.residual_norm = norm;
  return r;
}

SteadyStateResult steady_state(const SystemParams& params, const DriveConfig& drive,
                               Strategy strategy, const SteadyStateOptions& opts) {
  if (strategy == Strategy::TimeEvolution) return steady_state_time(params, drive, opts);
  try {
    return steady_state_newton(params, drive, semiclassical_seed(params, drive), opts);
  } catch (const NoConvergence&) {
    const SteadyStateResult seed = steady_state_time(params, drive, opts);
    return steady_state_newton(params, drive, seed.state, opts);
  }
}

}  // namespace mavg::bloch
