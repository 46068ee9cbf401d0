#include "mavg/spectroscopy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace mavg {

const char* to_string(Model m) {
  switch (m) {
    case Model::Analytical: return "analytical";
    case Model::Semiclassical: return "semiclassical";
    case Model::SemiQuantum: return "semiquantum";
  }
  return "?";
}

const char* to_string(AxisKind k) {
  return k == AxisKind::DriveAmplitude ? "drive_amplitude" : "drive_frequency";
}

const char* to_string(Classification c) {
  switch (c) {
    case Classification::TwoPeaks: return "TwoPeaks";
    case Classification::OnePeak: return "OnePeak";
    case Classification::Indeterminate: return "Indeterminate";
  }
  return "?";
}

namespace {

bool strictly_monotonic(const std::vector<double>& v) {
  if (v.size() < 2) return false;
  const bool up = v[1] > v[0];
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!std::isfinite(v[i]) || (up ? !(v[i] > v[i - 1]) : !(v[i] < v[i - 1]))) return false;
  }
  return std::isfinite(v[0]);
}

}  // namespace

void SweepGrid::validate() const {
  if (!strictly_monotonic(probe_axis))
    throw InvalidParameter("probe axis must be strictly monotonic with >= 2 points");
  if (!strictly_monotonic(second_axis))
    throw InvalidParameter("second axis must be strictly monotonic with >= 2 points");
  if (axis_kind == AxisKind::DriveAmplitude &&
      std::any_of(second_axis.begin(), second_axis.end(), [](double w) { return w < 0.0; }))
    throw InvalidParameter("drive amplitudes must be non-negative");
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> v(count);
  if (count == 1) {
    v[0] = lo;
    return v;
  }
  for (std::size_t i = 0; i < count; ++i)
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  if (count > 1) v.back() = hi;
  return v;
}

std::vector<double> logspace(double lo, double hi, std::size_t count) {
  std::vector<double> v = linspace(std::log(lo), std::log(hi), count);
  for (double& x : v) x = std::exp(x);
  if (count > 0) {
    v.front() = lo;
    v.back() = hi;
  }
  return v;
}

SweepGrid default_amplitude_grid(const SystemParams& params) {
  const double w1 = omega1_resonant(params);
  const double span = 2.0 * std::abs(params.chi);
  return {linspace(-span, span, 401), logspace(0.01 * w1, 100.0 * w1, 81),
          AxisKind::DriveAmplitude};
}

DriveConfig grid_drive(const SystemParams& params, const DriveConfig& base, AxisKind kind,
                       double probe_detuning, double second_value) {
  DriveConfig d = base;
  d.omega_p = probe_frequency_for(params, probe_detuning);
  if (kind == AxisKind::DriveAmplitude) {
    d.omega_rabi = second_value;
  } else {
    d.omega_d = second_value;
  }
  return d;
}

double normalized_transmission(const SystemParams& params, const DriveConfig& drive,
                               Model model, const bloch::SteadyStateOptions& steady) {
  if (drive.xi == 0.0) return 0.0;
  const double a0 = drive.xi / params.kappa;
  const double d_omega_r = detunings(params, drive).d_omega_r;
  switch (model) {
    case Model::Analytical: {
      const SemiclassicalSolution sc = solve_self_consistent(params, drive);
      return shifted_average_amplitude(params, d_omega_r, drive.xi, sc.p_plus) / a0;
    }
    case Model::Semiclassical: {
      const SemiclassicalSolution sc = solve_self_consistent(params, drive);
      return std::sqrt(sc.n) / a0;
    }
    case Model::SemiQuantum: {
      const auto r = bloch::steady_state(params, drive, bloch::Strategy::NewtonRoot, steady);
      return std::abs(r.state.a) / a0;
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

TransmissionMap sweep(const SystemParams& params, const DriveConfig& base_drive,
                      const SweepGrid& grid, Model model, const SweepOptions& opts) {
  grid.validate();
  TransmissionMap map;
  map.grid = grid;
  map.model = model;
  const std::size_t cols = grid.probe_axis.size();
  const std::size_t total = cols * grid.second_axis.size();
  map.amplitude.assign(total, std::numeric_limits<double>::quiet_NaN());

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> failed{0};
  auto work = [&] {
    for (std::size_t k = next.fetch_add(1); k < total; k = next.fetch_add(1)) {
      const std::size_t r = k / cols, c = k % cols;
      const DriveConfig d =
          grid_drive(params, base_drive, grid.axis_kind, grid.probe_axis[c], grid.second_axis[r]);
      try {
        map.amplitude[k] = normalized_transmission(params, d, model, opts.steady);
      } catch (const NoConvergence&) {
        failed.fetch_add(1);
      } catch (const ode::StepSizeUnderflow&) {
        failed.fetch_add(1);
      }
    }
  };

  unsigned workers = opts.workers ? opts.workers : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1u, static_cast<unsigned>(std::max<std::size_t>(total, 1)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
  }
  map.failed = failed.load();
  return map;
}

PeakReport find_peaks(std::span<const double> probe_axis, std::span<const double> row,
                      double cut_value, const PeakOptions& opts) {
  if (row.size() < 5 || probe_axis.size() != row.size())
    throw InvalidParameter("find_peaks: need at least 5 samples on a matching axis");

  std::vector<double> y(row.begin(), row.end());
  if (opts.smooth) {
    for (std::size_t i = 1; i + 1 < row.size(); ++i) y[i] = (row[i - 1] + row[i] + row[i + 1]) / 3.0;
  }
  double top = 0.0;
  for (double v : y)
    if (std::isfinite(v)) top = std::max(top, v);

  PeakReport rep;
  rep.cut_value = cut_value;
  std::vector<std::size_t> idx;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;  // false on NaN
    if (y[i] < opts.min_relative * top) continue;
    idx.push_back(i);
  }
  // Keep positions ascending regardless of axis direction.
  if (probe_axis.front() > probe_axis.back()) std::reverse(idx.begin(), idx.end());
  for (std::size_t i : idx) {
    rep.peak_positions.push_back(probe_axis[i]);
    rep.peak_heights.push_back(y[i]);
  }

  if (idx.size() == 1) {
    rep.classification = Classification::OnePeak;
  } else if (idx.size() == 2) {
    const std::size_t i = std::min(idx[0], idx[1]);
    const double step = std::abs(probe_axis[i + 1] - probe_axis[i]);
    rep.classification = std::abs(rep.peak_positions[1] - rep.peak_positions[0]) > step
                             ? Classification::TwoPeaks
                             : Classification::Indeterminate;
  } else {
    rep.classification = Classification::Indeterminate;
  }
  return rep;
}

namespace {

Classification classify_cut(const SystemParams& params, const DriveConfig& base,
                            std::span<const double> probe_axis, double omega, Model model,
                            const SweepOptions& opts, const PeakOptions& peaks) {
  std::vector<double> row(probe_axis.size());
  for (std::size_t c = 0; c < probe_axis.size(); ++c) {
    const DriveConfig d = grid_drive(params, base, AxisKind::DriveAmplitude, probe_axis[c], omega);
    try {
      row[c] = normalized_transmission(params, d, model, opts.steady);
    } catch (const NoConvergence&) {
      row[c] = std::numeric_limits<double>::quiet_NaN();
    } catch (const ode::StepSizeUnderflow&) {
      row[c] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return find_peaks(probe_axis, row, omega, peaks).classification;
}

}  // namespace

double extract_omega2(const SystemParams& params, const DriveConfig& base_drive,
                      std::span<const double> probe_axis, std::span<const double> amp_axis,
                      Model model, const SweepOptions& opts, const PeakOptions& peaks) {
  if (amp_axis.size() < 2) throw InvalidParameter("extract_omega2: need >= 2 amplitudes");
  SweepGrid grid{{probe_axis.begin(), probe_axis.end()}, {amp_axis.begin(), amp_axis.end()},
                 AxisKind::DriveAmplitude};
  const TransmissionMap map = sweep(params, base_drive, grid, model, opts);

  std::size_t first_two = map.rows();
  for (std::size_t r = 0; r < map.rows(); ++r) {
    if (find_peaks(probe_axis, map.row(r), amp_axis[r], peaks).classification ==
        Classification::TwoPeaks) {
      first_two = r;
      break;
    }
  }
  if (first_two == map.rows())
    throw RegimeNotBracketed("extract_omega2: no cut on the amplitude axis shows two peaks");

  for (std::size_t r = first_two + 1; r < map.rows(); ++r) {
    if (find_peaks(probe_axis, map.row(r), amp_axis[r], peaks).classification !=
        Classification::OnePeak)
      continue;
    const double mid = 0.5 * (amp_axis[r - 1] + amp_axis[r]);
    return classify_cut(params, base_drive, probe_axis, mid, model, opts, peaks) ==
                   Classification::OnePeak
               ? mid
               : amp_axis[r];
  }
  throw RegimeNotBracketed("extract_omega2: peaks never merge on the amplitude axis");
}

std::vector<Omega2Point> omega2_vs_photon_number(const SystemParams& params,
                                                 const DriveConfig& base_drive,
                                                 std::span<const double> xi_list,
                                                 std::span<const double> probe_axis,
                                                 std::span<const double> amp_axis, Model model,
                                                 const SweepOptions& opts,
                                                 const PeakOptions& peaks) {
  if (xi_list.empty()) throw InvalidParameter("omega2_vs_photon_number: empty xi list");
  std::vector<Omega2Point> out;
  for (double xi : xi_list) {
    DriveConfig ref = base_drive;
    ref.xi = xi;
    ref.omega_rabi = 0.0;
    ref.omega_p = probe_frequency_for(params, params.chi);
    Omega2Point pt;
    pt.xi = xi;
    if (model == Model::SemiQuantum) {
      pt.n_photon =
          bloch::steady_state(params, ref, bloch::Strategy::NewtonRoot, opts.steady).state.n_ph;
    } else {
      pt.n_photon = solve_self_consistent(params, ref).n;
    }
    DriveConfig drive = base_drive;
    drive.xi = xi;
    pt.omega2 = extract_omega2(params, drive, probe_axis, amp_axis, model, opts, peaks);
    out.push_back(pt);
  }
  return out;
}

double omega2_separation_estimate(const SystemParams& params) {
  const double ratio = std::abs(params.chi) / params.kappa;
  if (ratio <= 1.0) return 0.0;
  return omega1_resonant(params) * std::sqrt(ratio - 1.0);
}

}  // namespace mavg
