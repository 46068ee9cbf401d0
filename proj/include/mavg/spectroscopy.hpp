#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "mavg/bloch.hpp"
#include "mavg/model.hpp"
#include "mavg/semiclassical.hpp"

// Transmission maps over (probe detuning) x (drive amplitude | drive
// frequency), line-shape analysis and the two-to-one regime boundary.
namespace mavg {

enum class AxisKind { DriveAmplitude, DriveFrequency };
enum class Model { Analytical, Semiclassical, SemiQuantum };
enum class Classification { TwoPeaks, OnePeak, Indeterminate };

const char* to_string(Model m);
const char* to_string(AxisKind k);
const char* to_string(Classification c);

class RegimeNotBracketed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SweepGrid {
  std::vector<double> probe_axis;   // d_omega_r values
  std::vector<double> second_axis;  // drive amplitudes or drive frequencies
  AxisKind axis_kind = AxisKind::DriveAmplitude;

  // Throws InvalidParameter unless both axes are strictly monotonic with at
  // least two points.
  void validate() const;
};

struct TransmissionMap {
  SweepGrid grid;
  std::vector<double> amplitude;  // row-major, one row per second_axis value
  Model model = Model::SemiQuantum;
  std::size_t failed = 0;  // points left as NaN after a solver failure

  std::size_t rows() const { return grid.second_axis.size(); }
  std::size_t cols() const { return grid.probe_axis.size(); }
  double at(std::size_t row, std::size_t col) const { return amplitude[row * cols() + col]; }
  std::span<const double> row(std::size_t r) const {
    return {amplitude.data() + r * cols(), cols()};
  }
};

struct PeakReport {
  double cut_value = 0.0;
  std::vector<double> peak_positions;
  std::vector<double> peak_heights;
  Classification classification = Classification::Indeterminate;
};

struct PeakOptions {
  bool smooth = false;         // 3-point moving average before the search
  double min_relative = 0.02;  // maxima below this fraction of the row max are dropped
};

struct SweepOptions {
  unsigned workers = 0;  // 0 = hardware concurrency
  bloch::SteadyStateOptions steady{};
};

std::vector<double> linspace(double lo, double hi, std::size_t count);
std::vector<double> logspace(double lo, double hi, std::size_t count);

// Probe axis [-2 chi, 2 chi] x 401 and drive amplitudes log-spaced over
// [0.01, 100] x omega1_resonant with 81 points.
SweepGrid default_amplitude_grid(const SystemParams& params);

// Drive configuration for one grid point.
DriveConfig grid_drive(const SystemParams& params, const DriveConfig& base, AxisKind kind,
                       double probe_detuning, double second_value);

// A / A0 with A0 = xi/kappa. Throws NoConvergence from the underlying solver.
double normalized_transmission(const SystemParams& params, const DriveConfig& drive,
                               Model model, const bloch::SteadyStateOptions& steady = {});

// Evaluate every grid point; failing points become NaN and are counted.
// Results do not depend on the worker count.
TransmissionMap sweep(const SystemParams& params, const DriveConfig& base_drive,
                      const SweepGrid& grid, Model model, const SweepOptions& opts = {});

// Local maxima of one cut. Requires at least 5 samples.
PeakReport find_peaks(std::span<const double> probe_axis, std::span<const double> row,
                      double cut_value, const PeakOptions& opts = {});

// Smallest drive amplitude at which the line shape turns from two peaks into
// one, refined by one bisection step between the bracketing amplitudes.
double extract_omega2(const SystemParams& params, const DriveConfig& base_drive,
                      std::span<const double> probe_axis, std::span<const double> amp_axis,
                      Model model = Model::SemiQuantum, const SweepOptions& opts = {},
                      const PeakOptions& peaks = {});

struct Omega2Point {
  double xi = 0.0;
  double n_photon = 0.0;  // steady <a^dagger a> at zero drive, probe on the ground-state line
  double omega2 = 0.0;
};

std::vector<Omega2Point> omega2_vs_photon_number(const SystemParams& params,
                                                 const DriveConfig& base_drive,
                                                 std::span<const double> xi_list,
                                                 std::span<const double> probe_axis,
                                                 std::span<const double> amp_axis,
                                                 Model model = Model::SemiQuantum,
                                                 const SweepOptions& opts = {},
                                                 const PeakOptions& peaks = {});

// Peak-separation estimate omega1 sqrt(chi/kappa - 1): the drive at which the
// probability-shifted lines sit one linewidth apart.
double omega2_separation_estimate(const SystemParams& params);

}  // namespace mavg
