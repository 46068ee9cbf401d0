#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>

#include "mavg/model.hpp"
#include "mavg/spectroscopy.hpp"

// Run configuration: flat `section.key = value` text with frequencies in
// ordinary MHz/GHz, converted to rad/us once while parsing.
namespace mavg {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Spacing { Linear, Log };

struct AxisSpec {
  double min = 0.0;  // rad/us
  double max = 0.0;
  std::size_t count = 0;
  Spacing spacing = Spacing::Linear;

  std::vector<double> values() const;
  bool operator==(const AxisSpec&) const = default;
};

// Probe axis in d_omega_r; second axis in drive amplitude or in drive
// detuning d_omega_q (turned into drive frequencies by to_grid()).
struct GridSpec {
  AxisSpec probe;
  AxisSpec second;
  AxisKind kind = AxisKind::DriveAmplitude;

  SweepGrid to_grid(const SystemParams& params) const;
  bool operator==(const GridSpec&) const = default;
};

struct RunConfig {
  SystemParams params;
  DriveConfig drive;
  GridSpec grid;
  Model model = Model::SemiQuantum;
  std::string output_path = "mavg";
  unsigned workers = 0;
  bloch::SteadyStateOptions steady{};  // solver.* keys

  bool operator==(const RunConfig&) const = default;
};

// Reference parameter set, probe on the bare resonator, drive on the qubit line,
// xi = 0.05 kappa, default figure grid.
RunConfig default_run_config();

GridSpec default_grid(const SystemParams& params, AxisKind kind);

// Apply `key = value` lines on top of `base`. Unknown keys, malformed values
// and invalid resulting parameters raise ConfigError.
RunConfig parse_config(std::istream& in, const RunConfig& base = default_run_config());
RunConfig parse_config_text(const std::string& text,
                            const RunConfig& base = default_run_config());
RunConfig load_config(const std::string& path);

// Canonical text; parse_config_text(serialize(c)) == c.
std::string serialize(const RunConfig& cfg);

Model parse_model(const std::string& name);

}  // namespace mavg
