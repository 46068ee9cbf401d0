#include "mavg/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "mavg/io.hpp"

namespace mavg {

std::vector<double> AxisSpec::values() const {
  return spacing == Spacing::Log ? logspace(min, max, count) : linspace(min, max, count);
}

SweepGrid GridSpec::to_grid(const SystemParams& params) const {
  SweepGrid g{probe.values(), second.values(), kind};
  if (kind == AxisKind::DriveFrequency) {
    for (double& w : g.second_axis) w = drive_frequency_for(params, w);
  }
  return g;
}

namespace {

// Nearest value that a `_mhz` config entry can produce, so derived defaults
// survive serialization exactly.
double mhz_representable(double w) { return from_mhz(to_mhz(w)); }

}  // namespace

GridSpec default_grid(const SystemParams& params, AxisKind kind) {
  const double span = mhz_representable(2.0 * std::abs(params.chi));
  GridSpec g;
  g.kind = kind;
  g.probe = {-span, span, 401, Spacing::Linear};
  if (kind == AxisKind::DriveAmplitude) {
    const double w1 = omega1_resonant(params);
    g.second = {mhz_representable(0.01 * w1), mhz_representable(100.0 * w1), 81, Spacing::Log};
  } else {
    g.second = {-span, span, 201, Spacing::Linear};
  }
  return g;
}

RunConfig default_run_config() {
  RunConfig c;
  c.params = default_params();
  c.drive.xi = mhz_representable(0.05 * c.params.kappa);
  c.drive.omega_p = c.params.omega_r;
  c.drive.omega_d = c.params.omega_q;
  c.drive.omega_rabi = 0.0;
  c.grid = default_grid(c.params, AxisKind::DriveAmplitude);
  return c;
}

Model parse_model(const std::string& name) {
  if (name == "analytical") return Model::Analytical;
  if (name == "semiclassical") return Model::Semiclassical;
  if (name == "semiquantum") return Model::SemiQuantum;
  throw ConfigError("unknown model '" + name + "' (analytical|semiclassical|semiquantum)");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_number(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "': not a number: '" + v + "'");
  }
  if (used != v.size() || !std::isfinite(x))
    throw ConfigError("'" + key + "': not a finite number: '" + v + "'");
  return x;
}

std::size_t to_count(const std::string& key, const std::string& v) {
  const double x = to_number(key, v);
  if (x < 0 || x != std::floor(x) || x > 1e8)
    throw ConfigError("'" + key + "': expected a non-negative integer");
  return static_cast<std::size_t>(x);
}

Spacing to_spacing(const std::string& key, const std::string& v) {
  if (v == "linear") return Spacing::Linear;
  if (v == "log") return Spacing::Log;
  throw ConfigError("'" + key + "': expected linear|log");
}

// Decimal value in presentation units whose forward conversion reproduces
// `target` exactly, starting from the approximate inverse `guess`.
double preimage(double target, double guess, const std::function<double(double)>& forward) {
  if (forward(guess) == target) return guess;
  double up = guess, down = guess;
  for (int i = 0; i < 4096; ++i) {
    up = std::nextafter(up, std::numeric_limits<double>::infinity());
    down = std::nextafter(down, -std::numeric_limits<double>::infinity());
    if (forward(up) == target) return up;
    if (forward(down) == target) return down;
  }
  return guess;
}

}  // namespace

RunConfig parse_config(std::istream& in, const RunConfig& base) {
  RunConfig c = base;
  const bool default_derived_grid = base.grid == default_grid(base.params, base.grid.kind);
  std::set<std::string> seen;
  std::map<std::string, std::string> kv;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'");
    kv[key] = value;
  }

  auto take = [&kv](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto num = [&](const std::string& key) -> std::optional<double> {
    if (auto v = take(key)) return to_number(key, *v);
    return std::nullopt;
  };

  // Detunings are kept relative to the base carriers before the system block
  // moves omega_r or omega_q.
  const Detunings base_det = detunings(base.params, base.drive);
  double probe_detuning = base_det.d_omega_r;
  double drive_detuning = base_det.d_omega_q;

  if (auto v = num("system.omega_r_ghz")) c.params.omega_r = from_ghz(*v);
  if (auto v = num("system.omega_q_ghz")) c.params.omega_q = from_ghz(*v);
  if (auto v = num("system.chi_mhz")) c.params.chi = from_mhz(*v);
  if (auto v = num("system.kappa_mhz")) c.params.kappa = from_mhz(*v);
  if (auto v = num("system.t1_us")) c.params.gamma1 = 1.0 / *v;
  if (auto v = num("system.t2_us")) c.params.gamma2 = 1.0 / *v;
  if (auto v = num("system.z0")) c.params.z0 = *v;
  if (auto v = num("system.n_th")) c.params.n_th = *v;

  if (auto v = num("drive.xi_mhz")) c.drive.xi = from_mhz(*v);
  if (auto v = num("drive.rabi_mhz")) c.drive.omega_rabi = from_mhz(*v);
  if (auto v = num("drive.probe_detuning_mhz")) probe_detuning = from_mhz(*v);
  if (auto v = num("drive.drive_detuning_mhz")) drive_detuning = from_mhz(*v);
  c.drive.omega_p = probe_frequency_for(c.params, probe_detuning);
  c.drive.omega_d = drive_frequency_for(c.params, drive_detuning);

  if (auto v = take("run.model")) c.model = parse_model(*v);
  if (auto v = take("run.output")) c.output_path = *v;
  if (auto v = take("run.workers")) c.workers = static_cast<unsigned>(to_count("run.workers", *v));
  if (auto v = num("solver.time_tolerance")) c.steady.time_tolerance = *v;
  if (auto v = num("solver.time_cap_factor")) c.steady.time_cap_factor = *v;
  if (auto v = take("solver.newton_max_iterations"))
    c.steady.newton_max_iterations = static_cast<int>(to_count("solver.newton_max_iterations", *v));
  if (auto v = num("solver.newton_tolerance")) c.steady.newton_tolerance = *v;

  if (auto v = take("grid.axis")) {
    if (*v == "amplitude") {
      c.grid.kind = AxisKind::DriveAmplitude;
    } else if (*v == "frequency") {
      c.grid.kind = AxisKind::DriveFrequency;
    } else {
      throw ConfigError("'grid.axis': expected amplitude|frequency");
    }
  }
  if (default_derived_grid || c.grid.kind != base.grid.kind) {
    c.grid = default_grid(c.params, c.grid.kind);
  }
  if (auto v = num("grid.probe_min_mhz")) c.grid.probe.min = from_mhz(*v);
  if (auto v = num("grid.probe_max_mhz")) c.grid.probe.max = from_mhz(*v);
  if (auto v = take("grid.probe_count")) c.grid.probe.count = to_count("grid.probe_count", *v);
  if (auto v = take("grid.probe_spacing")) c.grid.probe.spacing = to_spacing("grid.probe_spacing", *v);
  if (auto v = num("grid.second_min_mhz")) c.grid.second.min = from_mhz(*v);
  if (auto v = num("grid.second_max_mhz")) c.grid.second.max = from_mhz(*v);
  if (auto v = take("grid.second_count")) c.grid.second.count = to_count("grid.second_count", *v);
  if (auto v = take("grid.second_spacing")) c.grid.second.spacing = to_spacing("grid.second_spacing", *v);

  if (!kv.empty()) throw ConfigError("unknown key '" + kv.begin()->first + "'");

  try {
    validate(c.params);
    validate(c.drive);
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  }
  if (!(c.steady.time_tolerance > 0.0 && c.steady.time_cap_factor > 0.0 &&
        c.steady.newton_tolerance > 0.0))
    throw ConfigError("solver tolerances and the time cap factor must be positive");
  for (const AxisSpec* a : {&c.grid.probe, &c.grid.second}) {
    if (a->count < 2) throw ConfigError("grid axes need at least 2 points");
    if (a->spacing == Spacing::Log && !(a->min > 0.0 && a->max > 0.0))
      throw ConfigError("log-spaced axes need positive bounds");
  }
  try {
    c.grid.to_grid(c.params).validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  }
  return c;
}

RunConfig parse_config_text(const std::string& text, const RunConfig& base) {
  std::istringstream is(text);
  return parse_config(is, base);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

std::string serialize(const RunConfig& c) {
  using io::format_double;
  const SystemParams& p = c.params;
  auto mhz = [](double w) { return preimage(w, to_mhz(w), [](double f) { return from_mhz(f); }); };
  auto ghz = [](double w) {
    return preimage(w, to_mhz(w) / 1.0e3, [](double f) { return from_ghz(f); });
  };
  auto period = [](double rate) {
    return preimage(rate, 1.0 / rate, [](double t) { return 1.0 / t; });
  };
  const Detunings det = detunings(p, c.drive);
  const double probe_mhz = preimage(c.drive.omega_p, to_mhz(det.d_omega_r), [&p](double f) {
    return probe_frequency_for(p, from_mhz(f));
  });
  const double drive_mhz = preimage(c.drive.omega_d, to_mhz(det.d_omega_q), [&p](double f) {
    return drive_frequency_for(p, from_mhz(f));
  });
  auto spacing = [](Spacing s) { return s == Spacing::Log ? "log" : "linear"; };

  std::ostringstream os;
  os << "system.omega_r_ghz = " << format_double(ghz(p.omega_r)) << "\n"
     << "system.omega_q_ghz = " << format_double(ghz(p.omega_q)) << "\n"
     << "system.chi_mhz = " << format_double(mhz(p.chi)) << "\n"
     << "system.kappa_mhz = " << format_double(mhz(p.kappa)) << "\n"
     << "system.t1_us = " << format_double(period(p.gamma1)) << "\n"
     << "system.t2_us = " << format_double(period(p.gamma2)) << "\n"
     << "system.z0 = " << format_double(p.z0) << "\n"
     << "system.n_th = " << format_double(p.n_th) << "\n"
     << "drive.xi_mhz = " << format_double(mhz(c.drive.xi)) << "\n"
     << "drive.rabi_mhz = " << format_double(mhz(c.drive.omega_rabi)) << "\n"
     << "drive.probe_detuning_mhz = " << format_double(probe_mhz) << "\n"
     << "drive.drive_detuning_mhz = " << format_double(drive_mhz) << "\n"
     << "grid.axis = " << (c.grid.kind == AxisKind::DriveAmplitude ? "amplitude" : "frequency")
     << "\n"
     << "grid.probe_min_mhz = " << format_double(mhz(c.grid.probe.min)) << "\n"
     << "grid.probe_max_mhz = " << format_double(mhz(c.grid.probe.max)) << "\n"
     << "grid.probe_count = " << c.grid.probe.count << "\n"
     << "grid.probe_spacing = " << spacing(c.grid.probe.spacing) << "\n"
     << "grid.second_min_mhz = " << format_double(mhz(c.grid.second.min)) << "\n"
     << "grid.second_max_mhz = " << format_double(mhz(c.grid.second.max)) << "\n"
     << "grid.second_count = " << c.grid.second.count << "\n"
     << "grid.second_spacing = " << spacing(c.grid.second.spacing) << "\n"
     << "run.model = " << to_string(c.model) << "\n"
     << "run.output = " << c.output_path << "\n"
     << "run.workers = " << c.workers << "\n"
     << "solver.time_tolerance = " << format_double(c.steady.time_tolerance) << "\n"
     << "solver.time_cap_factor = " << format_double(c.steady.time_cap_factor) << "\n"
     << "solver.newton_max_iterations = " << c.steady.newton_max_iterations << "\n"
     << "solver.newton_tolerance = " << format_double(c.steady.newton_tolerance) << "\n";
  return os.str();
}

}  // namespace mavg
