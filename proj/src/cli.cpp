#include "mavg/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mavg/bloch.hpp"
#include "mavg/config.hpp"
#include "mavg/io.hpp"
#include "mavg/semiclassical.hpp"
#include "mavg/spectroscopy.hpp"

namespace mavg::cli {

namespace {

struct Common {
  std::string config_path;
  std::string model;
  std::string out;
  int workers = -1;
  std::vector<std::string> overrides;
};

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "Configuration file (key = value)");
  sub->add_option("--model", c.model, "analytical | semiclassical | semiquantum");
  sub->add_option("--out", c.out, "Output path prefix");
  sub->add_option("--workers", c.workers, "Worker threads (0 = auto)")->check(CLI::NonNegativeNumber);
  sub->add_option("--set", c.overrides, "Extra 'key=value' configuration entries");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? default_run_config() : load_config(c.config_path);
  if (!c.overrides.empty()) {
    std::string text;
    for (const auto& o : c.overrides) text += o + "\n";
    cfg = parse_config_text(text, cfg);
  }
  if (!c.model.empty()) cfg.model = parse_model(c.model);
  if (!c.out.empty()) cfg.output_path = c.out;
  if (c.workers >= 0) cfg.workers = static_cast<unsigned>(c.workers);
  return cfg;
}

std::vector<std::string> echo(const RunConfig& cfg) {
  std::vector<std::string> lines;
  std::istringstream is(serialize(cfg));
  for (std::string l; std::getline(is, l);) lines.push_back(l);
  lines.push_back("axis values in rad/us; transmission is A/A0 with A0 = xi/kappa");
  return lines;
}

SweepOptions sweep_options(const RunConfig& cfg) {
  SweepOptions o;
  o.workers = cfg.workers;
  o.steady = cfg.steady;
  return o;
}

void check_failures(const TransmissionMap& map, std::ostream& err) {
  if (map.failed == 0) return;
  err << "warning: " << map.failed << " of " << map.amplitude.size()
      << " grid points did not converge (written as nan)\n";
  if (10 * map.failed > map.amplitude.size())
    throw NumericalFailure("more than 10% of the grid points failed");
}

void emit_map(const RunConfig& cfg, const TransmissionMap& map, const std::string& stem,
              std::ostream& out) {
  std::vector<std::string> comments = echo(cfg);
  comments.push_back(std::string("model = ") + to_string(map.model));
  comments.push_back("failed_points = " + std::to_string(map.failed));
  std::ostringstream csv;
  io::write_map_csv(csv, map, comments);
  io::write_file(stem + ".csv", csv.str());
  std::ostringstream pgm;
  io::write_pgm(pgm, map);
  io::write_file(stem + ".pgm", pgm.str());
  out << "wrote " << stem << ".csv (" << map.rows() << "x" << map.cols() << ") and " << stem
      << ".pgm\n";
}

int cmd_steady(const RunConfig& cfg, std::ostream& out) {
  using io::format_double;
  const SemiclassicalSolution sc = solve_self_consistent(cfg.params, cfg.drive);
  const Detunings det = detunings(cfg.params, cfg.drive);
  out << "d_omega_r = " << format_double(det.d_omega_r) << "\n"
      << "d_omega_q = " << format_double(det.d_omega_q) << "\n"
      << "omega_rabi = " << format_double(cfg.drive.omega_rabi) << "\n"
      << "xi = " << format_double(cfg.drive.xi) << "\n"
      << "semiclassical.n = " << format_double(sc.n) << "\n"
      << "semiclassical.p_plus = " << format_double(sc.p_plus) << "\n"
      << "semiclassical.omega1 = " << format_double(sc.omega1) << "\n"
      << "semiclassical.branch_count = " << sc.branch_count << "\n";
  const auto r = bloch::steady_state(cfg.params, cfg.drive, bloch::Strategy::NewtonRoot, cfg.steady);
  const auto& s = r.state;
  out << "semiquantum.sx = " << format_double(s.sx) << "\n"
      << "semiquantum.sy = " << format_double(s.sy) << "\n"
      << "semiquantum.sz = " << format_double(s.sz) << "\n"
      << "semiquantum.a_re = " << format_double(s.a.real()) << "\n"
      << "semiquantum.a_im = " << format_double(s.a.imag()) << "\n"
      << "semiquantum.abs_a = " << format_double(std::abs(s.a)) << "\n"
      << "semiquantum.n_ph = " << format_double(s.n_ph) << "\n"
      << "semiquantum.asx = " << format_double(s.asx.real()) << " " << format_double(s.asx.imag()) << "\n"
      << "semiquantum.asy = " << format_double(s.asy.real()) << " " << format_double(s.asy.imag()) << "\n"
      << "semiquantum.asz = " << format_double(s.asz.real()) << " " << format_double(s.asz.imag()) << "\n"
      << "semiquantum.residual_norm = " << format_double(r.residual_norm) << "\n";
  if (cfg.drive.xi > 0.0) {
    out << "semiquantum.normalized_transmission = "
        << format_double(std::abs(s.a) * cfg.params.kappa / cfg.drive.xi) << "\n";
  }
  return kExitOk;
}

int cmd_sweep_drive(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.grid.kind != AxisKind::DriveAmplitude)
    throw ConfigError("sweep-drive needs grid.axis = amplitude");
  const TransmissionMap map =
      sweep(cfg.params, cfg.drive, cfg.grid.to_grid(cfg.params), cfg.model, sweep_options(cfg));
  emit_map(cfg, map, cfg.output_path + "_map", out);
  check_failures(map, err);
  return kExitOk;
}

int cmd_sweep_detuning(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.grid.kind != AxisKind::DriveFrequency)
    throw ConfigError("sweep-detuning needs grid.axis = frequency");
  const SweepGrid grid = cfg.grid.to_grid(cfg.params);
  bool failed = false;
  for (Model m : {Model::Analytical, Model::SemiQuantum}) {
    const TransmissionMap map = sweep(cfg.params, cfg.drive, grid, m, sweep_options(cfg));
    emit_map(cfg, map, cfg.output_path + "_" + to_string(m) + "_map", out);
    try {
      check_failures(map, err);
    } catch (const NumericalFailure&) {
      failed = true;
    }
  }
  if (failed) throw NumericalFailure("more than 10% of the grid points failed");
  return kExitOk;
}

std::string describe(const PeakReport& rep) {
  std::ostringstream os;
  os << "classification=" << to_string(rep.classification) << " peaks=";
  for (std::size_t i = 0; i < rep.peak_positions.size(); ++i) {
    os << (i ? ";" : "") << io::format_double(rep.peak_positions[i]) << ":"
       << io::format_double(rep.peak_heights[i]);
  }
  return os.str();
}

int cmd_cuts(const RunConfig& cfg, const std::vector<double>& omegas, std::ostream& out,
             std::ostream& err) {
  if (omegas.empty()) throw ConfigError("cuts needs at least one drive amplitude");
  const std::vector<double> probe = cfg.grid.probe.values();
  bool failed = false;
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    if (!(omegas[k] >= 0.0)) throw ConfigError("drive amplitudes must be non-negative");
    std::vector<std::vector<double>> cols{probe};
    std::vector<PeakReport> reports;
    for (Model m : {Model::Analytical, Model::SemiQuantum}) {
      std::vector<double> row(probe.size());
      std::size_t bad = 0;
      for (std::size_t j = 0; j < probe.size(); ++j) {
        const DriveConfig d =
            grid_drive(cfg.params, cfg.drive, AxisKind::DriveAmplitude, probe[j], omegas[k]);
        try {
          row[j] = normalized_transmission(cfg.params, d, m, cfg.steady);
        } catch (const NoConvergence&) {
          row[j] = std::nan("");
          ++bad;
        } catch (const ode::StepSizeUnderflow&) {
          row[j] = std::nan("");
          ++bad;
        }
      }
      if (10 * bad > row.size()) failed = true;
      reports.push_back(find_peaks(probe, row, omegas[k]));
      cols.push_back(std::move(row));
    }
    std::vector<std::string> comments = echo(cfg);
    comments.push_back("omega_rabi = " + io::format_double(omegas[k]));
    std::ostringstream csv;
    io::write_table_csv(csv, {"d_omega_r", "A_analytical", "A_semiquantum"}, cols, comments);
    const std::string path = cfg.output_path + "_cut_" + std::to_string(k) + ".csv";
    io::write_file(path, csv.str());
    out << "cut " << k << " omega_rabi=" << io::format_double(omegas[k])
        << " model=analytical " << describe(reports[0]) << "\n";
    out << "cut " << k << " omega_rabi=" << io::format_double(omegas[k])
        << " model=semiquantum " << describe(reports[1]) << "\n";
  }
  if (failed) {
    err << "error: more than 10% of the points of a cut failed\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_omega2(const RunConfig& cfg, const std::vector<double>& xi_kappa, double amp_min_w1,
               double amp_max_w1, std::size_t amp_count, std::ostream& out) {
  if (xi_kappa.empty()) throw ConfigError("omega2 needs a non-empty --xi-kappa list");
  for (std::size_t i = 0; i < xi_kappa.size(); ++i) {
    if (!(xi_kappa[i] >= 0.001 && xi_kappa[i] <= 10.0))
      throw ConfigError("--xi-kappa values must lie in [0.001, 10]");
    if (i > 0 && !(xi_kappa[i] > xi_kappa[i - 1]))
      throw ConfigError("--xi-kappa values must be ascending");
  }
  if (!(amp_min_w1 > 0.0 && amp_max_w1 > amp_min_w1 && amp_count >= 2))
    throw ConfigError("invalid amplitude axis for omega2");
  std::vector<double> xis;
  for (double x : xi_kappa) xis.push_back(x * cfg.params.kappa);
  const double w1 = omega1_resonant(cfg.params);
  const std::vector<double> amps = logspace(amp_min_w1 * w1, amp_max_w1 * w1, amp_count);
  const std::vector<double> probe = cfg.grid.probe.values();
  const auto curve = omega2_vs_photon_number(cfg.params, cfg.drive, xis, probe, amps, cfg.model,
                                             sweep_options(cfg));
  std::vector<std::vector<double>> cols(3);
  bool monotonic = true;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    cols[0].push_back(curve[i].xi);
    cols[1].push_back(curve[i].n_photon);
    cols[2].push_back(curve[i].omega2);
    if (i > 0 && curve[i].omega2 < curve[i - 1].omega2) monotonic = false;
  }
  std::vector<std::string> comments = echo(cfg);
  comments.push_back(std::string("model = ") + to_string(cfg.model));
  std::ostringstream csv;
  io::write_table_csv(csv, {"xi", "n_photon", "omega2"}, cols, comments);
  const std::string path = cfg.output_path + "_omega2.csv";
  io::write_file(path, csv.str());
  for (const auto& p : curve) {
    out << "xi=" << io::format_double(p.xi) << " n_photon=" << io::format_double(p.n_photon)
        << " omega2=" << io::format_double(p.omega2) << "\n";
  }
  out << "monotonic=" << (monotonic ? "yes" : "no") << "\n";
  out << "wrote " << path << "\n";
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Probe transmission of a resonator coupled to a driven qubit"};
  app.require_subcommand(1);

  Common steady_c, drive_c, cuts_c, det_c, w2_c;
  auto* steady = app.add_subcommand("steady", "Single-point semiclassical and semi-quantum steady state");
  add_common(steady, steady_c);
  auto* sweep_drive = app.add_subcommand("sweep-drive", "Transmission map over probe detuning and drive amplitude");
  add_common(sweep_drive, drive_c);
  auto* cuts = app.add_subcommand("cuts", "Probe-frequency cuts at fixed drive amplitudes");
  add_common(cuts, cuts_c);
  std::vector<double> rabi_mhz, rabi_w1;
  cuts->add_option("--rabi-mhz", rabi_mhz, "Drive amplitudes Omega/2pi in MHz")->delimiter(',');
  cuts->add_option("--rabi-w1", rabi_w1, "Drive amplitudes in units of 2/sqrt(T1 T2)")->delimiter(',');
  auto* sweep_det = app.add_subcommand("sweep-detuning", "Transmission maps over probe and drive frequency");
  add_common(sweep_det, det_c);
  auto* omega2 = app.add_subcommand("omega2", "Regime boundary versus probe photon number");
  add_common(omega2, w2_c);
  std::vector<double> xi_kappa;
  double amp_min = 0.01, amp_max = 1.0e4;
  std::size_t amp_count = 121;
  omega2->add_option("--xi-kappa", xi_kappa, "Probe amplitudes in units of kappa")->delimiter(',')->required();
  omega2->add_option("--amp-min-w1", amp_min, "Smallest drive amplitude / omega1")->capture_default_str();
  omega2->add_option("--amp-max-w1", amp_max, "Largest drive amplitude / omega1")->capture_default_str();
  omega2->add_option("--amp-count", amp_count, "Amplitude axis points")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (steady->parsed()) return cmd_steady(resolve(steady_c), out);
    if (sweep_drive->parsed()) return cmd_sweep_drive(resolve(drive_c), out, err);
    if (sweep_det->parsed()) return cmd_sweep_detuning(resolve(det_c), out, err);
    if (cuts->parsed()) {
      const RunConfig cfg = resolve(cuts_c);
      std::vector<double> omegas;
      for (double f : rabi_mhz) omegas.push_back(from_mhz(f));
      for (double w : rabi_w1) omegas.push_back(w * omega1_resonant(cfg.params));
      return cmd_cuts(cfg, omegas, out, err);
    }
    if (omega2->parsed())
      return cmd_omega2(resolve(w2_c), xi_kappa, amp_min, amp_max, amp_count, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidParameter& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NoConvergence& e) {
    err << "numerical failure: " << e.what() << " (best residual " << e.best_residual() << ")\n";
    return kExitNumerical;
  } catch (const ode::StepSizeUnderflow& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const RegimeNotBracketed& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace mavg::cli
