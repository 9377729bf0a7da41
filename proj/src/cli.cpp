#include "mixcal/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mixcal/config.hpp"
#include "mixcal/errors.hpp"
#include "mixcal/grid_csv.hpp"
#include "mixcal/record_store.hpp"
#include "mixcal/virtual_lab.hpp"

namespace mixcal {
namespace {

struct Options {
  std::string config_path;
  std::string mode;
  std::string out_path;
  std::string store_path;
  std::optional<std::uint64_t> seed;
  std::string channel;
  std::string role = "drive";
  std::string line;
  std::vector<double> detunings;
  std::string since;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const char* kind_name(ScanKind k) {
  switch (k) {
    case ScanKind::drive_leakage:
      return "drive-leakage";
    case ScanKind::drive_sideband:
      return "drive-sideband";
    case ScanKind::measurement_leakage:
      return "measurement-leakage";
  }
  return "?";
}

std::string point_text(const Point2& p) { return "(" + format_number(p.x) + ", " + format_number(p.y) + ")"; }

RunConfig load_with_seed(const Options& o, std::ostream& err) {
  RunConfig cfg = load_config(o.config_path);
  if (o.seed) cfg.seed = o.seed;
  if (!cfg.seed) {
    std::random_device rd;
    cfg.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    err << "seed: " << *cfg.seed << " (generated)\n";
  }
  cfg.setup.noise.seed = *cfg.seed;
  return cfg;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << content;
  f.close();
  if (!f) throw IoError("cannot write " + path);
}

std::string store_path_for(const Options& o) {
  if (!o.store_path.empty()) return o.store_path;
  if (const char* env = std::getenv("MIXCAL_STORE"); env && *env) return env;
  throw UsageError("no store given: pass --store or set MIXCAL_STORE");
}

void report(std::ostream& out, const CalibrationOutcome& oc) {
  for (std::size_t k = 0; k < oc.scans.size(); ++k) {
    const ScanResult& s = oc.scans[k];
    const CenterEstimate& e = oc.estimates[k];
    out << "pass " << k << " " << kind_name(s.kind) << ": detuning_hz=" << format_number(s.detuning_hz);
    if (s.kind == ScanKind::drive_sideband) out << " envelope_v=" << format_number(s.envelope_amplitude_v);
    if (s.kind == ScanKind::measurement_leakage) out << " ramsey_delay_s=" << format_number(s.ramsey_delay_s);
    out << "\n  trajectory:";
    for (const Point2& p : e.trajectory) out << ' ' << point_text(p);
    out << "\n  center: " << point_text(e.center) << " loss=" << format_number(e.loss_value)
        << " iterations=" << e.iterations << " converged=" << (e.converged ? "yes" : "no") << '\n';
    for (const std::string& w : s.warnings) out << "  warning: " << w << '\n';
  }
  out << "i_offset_v: " << format_number(oc.i_offset_v) << '\n'
      << "q_offset_v: " << format_number(oc.q_offset_v) << '\n'
      << "c_real: " << format_number(oc.c.real()) << '\n'
      << "c_imag: " << format_number(oc.c.imag()) << '\n'
      << "uncalibrated_carrier_db: " << format_number(oc.uncalibrated_carrier_db) << '\n'
      << "residual_carrier_db: " << format_number(oc.residual_carrier_db) << '\n'
      << "uncalibrated_image_db: " << format_number(oc.uncalibrated_image_db) << '\n'
      << "residual_image_db: " << format_number(oc.residual_image_db) << '\n';
}

int cmd_scan(const Options& o, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_with_seed(o, err);
  ScanResult r;
  if (o.mode == "drive-leakage") {
    r = run_drive_leakage_scan(cfg.setup, cfg.plan.drive_leakage);
  } else if (o.mode == "drive-sideband") {
    r = run_drive_sideband_scan(cfg.setup, cfg.plan.drive_sideband);
  } else {
    r = run_measurement_leakage_scan(cfg.setup, cfg.plan.measurement_leakage);
  }
  for (const std::string& w : r.warnings) err << "warning: " << w << '\n';
  write_file(o.out_path, grid_csv(r.grid, r.kind));
  out << "wrote " << r.grid.size() << " points to " << o.out_path << '\n';
  return exit_ok;
}

int cmd_calibrate(const Options& o, std::ostream& out, std::ostream& err) {
  const std::string store = store_path_for(o);
  const Role role = *parse_role(o.role);
  RunConfig cfg = load_with_seed(o, err);
  if (!o.channel.empty()) cfg.channel_id = o.channel;
  const CalibrationOutcome oc = role == Role::drive ? calibrate_drive_mixer(cfg.setup, cfg.plan)
                                                     : calibrate_measurement_mixer(cfg.setup, cfg.plan);
  out << "channel: " << cfg.channel_id << "\nrole: " << role_name(role) << "\nseed: " << *cfg.seed << '\n';
  report(out, oc);
  if (!oc.successful) {
    err << "calibration did not converge; no record written\n";
    return exit_not_converged;
  }
  CalibrationRecord rec;
  rec.channel_id = cfg.channel_id;
  rec.timestamp = utc_timestamp_now();
  rec.role = role;
  rec.i_offset = oc.i_offset_v;
  rec.q_offset = oc.q_offset_v;
  rec.c_real = oc.c.real();
  rec.c_imag = oc.c.imag();
  rec.residual_carrier_db = oc.residual_carrier_db;
  rec.residual_image_db = oc.residual_image_db;
  rec.config_digest = config_digest(cfg);
  store_append(store, rec);
  out << "config_digest: " << rec.config_digest << "\nrecord appended to " << store << '\n';
  return exit_ok;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_with_seed(o, err);
  std::vector<double> detunings = o.detunings.empty() ? cfg.sweep.detunings_hz : o.detunings;
  if (detunings.empty()) throw UsageError("empty detuning list: pass --detunings or set sweep.detunings_hz");
  Line line = cfg.sweep.line;
  if (!o.line.empty()) line = o.line == "drive" ? Line::drive : Line::measurement;
  const CalibrationOutcome oc = line == Line::drive ? calibrate_drive_mixer(cfg.setup, cfg.plan)
                                                     : calibrate_measurement_mixer(cfg.setup, cfg.plan);
  if (!oc.successful) {
    err << "calibration did not converge; no sweep written\n";
    return exit_not_converged;
  }
  const auto rows = detuning_sweep(cfg.setup, detunings, line, oc.correction(cfg.setup), cfg.sweep.pulse_duration_s,
                                   cfg.sweep.ramsey_delay_s);
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  write_file(o.out_path, csv.str());
  out << "wrote " << rows.size() << " rows to " << o.out_path << '\n';
  return exit_ok;
}

int cmd_store_list(const Options& o, std::ostream& out, std::ostream& err) {
  const std::string store = store_path_for(o);
  RecordFilter filter;
  if (!o.channel.empty()) filter.channel_id = o.channel;
  if (!o.since.empty()) {
    if (!parse_utc_timestamp(o.since)) throw UsageError("--since must be YYYY-MM-DD or YYYY-MM-DDTHH:MM:SSZ");
    filter.since = o.since;
  }
  const StoreListing listing = store_list(store, filter);
  for (const auto& r : listing.records) out << record_to_line(r) << '\n';
  if (listing.error) {
    err << *listing.error << '\n';
    return exit_io_error;
  }
  return exit_ok;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulated IQ-mixer calibration by centrosymmetric pattern search", "mixcal"};
  app.require_subcommand(1);
  Options o;

  const auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "Run configuration (YAML or JSON)")->required();
    sub->add_option("--seed", o.seed, "Noise seed (overrides the config)");
  };

  CLI::App* scan = app.add_subcommand("scan", "Acquire one scan grid and write it as CSV");
  add_config(scan);
  scan->add_option("--mode", o.mode, "Scan type")
      ->required()
      ->check(CLI::IsMember({"drive-leakage", "drive-sideband", "measurement-leakage"}));
  scan->add_option("--out", o.out_path, "Output CSV")->required();

  CLI::App* calibrate = app.add_subcommand("calibrate", "Calibrate one mixer and append a record to the store");
  add_config(calibrate);
  calibrate->add_option("--role", o.role, "Which mixer")->check(CLI::IsMember({"drive", "measurement"}));
  calibrate->add_option("--store", o.store_path, "Record store (default $MIXCAL_STORE)");
  calibrate->add_option("--channel", o.channel, "Channel id (overrides the config)");

  CLI::App* sweep = app.add_subcommand("sweep", "Calibrate, then tabulate the error metric against detuning");
  add_config(sweep);
  sweep->add_option("--detunings", o.detunings, "Comma-separated detunings in Hz")->delimiter(',');
  sweep->add_option("--line", o.line, "Which line")->check(CLI::IsMember({"drive", "measurement"}));
  sweep->add_option("--out", o.out_path, "Output CSV")->required();

  CLI::App* store = app.add_subcommand("store", "Inspect the calibration record store");
  store->require_subcommand(1);
  CLI::App* list = store->add_subcommand("list", "Print stored records, one JSON object per line");
  list->add_option("--store", o.store_path, "Record store (default $MIXCAL_STORE)");
  list->add_option("--channel", o.channel, "Only this channel");
  list->add_option("--since", o.since, "Only records at or after this UTC time");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_config_error;
  }

  try {
    if (scan->parsed()) return cmd_scan(o, out, err);
    if (calibrate->parsed()) return cmd_calibrate(o, out, err);
    if (sweep->parsed()) return cmd_sweep(o, out, err);
    return cmd_store_list(o, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << o.config_path << ": " << e.what() << '\n';
    return exit_config_error;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return exit_config_error;
  } catch (const DomainError& e) {
    err << "invalid argument: " << e.what() << '\n';
    return exit_config_error;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return exit_io_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace mixcal
