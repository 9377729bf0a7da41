#include "mixcal/virtual_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mixcal/errors.hpp"

namespace mixcal {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t point_stream(std::uint32_t stage, std::size_t index) {
  return (static_cast<std::uint64_t>(stage) << 40) ^ static_cast<std::uint64_t>(index);
}

// Largest |tone| spanned by a grid under the given map.
template <typename Map>
double max_amplitude(const GridSpec& spec, Map&& map) {
  double m = 0.0;
  for (double y : spec.y_axis())
    for (double x : spec.x_axis()) m = std::max(m, std::abs(map(x, y)));
  return m;
}

void require_nonzero_detuning(double detuning_hz) {
  if (detuning_hz == 0.0)
    throw DomainError("qubit bias coincides with the spurious tone; choose a nonzero detuning");
}

double db_of(const VirtualSetup& setup, const DacCorrection& corr, SpuriousTone tone) {
  return residual_power_db(synthesize_spectrum(setup.mixer, corr, setup.f_lo_hz), tone);
}

}  // namespace

void NoiseModel::validate() const {
  if (!(readout_error_01 >= 0.0 && readout_error_01 < 0.5)) throw DomainError("readout_error_01 must be in [0, 0.5)");
  if (!(readout_error_10 >= 0.0 && readout_error_10 < 0.5)) throw DomainError("readout_error_10 must be in [0, 0.5)");
}

double measure_population(double true_p1, const NoiseModel& noise, std::uint64_t stream) {
  if (std::isnan(true_p1)) return true_p1;
  if (!(true_p1 >= 0.0 && true_p1 <= 1.0)) throw DomainError("population must lie in [0, 1]");
  if (!noise.enabled()) return true_p1;
  const double p_read1 = true_p1 * (1.0 - noise.readout_error_10) + (1.0 - true_p1) * noise.readout_error_01;
  std::mt19937_64 engine(splitmix64(noise.seed ^ splitmix64(stream)));
  std::binomial_distribution<std::uint64_t> draw(noise.shots, std::clamp(p_read1, 0.0, 1.0));
  return static_cast<double>(draw(engine)) / static_cast<double>(noise.shots);
}

void VirtualSetup::validate() const {
  mixer.validate();
  qubit.validate();
  resonator.validate();
  noise.validate();
  if (!(f_if_hz > 0.0 && f_lo_hz > f_if_hz)) throw DomainError("need f_lo > f_if > 0");
  if (!(measurement_drive_scale > 0.0)) throw DomainError("measurement drive scale must be > 0");
  if (!(report_amplitude_v > 0.0)) throw DomainError("report amplitude must be > 0");
}

ScanResult run_drive_leakage_scan(const VirtualSetup& setup, const DriveLeakageScan& scan, std::uint32_t stage) {
  setup.validate();
  require_nonzero_detuning(scan.detuning_hz);
  QubitParams biased = setup.qubit;
  biased.qubit_frequency_hz = setup.f_lo_hz - scan.detuning_hz;

  DriveScanConfig cfg;
  cfg.f_lo_hz = setup.f_lo_hz;
  cfg.f_if_hz = setup.f_if_hz;
  cfg.pulse_duration_s = scan.pulse_duration_s;
  const MixerImperfection mixer = setup.mixer;
  cfg.tone_map = [mixer](double x, double y) { return residual_carrier(mixer, x, y); };

  ScanResult out;
  out.kind = ScanKind::drive_leakage;
  out.detuning_hz = scan.detuning_hz;
  out.grid = drive_scan_map(biased, cfg, scan.grid, DriveScanMode::leakage);
  for (std::size_t i = 0; i < out.grid.size(); ++i)
    out.grid.p[i] = 1.0 - measure_population(1.0 - out.grid.p[i], setup.noise, point_stream(stage, i));
  return out;
}

ScanResult run_drive_sideband_scan(const VirtualSetup& setup, const DriveSidebandScan& scan, std::uint32_t stage) {
  setup.validate();
  require_nonzero_detuning(scan.detuning_hz);
  QubitParams biased = setup.qubit;
  biased.qubit_frequency_hz = setup.f_lo_hz - setup.f_if_hz - scan.detuning_hz;

  DriveScanConfig cfg;
  cfg.f_lo_hz = setup.f_lo_hz;
  cfg.f_if_hz = setup.f_if_hz;
  cfg.pulse_duration_s = scan.pulse_duration_s;
  const MixerImperfection mixer = setup.mixer;
  cfg.tone_map = [mixer](double x, double y) { return residual_image(mixer, Complex(x, y)); };
  double detuning_hz = scan.detuning_hz;
  if (scan.envelope_amplitude_v > 0.0) {
    cfg.envelope_amplitude_v = scan.envelope_amplitude_v;
  } else {
    const double wanted = sideband_amplitude_for_excitation(biased, cfg, scan.grid, scan.target_excitation);
    cfg.envelope_amplitude_v = std::min(wanted, scan.max_envelope_amplitude_v);
    if (wanted > scan.max_envelope_amplitude_v) {
      // leading-order rotation angle scales as amplitude / detuning
      detuning_hz *= scan.max_envelope_amplitude_v / wanted;
      biased.qubit_frequency_hz = setup.f_lo_hz - setup.f_if_hz - detuning_hz;
    }
  }

  ScanResult out;
  out.kind = ScanKind::drive_sideband;
  out.detuning_hz = detuning_hz;
  out.envelope_amplitude_v = cfg.envelope_amplitude_v;
  out.grid = drive_scan_map(biased, cfg, scan.grid, DriveScanMode::sideband);
  for (std::size_t i = 0; i < out.grid.size(); ++i)
    out.grid.p[i] = 1.0 - measure_population(1.0 - out.grid.p[i], setup.noise, point_stream(stage, i));
  return out;
}

ScanResult run_measurement_leakage_scan(const VirtualSetup& setup, const MeasurementLeakageScan& scan,
                                        std::uint32_t stage) {
  setup.validate();
  const double f_lo = setup.resonator.resonator_frequency_hz + scan.detuning_hz;
  const MixerImperfection mixer = setup.mixer;
  const double scale = setup.measurement_drive_scale;
  const LeakageMap map = [mixer, scale](double x, double y) { return scale * residual_carrier(mixer, x, y); };

  const double v_max = max_amplitude(scan.grid, map);
  const double max_shift = std::abs(qubit_shift(setup.resonator, steady_photon_number(v_max, f_lo, setup.resonator)));

  RamseyConfig ramsey = scan.ramsey;
  if (scan.auto_delay && max_shift > 0.0) ramsey.delay_s = std::min(scan.max_delay_s, scan.target_fringes / max_shift);

  ScanResult out;
  out.kind = ScanKind::measurement_leakage;
  out.detuning_hz = scan.detuning_hz;
  out.ramsey_delay_s = ramsey.delay_s;
  if (max_shift * ramsey.delay_s < 0.05)
    out.warnings.push_back("measurement scan is insensitive: largest Z phase on the grid is " +
                           std::to_string(max_shift * ramsey.delay_s) + " cycles");
  out.grid = measurement_scan_map(setup.resonator, setup.qubit, scan.grid, f_lo, ramsey, map);
  for (std::size_t i = 0; i < out.grid.size(); ++i)
    out.grid.p[i] = measure_population(out.grid.p[i], setup.noise, point_stream(stage, i));
  return out;
}

void CalibrationPlan::validate() const {
  search.validate();
  drive_leakage.grid.validate();
  drive_sideband.grid.validate();
  measurement_leakage.grid.validate();
  if (zoom_passes < 0) throw DomainError("zoom_passes must be >= 0");
  if (!(zoom_factor > 0.0 && zoom_factor < 1.0)) throw DomainError("zoom_factor must be in (0, 1)");
}

DacCorrection CalibrationOutcome::correction(const VirtualSetup& setup) const {
  DacCorrection corr;
  corr.i_offset_v = i_offset_v;
  corr.q_offset_v = q_offset_v;
  corr.sideband_correction = c;
  corr.if_frequency_hz = setup.f_if_hz;
  corr.envelope = {setup.report_amplitude_v, 0.0};
  return corr;
}

namespace {

GridSpec zoomed(const GridSpec& previous, const Point2& center, double factor) {
  GridSpec g = previous;
  g.x_center = center.x;
  g.y_center = center.y;
  g.x_half_span = previous.x_half_span * factor;
  g.y_half_span = previous.y_half_span * factor;
  return g;
}

// Bias detuning at which the leading-order rotation angle at the largest
// residual carrier on the grid produces `target` excitation. Never larger
// than the configured detuning.
double probe_detuning_for(const VirtualSetup& setup, const GridSpec& grid, double configured_hz, double target) {
  const MixerImperfection mixer = setup.mixer;
  const double v_max = max_amplitude(grid, [&](double x, double y) { return residual_carrier(mixer, x, y); });
  const double z_target = std::asin(std::sqrt(target));
  const double dw = setup.qubit.drive_coupling * v_max / (std::sqrt(2.0) * z_target);
  const double df = std::min(std::abs(configured_hz), dw / kTwoPi);
  return std::copysign(df, configured_hz);
}

void record_reports(const VirtualSetup& setup, CalibrationOutcome& out) {
  CalibrationOutcome zero;
  out.uncalibrated_carrier_db = db_of(setup, zero.correction(setup), SpuriousTone::carrier);
  out.uncalibrated_image_db = db_of(setup, zero.correction(setup), SpuriousTone::image);
  out.residual_carrier_db = db_of(setup, out.correction(setup), SpuriousTone::carrier);
  out.residual_image_db = db_of(setup, out.correction(setup), SpuriousTone::image);
}

}  // namespace

CalibrationOutcome calibrate_drive_mixer(const VirtualSetup& setup, const CalibrationPlan& plan) {
  setup.validate();
  plan.validate();
  CalibrationOutcome out;
  bool converged = true;

  DriveLeakageScan leak = plan.drive_leakage;
  for (int pass = 0; pass <= plan.zoom_passes; ++pass) {
    ScanResult scan = run_drive_leakage_scan(setup, leak, static_cast<std::uint32_t>(pass));
    CenterEstimate est = calibrate(scan.grid, plan.search, plan.drive_weights);
    converged = converged && est.converged;
    out.i_offset_v = est.center.x;
    out.q_offset_v = est.center.y;
    out.scans.push_back(std::move(scan));
    out.estimates.push_back(est);
    leak.grid = zoomed(leak.grid, est.center, plan.zoom_factor);
    leak.detuning_hz = probe_detuning_for(setup, leak.grid, plan.drive_leakage.detuning_hz, 0.5);
  }

  DriveSidebandScan side = plan.drive_sideband;
  for (int pass = 0; pass <= plan.zoom_passes; ++pass) {
    ScanResult scan = run_drive_sideband_scan(setup, side, static_cast<std::uint32_t>(100 + pass));
    CenterEstimate est = calibrate(scan.grid, plan.search, plan.drive_weights);
    converged = converged && est.converged;
    out.c = Complex(est.center.x, est.center.y);
    out.scans.push_back(std::move(scan));
    out.estimates.push_back(est);
    side.grid = zoomed(side.grid, est.center, plan.zoom_factor);
    side.envelope_amplitude_v = 0.0;
  }

  record_reports(setup, out);
  out.successful = converged;
  return out;
}

CalibrationOutcome calibrate_measurement_mixer(const VirtualSetup& setup, const CalibrationPlan& plan) {
  setup.validate();
  plan.validate();
  CalibrationOutcome out;
  bool converged = true;

  MeasurementLeakageScan leak = plan.measurement_leakage;
  for (int pass = 0; pass <= plan.zoom_passes; ++pass) {
    ScanResult scan = run_measurement_leakage_scan(setup, leak, static_cast<std::uint32_t>(200 + pass));
    CenterEstimate est = calibrate(scan.grid, plan.search, plan.measurement_weights);
    converged = converged && est.converged;
    out.i_offset_v = est.center.x;
    out.q_offset_v = est.center.y;
    out.scans.push_back(std::move(scan));
    out.estimates.push_back(est);
    leak.grid = zoomed(leak.grid, est.center, plan.zoom_factor);
  }

  record_reports(setup, out);
  out.successful = converged;
  return out;
}

std::vector<SweepRow> detuning_sweep(const VirtualSetup& setup, std::span<const double> detunings_hz, Line line,
                                     const DacCorrection& calibrated, double pulse_duration_s, double ramsey_delay_s) {
  setup.validate();
  std::vector<SweepRow> rows;
  rows.reserve(detunings_hz.size());
  const Complex uncal = residual_carrier(setup.mixer, 0.0, 0.0);
  const Complex cal = residual_carrier(setup.mixer, calibrated.i_offset_v, calibrated.q_offset_v);

  for (double df : detunings_hz) {
    require_nonzero_detuning(df);
    SweepRow row{df, 0.0, 0.0};
    if (line == Line::drive) {
      QubitParams biased = setup.qubit;
      biased.qubit_frequency_hz = setup.f_lo_hz - df;
      auto excitation = [&](Complex z) {
        return 1.0 - leakage_ground_population_iq(biased, setup.f_lo_hz, z.real(), z.imag(), pulse_duration_s);
      };
      row.metric_uncal = excitation(uncal);
      row.metric_cal = excitation(cal);
    } else {
      const double f_lo = setup.resonator.resonator_frequency_hz + df;
      auto phase = [&](Complex z) {
        const double n = steady_photon_number(setup.measurement_drive_scale * std::abs(z), f_lo, setup.resonator);
        return kTwoPi * std::abs(qubit_shift(setup.resonator, n)) * ramsey_delay_s;
      };
      row.metric_uncal = phase(uncal);
      row.metric_cal = phase(cal);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mixcal
