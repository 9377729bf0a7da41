#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mixcal/calibrator.hpp"
#include "mixcal/qubit_dynamics.hpp"
#include "mixcal/resonator_dynamics.hpp"
#include "mixcal/scan_grid.hpp"
#include "mixcal/signal_model.hpp"

namespace mixcal {

// Finite-sampling readout. shots == 0 disables sampling entirely.
struct NoiseModel {
  std::size_t shots = 1000;
  double readout_error_01 = 0.0;  // P(read 1 | prepared 0)
  double readout_error_10 = 0.0;  // P(read 0 | prepared 1)
  std::uint64_t seed = 0;

  bool enabled() const { return shots > 0; }
  void validate() const;
};

// Observed fraction of "1" outcomes for a qubit with excited-state population
// true_p1. Each (seed, stream) pair owns an independent random stream, so
// results do not depend on evaluation order.
double measure_population(double true_p1, const NoiseModel& noise, std::uint64_t stream);

// Call-sequence flavour of measure_population: the n-th call uses stream n.
class MeasurementSampler {
 public:
  explicit MeasurementSampler(NoiseModel noise) : noise_(noise) {}
  double operator()(double true_p1) { return measure_population(true_p1, noise_, next_++); }

 private:
  NoiseModel noise_;
  std::uint64_t next_ = 0;
};

struct VirtualSetup {
  MixerImperfection mixer;
  QubitParams qubit;
  ResonatorParams resonator;
  double f_lo_hz = 5.0e9;
  double f_if_hz = 100e6;
  NoiseModel noise;
  // Converts mixer-output volts at the measurement line into the resonator
  // drive amplitude, sqrt(rad/s) per volt.
  double measurement_drive_scale = 7.0e6;
  // Envelope amplitude used as the reference tone when reporting residual dB.
  double report_amplitude_v = 1.0;

  void validate() const;
};

struct DriveLeakageScan {
  double detuning_hz = 2e6;  // f_LO - f_qubit
  GridSpec grid{0.0, 0.0, 0.1, 0.1, 41, 41};
  double pulse_duration_s = 10e-6;
};

struct DriveSidebandScan {
  double detuning_hz = 2e6;  // f_image - f_qubit
  GridSpec grid{0.0, 0.0, 0.25, 0.25, 41, 41};
  double pulse_duration_s = 10e-6;
  double envelope_amplitude_v = 0.0;  // 0: choose so the largest excitation on the grid is target_excitation
  double target_excitation = 0.5;
  // Cap for the automatically chosen envelope (full scale). When the cap
  // binds, the probe detuning is reduced instead to keep the target excitation.
  double max_envelope_amplitude_v = 1.0;
};

struct MeasurementLeakageScan {
  double detuning_hz = 20e6;  // f_LO - f_resonator
  GridSpec grid{0.0, 0.0, 0.1, 0.1, 41, 41};
  RamseyConfig ramsey{};
  bool auto_delay = true;      // choose the delay so the grid spans target_fringes
  double target_fringes = 2.0;
  double max_delay_s = 50e-6;
};

enum class ScanKind { drive_leakage, drive_sideband, measurement_leakage };

struct ScanResult {
  ScanKind kind = ScanKind::drive_leakage;
  ScanGrid grid;
  double detuning_hz = 0.0;
  double envelope_amplitude_v = 0.0;
  double ramsey_delay_s = 0.0;
  std::vector<std::string> warnings;
};

// `stage` selects an independent block of noise streams.
ScanResult run_drive_leakage_scan(const VirtualSetup& setup, const DriveLeakageScan& scan, std::uint32_t stage = 0);
ScanResult run_drive_sideband_scan(const VirtualSetup& setup, const DriveSidebandScan& scan, std::uint32_t stage = 0);
ScanResult run_measurement_leakage_scan(const VirtualSetup& setup, const MeasurementLeakageScan& scan,
                                        std::uint32_t stage = 0);

struct CalibrationPlan {
  DriveLeakageScan drive_leakage{};
  DriveSidebandScan drive_sideband{};
  MeasurementLeakageScan measurement_leakage{};
  SearchConfig search{};
  // Each zoom pass re-scans around the previous estimate with the half-span
  // multiplied by zoom_factor, re-tuning the probe sensitivity.
  int zoom_passes = 2;
  double zoom_factor = 0.1;
  WeightMode drive_weights = WeightMode::raw;
  WeightMode measurement_weights = WeightMode::background_subtracted;

  void validate() const;
};

struct CalibrationOutcome {
  double i_offset_v = 0.0;
  double q_offset_v = 0.0;
  Complex c{0.0, 0.0};
  double uncalibrated_carrier_db = 0.0;
  double uncalibrated_image_db = 0.0;
  double residual_carrier_db = 0.0;
  double residual_image_db = 0.0;
  std::vector<ScanResult> scans;
  std::vector<CenterEstimate> estimates;
  bool successful = false;

  DacCorrection correction(const VirtualSetup& setup) const;
};

CalibrationOutcome calibrate_drive_mixer(const VirtualSetup& setup, const CalibrationPlan& plan);
CalibrationOutcome calibrate_measurement_mixer(const VirtualSetup& setup, const CalibrationPlan& plan);

enum class Line { drive, measurement };

struct SweepRow {
  double detuning_hz = 0.0;
  double metric_uncal = 0.0;
  double metric_cal = 0.0;
};

// Error metric vs detuning with zero corrections and with `calibrated`.
// Drive line: excitation 1 - P(|0>) after the leakage pulse with the qubit at
// f_LO - detuning. Measurement line: accumulated Z phase (rad) during
// `ramsey_delay_s` with the measurement LO at f_r + detuning.
std::vector<SweepRow> detuning_sweep(const VirtualSetup& setup, std::span<const double> detunings_hz, Line line,
                                     const DacCorrection& calibrated, double pulse_duration_s = 10e-6,
                                     double ramsey_delay_s = 1e-6);

}  // namespace mixcal
