#include "mixcal/virtual_lab.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "mixcal/errors.hpp"

using namespace mixcal;

namespace {

VirtualSetup imperfect_setup(std::uint64_t seed) {
  VirtualSetup s;
  s.mixer.carrier_leakage = Complex(0.01, 0.017320508075688773);
  s.mixer.image_gain = Complex(0.03824210936303, -0.03221088436188);
  s.noise.seed = seed;
  return s;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

TEST(MeasurePopulation, DisabledPassesThrough) {
  NoiseModel n;
  n.shots = 0;
  EXPECT_EQ(measure_population(0.3141, n, 7), 0.3141);
}

TEST(MeasurePopulation, ExtremesWithoutReadoutError) {
  NoiseModel n;
  for (std::uint64_t s = 0; s < 20; ++s) {
    EXPECT_EQ(measure_population(0.0, n, s), 0.0);
    EXPECT_EQ(measure_population(1.0, n, s), 1.0);
  }
}

TEST(MeasurePopulation, HalfPopulationStatistics) {
  NoiseModel n;
  n.shots = 10000;
  int inside = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    n.seed = seed;
    if (std::abs(measure_population(0.5, n, 0) - 0.5) <= 0.015) ++inside;
  }
  EXPECT_GE(inside, 198);
}

TEST(MeasurePopulation, ReadoutErrorBias) {
  NoiseModel n;
  n.shots = 20000;
  n.readout_error_01 = 0.02;
  n.readout_error_10 = 0.05;
  double mean = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s) mean += measure_population(0.3, n, s) / 50;
  EXPECT_NEAR(mean, 0.3 * 0.95 + 0.7 * 0.02, 1e-3);
}

TEST(MeasurePopulation, SeedAndStreamSelectOutcome) {
  NoiseModel n;
  const double a = measure_population(0.4, n, 3);
  EXPECT_EQ(a, measure_population(0.4, n, 3));
  bool differs = false;
  for (std::uint64_t s = 4; s < 10; ++s) differs = differs || measure_population(0.4, n, s) != a;
  EXPECT_TRUE(differs);
  MeasurementSampler sampler(n);
  for (std::uint64_t s = 0; s < 5; ++s) EXPECT_EQ(sampler(0.4), measure_population(0.4, n, s));
}

TEST(MeasurePopulation, RejectsInvalidInput) {
  NoiseModel n;
  EXPECT_THROW(measure_population(1.2, n, 0), DomainError);
  n.readout_error_01 = 0.5;
  EXPECT_THROW(n.validate(), DomainError);
}

TEST(VirtualScans, DriveLeakageCenteredOnCancellation) {
  VirtualSetup s = imperfect_setup(0);
  s.noise.shots = 0;
  const ScanResult r = run_drive_leakage_scan(s, DriveLeakageScan{});
  EXPECT_EQ(r.kind, ScanKind::drive_leakage);
  EXPECT_EQ(r.detuning_hz, 2e6);
  const CenterEstimate e = calibrate(r.grid, SearchConfig{}, WeightMode::raw);
  EXPECT_LE(std::hypot(e.center.x + 0.01, e.center.y + 0.017320508075688773), 0.5 * r.grid.dx());
}

TEST(VirtualScans, SidebandMaximumAtImageCancellation) {
  VirtualSetup s = imperfect_setup(0);
  s.noise.shots = 0;
  const ScanResult r = run_drive_sideband_scan(s, DriveSidebandScan{});
  EXPECT_GT(r.envelope_amplitude_v, 0.0);
  EXPECT_LE(r.envelope_amplitude_v, 1.0);
  const std::size_t k = argmax(r.grid.p);
  EXPECT_LE(std::abs(r.grid.xs[k % r.grid.nx()] + s.mixer.image_gain.real()), r.grid.dx());
  EXPECT_LE(std::abs(r.grid.ys[k / r.grid.nx()] + s.mixer.image_gain.imag()), r.grid.dy());
}

TEST(VirtualScans, MeasurementScanCenteredOnCancellation) {
  VirtualSetup s = imperfect_setup(0);
  s.noise.shots = 0;
  const ScanResult r = run_measurement_leakage_scan(s, MeasurementLeakageScan{});
  EXPECT_TRUE(r.warnings.empty());
  EXPECT_GT(r.ramsey_delay_s, 0.0);
  const Point2 c = center_of_gravity(r.grid, WeightMode::background_subtracted);
  const CenterEstimate e = refine_center(r.grid, c, SearchConfig{}.resolved_for(r.grid));
  EXPECT_LE(std::hypot(e.center.x + 0.01, e.center.y + 0.017320508075688773), r.grid.dx());
}

TEST(VirtualScans, InsensitiveMeasurementScanWarns) {
  VirtualSetup s = imperfect_setup(0);
  MeasurementLeakageScan scan;
  scan.auto_delay = false;
  scan.ramsey.delay_s = 1e-11;
  EXPECT_FALSE(run_measurement_leakage_scan(s, scan).warnings.empty());
}

TEST(VirtualScans, ZeroDetuningRejected) {
  DriveLeakageScan scan;
  scan.detuning_hz = 0.0;
  EXPECT_THROW(run_drive_leakage_scan(imperfect_setup(0), scan), DomainError);
  const std::vector<double> df{1e6, 0.0};
  EXPECT_THROW(detuning_sweep(imperfect_setup(0), df, Line::drive, DacCorrection{}), DomainError);
}

TEST(VirtualScans, BitIdenticalRerunsAndSeedDependence) {
  const ScanResult a = run_drive_leakage_scan(imperfect_setup(42), DriveLeakageScan{});
  const ScanResult b = run_drive_leakage_scan(imperfect_setup(42), DriveLeakageScan{});
  const ScanResult c = run_drive_leakage_scan(imperfect_setup(43), DriveLeakageScan{});
  EXPECT_EQ(a.grid.p, b.grid.p);
  EXPECT_NE(a.grid.p, c.grid.p);
  const ScanResult other_stage = run_drive_leakage_scan(imperfect_setup(42), DriveLeakageScan{}, 1);
  EXPECT_NE(a.grid.p, other_stage.grid.p);
}

TEST(VirtualScans, NoiseIsUnbiasedAroundNoiselessMap) {
  VirtualSetup s = imperfect_setup(0);
  s.noise.shots = 0;
  const ScanGrid clean = run_drive_leakage_scan(s, DriveLeakageScan{}).grid;
  s.noise.shots = 1000;
  double bias = 0.0, spread = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    s.noise.seed = seed;
    const ScanGrid noisy = run_drive_leakage_scan(s, DriveLeakageScan{}).grid;
    for (std::size_t i = 0; i < clean.size(); ++i) {
      const double d = noisy.p[i] - clean.p[i];
      bias += d;
      spread += d * d;
    }
  }
  const double n = 20.0 * clean.size();
  bias /= n;
  spread = std::sqrt(spread / n);
  EXPECT_LT(std::abs(bias), 5.0 * spread / std::sqrt(n));
  EXPECT_LT(spread, 0.02);
}

TEST(Pipelines, PerfectMixerNeedsNoCorrection) {
  VirtualSetup s;
  s.noise.shots = 0;
  const CalibrationOutcome o = calibrate_drive_mixer(s, CalibrationPlan{});
  EXPECT_TRUE(o.successful);
  EXPECT_LE(std::abs(o.i_offset_v), 1e-4);
  EXPECT_LE(std::abs(o.q_offset_v), 1e-4);
  EXPECT_LE(std::abs(o.c), 1e-3);
}

TEST(Pipelines, DriveMixerSuppression) {
  const VirtualSetup s = imperfect_setup(7);
  const CalibrationOutcome o = calibrate_drive_mixer(s, CalibrationPlan{});
  ASSERT_TRUE(o.successful);
  EXPECT_EQ(o.scans.size(), 6u);
  EXPECT_EQ(o.estimates.size(), o.scans.size());
  EXPECT_GE(o.uncalibrated_carrier_db - o.residual_carrier_db, 30.0);
  EXPECT_GE(o.uncalibrated_image_db - o.residual_image_db, 30.0);
  const DacCorrection corr = o.correction(s);
  const RfSpectrum spec = synthesize_spectrum(s.mixer, corr, s.f_lo_hz);
  EXPECT_NEAR(residual_power_db(spec, SpuriousTone::carrier), o.residual_carrier_db, 1e-9);
}

TEST(Pipelines, MeasurementMixerSuppression) {
  const VirtualSetup s = imperfect_setup(7);
  const CalibrationOutcome o = calibrate_measurement_mixer(s, CalibrationPlan{});
  ASSERT_TRUE(o.successful);
  EXPECT_GE(o.uncalibrated_carrier_db - o.residual_carrier_db, 30.0);
}

TEST(Pipelines, SeedStability) {
  const CalibrationOutcome a = calibrate_drive_mixer(imperfect_setup(1), CalibrationPlan{});
  const CalibrationOutcome a2 = calibrate_drive_mixer(imperfect_setup(1), CalibrationPlan{});
  const CalibrationOutcome b = calibrate_drive_mixer(imperfect_setup(2), CalibrationPlan{});
  EXPECT_EQ(a.i_offset_v, a2.i_offset_v);
  EXPECT_EQ(a.c, a2.c);
  EXPECT_LE(std::abs(a.i_offset_v - b.i_offset_v), 1e-4);
  EXPECT_LE(std::abs(a.q_offset_v - b.q_offset_v), 1e-4);
  EXPECT_LE(std::abs(a.c - b.c), 1e-3);
}

TEST(Sweep, DriveLineMonotoneAndCalibratedSmall) {
  const VirtualSetup s = imperfect_setup(7);
  const CalibrationOutcome o = calibrate_drive_mixer(s, CalibrationPlan{});
  const std::vector<double> df{50e6, 20e6, 10e6, 5e6, 2e6, 1e6};
  const auto rows = detuning_sweep(s, df, Line::drive, o.correction(s));
  ASSERT_EQ(rows.size(), df.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].detuning_hz, df[i]);
    EXPECT_LT(rows[i].metric_cal, 1e-3);
    EXPECT_LE(rows[i].metric_cal, rows[i].metric_uncal);
    if (i > 0) EXPECT_GT(rows[i].metric_uncal, rows[i - 1].metric_uncal);
  }
}

TEST(Sweep, MeasurementLinePhaseGrowsTowardResonance) {
  const VirtualSetup s = imperfect_setup(7);
  const std::vector<double> df{50e6, 10e6, 2e6};
  const auto rows = detuning_sweep(s, df, Line::measurement, DacCorrection{});
  EXPECT_GT(rows[1].metric_uncal, rows[0].metric_uncal);
  EXPECT_GT(rows[2].metric_uncal, rows[1].metric_uncal);
  EXPECT_EQ(rows[0].metric_uncal, rows[0].metric_cal);
}
