#include "mixcal/calibrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "gtest/gtest.h"
#include "mixcal/errors.hpp"
#include "mixcal/virtual_lab.hpp"

using namespace mixcal;

namespace {

ScanGrid filled(const GridSpec& spec, double value) {
  ScanGrid g = ScanGrid::from_spec(spec);
  std::fill(g.p.begin(), g.p.end(), value);
  return g;
}

// Pattern symmetric in lattice indices about (cx, cy).
ScanGrid index_symmetric(std::size_t n, std::size_t cx, std::size_t cy) {
  ScanGrid g = ScanGrid::from_spec(GridSpec{0.0, 0.0, 1.0, 1.0, n, n});
  for (std::size_t iy = 0; iy < n; ++iy) {
    for (std::size_t ix = 0; ix < n; ++ix) {
      const double di = std::abs(static_cast<double>(ix) - static_cast<double>(cx));
      const double dj = std::abs(static_cast<double>(iy) - static_cast<double>(cy));
      g.at(ix, iy) = 0.5 + 0.4 * std::cos(0.7 * di * di + 0.3 * dj * dj + 0.2 * di * dj);
    }
  }
  return g;
}

VirtualSetup leaky_setup(std::uint64_t seed, std::size_t shots) {
  VirtualSetup s;
  s.mixer.carrier_leakage = std::polar(0.02, M_PI / 3);
  s.mixer.image_gain = std::polar(0.05, -0.7);
  s.noise.shots = shots;
  s.noise.seed = seed;
  return s;
}

ScanGrid leakage_pattern(std::uint64_t seed, std::size_t shots, double detuning_hz) {
  DriveLeakageScan scan;
  scan.detuning_hz = detuning_hz;
  return run_drive_leakage_scan(leaky_setup(seed, shots), scan).grid;
}

ScanGrid reflected(const ScanGrid& g) {
  ScanGrid r;
  for (auto it = g.xs.rbegin(); it != g.xs.rend(); ++it) r.xs.push_back(-*it);
  for (auto it = g.ys.rbegin(); it != g.ys.rend(); ++it) r.ys.push_back(-*it);
  r.p.resize(g.size());
  for (std::size_t iy = 0; iy < g.ny(); ++iy)
    for (std::size_t ix = 0; ix < g.nx(); ++ix) r.at(ix, iy) = g.at(g.nx() - 1 - ix, g.ny() - 1 - iy);
  return r;
}

const Point2 kTruth{-0.02 * std::cos(M_PI / 3), -0.02 * std::sin(M_PI / 3)};

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

TEST(CenterOfGravity, PointMass) {
  ScanGrid g = filled(GridSpec{2.0, 2.0, 2.0, 2.0, 5, 5}, 0.0);
  g.at(2, 3) = 1.0;
  const Point2 c = center_of_gravity(g, WeightMode::raw);
  EXPECT_EQ(c.x, 2.0);
  EXPECT_EQ(c.y, 3.0);
}

TEST(CenterOfGravity, UniformGivesGeometricCenter) {
  const Point2 c = center_of_gravity(filled(GridSpec{0.0, 0.0, 0.3, 0.7, 41, 31}, 0.42), WeightMode::raw);
  EXPECT_NEAR(c.x, 0.0, 1e-15);
  EXPECT_NEAR(c.y, 0.0, 1e-15);
}

TEST(CenterOfGravity, GaussianBump) {
  ScanGrid g = ScanGrid::from_spec(GridSpec{0.0, 0.0, 1.0, 1.0, 41, 41});
  for (std::size_t iy = 0; iy < 41; ++iy)
    for (std::size_t ix = 0; ix < 41; ++ix) {
      const double dx = g.xs[ix] - 0.1, dy = g.ys[iy] + 0.2;
      g.at(ix, iy) = std::exp(-(dx * dx + dy * dy) / (2 * 0.15 * 0.15));
    }
  const Point2 c = center_of_gravity(g, WeightMode::raw);
  EXPECT_NEAR(c.x, 0.099999999720475, 1e-12);
  EXPECT_NEAR(c.y, -0.199999985864830, 1e-12);
  EXPECT_LT(distance(c, {0.1, -0.2}), g.dx());
}

TEST(CenterOfGravity, BackgroundSubtraction) {
  ScanGrid g = ScanGrid::from_spec(GridSpec{0.0, 0.0, 1.0, 1.0, 41, 41});
  ScanGrid bare = g;
  for (std::size_t iy = 0; iy < 41; ++iy)
    for (std::size_t ix = 0; ix < 41; ++ix) {
      const double dx = g.xs[ix] - 0.3, dy = g.ys[iy] - 0.1;
      bare.at(ix, iy) = 0.4 * std::exp(-(dx * dx + dy * dy) / 0.02);
      g.at(ix, iy) = 0.6 + bare.at(ix, iy);
    }
  double floor = 1.0;
  for (double v : g.p) floor = std::min(floor, v);
  ScanGrid shifted = g;
  for (double& v : shifted.p) v -= floor;
  const Point2 sub = center_of_gravity(g, WeightMode::background_subtracted);
  const Point2 ref = center_of_gravity(shifted, WeightMode::raw);
  EXPECT_NEAR(sub.x, ref.x, 1e-14);
  EXPECT_NEAR(sub.y, ref.y, 1e-14);
  const Point2 raw = center_of_gravity(g, WeightMode::raw);
  EXPECT_LT(distance(sub, {0.3, 0.1}), distance(raw, {0.3, 0.1}));
}

TEST(CenterOfGravity, DegenerateWeights) {
  EXPECT_THROW(center_of_gravity(filled(GridSpec{}, 0.0), WeightMode::raw), DegenerateGridError);
  EXPECT_THROW(center_of_gravity(filled(GridSpec{}, 0.7), WeightMode::background_subtracted), DegenerateGridError);
}

TEST(CentrosymmetryLoss, ZeroAtTrueCenter) {
  const ScanGrid g = index_symmetric(41, 17, 23);
  EXPECT_EQ(centrosymmetry_loss(g, g.xs[17], g.ys[23], 0.5), 0.0);
  EXPECT_GT(centrosymmetry_loss(g, g.xs[18], g.ys[23], 0.5), 0.0);
}

TEST(CentrosymmetryLoss, ConstantGridIsZeroEverywhere) {
  const ScanGrid g = filled(GridSpec{0.0, 0.0, 1.0, 1.0, 21, 21}, 0.5);
  for (double x : {-0.93, -0.2, 0.0, 0.51}) {
    for (double y : {-1.0, 0.37, 0.99}) EXPECT_EQ(centrosymmetry_loss(g, x, y, 0.5), 0.0);
  }
}

TEST(CentrosymmetryLoss, LinearRampEnumeration) {
  // p = x on [0, 1] x [-0.5, 0.5]; around (0.5, 0) each term is |2x' - 1|.
  ScanGrid g = ScanGrid::from_spec(GridSpec{0.5, 0.0, 0.5, 0.5, 11, 11});
  for (std::size_t iy = 0; iy < 11; ++iy)
    for (std::size_t ix = 0; ix < 11; ++ix) g.at(ix, iy) = g.xs[ix];
  double sum = 0.0;
  int count = 0;
  for (std::size_t iy = 0; iy < 11; ++iy)
    for (std::size_t ix = 0; ix < 11; ++ix) {
      const double dx = g.xs[ix] - 0.5, dy = g.ys[iy];
      if (dx * dx + dy * dy < 0.275 * 0.275) {
        sum += std::abs(g.xs[ix] - g.xs[10 - ix]);
        ++count;
      }
    }
  const double loss = centrosymmetry_loss(g, 0.5, 0.0, 0.275);
  EXPECT_EQ(count, 21);
  EXPECT_EQ(loss, sum / count);
  EXPECT_NEAR(loss, 0.20952380952380958, 1e-15);
}

TEST(CentrosymmetryLoss, NonNegativeAndNearestMirror) {
  const ScanGrid g = leakage_pattern(3, 1000, 2e6);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (int k = 0; k < 50; ++k) EXPECT_GE(centrosymmetry_loss(g, u(rng), u(rng), 0.05), 0.0);
}

TEST(CentrosymmetryLoss, UnscannedPointsUseNearestValid) {
  ScanGrid g = index_symmetric(21, 10, 10);
  const double before = centrosymmetry_loss(g, g.xs[10], g.ys[10], 0.3);
  g.at(4, 10) = std::numeric_limits<double>::quiet_NaN();
  const double after = centrosymmetry_loss(g, g.xs[10], g.ys[10], 0.3);
  EXPECT_TRUE(std::isfinite(after));
  EXPECT_GE(after, before);
}

TEST(CentrosymmetryLoss, EmptyNeighbourhoodRejected) {
  const ScanGrid g = filled(GridSpec{0.0, 0.0, 1.0, 1.0, 11, 11}, 0.3);
  EXPECT_THROW(centrosymmetry_loss(g, 0.05, 0.05, 1e-6), DomainError);
  EXPECT_THROW(centrosymmetry_loss(g, 0.0, 0.0, 0.0), DomainError);
}

TEST(SearchConfig, DefaultsResolvedFromGrid) {
  const ScanGrid g = filled(GridSpec{0.0, 0.0, 0.1, 0.2, 41, 21}, 0.5);
  const SearchConfig c = SearchConfig{}.resolved_for(g);
  EXPECT_DOUBLE_EQ(c.radius, 0.1);
  EXPECT_DOUBLE_EQ(c.convergence_tol, 0.5 * g.dy());
  SearchConfig bad;
  bad.window_shrink = 1.0;
  EXPECT_THROW(bad.validate(), DomainError);
  bad = {};
  bad.max_iterations = 0;
  EXPECT_THROW(bad.validate(), DomainError);
  bad = {};
  bad.radius = -1.0;
  EXPECT_THROW(bad.validate(), DomainError);
}

TEST(RefineCenter, AlreadyAtCenter) {
  const ScanGrid g = index_symmetric(41, 20, 20);
  const Point2 start{g.xs[20], g.ys[20]};
  const CenterEstimate e = refine_center(g, start, SearchConfig{});
  EXPECT_TRUE(e.converged);
  EXPECT_EQ(e.iterations, 1);
  EXPECT_EQ(e.center, start);
  EXPECT_EQ(e.loss_value, 0.0);
  ASSERT_EQ(e.trajectory.size(), 2u);
  EXPECT_EQ(e.trajectory.front(), start);
}

TEST(RefineCenter, RingPatternRecovered) {
  const ScanGrid g = leakage_pattern(0, 0, 2e6);
  const CenterEstimate e = calibrate(g, SearchConfig{}, WeightMode::raw);
  EXPECT_TRUE(e.converged);
  EXPECT_LE(e.iterations, 10);
  EXPECT_LE(distance(e.center, kTruth), 0.5 * g.dx());
  EXPECT_EQ(e.trajectory.size(), static_cast<std::size_t>(e.iterations) + 1);
}

TEST(RefineCenter, ButterflyAndRingShareOptimum) {
  const CenterEstimate ring = calibrate(leakage_pattern(0, 0, 2e6), SearchConfig{}, WeightMode::raw);
  const ScanGrid bg = leakage_pattern(0, 0, 0.5e6);
  const CenterEstimate butterfly = calibrate(bg, SearchConfig{}, WeightMode::raw);
  EXPECT_TRUE(butterfly.converged);
  EXPECT_LE(distance(butterfly.center, kTruth), 0.5 * bg.dx());
  EXPECT_LE(distance(butterfly.center, ring.center), bg.dx());
}

TEST(RefineCenter, InitialOutsideRangeIsClamped) {
  const ScanGrid g = leakage_pattern(0, 0, 2e6);
  const CenterEstimate e = refine_center(g, Point2{5.0, -5.0}, SearchConfig{});
  EXPECT_EQ(e.trajectory.front(), (Point2{0.1, -0.1}));
  for (const Point2& p : e.trajectory) {
    EXPECT_GE(p.x, g.xs.front());
    EXPECT_LE(p.x, g.xs.back());
    EXPECT_GE(p.y, g.ys.front());
    EXPECT_LE(p.y, g.ys.back());
  }
}

TEST(RefineCenter, NonConvergenceReported) {
  const ScanGrid g = leakage_pattern(1, 1000, 2e6);
  SearchConfig cfg;
  cfg.max_iterations = 1;
  cfg.convergence_tol = 1e-12;
  const CenterEstimate e = refine_center(g, Point2{0.05, 0.05}, cfg);
  EXPECT_FALSE(e.converged);
  EXPECT_EQ(e.iterations, 1);
}

TEST(Calibrate, Deterministic) {
  const ScanGrid g = leakage_pattern(9, 1000, 2e6);
  const CenterEstimate a = calibrate(g, SearchConfig{}, WeightMode::raw);
  const CenterEstimate b = calibrate(g, SearchConfig{}, WeightMode::raw);
  EXPECT_EQ(a.trajectory, b.trajectory);
  EXPECT_EQ(a.loss_value, b.loss_value);
}

TEST(Calibrate, TranslationEquivariance) {
  const ScanGrid g = leakage_pattern(4, 1000, 2e6);
  ScanGrid moved = g;
  for (double& x : moved.xs) x += 0.75;
  for (double& y : moved.ys) y -= 0.5;
  const Point2 c0 = center_of_gravity(g, WeightMode::raw);
  const Point2 c1 = center_of_gravity(moved, WeightMode::raw);
  EXPECT_NEAR(c1.x - c0.x, 0.75, 1e-12);
  EXPECT_NEAR(c1.y - c0.y, -0.5, 1e-12);
  const CenterEstimate e0 = calibrate(g, SearchConfig{}, WeightMode::raw);
  const CenterEstimate e1 = calibrate(moved, SearchConfig{}, WeightMode::raw);
  EXPECT_EQ(e0.iterations, e1.iterations);
  EXPECT_NEAR(e1.center.x - e0.center.x, 0.75, 1e-12);
  EXPECT_NEAR(e1.center.y - e0.center.y, -0.5, 1e-12);
}

TEST(Calibrate, ReflectionEquivariance) {
  const ScanGrid g = leakage_pattern(6, 1000, 2e6);
  const ScanGrid r = reflected(g);
  const Point2 c0 = center_of_gravity(g, WeightMode::raw);
  const Point2 c1 = center_of_gravity(r, WeightMode::raw);
  EXPECT_NEAR(c1.x, -c0.x, 1e-15);
  EXPECT_NEAR(c1.y, -c0.y, 1e-15);
  const CenterEstimate e0 = calibrate(g, SearchConfig{}, WeightMode::raw);
  const CenterEstimate e1 = calibrate(r, SearchConfig{}, WeightMode::raw);
  EXPECT_NEAR(e1.center.x, -e0.center.x, 1e-12);
  EXPECT_NEAR(e1.center.y, -e0.center.y, 1e-12);
}

TEST(Calibrate, SymmetricNoiselessGridExactCenter) {
  const ScanGrid g = index_symmetric(41, 20, 20);
  const CenterEstimate e = calibrate(g, SearchConfig{}, WeightMode::raw);
  EXPECT_NEAR(e.center.x, g.xs[20], 1e-15);
  EXPECT_NEAR(e.center.y, g.ys[20], 1e-15);
  EXPECT_EQ(e.loss_value, 0.0);
}

TEST(Calibrate, OnePercentAdditiveNoise) {
  ScanGrid g = leakage_pattern(0, 0, 2e6);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-0.01, 0.01);
  for (double& p : g.p) p = std::clamp(p + u(rng), 0.0, 1.0);
  const CenterEstimate e = calibrate(g, SearchConfig{}, WeightMode::raw);
  EXPECT_LE(distance(e.center, kTruth), g.dx());
}

TEST(Calibrate, RobustToBoundedNoise) {
  const ScanGrid clean = leakage_pattern(0, 0, 2e6);
  double lo = 1.0, hi = 0.0;
  for (double p : clean.p) {
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    ScanGrid g = clean;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.05 * (hi - lo), 0.05 * (hi - lo));
    for (double& p : g.p) p = std::clamp(p + u(rng), 0.0, 1.0);
    const CenterEstimate e = calibrate(g, SearchConfig{}, WeightMode::raw);
    if (distance(e.center, kTruth) <= g.dx()) ++ok;
  }
  EXPECT_GE(ok, 95);
}
