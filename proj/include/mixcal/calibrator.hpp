#pragma once

#include <cstddef>
#include <vector>

#include "mixcal/scan_grid.hpp"

namespace mixcal {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

enum class WeightMode { raw, background_subtracted };

// Zero-valued radius / convergence_tol mean "derive from the grid": radius is
// half the (smaller) scanned range, tolerance half the (larger) spacing.
struct SearchConfig {
  double radius = 0.0;
  double window_shrink = 0.5;
  int max_iterations = 20;
  double convergence_tol = 0.0;
  std::size_t candidates_per_axis = 9;
  double initial_window_fraction = 0.5;  // window width / scanned range

  void validate() const;
  SearchConfig resolved_for(const ScanGrid& grid) const;
};

struct CenterEstimate {
  Point2 center;
  double loss_value = 0.0;
  std::vector<Point2> trajectory;  // initial centre followed by every accepted centre
  int iterations = 0;
  bool converged = false;
};

// Weighted mean of the scanned coordinates. Weights are p, or p - min(p).
// Throws DegenerateGridError when the weights sum to zero.
Point2 center_of_gravity(const ScanGrid& grid, WeightMode mode);

// Mean |p(x', y') - p(2x - x', 2y - y')| over valid scanned points closer
// than `radius` to (x, y). Mirror points that were not scanned take the value
// of the nearest valid point (Euclidean, ties to the lexicographically
// smallest (x, y)). Throws DomainError if no point lies within the radius.
double centrosymmetry_loss(const ScanGrid& grid, double x, double y, double radius);

// Shrinking-window search for the point of best centrosymmetry.
CenterEstimate refine_center(const ScanGrid& grid, Point2 initial, const SearchConfig& cfg);

// Centre of gravity followed by refinement.
CenterEstimate calibrate(const ScanGrid& grid, const SearchConfig& cfg, WeightMode mode);

}  // namespace mixcal
