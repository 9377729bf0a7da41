#include "mixcal/calibrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "mixcal/errors.hpp"

namespace mixcal {
namespace {

// Nearest index on a sorted axis; ties go to the lower index.
std::size_t nearest_index(const std::vector<double>& axis, double v) {
  const double step = (axis.back() - axis.front()) / static_cast<double>(axis.size() - 1);
  const double u = (v - axis.front()) / step;
  const double last = static_cast<double>(axis.size() - 1);
  const double guess = std::clamp(std::ceil(u - 0.5), 0.0, last);
  auto best = static_cast<std::size_t>(guess);
  const std::size_t lo = best > 0 ? best - 1 : 0;
  const std::size_t hi = std::min(best + 1, axis.size() - 1);
  double best_d = std::abs(axis[best] - v);
  for (std::size_t j = lo; j <= hi; ++j) {
    const double d = std::abs(axis[j] - v);
    if (d < best_d || (d == best_d && j < best)) {
      best = j;
      best_d = d;
    }
  }
  return best;
}

class MirrorLookup {
 public:
  explicit MirrorLookup(const ScanGrid& grid) : grid_(grid) {
    if (grid.valid_count() != grid.size()) {
      for (std::size_t iy = 0; iy < grid.ny(); ++iy)
        for (std::size_t ix = 0; ix < grid.nx(); ++ix)
          if (grid.valid(ix, iy)) valid_.push_back({ix, iy});
      // lexicographic (x, y) order so the first minimum found wins ties
      std::sort(valid_.begin(), valid_.end(), [](const auto& a, const auto& b) {
        return std::tie(a.first, a.second) < std::tie(b.first, b.second);
      });
    }
  }

  double value_near(double x, double y) const {
    const std::size_t ix = nearest_index(grid_.xs, x);
    const std::size_t iy = nearest_index(grid_.ys, y);
    if (grid_.valid(ix, iy)) return grid_.at(ix, iy);
    double best_d = std::numeric_limits<double>::infinity();
    double best_p = std::numeric_limits<double>::quiet_NaN();
    for (const auto& [jx, jy] : valid_) {
      const double ddx = grid_.xs[jx] - x;
      const double ddy = grid_.ys[jy] - y;
      const double d = ddx * ddx + ddy * ddy;
      if (d < best_d) {
        best_d = d;
        best_p = grid_.at(jx, jy);
      }
    }
    return best_p;
  }

 private:
  const ScanGrid& grid_;
  std::vector<std::pair<std::size_t, std::size_t>> valid_;
};

double loss_with(const ScanGrid& grid, const MirrorLookup& lookup, double x, double y, double radius) {
  const double r2 = radius * radius;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
    const double yy = grid.ys[iy];
    const double ddy = yy - y;
    if (ddy * ddy >= r2) continue;
    for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
      const double xx = grid.xs[ix];
      const double ddx = xx - x;
      if (ddx * ddx + ddy * ddy >= r2 || !grid.valid(ix, iy)) continue;
      sum += std::abs(grid.at(ix, iy) - lookup.value_near(2.0 * x - xx, 2.0 * y - yy));
      ++count;
    }
  }
  if (count == 0) throw DomainError("no scanned point within the loss radius");
  return sum / static_cast<double>(count);
}

Point2 clamp_to(const ScanGrid& grid, Point2 p) {
  return {std::clamp(p.x, grid.xs.front(), grid.xs.back()), std::clamp(p.y, grid.ys.front(), grid.ys.back())};
}

}  // namespace

void SearchConfig::validate() const {
  if (!(radius >= 0.0)) throw DomainError("search radius must be > 0 (or 0 for automatic)");
  if (!(window_shrink > 0.0 && window_shrink < 1.0)) throw DomainError("window_shrink must be in (0, 1)");
  if (max_iterations < 1) throw DomainError("max_iterations must be >= 1");
  if (!(convergence_tol >= 0.0)) throw DomainError("convergence_tol must be > 0 (or 0 for automatic)");
  if (candidates_per_axis < 2) throw DomainError("need at least 2 candidates per axis");
  if (!(initial_window_fraction > 0.0)) throw DomainError("initial window fraction must be > 0");
}

SearchConfig SearchConfig::resolved_for(const ScanGrid& grid) const {
  validate();
  SearchConfig out = *this;
  const double span_x = grid.xs.back() - grid.xs.front();
  const double span_y = grid.ys.back() - grid.ys.front();
  if (out.radius == 0.0) out.radius = 0.5 * std::min(span_x, span_y);
  if (out.convergence_tol == 0.0) out.convergence_tol = 0.5 * std::max(grid.dx(), grid.dy());
  return out;
}

Point2 center_of_gravity(const ScanGrid& grid, WeightMode mode) {
  grid.validate();
  double floor = 0.0;
  if (mode == WeightMode::background_subtracted) {
    floor = std::numeric_limits<double>::infinity();
    for (double v : grid.p)
      if (!std::isnan(v)) floor = std::min(floor, v);
  }
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
    for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
      if (!grid.valid(ix, iy)) continue;
      const double w = grid.at(ix, iy) - floor;
      sw += w;
      sx += w * grid.xs[ix];
      sy += w * grid.ys[iy];
    }
  }
  if (!(sw > 0.0)) throw DegenerateGridError("scan weights sum to zero; no centre of gravity");
  return {sx / sw, sy / sw};
}

double centrosymmetry_loss(const ScanGrid& grid, double x, double y, double radius) {
  grid.validate();
  if (!(radius > 0.0)) throw DomainError("loss radius must be > 0");
  return loss_with(grid, MirrorLookup(grid), x, y, radius);
}

CenterEstimate refine_center(const ScanGrid& grid, Point2 initial, const SearchConfig& cfg_in) {
  grid.validate();
  const SearchConfig cfg = cfg_in.resolved_for(grid);
  const MirrorLookup lookup(grid);

  CenterEstimate est;
  Point2 current = clamp_to(grid, initial);
  est.trajectory.push_back(current);
  double half_wx = 0.5 * cfg.initial_window_fraction * (grid.xs.back() - grid.xs.front());
  double half_wy = 0.5 * cfg.initial_window_fraction * (grid.ys.back() - grid.ys.front());
  const double steps = static_cast<double>(cfg.candidates_per_axis - 1);
  double current_loss = loss_with(grid, lookup, current.x, current.y, cfg.radius);

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    // ranking key: loss, then distance from the current centre, then (x, y)
    Point2 best = current;
    double best_loss = current_loss;
    double best_dist = 0.0;
    for (std::size_t j = 0; j < cfg.candidates_per_axis; ++j) {
      const double cy = current.y + half_wy * (2.0 * static_cast<double>(j) / steps - 1.0);
      if (cy < grid.ys.front() || cy > grid.ys.back()) continue;
      for (std::size_t i = 0; i < cfg.candidates_per_axis; ++i) {
        const double cx = current.x + half_wx * (2.0 * static_cast<double>(i) / steps - 1.0);
        if (cx < grid.xs.front() || cx > grid.xs.back()) continue;
        const double l = loss_with(grid, lookup, cx, cy, cfg.radius);
        const double d = std::hypot(cx - current.x, cy - current.y);
        if (std::tie(l, d, cx, cy) < std::tie(best_loss, best_dist, best.x, best.y)) {
          best = {cx, cy};
          best_loss = l;
          best_dist = d;
        }
      }
    }
    const double displacement = std::hypot(best.x - current.x, best.y - current.y);
    current = best;
    current_loss = best_loss;
    est.trajectory.push_back(current);
    est.iterations = it;
    half_wx *= cfg.window_shrink;
    half_wy *= cfg.window_shrink;
    if (displacement < cfg.convergence_tol) {
      est.converged = true;
      break;
    }
  }
  est.center = current;
  est.loss_value = current_loss;
  return est;
}

CenterEstimate calibrate(const ScanGrid& grid, const SearchConfig& cfg, WeightMode mode) {
  return refine_center(grid, center_of_gravity(grid, mode), cfg);
}

}  // namespace mixcal
