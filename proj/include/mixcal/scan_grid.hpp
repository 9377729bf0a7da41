#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace mixcal {

// Rectangular scan lattice centred on (x_center, y_center).
struct GridSpec {
  double x_center = 0.0;
  double y_center = 0.0;
  double x_half_span = 1.0;
  double y_half_span = 1.0;
  std::size_t nx = 41;
  std::size_t ny = 41;

  void validate() const;
  std::vector<double> x_axis() const;
  std::vector<double> y_axis() const;
};

// Lattice-aligned 2D map of measured populations. Values are stored row-major
// with x varying fastest: p[iy * nx + ix]. A NaN entry marks a point whose
// evaluation failed; it is treated as unscanned by the centre search.
struct ScanGrid {
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> p;

  static ScanGrid from_spec(const GridSpec& spec);

  std::size_t nx() const { return xs.size(); }
  std::size_t ny() const { return ys.size(); }
  std::size_t size() const { return p.size(); }
  std::size_t index(std::size_t ix, std::size_t iy) const { return iy * xs.size() + ix; }

  double& at(std::size_t ix, std::size_t iy) { return p[index(ix, iy)]; }
  double at(std::size_t ix, std::size_t iy) const { return p[index(ix, iy)]; }
  bool valid(std::size_t ix, std::size_t iy) const;
  std::size_t valid_count() const;

  double dx() const;
  double dy() const;
  std::pair<double, double> x_range() const { return {xs.front(), xs.back()}; }
  std::pair<double, double> y_range() const { return {ys.front(), ys.back()}; }

  // Throws DomainError unless the grid is at least 3x3, axes are strictly
  // increasing and uniformly spaced, and every valid p lies in [0, 1].
  void validate() const;
};

}  // namespace mixcal
