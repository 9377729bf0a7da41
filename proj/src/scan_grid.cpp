#include "mixcal/scan_grid.hpp"

#include <cmath>
#include <string>

#include "mixcal/errors.hpp"

namespace mixcal {
namespace {

std::vector<double> symmetric_axis(double center, double half_span, std::size_t n) {
  std::vector<double> axis(n);
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    // (2i - (n-1)) is an exactly negated integer pair, so a zero-centred axis is exactly symmetric.
    const double k = 2.0 * static_cast<double>(i) - denom;
    axis[i] = center + half_span * (k / denom);
  }
  return axis;
}

void check_axis(const std::vector<double>& axis, const char* name) {
  if (axis.size() < 3) throw DomainError(std::string("scan grid needs at least 3 points along ") + name);
  const double step = (axis.back() - axis.front()) / static_cast<double>(axis.size() - 1);
  if (!(step > 0.0)) throw DomainError(std::string("scan axis ") + name + " must be strictly increasing");
  for (std::size_t i = 1; i < axis.size(); ++i) {
    const double d = axis[i] - axis[i - 1];
    if (!(d > 0.0) || std::abs(d - step) > 1e-6 * step)
      throw DomainError(std::string("scan axis ") + name + " is not a uniform lattice");
  }
}

}  // namespace

void GridSpec::validate() const {
  if (nx < 3 || ny < 3) throw DomainError("scan grid needs at least 3x3 points");
  if (!(x_half_span > 0.0) || !(y_half_span > 0.0)) throw DomainError("scan half-spans must be > 0");
}

std::vector<double> GridSpec::x_axis() const { return symmetric_axis(x_center, x_half_span, nx); }
std::vector<double> GridSpec::y_axis() const { return symmetric_axis(y_center, y_half_span, ny); }

ScanGrid ScanGrid::from_spec(const GridSpec& spec) {
  spec.validate();
  ScanGrid g;
  g.xs = spec.x_axis();
  g.ys = spec.y_axis();
  g.p.assign(g.xs.size() * g.ys.size(), 0.0);
  return g;
}

bool ScanGrid::valid(std::size_t ix, std::size_t iy) const { return !std::isnan(at(ix, iy)); }

std::size_t ScanGrid::valid_count() const {
  std::size_t n = 0;
  for (double v : p) n += std::isnan(v) ? 0 : 1;
  return n;
}

double ScanGrid::dx() const { return (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1); }
double ScanGrid::dy() const { return (ys.back() - ys.front()) / static_cast<double>(ys.size() - 1); }

void ScanGrid::validate() const {
  check_axis(xs, "x");
  check_axis(ys, "y");
  if (p.size() != xs.size() * ys.size()) throw DomainError("scan grid population count does not match lattice");
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double v = p[i];
    if (std::isnan(v)) continue;
    if (!(v >= 0.0 && v <= 1.0))
      throw DomainError("population out of [0,1] at point " + std::to_string(i));
  }
}

}  // namespace mixcal
