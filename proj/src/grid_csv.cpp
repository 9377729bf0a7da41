#include "mixcal/grid_csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "mixcal/errors.hpp"

namespace mixcal {
namespace {

[[noreturn]] void bad_line(std::size_t line, const std::string& what) {
  throw IoError("grid csv line " + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& field, std::size_t line) {
  if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || field.empty()) bad_line(line, "cannot parse number '" + field + "'");
  return v;
}

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

void write_grid_csv(std::ostream& out, const ScanGrid& grid, ScanKind kind) {
  if (kind == ScanKind::drive_sideband) out << "# x=Re(c), y=Im(c)\n";
  out << "x,y,p\n";
  for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
    for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
      out << format_number(grid.xs[ix]) << ',' << format_number(grid.ys[iy]) << ',' << format_number(grid.at(ix, iy))
          << '\n';
    }
  }
}

std::string grid_csv(const ScanGrid& grid, ScanKind kind) {
  std::ostringstream out;
  write_grid_csv(out, grid, kind);
  return out.str();
}

ScanGrid read_grid_csv(std::istream& in) {
  std::string text;
  std::size_t line_no = 0;
  bool header = false;
  std::vector<double> x, y, p;
  std::vector<std::size_t> lines;
  while (std::getline(in, text)) {
    ++line_no;
    if (!text.empty() && text.back() == '\r') bad_line(line_no, "CR line ending");
    if (!header) {
      if (!text.empty() && text[0] == '#') continue;
      if (text != "x,y,p") bad_line(line_no, "expected header x,y,p");
      header = true;
      continue;
    }
    if (text.empty()) bad_line(line_no, "empty row");
    const auto c1 = text.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : text.find(',', c1 + 1);
    if (c2 == std::string::npos || text.find(',', c2 + 1) != std::string::npos) bad_line(line_no, "expected 3 fields");
    x.push_back(parse_number(text.substr(0, c1), line_no));
    y.push_back(parse_number(text.substr(c1 + 1, c2 - c1 - 1), line_no));
    p.push_back(parse_number(text.substr(c2 + 1), line_no));
    lines.push_back(line_no);
  }
  if (!header) bad_line(line_no, "missing header");
  if (x.empty()) bad_line(line_no, "no data rows");

  ScanGrid g;
  std::size_t nx = 0;
  while (nx < y.size() && y[nx] == y[0]) ++nx;
  if (x.size() % nx != 0) bad_line(lines.back(), "row count is not a multiple of the row length");
  const std::size_t ny = x.size() / nx;
  g.xs.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(nx));
  for (std::size_t iy = 0; iy < ny; ++iy) g.ys.push_back(y[iy * nx]);
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!same(x[k], g.xs[k % nx]) || !same(y[k], g.ys[k / nx])) bad_line(lines[k], "row does not lie on the lattice");
  }
  g.p = std::move(p);
  return g;
}

ScanGrid parse_grid_csv(const std::string& text) {
  std::istringstream in(text);
  return read_grid_csv(in);
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "detuning_hz,metric_uncal,metric_cal\n";
  for (const SweepRow& r : rows) {
    out << format_number(r.detuning_hz) << ',' << format_number(r.metric_uncal) << ',' << format_number(r.metric_cal)
        << '\n';
  }
}

}  // namespace mixcal
