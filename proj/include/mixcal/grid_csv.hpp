#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "mixcal/scan_grid.hpp"
#include "mixcal/virtual_lab.hpp"

namespace mixcal {

// Shortest decimal text that parses back to exactly `v` ("nan", "inf" for non-finite).
std::string format_number(double v);

// Header `x,y,p`, one row per lattice point with x varying fastest, LF line
// endings. Sideband grids are preceded by a comment naming the c-plane axes.
void write_grid_csv(std::ostream& out, const ScanGrid& grid, ScanKind kind);
std::string grid_csv(const ScanGrid& grid, ScanKind kind);

// Inverse of write_grid_csv. Leading '#' lines are skipped. Throws IoError
// naming the line for malformed input or rows that do not form a lattice.
ScanGrid read_grid_csv(std::istream& in);
ScanGrid parse_grid_csv(const std::string& text);

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace mixcal
