#pragma once

#include <complex>
#include <functional>

#include "mixcal/scan_grid.hpp"

namespace mixcal {

using Complex = std::complex<double>;

struct QubitParams {
  double qubit_frequency_hz = 5.0e9;
  // Lumped coupling of the drive line to the qubit, rad/s per volt.
  double drive_coupling = 2.0 * 3.14159265358979323846 * 100e6;

  void validate() const;
};

// A single off-resonant tone V0 cos(2 pi f t + phase).
struct DriveTone {
  double frequency_hz = 0.0;
  double amplitude_v = 0.0;
  double phase_rad = 0.0;

  // The tone I0 cos(wt) - Q0 sin(wt).
  static DriveTone from_iq(double frequency_hz, double i_v, double q_v);
};

struct QubitState {
  Complex c0{1.0, 0.0};
  Complex c1{0.0, 0.0};

  static QubitState ground() { return {}; }
  double norm_squared() const { return std::norm(c0) + std::norm(c1); }
  double ground_population() const { return std::norm(c0); }
};

// Closed-form ground-state population after a leakage tone acting for t0
// (first-order Magnus, boundary terms at t = 0 not included). Throws
// SingularityError on resonance and DomainError for t0 <= 0.
double leakage_ground_population(const QubitParams& q, const DriveTone& tone, double t0_s);

// Same formula with the tone given by its quadrature components. Depends on
// the phase only through cos 2theta and sin 2theta, which are formed
// algebraically so that (i, q) and (-i, -q) give bit-identical results.
double leakage_ground_population_iq(const QubitParams& q, double f_lo_hz, double i_v, double q_v, double t0_s);

// Ground-state population driven by the corrected image tone A c at
// f_lo - f_if for a square pulse of length t.
double sideband_ground_population(const QubitParams& q, double envelope_amplitude_v, Complex c, double f_lo_hz,
                                  double f_if_hz, double t_s);

// Scalar drive field V_d(t) in volts.
using DriveField = std::function<double(double)>;

// Default oracle step: 1/50 of the period of the fastest term in the lab frame.
double oracle_step(const QubitParams& q, double tone_frequency_hz);

// Fixed-step RK4 integration of i d|psi>/dt = Omega V_d(t)(cos w_q t sy - sin w_q t sx)|psi>
// from 0 to t0. The step is shrunk so an integer number of steps lands on t0.
QubitState evolve_two_level(const QubitParams& q, const DriveField& drive, double t0_s, double step_s,
                            const QubitState& initial);

// Numeric counterparts of the closed forms, starting from |0>.
double leakage_ground_population_numeric(const QubitParams& q, const DriveTone& tone, double t0_s,
                                         double step_s = 0.0);
double sideband_ground_population_numeric(const QubitParams& q, double envelope_amplitude_v, Complex c,
                                          double f_lo_hz, double f_if_hz, double t_s, double step_s = 0.0);

enum class DriveScanMode { leakage, sideband };

// Maps a grid coordinate to the spurious-tone amplitude seen by the qubit:
// the complex carrier amplitude (leakage) or the effective image coefficient
// (sideband). Identity when empty.
using ToneMap = std::function<Complex(double, double)>;

struct DriveScanConfig {
  double f_lo_hz = 5.0e9;
  double f_if_hz = 100e6;
  double pulse_duration_s = 10e-6;
  double envelope_amplitude_v = 1.0;  // used only by sideband scans
  bool use_oracle = false;
  ToneMap tone_map;
};

// Ground-state population over a lattice of (I0, Q0) or (Re c, Im c).
// Points where the closed form is singular are stored as NaN.
ScanGrid drive_scan_map(const QubitParams& q, const DriveScanConfig& cfg, const GridSpec& grid, DriveScanMode mode);

// Envelope amplitude for which the largest closed-form excitation over the
// grid equals `target_excitation` (in (0, 1)).
double sideband_amplitude_for_excitation(const QubitParams& q, const DriveScanConfig& cfg, const GridSpec& grid,
                                         double target_excitation = 0.5);

}  // namespace mixcal
