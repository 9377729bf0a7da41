#pragma once

#include <complex>
#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "mixcal/qubit_dynamics.hpp"
#include "mixcal/scan_grid.hpp"

namespace mixcal {

// Readout resonator coupled to the qubit. All rates are linear frequencies in
// Hz; conversion to angular units happens inside the physics routines.
struct ResonatorParams {
  double resonator_frequency_hz = 6.5e9;
  double linewidth_hz = 10e6;          // Gamma, sets the line filter factor
  double input_coupling_hz = 10e6;     // kappa
  double qubit_coupling_hz = 30e6;     // g
  double dispersive_shift_hz = 0.6e6;  // chi
  std::size_t fock_truncation = 20;

  void validate() const;
  // g / |f_q - f_r| <= 0.1
  bool dispersive_regime(const QubitParams& q) const;
};

// Leakage tone reaching the resonator input. `amplitude` is in sqrt(rad/s),
// so that sqrt(kappa) * amplitude is a rate.
struct ResonatorDrive {
  Complex amplitude{0.0, 0.0};
  double f_lo_hz = 0.0;
};

// qubit (x) truncated Fock space, index = qubit * N + n with qubit 0 = |g>.
struct JointState {
  Eigen::VectorXcd amplitudes;

  std::size_t fock_levels() const { return static_cast<std::size_t>(amplitudes.size() / 2); }
  Complex& at(int qubit, std::size_t n) { return amplitudes(static_cast<Eigen::Index>(qubit * fock_levels() + n)); }
  Complex at(int qubit, std::size_t n) const { return amplitudes(static_cast<Eigen::Index>(qubit * fock_levels() + n)); }
  double norm_squared() const { return amplitudes.squaredNorm(); }
  double top_level_population() const;
  double excited_population() const;
  double mean_photon_number() const;

  // Qubit state times a coherent state |alpha>, renormalized on the truncated space.
  static JointState product(const QubitState& qubit, Complex alpha, std::size_t fock_levels);
};

double filter_factor(double f_lo_hz, const ResonatorParams& r);

// Driven-cavity steady state |mu sqrt(kappa) A|^2 / (Delta^2 + (kappa/2)^2).
double steady_photon_number(double drive_amplitude, double f_lo_hz, const ResonatorParams& r);

// Qubit frequency shift in Hz, 2 chi n.
double qubit_shift(const ResonatorParams& r, double n_bar);

// Qubit transition frequency dressed by the vacuum (exact JC, zero photons).
double dressed_qubit_frequency_hz(const ResonatorParams& r, const QubitParams& q);

// Time-independent Hamiltonian in the frame rotating at f_lo for both qubit
// and resonator (angular units, hbar = 1).
Eigen::MatrixXcd rotating_frame_hamiltonian(const ResonatorParams& r, const QubitParams& q, const ResonatorDrive& d);

// Lab-frame state at t2 given the lab-frame state at t1. Throws
// TruncationError if the top Fock level holds more than 1e-4 population
// before or after the evolution.
JointState evolve_jaynes_cummings(const ResonatorParams& r, const QubitParams& q, const ResonatorDrive& d, double t1_s,
                                  double t2_s, const JointState& initial);

// Stationary coherent amplitude of the undamped drive in the rotating frame.
Complex stationary_field(const ResonatorParams& r, const ResonatorDrive& d);

enum class RamseyPath { dispersive, jaynes_cummings };

// P(|1>) after pi/2 - delay - pi/2 with the given leakage present.
double ramsey_population(const ResonatorParams& r, const QubitParams& q, const ResonatorDrive& d, double delay_s,
                         double virtual_detuning_hz, RamseyPath path = RamseyPath::dispersive);

// Qubit frequency shift (Hz) extracted from two-quadrature Ramsey signals at
// the given delays by a straight-line fit of the unwrapped phase, using full
// JC evolution. The reference frequency is the vacuum-dressed qubit.
double ramsey_frequency_shift_jc(const ResonatorParams& r, const QubitParams& q, const ResonatorDrive& d,
                                 std::span<const double> delays_s, const JointState* initial = nullptr);

struct RamseyConfig {
  double delay_s = 1e-6;
  double virtual_detuning_hz = 0.0;
};

// Maps a grid coordinate to the complex leakage amplitude at the resonator
// input; identity when empty.
using LeakageMap = std::function<Complex(double, double)>;

// Dispersive Ramsey |1> population over an (I0, Q0) lattice.
ScanGrid measurement_scan_map(const ResonatorParams& r, const QubitParams& q, const GridSpec& grid, double f_lo_hz,
                              const RamseyConfig& ramsey, const LeakageMap& map = {});

}  // namespace mixcal
