#include "mixcal/resonator_dynamics.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "mixcal/errors.hpp"
#include "mixcal/matrix_exponential.hpp"

namespace mixcal {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kTruncationLimit = 1e-4;

void check_truncation(const JointState& s, const char* when) {
  const double top = s.top_level_population();
  if (top > kTruncationLimit)
    throw TruncationError(std::string("Fock truncation too small ") + when + ": top-level population " +
                          std::to_string(top) + " > 1e-4; increase fock_truncation");
}

// Qubit-only rotation by pi/2 about an equatorial axis at angle beta.
JointState half_pi_pulse(const JointState& s, double beta) {
  JointState out = s;
  const std::size_t n_levels = s.fock_levels();
  const double k = 1.0 / std::sqrt(2.0);
  const Complex e_minus = Complex(0.0, -1.0) * std::polar(1.0, -beta);
  const Complex e_plus = Complex(0.0, -1.0) * std::polar(1.0, beta);
  for (std::size_t n = 0; n < n_levels; ++n) {
    const Complex g = s.at(0, n);
    const Complex e = s.at(1, n);
    out.at(0, n) = k * (g + e_minus * e);
    out.at(1, n) = k * (e_plus * g + e);
  }
  return out;
}

// Removes the reference precession of the qubit: |e,n> *= e^{i w_ref t}.
JointState to_reference_frame(JointState s, double omega_ref, double t) {
  const Complex phase = std::polar(1.0, omega_ref * t);
  for (std::size_t n = 0; n < s.fock_levels(); ++n) s.at(1, n) *= phase;
  return s;
}

JointState ramsey_initial(const ResonatorParams& r, const ResonatorDrive& d) {
  const double k = 1.0 / std::sqrt(2.0);
  return JointState::product(QubitState{Complex(k, 0.0), Complex(0.0, -k)}, stationary_field(r, d), r.fock_truncation);
}

// State just before the second Ramsey pulse, in the reference frame.
JointState ramsey_free_evolution(const ResonatorParams& r, const QubitParams& q, const ResonatorDrive& d,
                                 double delay_s, double virtual_detuning_hz, const JointState& initial) {
  const JointState lab = evolve_jaynes_cummings(r, q, d, 0.0, delay_s, initial);
  const double omega_ref = kTwoPi * (dressed_qubit_frequency_hz(r, q) - virtual_detuning_hz);
  return to_reference_frame(lab, omega_ref, delay_s);
}

}  // namespace

void ResonatorParams::validate() const {
  if (!(resonator_frequency_hz > 0.0)) throw DomainError("resonator frequency must be > 0");
  if (!(linewidth_hz > 0.0)) throw DomainError("resonator linewidth must be > 0");
  if (!(input_coupling_hz > 0.0)) throw DomainError("input coupling must be > 0");
  if (!(qubit_coupling_hz > 0.0)) throw DomainError("qubit coupling must be > 0");
  if (!(dispersive_shift_hz > 0.0)) throw DomainError("dispersive shift must be > 0");
  if (fock_truncation < 2) throw DomainError("fock truncation must be >= 2");
}

bool ResonatorParams::dispersive_regime(const QubitParams& q) const {
  const double detuning = std::abs(q.qubit_frequency_hz - resonator_frequency_hz);
  return detuning > 0.0 && qubit_coupling_hz / detuning <= 0.1;
}

double JointState::top_level_population() const {
  const std::size_t n = fock_levels();
  if (n == 0) return 0.0;
  return std::norm(at(0, n - 1)) + std::norm(at(1, n - 1));
}

double JointState::excited_population() const {
  double s = 0.0;
  for (std::size_t n = 0; n < fock_levels(); ++n) s += std::norm(at(1, n));
  return s;
}

double JointState::mean_photon_number() const {
  double s = 0.0;
  for (std::size_t n = 0; n < fock_levels(); ++n)
    s += static_cast<double>(n) * (std::norm(at(0, n)) + std::norm(at(1, n)));
  return s;
}

JointState JointState::product(const QubitState& qubit, Complex alpha, std::size_t fock_levels) {
  if (fock_levels < 2) throw DomainError("fock truncation must be >= 2");
  JointState s;
  s.amplitudes = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(2 * fock_levels));
  // alpha^n / sqrt(n!) built recursively; the overall e^{-|alpha|^2/2} drops out on renormalization.
  std::vector<Complex> fock(fock_levels);
  fock[0] = 1.0;
  for (std::size_t n = 1; n < fock_levels; ++n) fock[n] = fock[n - 1] * alpha / std::sqrt(static_cast<double>(n));
  double norm = 0.0;
  for (const auto& f : fock) norm += std::norm(f);
  const double scale = 1.0 / std::sqrt(norm);
  for (std::size_t n = 0; n < fock_levels; ++n) {
    s.at(0, n) = qubit.c0 * fock[n] * scale;
    s.at(1, n) = qubit.c1 * fock[n] * scale;
  }
  return s;
}

double filter_factor(double f_lo_hz, const ResonatorParams& r) {
  if (!(r.linewidth_hz > 0.0)) throw DomainError("resonator linewidth must be > 0");
  const double x = (f_lo_hz - r.resonator_frequency_hz) / r.linewidth_hz;
  return 1.0 / (1.0 + x * x);
}

double steady_photon_number(double drive_amplitude, double f_lo_hz, const ResonatorParams& r) {
  if (!(drive_amplitude >= 0.0)) throw DomainError("drive amplitude must be >= 0");
  const double mu = filter_factor(f_lo_hz, r);
  const double kappa = kTwoPi * r.input_coupling_hz;
  const double delta = kTwoPi * (f_lo_hz - r.resonator_frequency_hz);
  const double rate = mu * std::sqrt(kappa) * drive_amplitude;
  return rate * rate / (delta * delta + 0.25 * kappa * kappa);
}

double qubit_shift(const ResonatorParams& r, double n_bar) {
  if (!(n_bar >= 0.0)) throw DomainError("photon number must be >= 0");
  return 2.0 * r.dispersive_shift_hz * n_bar;
}

double dressed_qubit_frequency_hz(const ResonatorParams& r, const QubitParams& q) {
  const double delta = q.qubit_frequency_hz - r.resonator_frequency_hz;
  const double g = r.qubit_coupling_hz;
  const double sign = delta < 0.0 ? -1.0 : 1.0;
  return q.qubit_frequency_hz - 0.5 * delta + sign * std::sqrt(0.25 * delta * delta + g * g);
}

Complex stationary_field(const ResonatorParams& r, const ResonatorDrive& d) {
  const double delta = kTwoPi * (r.resonator_frequency_hz - d.f_lo_hz);
  if (d.amplitude == Complex(0.0, 0.0)) return {0.0, 0.0};
  if (delta == 0.0) throw DomainError("resonant undamped drive has no stationary field");
  const Complex epsilon = filter_factor(d.f_lo_hz, r) * std::sqrt(kTwoPi * r.input_coupling_hz) * d.amplitude;
  return Complex(0.0, -1.0) * epsilon / delta;
}

Eigen::MatrixXcd rotating_frame_hamiltonian(const ResonatorParams& r, const QubitParams& q, const ResonatorDrive& d) {
  r.validate();
  q.validate();
  const auto n_levels = static_cast<Eigen::Index>(r.fock_truncation);
  const double wq = kTwoPi * (q.qubit_frequency_hz - d.f_lo_hz);
  const double wr = kTwoPi * (r.resonator_frequency_hz - d.f_lo_hz);
  const double g = kTwoPi * r.qubit_coupling_hz;
  const Complex epsilon = filter_factor(d.f_lo_hz, r) * std::sqrt(kTwoPi * r.input_coupling_hz) * d.amplitude;
  const Complex i_eps = Complex(0.0, 1.0) * epsilon;

  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2 * n_levels, 2 * n_levels);
  auto idx = [n_levels](Eigen::Index qubit, Eigen::Index n) { return qubit * n_levels + n; };
  for (Eigen::Index qubit = 0; qubit < 2; ++qubit) {
    for (Eigen::Index n = 0; n < n_levels; ++n) {
      h(idx(qubit, n), idx(qubit, n)) = wq * static_cast<double>(qubit) + wr * static_cast<double>(n);
      if (n + 1 < n_levels) {
        const double s = std::sqrt(static_cast<double>(n + 1));
        h(idx(qubit, n + 1), idx(qubit, n)) = i_eps * s;
        h(idx(qubit, n), idx(qubit, n + 1)) = std::conj(i_eps) * s;
      }
    }
  }
  // g (sigma+ a + sigma- a^dag): |g,n> <-> |e,n-1>
  for (Eigen::Index n = 1; n < n_levels; ++n) {
    const double s = g * std::sqrt(static_cast<double>(n));
    h(idx(1, n - 1), idx(0, n)) = s;
    h(idx(0, n), idx(1, n - 1)) = s;
  }
  return h;
}

JointState evolve_jaynes_cummings(const ResonatorParams& r, const QubitParams& q, const ResonatorDrive& d, double t1_s,
                                  double t2_s, const JointState& initial) {
  r.validate();
  if (initial.fock_levels() != r.fock_truncation)
    throw DomainError("joint state size does not match the Fock truncation");
  if (std::abs(initial.norm_squared() - 1.0) > 1e-9) throw DomainError("initial joint state is not normalized");
  check_truncation(initial, "for the initial state");

  const std::size_t n_levels = r.fock_truncation;
  const double w = kTwoPi * d.f_lo_hz;
  // U(t) = exp(i w t (a^dag a + sigma+ sigma-)) is diagonal in the product basis.
  auto frame = [&](JointState s, double t, double sign) {
    for (int qubit = 0; qubit < 2; ++qubit)
      for (std::size_t n = 0; n < n_levels; ++n)
        s.at(qubit, n) *= std::polar(1.0, sign * w * t * static_cast<double>(n + static_cast<std::size_t>(qubit)));
    return s;
  };

  const Eigen::MatrixXcd h = rotating_frame_hamiltonian(r, q, d);
  const Eigen::MatrixXcd propagator = matrix_exponential(Complex(0.0, -(t2_s - t1_s)) * h);

  JointState rotated = frame(initial, t1_s, +1.0);
  rotated.amplitudes = propagator * rotated.amplitudes;
  JointState out = frame(std::move(rotated), t2_s, -1.0);
  check_truncation(out, "after evolution");
  return out;
}

double ramsey_population(const ResonatorParams& r, const QubitParams& q, const ResonatorDrive& d, double delay_s,
                         double virtual_detuning_hz, RamseyPath path) {
  if (!(delay_s >= 0.0)) throw DomainError("Ramsey delay must be >= 0");
  if (path == RamseyPath::dispersive) {
    const double shift = qubit_shift(r, steady_photon_number(std::abs(d.amplitude), d.f_lo_hz, r));
    const double c = std::cos(std::numbers::pi * (virtual_detuning_hz + shift) * delay_s);
    return c * c;
  }
  const JointState before = ramsey_free_evolution(r, q, d, delay_s, virtual_detuning_hz, ramsey_initial(r, d));
  return half_pi_pulse(before, 0.0).excited_population();
}

double ramsey_frequency_shift_jc(const ResonatorParams& r, const QubitParams& q, const ResonatorDrive& d,
                                 std::span<const double> delays_s, const JointState* initial) {
  if (delays_s.size() < 2) throw DomainError("need at least two Ramsey delays");
  const JointState start = initial ? *initial : ramsey_initial(r, d);
  std::vector<double> phase;
  phase.reserve(delays_s.size());
  for (double tau : delays_s) {
    const JointState before = ramsey_free_evolution(r, q, d, tau, 0.0, start);
    const double p_x = half_pi_pulse(before, 0.0).excited_population();
    const double p_y = half_pi_pulse(before, 0.5 * std::numbers::pi).excited_population();
    // coherence <sigma-> reconstructed from the two quadratures; for a pure
    // superposition it equals -i e^{-i phi} / 2
    const Complex coherence(p_y - 0.5, 0.5 - p_x);
    double phi = -0.5 * std::numbers::pi - std::arg(coherence);
    if (!phase.empty()) {
      while (phi - phase.back() > std::numbers::pi) phi -= kTwoPi;
      while (phi - phase.back() < -std::numbers::pi) phi += kTwoPi;
    } else {
      phi = std::remainder(phi, kTwoPi);
    }
    phase.push_back(phi);
  }
  double mt = 0.0, mp = 0.0;
  for (std::size_t i = 0; i < phase.size(); ++i) {
    mt += delays_s[i];
    mp += phase[i];
  }
  mt /= static_cast<double>(phase.size());
  mp /= static_cast<double>(phase.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < phase.size(); ++i) {
    sxy += (delays_s[i] - mt) * (phase[i] - mp);
    sxx += (delays_s[i] - mt) * (delays_s[i] - mt);
  }
  return sxy / sxx / kTwoPi;
}

ScanGrid measurement_scan_map(const ResonatorParams& r, const QubitParams& q, const GridSpec& spec, double f_lo_hz,
                              const RamseyConfig& ramsey, const LeakageMap& map) {
  r.validate();
  ScanGrid grid = ScanGrid::from_spec(spec);
  for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
    for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
      const Complex z = map ? map(grid.xs[ix], grid.ys[iy]) : Complex(grid.xs[ix], grid.ys[iy]);
      grid.at(ix, iy) = ramsey_population(r, q, ResonatorDrive{z, f_lo_hz}, ramsey.delay_s, ramsey.virtual_detuning_hz);
    }
  }
  return grid;
}

}  // namespace mixcal
