#include "mixcal/qubit_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mixcal/errors.hpp"

namespace mixcal {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// cos 2theta and sin 2theta of the vector (x, y), without forming the angle.
struct DoubleAngle {
  double cos2 = 1.0;
  double sin2 = 0.0;
};

DoubleAngle double_angle(double x, double y) {
  const double r2 = x * x + y * y;
  if (r2 == 0.0) return {};
  return {(x * x - y * y) / r2, 2.0 * x * y / r2};
}

// cos(carrier_phase + 2 theta)
double shifted_cos(double carrier_phase, const DoubleAngle& a) {
  return std::cos(carrier_phase) * a.cos2 - std::sin(carrier_phase) * a.sin2;
}

double population_from_z0(double z0) {
  const double c = std::cos(z0);
  return std::clamp(c * c, 0.0, 1.0);
}

// z0 per unit drive amplitude for the leakage closed form.
double leakage_z0(const QubitParams& q, double f_lo_hz, double amplitude, const DoubleAngle& angle, double t0_s) {
  const double dw = kTwoPi * (f_lo_hz - q.qubit_frequency_hz);
  const double ws = kTwoPi * (f_lo_hz + q.qubit_frequency_hz);
  if (dw == 0.0) throw SingularityError("leakage tone is resonant with the qubit; use the numeric oracle");
  const double c = shifted_cos(2.0 * kTwoPi * f_lo_hz * t0_s, angle);
  const double inner = std::max(0.0, 2.0 * (1.0 / (dw * dw) + 1.0 / (ws * ws) - c / (dw * ws)));
  return 0.5 * q.drive_coupling * amplitude * std::sqrt(inner);
}

double sideband_z0(const QubitParams& q, double amplitude, const DoubleAngle& angle, double f_lo_hz, double f_if_hz,
                   double t_s) {
  const double wq = kTwoPi * q.qubit_frequency_hz;
  const double dw = kTwoPi * (f_lo_hz - f_if_hz - q.qubit_frequency_hz);
  if (dw == 0.0) throw SingularityError("image tone is resonant with the qubit; use the numeric oracle");
  const double sum = 2.0 * wq + dw;
  const double c = shifted_cos(2.0 * wq * t_s + 2.0 * dw * t_s, angle);
  const double inner = std::max(0.0, 1.0 / (sum * sum) + 1.0 / (dw * dw) + 2.0 * c / (dw * sum));
  return 0.25 * q.drive_coupling * amplitude * std::sqrt(inner);
}

void require_positive_time(double t) {
  if (!(t > 0.0)) throw DomainError("pulse duration must be > 0");
}

template <typename Field>
QubitState integrate_rk4(const QubitParams& q, Field&& field, double t0, double step, QubitState psi) {
  const double wq = kTwoPi * q.qubit_frequency_hz;
  const double coupling = q.drive_coupling;
  const auto steps = static_cast<std::size_t>(std::ceil(t0 / step - 1e-9));
  if (steps == 0) return psi;
  const double h = t0 / static_cast<double>(steps);

  // d c0/dt = -Omega V e^{-i wq t} c1,  d c1/dt = Omega V e^{i wq t} c0
  auto deriv = [&](double t, const Complex& a0, const Complex& a1, Complex& d0, Complex& d1) {
    const double g = coupling * field(t);
    const Complex rot(std::cos(wq * t), std::sin(wq * t));
    d0 = -g * std::conj(rot) * a1;
    d1 = g * rot * a0;
  };

  Complex k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b;
  for (std::size_t n = 0; n < steps; ++n) {
    const double t = h * static_cast<double>(n);
    deriv(t, psi.c0, psi.c1, k1a, k1b);
    deriv(t + 0.5 * h, psi.c0 + 0.5 * h * k1a, psi.c1 + 0.5 * h * k1b, k2a, k2b);
    deriv(t + 0.5 * h, psi.c0 + 0.5 * h * k2a, psi.c1 + 0.5 * h * k2b, k3a, k3b);
    deriv(t + h, psi.c0 + h * k3a, psi.c1 + h * k3b, k4a, k4b);
    psi.c0 += (h / 6.0) * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
    psi.c1 += (h / 6.0) * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
  }
  return psi;
}

}  // namespace

void QubitParams::validate() const {
  if (!(qubit_frequency_hz > 0.0)) throw DomainError("qubit frequency must be > 0");
  if (!(drive_coupling > 0.0)) throw DomainError("drive coupling must be > 0");
}

DriveTone DriveTone::from_iq(double frequency_hz, double i_v, double q_v) {
  return {frequency_hz, std::hypot(i_v, q_v), std::atan2(q_v, i_v)};
}

double leakage_ground_population(const QubitParams& q, const DriveTone& tone, double t0_s) {
  return leakage_ground_population_iq(q, tone.frequency_hz, tone.amplitude_v * std::cos(tone.phase_rad),
                                      tone.amplitude_v * std::sin(tone.phase_rad), t0_s);
}

double leakage_ground_population_iq(const QubitParams& q, double f_lo_hz, double i_v, double q_v, double t0_s) {
  q.validate();
  if (!(f_lo_hz > 0.0)) throw DomainError("tone frequency must be > 0");
  require_positive_time(t0_s);
  const double v0 = std::hypot(i_v, q_v);
  return population_from_z0(leakage_z0(q, f_lo_hz, v0, double_angle(i_v, q_v), t0_s));
}

double sideband_ground_population(const QubitParams& q, double envelope_amplitude_v, Complex c, double f_lo_hz,
                                  double f_if_hz, double t_s) {
  q.validate();
  if (!(f_lo_hz > f_if_hz && f_if_hz > 0.0)) throw DomainError("need f_lo > f_if > 0");
  if (!(envelope_amplitude_v >= 0.0)) throw DomainError("envelope amplitude must be >= 0");
  require_positive_time(t_s);
  const double amp = envelope_amplitude_v * std::abs(c);
  return population_from_z0(sideband_z0(q, amp, double_angle(c.real(), c.imag()), f_lo_hz, f_if_hz, t_s));
}

double oracle_step(const QubitParams& q, double tone_frequency_hz) {
  const double f_max = std::abs(tone_frequency_hz) + q.qubit_frequency_hz;
  return 1.0 / (50.0 * f_max);
}

QubitState evolve_two_level(const QubitParams& q, const DriveField& drive, double t0_s, double step_s,
                            const QubitState& initial) {
  q.validate();
  if (!(step_s > 0.0)) throw DomainError("integration step must be > 0");
  if (!(t0_s >= 0.0)) throw DomainError("evolution time must be >= 0");
  if (std::abs(initial.norm_squared() - 1.0) > 1e-9) throw DomainError("initial qubit state is not normalized");
  if (!drive) return initial;
  return integrate_rk4(q, drive, t0_s, step_s, initial);
}

double leakage_ground_population_numeric(const QubitParams& q, const DriveTone& tone, double t0_s, double step_s) {
  q.validate();
  require_positive_time(t0_s);
  if (step_s <= 0.0) step_s = oracle_step(q, tone.frequency_hz);
  const double w = kTwoPi * tone.frequency_hz;
  const double v0 = tone.amplitude_v;
  const double phase = tone.phase_rad;
  const auto field = [=](double t) { return v0 * std::cos(w * t + phase); };
  return integrate_rk4(q, field, t0_s, step_s, QubitState::ground()).ground_population();
}

double sideband_ground_population_numeric(const QubitParams& q, double envelope_amplitude_v, Complex c,
                                          double f_lo_hz, double f_if_hz, double t_s, double step_s) {
  const double f_image = f_lo_hz - f_if_hz;
  const Complex z = envelope_amplitude_v * c;
  return leakage_ground_population_numeric(q, DriveTone{f_image, std::abs(z), std::arg(z)}, t_s, step_s);
}

ScanGrid drive_scan_map(const QubitParams& q, const DriveScanConfig& cfg, const GridSpec& spec, DriveScanMode mode) {
  q.validate();
  ScanGrid grid = ScanGrid::from_spec(spec);
  const ToneMap identity = [](double x, double y) { return Complex(x, y); };
  const ToneMap& map = cfg.tone_map ? cfg.tone_map : identity;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
    for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
      const Complex z = map(grid.xs[ix], grid.ys[iy]);
      double p = nan;
      try {
        if (mode == DriveScanMode::leakage) {
          p = cfg.use_oracle ? leakage_ground_population_numeric(
                                   q, DriveTone{cfg.f_lo_hz, std::abs(z), std::arg(z)}, cfg.pulse_duration_s)
                             : leakage_ground_population_iq(q, cfg.f_lo_hz, z.real(), z.imag(), cfg.pulse_duration_s);
        } else {
          p = cfg.use_oracle ? sideband_ground_population_numeric(q, cfg.envelope_amplitude_v, z, cfg.f_lo_hz,
                                                                  cfg.f_if_hz, cfg.pulse_duration_s)
                             : sideband_ground_population(q, cfg.envelope_amplitude_v, z, cfg.f_lo_hz, cfg.f_if_hz,
                                                          cfg.pulse_duration_s);
        }
      } catch (const SingularityError&) {
        p = nan;
      }
      grid.at(ix, iy) = p;
    }
  }
  return grid;
}

double sideband_amplitude_for_excitation(const QubitParams& q, const DriveScanConfig& cfg, const GridSpec& spec,
                                         double target_excitation) {
  if (!(target_excitation > 0.0 && target_excitation < 1.0)) throw DomainError("target excitation must be in (0,1)");
  q.validate();
  const ToneMap identity = [](double x, double y) { return Complex(x, y); };
  const ToneMap& map = cfg.tone_map ? cfg.tone_map : identity;
  const auto xs = spec.x_axis();
  const auto ys = spec.y_axis();
  double z_max = 0.0;
  for (double y : ys) {
    for (double x : xs) {
      const Complex c = map(x, y);
      z_max = std::max(z_max, sideband_z0(q, std::abs(c), double_angle(c.real(), c.imag()), cfg.f_lo_hz, cfg.f_if_hz,
                                          cfg.pulse_duration_s));
    }
  }
  if (z_max == 0.0) throw DegenerateGridError("sideband grid has no image tone anywhere");
  return std::asin(std::sqrt(target_excitation)) / z_max;
}

}  // namespace mixcal
