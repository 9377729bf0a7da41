#pragma once

#include <complex>

namespace mixcal {

using Complex = std::complex<double>;

// Hardware defects of an IQ mixer, first-order additive model. A tone
// Re[z e^{i 2 pi f t}] is represented by its complex amplitude z.
struct MixerImperfection {
  Complex carrier_leakage{0.0, 0.0};  // relative to full-scale DAC volt
  Complex image_gain{0.0, 0.0};       // image amplitude per unit IF amplitude
  double attenuation = 1.0;

  void validate() const;
};

struct SquarePulse {
  double amplitude_v = 0.0;
  double duration_s = 0.0;
};

// DAC-side calibration knobs and envelope.
struct DacCorrection {
  double i_offset_v = 0.0;
  double q_offset_v = 0.0;
  Complex sideband_correction{0.0, 0.0};
  double if_frequency_hz = 100e6;
  SquarePulse envelope{};

  void validate() const;
};

struct Tone {
  double frequency_hz = 0.0;
  Complex amplitude{0.0, 0.0};
};

struct RfSpectrum {
  Tone target;
  Tone image;
  Tone carrier;
};

enum class SpuriousTone { carrier, image };

// Three-tone output of the mixer. Throws DomainError unless f_lo > f_IF > 0.
RfSpectrum synthesize_spectrum(const MixerImperfection& imp, const DacCorrection& corr, double f_lo_hz);

// 20 log10(|tone| / |target|); -infinity for an exactly cancelled tone.
// Throws DomainError when the target amplitude is zero.
double residual_power_db(const RfSpectrum& spectrum, SpuriousTone tone);

// Amplitude of the carrier tone alone, for callers that only need the leakage.
Complex residual_carrier(const MixerImperfection& imp, double i_offset_v, double q_offset_v);

// Image amplitude per unit envelope amplitude for a given correction c.
Complex residual_image(const MixerImperfection& imp, Complex c);

}  // namespace mixcal
