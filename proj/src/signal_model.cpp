#include "mixcal/signal_model.hpp"

#include <cmath>
#include <limits>

#include "mixcal/errors.hpp"

namespace mixcal {

void MixerImperfection::validate() const {
  if (!(std::abs(carrier_leakage) < 1.0)) throw DomainError("carrier_leakage magnitude must be < 1");
  if (!(std::abs(image_gain) < 1.0)) throw DomainError("image_gain magnitude must be < 1");
  if (!(attenuation > 0.0)) throw DomainError("attenuation must be > 0");
}

void DacCorrection::validate() const {
  if (!(if_frequency_hz > 0.0)) throw DomainError("if_frequency must be > 0");
  if (!(envelope.duration_s >= 0.0)) throw DomainError("envelope duration must be >= 0");
  if (!(envelope.amplitude_v >= 0.0)) throw DomainError("envelope amplitude must be >= 0");
}

Complex residual_carrier(const MixerImperfection& imp, double i_offset_v, double q_offset_v) {
  return imp.attenuation * (imp.carrier_leakage + Complex(i_offset_v, q_offset_v));
}

Complex residual_image(const MixerImperfection& imp, Complex c) {
  return imp.attenuation * (imp.image_gain + c);
}

RfSpectrum synthesize_spectrum(const MixerImperfection& imp, const DacCorrection& corr, double f_lo_hz) {
  imp.validate();
  corr.validate();
  if (!(f_lo_hz > corr.if_frequency_hz)) throw DomainError("LO frequency must exceed the IF frequency");

  const double f_if = corr.if_frequency_hz;
  const double a = corr.envelope.amplitude_v;
  RfSpectrum s;
  s.target = {f_lo_hz + f_if, Complex(imp.attenuation * a, 0.0)};
  s.image = {f_lo_hz - f_if, a * residual_image(imp, corr.sideband_correction)};
  s.carrier = {f_lo_hz, residual_carrier(imp, corr.i_offset_v, corr.q_offset_v)};
  return s;
}

double residual_power_db(const RfSpectrum& spectrum, SpuriousTone tone) {
  const double target = std::abs(spectrum.target.amplitude);
  if (target == 0.0) throw DomainError("target tone amplitude is zero");
  const double level = std::abs(tone == SpuriousTone::carrier ? spectrum.carrier.amplitude : spectrum.image.amplitude);
  if (level == 0.0) return -std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(level / target);
}

}  // namespace mixcal
