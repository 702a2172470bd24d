#pragma once

#include <complex>
#include <vector>

#include "transducer/model.hpp"

namespace transducer::scattering {

using cplx = std::complex<double>;

// Frequency axis convention: for microwave-probed spectra the axis is the
// absolute microwave frequency; for the optical reflection S_oo it is the
// probe-pump offset, so the transparency window sits at f_m. In both cases
// the mechanical resonance appears at omega_m/2pi on the axis.
struct ComplexSpectrum {
  std::vector<double> freqs;  // Hz, strictly increasing
  std::vector<cplx> values;

  void validate() const;
  std::size_t size() const { return freqs.size(); }
};

// chi(omega) = 1 / (i (center - omega) + width / 2)
inline cplx susceptibility(double center, double width, double omega) {
  return 1.0 / cplx(0.5 * width, center - omega);
}

struct ScatteringOptions {
  // Include the microwave loading g_mu^2 chi_mu of the mechanics in S_oo.
  bool microwave_loading = true;
};

enum class Direction { optical_to_microwave, microwave_to_optical };

// Pump-on optical reflection r = 1 - kappa_oe chi_o / (1 + G_o^2 chi_o chi_m,eff).
// Throws InvalidModeError for a blue-detuned pump.
ComplexSpectrum s_oo(const model::TransducerParams& params, const model::DerivedRates& rates,
                     model::PumpState state, const std::vector<double>& freqs,
                     const ScatteringOptions& options = {});

// Microwave reflection with the mechanics loaded by the optical pump.
ComplexSpectrum s_mumu(const model::TransducerParams& params, const model::DerivedRates& rates,
                       model::PumpState state, const std::vector<double>& freqs);

// Conversion amplitude; reciprocal, so both directions return identical data.
ComplexSpectrum s_conversion(const model::TransducerParams& params,
                             const model::DerivedRates& rates, model::PumpState state,
                             const std::vector<double>& freqs, Direction direction);

// Uniform grid helper for callers and tests.
std::vector<double> linspace(double lo, double hi, std::size_t n);

// Full width at half maximum of |values|^2 around its peak, by linear
// interpolation of the half-power crossings. Returns 0 when a crossing is
// missing inside the grid.
double half_power_width(const ComplexSpectrum& spectrum);

}  // namespace transducer::scattering
