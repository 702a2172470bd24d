#include "transducer/scattering.hpp"

#include <algorithm>
#include <cmath>

#include "transducer/constants.hpp"
#include "transducer/error.hpp"

namespace transducer::scattering {

using model::Detuning;

void ComplexSpectrum::validate() const {
  if (freqs.size() != values.size()) {
    throw ConfigError("spectrum", "frequency and value arrays differ in length");
  }
  for (std::size_t k = 1; k < freqs.size(); ++k) {
    if (!(freqs[k] > freqs[k - 1])) {
      throw ConfigError("spectrum.freq_hz", "frequencies must be strictly increasing");
    }
  }
}

namespace {

void check_grid(const std::vector<double>& freqs) {
  for (std::size_t k = 1; k < freqs.size(); ++k) {
    if (!(freqs[k] > freqs[k - 1])) {
      throw ConfigError("probe_freqs", "frequencies must be strictly increasing");
    }
  }
}

}  // namespace

ComplexSpectrum s_oo(const model::TransducerParams& p, const model::DerivedRates& rates,
                     model::PumpState state, const std::vector<double>& freqs,
                     const ScatteringOptions& options) {
  if (rates.detuning != Detuning::red) {
    throw InvalidModeError("S_oo is modeled for a red-detuned pump only");
  }
  check_grid(freqs);
  const auto& o = p.optical;
  const auto& m = p.mechanical;
  const auto& mu = p.microwave;
  const double gamma_i = m.gamma_i(state);
  const double G2 = rates.G_o * rates.G_o;
  const double g2 = mu.g_mu * mu.g_mu;

  ComplexSpectrum out{freqs, std::vector<cplx>(freqs.size())};
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    const double w = angular(freqs[k]);
    // The pump sits one mechanical frequency below the cavity.
    const cplx chi_o = susceptibility(m.omega_m, o.kappa_o, w);
    cplx inv_chi_m = 1.0 / susceptibility(m.omega_m, gamma_i, w);
    if (options.microwave_loading) inv_chi_m += g2 * susceptibility(mu.omega_mu, mu.kappa_mu, w);
    const cplx chi_m_eff = 1.0 / inv_chi_m;
    out.values[k] = 1.0 - o.kappa_oe * chi_o / (1.0 + G2 * chi_o * chi_m_eff);
  }
  return out;
}

ComplexSpectrum s_mumu(const model::TransducerParams& p, const model::DerivedRates& rates,
                       model::PumpState state, const std::vector<double>& freqs) {
  check_grid(freqs);
  const auto& o = p.optical;
  const auto& m = p.mechanical;
  const auto& mu = p.microwave;
  const double gamma_i = m.gamma_i(state);
  const double G2 = rates.G_o * rates.G_o;
  const double g2 = mu.g_mu * mu.g_mu;

  ComplexSpectrum out{freqs, std::vector<cplx>(freqs.size())};
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    const double w = angular(freqs[k]);
    const cplx chi_mu = susceptibility(mu.omega_mu, mu.kappa_mu, w);
    const cplx inv_chi_m = 1.0 / susceptibility(m.omega_m, gamma_i, w) +
                           G2 * susceptibility(m.omega_m, o.kappa_o, w);
    out.values[k] = 1.0 - mu.kappa_mue * chi_mu / (1.0 + g2 * chi_mu / inv_chi_m);
  }
  return out;
}

ComplexSpectrum s_conversion(const model::TransducerParams& p, const model::DerivedRates& rates,
                             model::PumpState state, const std::vector<double>& freqs,
                             Direction /*direction*/) {
  if (rates.detuning != Detuning::red) {
    throw InvalidModeError("frequency conversion is modeled for a red-detuned pump only");
  }
  check_grid(freqs);
  const auto& o = p.optical;
  const auto& m = p.mechanical;
  const auto& mu = p.microwave;
  const double gamma_i = m.gamma_i(state);
  const double G2 = rates.G_o * rates.G_o;
  const double g2 = mu.g_mu * mu.g_mu;
  const double prefactor = std::sqrt(o.kappa_oe * mu.kappa_mue) * rates.G_o * mu.g_mu;

  ComplexSpectrum out{freqs, std::vector<cplx>(freqs.size())};
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    const double w = angular(freqs[k]);
    const cplx chi_o = susceptibility(m.omega_m, o.kappa_o, w);
    const cplx chi_mu = susceptibility(mu.omega_mu, mu.kappa_mu, w);
    const cplx inv_chi_tot = 1.0 / susceptibility(m.omega_m, gamma_i, w) + G2 * chi_o + g2 * chi_mu;
    out.values[k] = prefactor * chi_o * chi_mu / inv_chi_tot;
  }
  return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  return out;
}

double half_power_width(const ComplexSpectrum& s) {
  if (s.size() < 3) return 0.0;
  std::vector<double> power(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) power[k] = std::norm(s.values[k]);
  const auto peak_it = std::max_element(power.begin(), power.end());
  const std::size_t peak = static_cast<std::size_t>(peak_it - power.begin());
  const double half = 0.5 * *peak_it;
  if (half <= 0.0) return 0.0;

  auto crossing = [&](std::size_t a, std::size_t b) {
    const double t = (half - power[a]) / (power[b] - power[a]);
    return s.freqs[a] + t * (s.freqs[b] - s.freqs[a]);
  };
  double lo = 0.0, hi = 0.0;
  bool found_lo = false, found_hi = false;
  for (std::size_t k = peak; k > 0; --k) {
    if (power[k - 1] < half) {
      lo = crossing(k - 1, k);
      found_lo = true;
      break;
    }
  }
  for (std::size_t k = peak; k + 1 < s.size(); ++k) {
    if (power[k + 1] < half) {
      hi = crossing(k, k + 1);
      found_hi = true;
      break;
    }
  }
  return found_lo && found_hi ? hi - lo : 0.0;
}

}  // namespace transducer::scattering
