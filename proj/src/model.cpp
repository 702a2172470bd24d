#include "transducer/model.hpp"

#include <cmath>
#include <sstream>

#include "transducer/constants.hpp"
#include "transducer/error.hpp"

namespace transducer::model {

namespace {

// kappa / coupling below this ratio breaks adiabatic elimination.
constexpr double kFastCavityRatio = 5.0;

void require_positive(double value, const char* field) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError(field, "must be a finite positive number");
  }
}

void require_nonnegative(double value, const char* field) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw ConfigError(field, "must be a finite non-negative number");
  }
}

void require_unit_interval(double value, const char* field) {
  if (!(value >= 0.0 && value <= 1.0)) throw ConfigError(field, "must lie in [0, 1]");
}

}  // namespace

OpticalMode OpticalMode::from_hz(double f_o, double kappa_o, double kappa_oe, double g_o) {
  return {angular(f_o), angular(kappa_o), angular(kappa_oe), angular(g_o)};
}

void OpticalMode::validate() const {
  require_positive(omega_o, "optical.frequency_hz");
  require_positive(kappa_o, "optical.kappa_hz");
  require_positive(kappa_oe, "optical.kappa_ext_hz");
  require_positive(g_o, "optical.g0_hz");
  if (kappa_oe > kappa_o) throw ConfigError("optical.kappa_ext_hz", "exceeds total linewidth");
}

MechanicalMode MechanicalMode::from_hz(double f_m, double gamma_i_on, double gamma_i_off,
                                       double jitter_rms) {
  return {angular(f_m), angular(gamma_i_on), angular(gamma_i_off), angular(jitter_rms)};
}

void MechanicalMode::validate() const {
  require_positive(omega_m, "mechanical.frequency_hz");
  require_positive(gamma_i_on, "mechanical.gamma_i_on_hz");
  require_positive(gamma_i_off, "mechanical.gamma_i_off_hz");
  require_nonnegative(jitter_rms, "mechanical.jitter_rms_hz");
}

MicrowaveMode MicrowaveMode::from_hz(double f_mu, double kappa_mu, double kappa_mue,
                                     double g_mu) {
  return {angular(f_mu), angular(kappa_mu), angular(kappa_mue), angular(g_mu)};
}

void MicrowaveMode::validate() const {
  require_positive(omega_mu, "microwave.frequency_hz");
  require_positive(kappa_mu, "microwave.kappa_hz");
  require_positive(kappa_mue, "microwave.kappa_ext_hz");
  require_nonnegative(g_mu, "microwave.g_hz");
  if (kappa_mue > kappa_mu) {
    throw ConfigError("microwave.kappa_ext_hz", "exceeds total linewidth");
  }
}

void TransducerParams::validate() const {
  optical.validate();
  mechanical.validate();
  microwave.validate();
}

void PumpConfig::validate() const {
  require_nonnegative(n_a, "pump.n_a");
  require_positive(tau, "pump.tau_s");
  require_positive(rep_rate, "pump.rep_rate_hz");
}

void EfficiencyBudget::validate() const {
  require_unit_interval(eta_o, "budget.eta_o");
  require_unit_interval(eta_mu, "budget.eta_mu");
  require_unit_interval(eta_in_fridge, "budget.eta_in_fridge");
  require_unit_interval(eta_filters, "budget.eta_filters");
  require_unit_interval(eta_spd, "budget.eta_spd");
  require_unit_interval(eta_spd_path, "budget.eta_spd_path");
  require_unit_interval(eta_circ, "budget.eta_circ");
  require_unit_interval(eta_sys, "budget.eta_sys");
  require_unit_interval(eta_setup, "budget.eta_setup");
  require_unit_interval(eta_d, "budget.eta_d");
  require_unit_interval(eta_mum, "budget.eta_mum");
  require_unit_interval(eta_herald, "budget.eta_herald");
}

void NoiseBudget::validate() const {
  require_nonnegative(n_th, "noise.n_th");
  require_nonnegative(n_n, "noise.n_n");
  require_nonnegative(n_m, "noise.n_m");
  require_nonnegative(n_ex, "noise.n_ex");
  require_nonnegative(n_coh, "noise.n_coh");
  require_nonnegative(dark_rate, "noise.dark_rate_hz");
}

DerivedRates derive_rates(const OpticalMode& optical, const MicrowaveMode& microwave,
                          const PumpConfig& pump) {
  DerivedRates r;
  r.G_o = std::sqrt(pump.n_a) * optical.g_o;
  r.gamma_om = 4.0 * r.G_o * r.G_o / optical.kappa_o;
  r.gamma_mu = 4.0 * microwave.g_mu * microwave.g_mu / microwave.kappa_mu;
  r.detuning = pump.detuning;
  return r;
}

std::vector<std::string> fast_cavity_warnings(const TransducerParams& params,
                                              const DerivedRates& rates) {
  std::vector<std::string> out;
  if (rates.G_o > 0.0 && params.optical.kappa_o < kFastCavityRatio * rates.G_o) {
    std::ostringstream os;
    os << "kappa_o/G_o = " << params.optical.kappa_o / rates.G_o
       << ": optical mode not fast compared to the linearized coupling";
    out.push_back(os.str());
  }
  if (params.microwave.g_mu > 0.0 &&
      params.microwave.kappa_mu < kFastCavityRatio * params.microwave.g_mu) {
    std::ostringstream os;
    os << "kappa_mu/g_mu = " << params.microwave.kappa_mu / params.microwave.g_mu
       << ": microwave mode not fast compared to the piezo coupling";
    out.push_back(os.str());
  }
  return out;
}

double peak_efficiency(double eta_o, double eta_mu, double gamma_i, double gamma_om,
                       double gamma_mu) {
  const double total = gamma_i + gamma_om + gamma_mu;
  if (total <= 0.0) return 0.0;
  return eta_o * eta_mu * 4.0 * gamma_om * gamma_mu / (total * total);
}

double peak_efficiency(const TransducerParams& params, const DerivedRates& rates,
                       PumpState state) {
  return peak_efficiency(params.optical.efficiency(), params.microwave.efficiency(),
                         params.mechanical.gamma_i(state), rates.gamma_om, rates.gamma_mu);
}

PairProbability pair_probability(const DerivedRates& rates, const PumpConfig& pump) {
  if (pump.detuning != Detuning::blue) {
    throw InvalidModeError("pair generation requires a blue-detuned pump");
  }
  PairProbability out;
  out.p = rates.gamma_om * pump.tau;
  if (out.p > 0.2) {
    std::ostringstream os;
    os << "gamma_om*tau = " << out.p << " is not small; linear pair estimate unreliable";
    out.warning = os.str();
  }
  return out;
}

BudgetProducts budget_products(const EfficiencyBudget& b) {
  return {b.eta_o * b.eta_in_fridge * b.eta_filters * b.eta_spd,
          b.eta_in_fridge * b.eta_spd_path * b.eta_circ};
}

}  // namespace transducer::model
