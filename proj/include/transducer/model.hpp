#pragma once

#include <optional>
#include <string>
#include <vector>

namespace transducer::model {

// All rates and frequencies below are angular (rad/s). Use the *_hz
// factories when starting from values quoted as f or kappa/2pi.

struct OpticalMode {
  double omega_o = 0.0;
  double kappa_o = 0.0;   // total linewidth
  double kappa_oe = 0.0;  // external coupling
  double g_o = 0.0;       // single-photon optomechanical coupling

  static OpticalMode from_hz(double f_o, double kappa_o, double kappa_oe, double g_o);
  double efficiency() const { return kappa_oe / kappa_o; }
  void validate() const;
};

enum class PumpState { on, off };

struct MechanicalMode {
  double omega_m = 0.0;
  double gamma_i_on = 0.0;   // intrinsic linewidth with the optical pump on
  double gamma_i_off = 0.0;  // intrinsic linewidth with the pump off
  double jitter_rms = 0.0;   // RMS frequency jitter (TLS-like)

  static MechanicalMode from_hz(double f_m, double gamma_i_on, double gamma_i_off,
                                double jitter_rms = 0.0);
  // The intrinsic loss depends on whether the pump is on; there is no default.
  double gamma_i(PumpState state) const {
    return state == PumpState::on ? gamma_i_on : gamma_i_off;
  }
  void validate() const;
};

struct MicrowaveMode {
  double omega_mu = 0.0;
  double kappa_mu = 0.0;
  double kappa_mue = 0.0;
  double g_mu = 0.0;  // piezoelectric phonon-photon coupling

  static MicrowaveMode from_hz(double f_mu, double kappa_mu, double kappa_mue, double g_mu);
  double efficiency() const { return kappa_mue / kappa_mu; }
  void validate() const;
};

struct TransducerParams {
  OpticalMode optical;
  MechanicalMode mechanical;
  MicrowaveMode microwave;

  void validate() const;
};

enum class Detuning { red, blue };

struct PumpConfig {
  Detuning detuning = Detuning::red;
  double n_a = 0.0;       // intracavity pump photon number
  double tau = 20e-9;     // pulse duration (s)
  double rep_rate = 1.0;  // repetition rate (Hz)

  void validate() const;
};

struct DerivedRates {
  double G_o = 0.0;       // sqrt(n_a) g_o
  double gamma_om = 0.0;  // 4 G_o^2 / kappa_o
  double gamma_mu = 0.0;  // 4 g_mu^2 / kappa_mu
  Detuning detuning = Detuning::red;
};

struct EfficiencyBudget {
  double eta_o = 1.0;
  double eta_mu = 1.0;
  double eta_in_fridge = 1.0;  // chip waveguide to fridge port, incl. fiber coupling
  double eta_filters = 1.0;    // filter-cavity transmission
  double eta_spd = 1.0;        // detector quantum efficiency
  double eta_spd_path = 1.0;   // full detection chain incl. switches, filters and SPD
  double eta_circ = 1.0;       // output circulator
  double eta_sys = 1.0;
  double eta_setup = 1.0;
  double eta_d = 1.0;
  double eta_mum = 1.0;
  double eta_herald = 1.0;

  void validate() const;
};

struct NoiseBudget {
  double n_th = 0.0;
  double n_n = 0.0;
  double n_m = 0.0;
  double n_ex = 0.0;
  double n_coh = 0.0;
  double dark_rate = 0.0;  // Hz

  void validate() const;
};

DerivedRates derive_rates(const OpticalMode& optical, const MicrowaveMode& microwave,
                          const PumpConfig& pump);

// Adiabatic-elimination checks (kappa_o >> G_o, kappa_mu >> g_mu). Returned
// as human-readable warnings; an empty vector means both hold.
std::vector<std::string> fast_cavity_warnings(const TransducerParams& params,
                                              const DerivedRates& rates);

// Peak conversion efficiency of the three-mode chain with the mechanics
// resonant with the microwave mode:
//   eta = eta_o eta_mu 4 gamma_om gamma_mu / (gamma_i + gamma_om + gamma_mu)^2
// Returns 0 when every rate vanishes.
double peak_efficiency(double eta_o, double eta_mu, double gamma_i, double gamma_om,
                       double gamma_mu);
double peak_efficiency(const TransducerParams& params, const DerivedRates& rates,
                       PumpState state);

struct PairProbability {
  double p = 0.0;
  std::optional<std::string> warning;  // set when gamma_om tau > 0.2
};

// Photon-phonon pair probability per blue-detuned pulse, p = gamma_om tau.
// Throws InvalidModeError for a red-detuned pump.
PairProbability pair_probability(const DerivedRates& rates, const PumpConfig& pump);

struct BudgetProducts {
  double eta_sys = 0.0;    // eta_o eta_in_fridge eta_filters eta_spd
  double eta_setup = 0.0;  // eta_in_fridge eta_spd_path eta_circ
};

BudgetProducts budget_products(const EfficiencyBudget& budget);

}  // namespace transducer::model
