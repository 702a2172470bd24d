#pragma once

#include <functional>
#include <vector>

#include "transducer/error.hpp"

namespace transducer::calib {

struct Estimate {
  double value = 0.0;
  double stderr = 0.0;
};

// Count rates for the coherent-drive and thermal configurations under each
// pump detuning. Only the per-detuning ratios enter, so collection
// efficiencies and filter losses cancel.
struct SidebandCounts {
  double rate_coh_red = 0.0;
  double rate_th_red = 0.0;
  double rate_coh_blue = 0.0;
  double rate_th_blue = 0.0;
  // Optional one-sigma uncertainties of the rates, used for propagation.
  double sigma_coh_red = 0.0, sigma_th_red = 0.0, sigma_coh_blue = 0.0, sigma_th_blue = 0.0;

  void validate() const;
};

// Red (anti-Stokes) rates scale with n, blue (Stokes) with n + 1.
SidebandCounts forward_sideband_counts(double n_th, double n_coh, double scale_red = 1.0,
                                       double scale_blue = 1.0);

class InconsistentCountsError : public NumericalError {
 public:
  InconsistentCountsError(const std::string& msg, double asymmetry)
      : NumericalError(msg), asymmetry_(asymmetry) {}
  double asymmetry() const { return asymmetry_; }

 private:
  double asymmetry_;
};

// A = (R_b - 1)/(R_r - 1) = n_th/(n_th + 1); returns n_th = A/(1 - A).
Estimate thermometry(const SidebandCounts& counts);

struct ConversionPowers {
  double p_mu_from_o = 0.0;       // RSA power during optical-to-microwave conversion (W)
  double p_mu_from_mu_path = 0.0; // RSA power during microwave-to-optical conversion (W)
  double flux_in_o = 0.0;         // optical input flux at the device (1/s)
  double flux_out_o = 0.0;        // optical output flux at the device (1/s)
  double s_mumu_mag2 = 1.0;       // |S_mumu|^2 at the conversion frequency

  void validate() const;
};

struct GainEfficiency {
  double gain = 0.0;  // G_m
  double eta = 0.0;
};

// Powers produced by a chain with gain G_m and efficiency eta in both
// directions, for microwave input flux flux_in_mu.
ConversionPowers forward_conversion_powers(const GainEfficiency& truth, double omega_mu,
                                           double flux_in_o, double flux_in_mu,
                                           double s_mumu_mag2);

GainEfficiency gain_and_efficiency(const ConversionPowers& powers, double omega_mu);

// n_out / eta.
double added_noise_referred(double n_out, double eta);

// Lumped excess noise from device efficiency, demodulation efficiency,
// thermal noise n_n and amplifier noise n_m.
double excess_noise_decomposition(double eta_mum, double eta_d, double n_n, double n_m);

struct ChainModel {
  double eta_d = 1.0;
  double eta_mum = 1.0;
  double n_th_pre = 0.0;     // control: no pump, initial thermal state
  double eta_herald = 1.0;
  double n_th_heated = 0.0;  // occupation before the heralding pulse
};

struct Variances {
  double all = 0.0;      // <I^2>, all samples
  double ps = 0.0;       // <I^2>|_PS
  double control = 0.0;  // <I^2>|_th, no pump pulse
  double sigma_all = 0.0, sigma_ps = 0.0, sigma_control = 0.0;
};

// <I^2>, <I^2>|_PS and <I^2>|_th for a chain with gain G_m.
Variances forward_variances(const ChainModel& chain, double gain, double n_n, double n_m);

struct NoiseSolution {
  Estimate gain, n_n, n_m;
};

class InconsistentSystemError : public NumericalError {
 public:
  InconsistentSystemError(const std::string& msg, const NoiseSolution& raw)
      : NumericalError(msg), raw_(raw) {}
  const NoiseSolution& raw_solution() const { return raw_; }

 private:
  NoiseSolution raw_;
};

// Solves the three variance equations for G_m, n_m and n_n. Negative noise or
// gain throws InconsistentSystemError carrying the unclamped solution.
NoiseSolution invert_noise(const Variances& v, const ChainModel& chain);

struct TwoThermalResult {
  Estimate n_ex;
  double gain = 0.0;
};

// Two thermal states of known occupations measured with the same chain:
// var_high/var_low = (n_high + n_ex + 1)/(n_low + n_ex + 1).
TwoThermalResult two_thermal_calibration(double var_low, double var_high, double n_low,
                                         double n_high, double eta_d, double eta_mum,
                                         double sigma_ratio = 0.0);

// Coherent intracavity phonon population 4 gamma_mu Ndot / gamma^2.
double room_temp_coherent(double gamma_mu, double gamma_total, double input_flux);

// Bose occupation 1/(exp(hbar omega / k_B T) - 1).
double bose_occupation(double omega, double temperature);

// Readout power is proportional to occupation; the thermal reference at
// temperature fixes the scale. Returns the calibrated coherent occupation.
double room_temp_calibration(double power_coherent, double power_thermal, double omega_m,
                             double temperature = 295.0);

// Linearized propagation of independent input uncertainties through f.
double propagate(const std::function<double(const std::vector<double>&)>& f,
                 const std::vector<double>& x, const std::vector<double>& sigma);

}  // namespace transducer::calib
