#pragma once

#include <string>
#include <vector>

#include "transducer/circuit.hpp"
#include "transducer/model.hpp"

namespace transducer::config {

struct SpectraSettings {
  double span_hz = 8e6;  // full span around the mechanical resonance
  int points = 801;
};

struct TemporalSettings {
  double dt_s = 1e-9;
  double t_max_s = 3e-6;
  double kappa_d_hz = 5e6;  // exponential filter used for readout
  double delay_lo_s = -100e-9;
  double delay_hi_s = 600e-9;
  int noise_instances = 2000;
  double noise_dt_s = 0.5e-9;
  double noise_t_max_s = 2e-6;
  int jitter_instances = 200;
};

struct HeatingSettings {
  double n_bath_peak = 0.0;
  double decay_time_s = 1e-6;
  double t0_s = 0.0;
  double window_s = 50e-9;
  int n_windows = 100;
};

struct HeraldSettings {
  double n_th = 10.0;         // occupation after the heating pulse
  double pump_n_a = 473.0;    // blue-detuned heralding pulse
  double dark_window_s = 0.9e-6;
  double gain_scale = 1.0;
  double n_ex = 39.0;         // injected lumped excess noise for simulation
  std::uint64_t shots = 1000000;
  std::uint64_t n_heralded = 1400000;
  std::uint64_t n_thermal = 43000000;
  int radial_bins = 20;
};

struct CircuitSettings {
  circuit::MechanicalRLC rlc;
  circuit::WirebondNetwork wirebond;
  circuit::TransmissionLine line;
  circuit::CouplingOptions coupling;
  std::vector<double> sweep_lengths_m = {0.25e-3, 0.5e-3, 0.75e-3, 1.0e-3, 1.5e-3, 2.0e-3};
  std::vector<int> sweep_n_wb = {1, 2, 3};
  double response_lo_hz = 3.3e9;
  double response_hi_hz = 3.9e9;
  int response_points = 3001;
};

struct DeviceConfig {
  model::TransducerParams params;
  model::PumpConfig pump;
  model::EfficiencyBudget budget;
  model::NoiseBudget noise;
  SpectraSettings spectra;
  TemporalSettings temporal;
  HeatingSettings heating;
  HeraldSettings herald;
  CircuitSettings circuit;

  void validate() const;
};

// Parses the TOML subset. [optical], [mechanical], [microwave] and [pump] are
// required; other sections fall back to defaults. Frequencies and rates are
// given in Hz (f or kappa/2pi) and stored as rad/s. Unknown sections or keys
// raise ConfigError naming the field.
DeviceConfig parse(const std::string& text);
DeviceConfig load(const std::string& path);

}  // namespace transducer::config
