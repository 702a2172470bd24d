#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "transducer/model.hpp"

namespace transducer::temporal {

using cplx = std::complex<double>;

// Emitted microwave field from one initial phonon, sampled on a uniform
// grid t_k = k dt, k = 0..N. Frame rotates at the microwave frequency.
struct TemporalMode {
  double dt = 0.0;
  std::vector<double> t;
  std::vector<cplx> amp;        // A(t) = sqrt(kappa_mue) c(t), units s^-1/2
  std::vector<double> phonon;   // |b(t)|^2
  std::vector<double> photon;   // |c(t)|^2
  std::vector<double> lost;     // integral of kappa_mu|c|^2 + gamma_i|b|^2 up to t
  std::vector<std::string> warnings;

  // Trapezoidal integral of |A|^2 over the window (the device efficiency).
  double energy() const;
  std::size_t size() const { return t.size(); }
};

// Integrates the phonon-photon pair with b(0) = 1, c(0) = 0 by fixed-step RK4.
// mech_detuning is omega_m - omega_mu (rad/s). The step must satisfy
// dt kappa_mu < 0.05; a violating step is halved once, then rejected with
// NumericalError.
TemporalMode emit_single_phonon(const model::TransducerParams& params, double gamma_i,
                                double dt, double t_max, double mech_detuning = 0.0);

enum class FilterKind { matched, exponential, custom };

// Demodulation waveform f_d(t), normalized to unit energy.
class DemodFilter {
 public:
  // sqrt(kappa_d) exp(-kappa_d t / 2) theta(t)
  static DemodFilter exponential(double kappa_d);
  // f_d = A / |A| sampled on the mode grid.
  static DemodFilter matched(const TemporalMode& mode);
  // Arbitrary samples on a uniform grid starting at t = 0; normalized here.
  static DemodFilter custom(std::vector<cplx> samples, double dt);

  FilterKind kind() const { return kind_; }
  double kappa_d() const { return kappa_d_; }
  const std::vector<cplx>& samples() const { return samples_; }
  double dt() const { return dt_; }

  // f_d(t); zero outside the support, linear interpolation between samples.
  cplx at(double t) const;

 private:
  FilterKind kind_ = FilterKind::exponential;
  double kappa_d_ = 0.0;
  double dt_ = 0.0;
  std::vector<cplx> samples_;
};

// eta_m(delay) = |integral A*(tau) f_d(tau - delay) dtau|^2 (trapezoidal).
double demod_efficiency(const TemporalMode& mode, const DemodFilter& filter, double delay);

struct DelayOptimum {
  double delay = 0.0;
  double efficiency = 0.0;
  bool at_boundary = false;
  std::vector<std::string> warnings;
};

// Coarse grid scan over [lo, hi] followed by golden-section refinement.
DelayOptimum optimal_delay(const TemporalMode& mode, const DemodFilter& filter, double lo,
                           double hi, int coarse_points = 121);

// Exponentially decaying thermal bath excited by the optical pulse.
struct HeatingBath {
  double n_bath_peak = 0.0;  // quanta
  double decay_rate = 1.0;   // rad/s
  double coupling = 0.0;     // bath-mechanics coupling, equal to gamma_i (rad/s)
  double t0 = 0.0;           // pulse arrival (s)

  void validate() const;
  double occupation(double t) const;
};

// Mean phonon occupation of n' = -gamma_tot n + gamma_i n_bath(t), n(0) = 0,
// averaged over consecutive windows [k w, (k+1) w). gamma_tot is the
// pump-off mechanical linewidth gamma_i + gamma_mu.
std::vector<double> heating_trajectory(const HeatingBath& bath,
                                       const model::TransducerParams& params, double window,
                                       int n_windows);

// Least-squares slope of log(n) against window centre time over windows
// [first, end); returns the decay rate (rad/s).
double fit_tail_decay(const std::vector<double>& trajectory, double window, std::size_t first);

struct StochasticGrid {
  double dt = 0.5e-9;
  double t_max = 2e-6;
};

struct AddedNoiseResult {
  double n_n = 0.0;            // thermal noise referred to the propagating photon
  double stderr_n_n = 0.0;
  double demod_variance = 0.0; // E|X|^2 of the demodulated amplitude
  double demod_variance_stderr = 0.0;
  double eta_m = 0.0;          // demodulated efficiency of the single-photon mode
  double eta_mum = 0.0;        // device efficiency (matched-filter limit)
  double eta_d = 0.0;          // eta_m / eta_mum
  int n_instances = 0;
  std::uint64_t seed = 0;
};

// Semiclassical Langevin ensemble: the mechanics is driven by the heating
// bath with <xi*(t) xi(t')> = n_bath(t) delta(t - t'); the emitted field is
// demodulated with the filter at the given delay. Only the stochastic drive
// is simulated, so the vacuum contribution is excluded. The readout model
// attributes the demodulated thermal variance to eta_d (1 - eta_mum) n_n.
// n_instances < 100 is rejected.
AddedNoiseResult added_noise_mc(const HeatingBath& bath, const model::TransducerParams& params,
                                const DemodFilter& filter, double delay, int n_instances,
                                std::uint64_t seed, const StochasticGrid& grid = {});

struct JitterSettings {
  double dt = 1e-9;
  double t_max = 2e-6;
  double delay_lo = -100e-9;
  double delay_hi = 600e-9;
  int coarse_points = 36;
};

struct JitterResult {
  double mean_efficiency = 0.0;
  double stderr = 0.0;
  int n_instances = 0;
};

// Mean demodulated efficiency at per-instance optimal delay, averaging over a
// Gaussian mechanical frequency offset of the given RMS (rad/s).
JitterResult efficiency_under_jitter(const model::TransducerParams& params, double gamma_i,
                                     const DemodFilter& filter, double jitter_rms,
                                     int n_instances, std::uint64_t seed,
                                     const JitterSettings& settings = {});

}  // namespace transducer::temporal
