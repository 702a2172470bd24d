#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "transducer/stats.hpp"

namespace transducer::herald {

using cplx = std::complex<double>;

// Pulsed heralding experiment. Quadratures are in Husimi alpha units scaled
// by gain_scale; the readout chain is lumped into (gain_scale, n_ex).
struct ExperimentConfig {
  double p_pair = 0.0;     // pair probability per pulse
  double eta_sys = 1.0;    // cavity-to-click efficiency
  double dark_prob = 0.0;  // dark click probability per detection window
  double n_th = 0.0;       // thermal occupation before the pulse
  double n_ex = 0.0;       // lumped excess noise
  double gain_scale = 1.0;
  std::uint64_t n_shots = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct QuadratureDataset {
  std::vector<double> i, q;
  std::vector<bool> heralded;
  std::uint64_t true_heralds = 0;  // heralds whose shot carried a detected pair

  std::size_t size() const { return i.size(); }
  std::size_t heralded_count() const;
  void validate() const;
  void push(cplx z, bool h) {
    i.push_back(z.real());
    q.push_back(z.imag());
    heralded.push_back(h);
  }
};

// Husimi Q of a thermal state: circular Gaussian with E|alpha|^2 = n_th + 1.
std::vector<cplx> sample_q_thermal(double n_th, std::size_t count, std::uint64_t seed);

// Husimi Q of the photon-added thermal state,
//   Q(alpha) = |alpha|^2 exp(-|alpha|^2/(n+1)) / (pi (n+1)^2),
// i.e. |alpha|^2 ~ Gamma(2, n+1) with uniform phase.
std::vector<cplx> sample_q_added(double n_th, std::size_t count, std::uint64_t seed);

double q_thermal_pdf(double n_th, cplx alpha);
double q_added_pdf(double n_th, cplx alpha);

// Fraction of heralds that carry a detected pair,
//   p eta / (1 - (1 - p eta)(1 - dark)).
double herald_fraction(const ExperimentConfig& cfg);

// Closed form <I^2>_PS / <I^2> = 1 + eta_herald (n_th + 1) / (n_th + n_ex + 1).
double variance_ratio(double n_th, double n_ex, double eta_herald);

// Shot-by-shot simulation: pair, true click, dark click; heralded shots with a
// detected pair draw from the photon-added Q, every other shot (including
// dark-count heralds) draws from the thermal Q. Measured value is
// gain_scale (alpha + nu) with E|nu|^2 = n_ex.
QuadratureDataset simulate_experiment(const ExperimentConfig& cfg);

// Conditional sampler for large sample counts: n_heralded heralded
// samples, each a true herald with probability herald_fraction(cfg), followed
// by n_thermal unheralded thermal samples.
QuadratureDataset simulate_postselected(const ExperimentConfig& cfg, std::size_t n_heralded,
                                        std::size_t n_thermal);

// Multiplies quadratures by 1/gain_scale to express them in alpha units.
QuadratureDataset calibrate(const QuadratureDataset& ds, double gain_scale);

inline constexpr int kHistogramBins = 41;

struct QuadratureHistogram {
  int bins = kHistogramBins;
  double extent = 0.0;               // grid covers [-extent, extent]^2
  std::vector<double> probability;   // row-major, index iq * bins + ii
  double overflow = 0.0;             // probability mass outside the grid
  std::size_t samples = 0;

  double at(int ii, int iq) const { return probability[static_cast<std::size_t>(iq * bins + ii)]; }
  double bin_width() const { return 2.0 * extent / bins; }
};

// Default axis extent +-5 sqrt(n_th + n_ex + 1) in alpha units.
double default_extent(double n_th, double n_ex);

QuadratureHistogram histogram2d(const QuadratureDataset& ds, bool heralded_only, double extent);

struct RadialProfile {
  std::vector<double> r_edges;   // n_bins + 1 edges
  std::vector<double> diff;      // P_s(bin) - P(bin)
  std::vector<double> error;     // one standard deviation from counts
  std::vector<double> control;   // random subsample minus full dataset
  std::vector<double> control_error;
  std::size_t n_heralded = 0;
  std::size_t n_all = 0;
};

// D_s - D binned by |alpha| on [0, r_max]; the control draws the same number
// of samples from ds_all at random (seeded) and differences it the same way.
// Heralded flags are ignored: every sample of each dataset is used.
RadialProfile histogram_diff_radial(const QuadratureDataset& ds_heralded,
                                    const QuadratureDataset& ds_all, int n_radial_bins,
                                    double r_max, std::uint64_t control_seed);

// Splits a dataset by herald flag.
QuadratureDataset select(const QuadratureDataset& ds, bool heralded);

// Running second and fourth moments of |z|^2 for heralded and unheralded
// samples; enough to form the variance ratio without storing samples.
struct VarianceStats {
  std::uint64_t n_heralded = 0, n_unheralded = 0;
  CompensatedSum sum2_heralded, sum4_heralded;
  CompensatedSum sum2_unheralded, sum4_unheralded;

  void add(cplx z, bool heralded);
  void merge(const VarianceStats& other);
  double mean_heralded() const;
  double mean_unheralded() const;
};

VarianceStats variance_stats(const QuadratureDataset& ds);

// Streaming counterpart of simulate_postselected for sample counts too large
// to hold in memory. Draws the same samples as simulate_postselected, so the
// result matches variance_stats of that dataset up to summation order.
VarianceStats postselected_statistics(const ExperimentConfig& cfg, std::size_t n_heralded,
                                      std::size_t n_thermal);

struct ExcessNoise {
  double n_ex = 0.0;
  double stderr = 0.0;
  double ratio = 0.0;
  double ratio_stderr = 0.0;
};

// Inverts the variance ratio between heralded and unheralded samples for
// n_ex. Throws NoSignalError when the ratio is <= 1 or eta_herald == 0.
ExcessNoise extract_excess_noise(const QuadratureDataset& ds, double n_th, double eta_herald);
ExcessNoise extract_excess_noise(const VarianceStats& stats, double n_th, double eta_herald);
// Same inversion from a ratio already measured.
double excess_noise_from_ratio(double ratio, double n_th, double eta_herald);

// rep_rate (p eta_sys + dark_prob) duty_factor.
double heralding_rate(const ExperimentConfig& cfg, double rep_rate, double duty_factor = 1.0);

// Dark-count probability in a detection window of the given length.
double dark_probability(double dark_rate, double window);

}  // namespace transducer::herald
