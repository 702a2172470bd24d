#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "transducer/error.hpp"
#include "transducer/model.hpp"
#include "transducer/scattering.hpp"

namespace transducer::fit {

enum class SpectrumKind { oo, mumu, conversion };

enum class Parameter {
  g_o,
  kappa_o,
  kappa_oe,
  omega_m,
  gamma_i,  // the intrinsic linewidth selected by FitOptions::state
  g_mu,
  kappa_mu,
  kappa_mue,
  omega_mu,
};

std::string name(Parameter p);
std::optional<Parameter> parse_parameter(const std::string& s);
std::string name(SpectrumKind k);
std::optional<SpectrumKind> parse_kind(const std::string& s);

// Parameters freed by default for each spectrum kind.
std::vector<Parameter> default_free(SpectrumKind kind);

struct FitOptions {
  std::vector<Parameter> free;  // empty: default_free(kind)
  model::PumpConfig pump;       // n_a is held fixed during the fit
  model::PumpState state = model::PumpState::on;
  scattering::ScatteringOptions scattering;
  int max_iterations = 300;
  // Relative prior uncertainty per parameter. When the Jacobian is rank
  // deficient and priors are given for the offending combination, the
  // parameter with the largest prior uncertainty is frozen and the fit
  // continues; otherwise RankDeficiencyError is thrown.
  std::map<Parameter, double> prior_rel_sigma;
};

struct FitResult {
  model::TransducerParams params;
  std::vector<Parameter> free;
  std::vector<double> values;   // natural units (rad/s)
  std::vector<double> stderrs;  // natural units
  Eigen::MatrixXd covariance;   // natural units, ordered as `free`
  double residual_norm = 0.0;   // |r| over stacked re/im residuals
  int iterations = 0;
  std::vector<Parameter> frozen;  // parameters frozen by rank tie-breaking
  std::string status;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& msg, model::TransducerParams last)
      : NumericalError(msg), last_(last) {}
  const model::TransducerParams& last_iterate() const { return last_; }

 private:
  model::TransducerParams last_;
};

class RankDeficiencyError : public NumericalError {
 public:
  RankDeficiencyError(const std::string& combination)
      : NumericalError("rank-deficient Jacobian; unidentifiable combination: " + combination),
        combination_(combination) {}
  const std::string& combination() const { return combination_; }

 private:
  std::string combination_;
};

// Forward model used by the fit, dispatched on kind.
scattering::ComplexSpectrum forward(SpectrumKind kind, const model::TransducerParams& params,
                                    const FitOptions& options, const std::vector<double>& freqs);

// Levenberg-Marquardt fit of the stacked real/imaginary residual. Rates are
// fitted as logarithms, frequencies as offsets in units of 2pi x 1 MHz.
FitResult fit_spectrum(const scattering::ComplexSpectrum& measured, SpectrumKind kind,
                       const model::TransducerParams& initial_guess,
                       const FitOptions& options = {});

}  // namespace transducer::fit
