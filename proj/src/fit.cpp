#include "transducer/fit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "transducer/constants.hpp"
#include "transducer/lm.hpp"

namespace transducer::fit {

using model::TransducerParams;
using scattering::ComplexSpectrum;

namespace {

constexpr double kFrequencyScale = kTwoPi * 1e6;
constexpr double kRankTolerance = 1e-9;

struct NameEntry {
  Parameter p;
  const char* name;
};

constexpr NameEntry kNames[] = {
    {Parameter::g_o, "g_o"},           {Parameter::kappa_o, "kappa_o"},
    {Parameter::kappa_oe, "kappa_oe"}, {Parameter::omega_m, "omega_m"},
    {Parameter::gamma_i, "gamma_i"},   {Parameter::g_mu, "g_mu"},
    {Parameter::kappa_mu, "kappa_mu"}, {Parameter::kappa_mue, "kappa_mue"},
    {Parameter::omega_mu, "omega_mu"},
};

bool is_frequency(Parameter p) { return p == Parameter::omega_m || p == Parameter::omega_mu; }

double& slot(TransducerParams& params, Parameter p, model::PumpState state) {
  switch (p) {
    case Parameter::g_o: return params.optical.g_o;
    case Parameter::kappa_o: return params.optical.kappa_o;
    case Parameter::kappa_oe: return params.optical.kappa_oe;
    case Parameter::omega_m: return params.mechanical.omega_m;
    case Parameter::gamma_i:
      return state == model::PumpState::on ? params.mechanical.gamma_i_on
                                           : params.mechanical.gamma_i_off;
    case Parameter::g_mu: return params.microwave.g_mu;
    case Parameter::kappa_mu: return params.microwave.kappa_mu;
    case Parameter::kappa_mue: return params.microwave.kappa_mue;
    case Parameter::omega_mu: return params.microwave.omega_mu;
  }
  throw std::logic_error("unknown fit parameter");
}

// Maps between physical parameters and the unconstrained fit vector.
class Parametrization {
 public:
  Parametrization(const TransducerParams& base, std::vector<Parameter> free,
                  model::PumpState state)
      : base_(base), free_(std::move(free)), state_(state) {}

  lm::Vector encode(const TransducerParams& params) const {
    TransducerParams copy = params;
    lm::Vector u(free_.size());
    for (std::size_t j = 0; j < free_.size(); ++j) {
      const double v = slot(copy, free_[j], state_);
      TransducerParams b = base_;
      u[j] = is_frequency(free_[j]) ? (v - slot(b, free_[j], state_)) / kFrequencyScale
                                    : std::log(v);
    }
    return u;
  }

  TransducerParams decode(const lm::Vector& u) const {
    TransducerParams out = base_;
    TransducerParams b = base_;
    for (std::size_t j = 0; j < free_.size(); ++j) {
      double& s = slot(out, free_[j], state_);
      s = is_frequency(free_[j]) ? slot(b, free_[j], state_) + u[j] * kFrequencyScale
                                 : std::exp(u[j]);
    }
    return out;
  }

  // d(natural)/d(u) per parameter, evaluated at u.
  lm::Vector scale(const lm::Vector& u) const {
    lm::Vector d(free_.size());
    for (std::size_t j = 0; j < free_.size(); ++j) {
      d[j] = is_frequency(free_[j]) ? kFrequencyScale : std::exp(u[j]);
    }
    return d;
  }

  const std::vector<Parameter>& free() const { return free_; }

 private:
  TransducerParams base_;
  std::vector<Parameter> free_;
  model::PumpState state_;
};

lm::Vector stacked_residual(const ComplexSpectrum& model_spec, const ComplexSpectrum& measured) {
  const std::size_t n = measured.size();
  lm::Vector r(2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto d = model_spec.values[k] - measured.values[k];
    r[static_cast<Eigen::Index>(k)] = d.real();
    r[static_cast<Eigen::Index>(n + k)] = d.imag();
  }
  return r;
}

// Returns the null-space direction when J is numerically rank deficient.
std::optional<lm::Vector> null_direction(const lm::Matrix& J) {
  // Column-normalize so the test is insensitive to parameter scaling.
  lm::Matrix Jn = J;
  for (Eigen::Index j = 0; j < Jn.cols(); ++j) {
    const double norm = Jn.col(j).norm();
    if (norm == 0.0) {
      lm::Vector v = lm::Vector::Zero(J.cols());
      v[j] = 1.0;
      return v;
    }
    Jn.col(j) /= norm;
  }
  Eigen::JacobiSVD<lm::Matrix> svd(Jn, Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return std::nullopt;
  if (s[s.size() - 1] > kRankTolerance * s[0]) return std::nullopt;
  return lm::Vector(svd.matrixV().col(s.size() - 1));
}

std::string describe_combination(const lm::Vector& v, const std::vector<Parameter>& free,
                                 std::vector<Parameter>* involved) {
  std::ostringstream os;
  bool first = true;
  for (std::size_t j = 0; j < free.size(); ++j) {
    const double c = v[static_cast<Eigen::Index>(j)];
    if (std::abs(c) < 0.1) continue;
    if (involved) involved->push_back(free[j]);
    if (!first) os << (c < 0 ? " - " : " + ");
    else if (c < 0) os << "-";
    first = false;
    os.precision(3);
    os << std::abs(c) << "*" << (is_frequency(free[j]) ? "" : "log ") << name(free[j]);
  }
  return os.str();
}

}  // namespace

std::string name(Parameter p) {
  for (const auto& e : kNames) {
    if (e.p == p) return e.name;
  }
  return "unknown";
}

std::optional<Parameter> parse_parameter(const std::string& s) {
  for (const auto& e : kNames) {
    if (s == e.name) return e.p;
  }
  return std::nullopt;
}

std::string name(SpectrumKind k) {
  switch (k) {
    case SpectrumKind::oo: return "oo";
    case SpectrumKind::mumu: return "mumu";
    case SpectrumKind::conversion: return "conversion";
  }
  return "unknown";
}

std::optional<SpectrumKind> parse_kind(const std::string& s) {
  if (s == "oo") return SpectrumKind::oo;
  if (s == "mumu") return SpectrumKind::mumu;
  if (s == "conversion") return SpectrumKind::conversion;
  return std::nullopt;
}

std::vector<Parameter> default_free(SpectrumKind kind) {
  switch (kind) {
    case SpectrumKind::oo:
      return {Parameter::g_o, Parameter::kappa_o, Parameter::kappa_oe, Parameter::gamma_i,
              Parameter::omega_m};
    case SpectrumKind::mumu:
      return {Parameter::g_mu, Parameter::kappa_mu, Parameter::kappa_mue, Parameter::gamma_i,
              Parameter::omega_m, Parameter::omega_mu};
    case SpectrumKind::conversion:
      return {Parameter::g_mu, Parameter::kappa_mu, Parameter::gamma_i, Parameter::omega_m,
              Parameter::omega_mu};
  }
  return {};
}

ComplexSpectrum forward(SpectrumKind kind, const TransducerParams& params,
                        const FitOptions& options, const std::vector<double>& freqs) {
  const auto rates = model::derive_rates(params.optical, params.microwave, options.pump);
  switch (kind) {
    case SpectrumKind::oo:
      return scattering::s_oo(params, rates, options.state, freqs, options.scattering);
    case SpectrumKind::mumu:
      return scattering::s_mumu(params, rates, options.state, freqs);
    case SpectrumKind::conversion:
      return scattering::s_conversion(params, rates, options.state, freqs,
                                      scattering::Direction::microwave_to_optical);
  }
  throw std::logic_error("unknown spectrum kind");
}

FitResult fit_spectrum(const ComplexSpectrum& measured, SpectrumKind kind,
                       const TransducerParams& initial_guess, const FitOptions& options) {
  measured.validate();
  std::vector<Parameter> free = options.free.empty() ? default_free(kind) : options.free;
  std::vector<Parameter> frozen;

  for (;;) {
    if (free.empty()) throw ConfigError("fit.free", "no free parameters");
    if (measured.size() < 5 * free.size()) {
      throw ConfigError("fit", "need at least 5 data points per free parameter");
    }
    TransducerParams initial = initial_guess;
    for (Parameter p : free) {
      const double v = slot(initial, p, options.state);
      if (!std::isfinite(v) || (!is_frequency(p) && v <= 0.0)) {
        throw ConfigError("initial_guess." + name(p), "must be finite and positive");
      }
    }

    const Parametrization par(initial, free, options.state);
    const lm::ResidualFn fn = [&](const lm::Vector& u) {
      return stacked_residual(forward(kind, par.decode(u), options, measured.freqs), measured);
    };

    auto handle_rank = [&](const lm::Matrix& J) -> bool {
      auto v = null_direction(J);
      if (!v) return false;
      std::vector<Parameter> involved;
      const std::string combo = describe_combination(*v, free, &involved);
      Parameter worst = involved.empty() ? free.back() : involved.front();
      double worst_sigma = -1.0;
      for (Parameter p : involved) {
        auto it = options.prior_rel_sigma.find(p);
        if (it == options.prior_rel_sigma.end()) throw RankDeficiencyError(combo);
        if (it->second > worst_sigma) {
          worst_sigma = it->second;
          worst = p;
        }
      }
      if (involved.empty()) throw RankDeficiencyError(combo);
      frozen.push_back(worst);
      free.erase(std::find(free.begin(), free.end(), worst));
      return true;
    };

    const lm::Vector u0 = par.encode(initial);
    {
      const lm::Vector r0 = fn(u0);
      if (handle_rank(lm::numerical_jacobian(fn, u0, r0, 1e-7))) continue;
    }

    lm::Options lo;
    lo.max_iterations = options.max_iterations;
    const lm::Result res = lm::minimize(fn, u0, lo);
    if (!res.converged()) {
      throw ConvergenceError("fit did not converge after " + std::to_string(res.iterations) +
                                 " iterations",
                             par.decode(res.x));
    }
    if (handle_rank(res.jacobian)) continue;

    FitResult out;
    out.params = par.decode(res.x);
    out.free = free;
    out.frozen = frozen;
    out.iterations = res.iterations;
    out.residual_norm = res.residual.norm();
    out.status = lm::to_string(res.status);

    const auto m = static_cast<double>(res.residual.size());
    const auto n = static_cast<double>(free.size());
    const double s2 = res.residual.squaredNorm() / std::max(m - n, 1.0);
    const lm::Matrix JtJ = res.jacobian.transpose() * res.jacobian;
    const lm::Matrix cov_u = s2 * JtJ.ldlt().solve(lm::Matrix::Identity(JtJ.rows(), JtJ.cols()));
    const lm::Vector d = par.scale(res.x);
    out.covariance = d.asDiagonal() * cov_u * d.asDiagonal();
    for (std::size_t j = 0; j < free.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      out.values.push_back(slot(out.params, free[j], options.state));
      out.stderrs.push_back(std::sqrt(std::max(out.covariance(jj, jj), 0.0)));
    }
    return out;
  }
}

}  // namespace transducer::fit
