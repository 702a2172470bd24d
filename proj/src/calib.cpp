#include "transducer/calib.hpp"

#include <cmath>

#include "transducer/constants.hpp"

namespace transducer::calib {

namespace {

void require_nonzero(double v, const char* operand) {
  if (v == 0.0 || !std::isfinite(v)) throw DivisionError(operand);
}

void require_nonnegative(double v, const char* field) {
  if (!(v >= 0.0)) throw ConfigError(field, "must be non-negative");
}

void require_efficiency(double v, const char* operand) {
  if (v == 0.0) throw DivisionError(operand);
  if (!(v > 0.0 && v <= 1.0)) throw ConfigError(operand, "must lie in (0, 1]");
}

}  // namespace

double propagate(const std::function<double(const std::vector<double>&)>& f,
                 const std::vector<double>& x, const std::vector<double>& sigma) {
  double var = 0.0;
  std::vector<double> y = x;
  for (std::size_t k = 0; k < x.size() && k < sigma.size(); ++k) {
    if (sigma[k] == 0.0) continue;
    const double h = 1e-6 * std::max(std::abs(x[k]), std::abs(sigma[k]));
    y[k] = x[k] + h;
    const double fp = f(y);
    y[k] = x[k] - h;
    const double fm = f(y);
    y[k] = x[k];
    const double d = (fp - fm) / (2.0 * h);
    var += d * d * sigma[k] * sigma[k];
  }
  return std::sqrt(var);
}

void SidebandCounts::validate() const {
  require_nonnegative(rate_coh_red, "counts.rate_coh_red");
  require_nonnegative(rate_th_red, "counts.rate_th_red");
  require_nonnegative(rate_coh_blue, "counts.rate_coh_blue");
  require_nonnegative(rate_th_blue, "counts.rate_th_blue");
}

SidebandCounts forward_sideband_counts(double n_th, double n_coh, double scale_red,
                                       double scale_blue) {
  SidebandCounts c;
  c.rate_coh_red = scale_red * n_coh;
  c.rate_th_red = scale_red * n_th;
  c.rate_coh_blue = scale_blue * (n_coh + 1.0);
  c.rate_th_blue = scale_blue * (n_th + 1.0);
  return c;
}

namespace {

double asymmetry(const std::vector<double>& r) {
  const double rr = r[0] / r[1];
  const double rb = r[2] / r[3];
  return (rb - 1.0) / (rr - 1.0);
}

}  // namespace

Estimate thermometry(const SidebandCounts& counts) {
  counts.validate();
  require_nonzero(counts.rate_th_red, "rate_th_red");
  require_nonzero(counts.rate_th_blue, "rate_th_blue");
  const std::vector<double> x = {counts.rate_coh_red, counts.rate_th_red, counts.rate_coh_blue,
                                 counts.rate_th_blue};
  if (x[0] / x[1] == 1.0) throw DivisionError("R_r - 1");
  const double a = asymmetry(x);
  if (!(a >= 0.0 && a < 1.0)) {
    throw InconsistentCountsError("sideband asymmetry A = " + std::to_string(a) +
                                      " outside [0, 1)",
                                  a);
  }
  auto n_of = [](const std::vector<double>& r) {
    const double aa = asymmetry(r);
    return aa / (1.0 - aa);
  };
  return {a / (1.0 - a),
          propagate(n_of, x,
                    {counts.sigma_coh_red, counts.sigma_th_red, counts.sigma_coh_blue,
                     counts.sigma_th_blue})};
}

void ConversionPowers::validate() const {
  require_nonnegative(p_mu_from_o, "powers.p_mu_from_o");
  require_nonnegative(p_mu_from_mu_path, "powers.p_mu_from_mu_path");
  require_nonnegative(flux_in_o, "powers.flux_in_o");
  require_nonnegative(flux_out_o, "powers.flux_out_o");
  if (!(s_mumu_mag2 >= 0.0 && s_mumu_mag2 <= 1.0)) {
    throw ConfigError("powers.s_mumu_mag2", "must lie in [0, 1]");
  }
}

ConversionPowers forward_conversion_powers(const GainEfficiency& truth, double omega_mu,
                                           double flux_in_o, double flux_in_mu,
                                           double s_mumu_mag2) {
  const double quantum = kHbar * omega_mu;
  ConversionPowers p;
  p.flux_in_o = flux_in_o;
  p.flux_out_o = truth.eta * flux_in_mu;
  p.s_mumu_mag2 = s_mumu_mag2;
  p.p_mu_from_o = quantum * truth.gain * truth.eta * flux_in_o;
  p.p_mu_from_mu_path = quantum * truth.gain * s_mumu_mag2 * flux_in_mu;
  return p;
}

GainEfficiency gain_and_efficiency(const ConversionPowers& p, double omega_mu) {
  p.validate();
  require_nonzero(omega_mu, "omega_mu");
  require_nonzero(p.p_mu_from_o, "p_mu_from_o");
  require_nonzero(p.p_mu_from_mu_path, "p_mu_from_mu_path");
  require_nonzero(p.flux_in_o, "flux_in_o");
  require_nonzero(p.flux_out_o, "flux_out_o");
  require_nonzero(p.s_mumu_mag2, "s_mumu_mag2");
  const double quantum = kHbar * omega_mu;
  GainEfficiency out;
  out.gain = std::sqrt((p.p_mu_from_o / quantum) * (p.p_mu_from_mu_path / quantum) /
                       (p.flux_in_o * p.flux_out_o * p.s_mumu_mag2));
  out.eta = std::sqrt((p.flux_out_o / p.flux_in_o) *
                      (p.p_mu_from_o * p.s_mumu_mag2 / p.p_mu_from_mu_path));
  return out;
}

double added_noise_referred(double n_out, double eta) {
  require_nonzero(eta, "eta");
  if (eta < 0.0) throw ConfigError("eta", "must be positive");
  return n_out / eta;
}

double excess_noise_decomposition(double eta_mum, double eta_d, double n_n, double n_m) {
  require_efficiency(eta_mum, "eta_mum");
  require_efficiency(eta_d, "eta_d");
  const double loss = (1.0 - eta_mum) / eta_mum;
  const double chain = 1.0 / (eta_d * eta_mum);
  return loss * n_n + chain * n_m + 0.5 * (loss + chain - 1.0);
}

Variances forward_variances(const ChainModel& c, double gain, double n_n, double n_m) {
  Variances v;
  v.all = c.eta_d * c.eta_mum * gain * (2.0 * c.n_th_heated + 1.0) +
          c.eta_d * (1.0 - c.eta_mum) * gain * (2.0 * n_n + 1.0) + gain * (2.0 * n_m + 1.0);
  v.ps = v.all + c.eta_herald * c.eta_d * c.eta_mum * gain * (2.0 * c.n_th_heated + 2.0);
  v.control = c.eta_d * gain * (2.0 * c.n_th_pre + 1.0) + gain * (2.0 * n_m + 1.0);
  return v;
}

namespace {

struct RawSolution {
  double gain, n_n, n_m;
};

RawSolution solve(double all, double ps, double control, const ChainModel& c) {
  RawSolution s{};
  s.gain = (ps - all) / (c.eta_herald * c.eta_d * c.eta_mum * (2.0 * c.n_th_heated + 2.0));
  const double m_term = control / s.gain - c.eta_d * (2.0 * c.n_th_pre + 1.0);
  s.n_m = 0.5 * (m_term - 1.0);
  const double n_term =
      (all / s.gain - c.eta_d * c.eta_mum * (2.0 * c.n_th_heated + 1.0) - m_term) /
      (c.eta_d * (1.0 - c.eta_mum));
  s.n_n = 0.5 * (n_term - 1.0);
  return s;
}

}  // namespace

NoiseSolution invert_noise(const Variances& v, const ChainModel& c) {
  require_efficiency(c.eta_d, "eta_d");
  require_efficiency(c.eta_mum, "eta_mum");
  require_efficiency(c.eta_herald, "eta_herald");
  if (c.eta_mum == 1.0) throw DivisionError("1 - eta_mum");
  const double lift = v.ps - v.all;
  if (!(lift > 0.0)) throw DivisionError("var_ps - var_all");

  const RawSolution s = solve(v.all, v.ps, v.control, c);
  const std::vector<double> x = {v.all, v.ps, v.control};
  const std::vector<double> sig = {v.sigma_all, v.sigma_ps, v.sigma_control};
  NoiseSolution out;
  out.gain = {s.gain, propagate([&](const std::vector<double>& y) {
                return solve(y[0], y[1], y[2], c).gain;
              }, x, sig)};
  out.n_n = {s.n_n, propagate([&](const std::vector<double>& y) {
               return solve(y[0], y[1], y[2], c).n_n;
             }, x, sig)};
  out.n_m = {s.n_m, propagate([&](const std::vector<double>& y) {
               return solve(y[0], y[1], y[2], c).n_m;
             }, x, sig)};
  // rounding of an exact zero is not a violation
  constexpr double kSlack = -1e-9;
  if (s.n_n < kSlack || s.n_m < kSlack) {
    throw InconsistentSystemError("variance system gives negative noise (n_n = " +
                                      std::to_string(s.n_n) + ", n_m = " +
                                      std::to_string(s.n_m) + ")",
                                  out);
  }
  return out;
}

TwoThermalResult two_thermal_calibration(double var_low, double var_high, double n_low,
                                         double n_high, double eta_d, double eta_mum,
                                         double sigma_ratio) {
  require_efficiency(eta_d, "eta_d");
  require_efficiency(eta_mum, "eta_mum");
  require_nonzero(var_low, "var_low");
  if (!(n_high > n_low)) throw ConfigError("n_high", "must exceed n_low");
  const double r = var_high / var_low;
  if (!(r > 1.0)) throw NoSignalError("variance ratio <= 1 between thermal states");
  auto n_ex_of = [&](double ratio) {
    return (n_high + 1.0 - ratio * (n_low + 1.0)) / (ratio - 1.0);
  };
  TwoThermalResult out;
  out.n_ex.value = n_ex_of(r);
  // d n_ex / d r = -(n_high - n_low)/(r - 1)^2
  out.n_ex.stderr = (n_high - n_low) / ((r - 1.0) * (r - 1.0)) * sigma_ratio;
  if (out.n_ex.value < 0.0) {
    throw InconsistentSystemError("two-state calibration gives negative n_ex",
                                  NoiseSolution{});
  }
  out.gain = var_low / (2.0 * eta_d * eta_mum * (n_low + out.n_ex.value + 1.0));
  return out;
}

double room_temp_coherent(double gamma_mu, double gamma_total, double input_flux) {
  if (!(gamma_total > 0.0)) throw ConfigError("gamma_total", "must be positive");
  return 4.0 * gamma_mu * input_flux / (gamma_total * gamma_total);
}

double bose_occupation(double omega, double temperature) {
  if (!(omega > 0.0 && temperature > 0.0)) {
    throw ConfigError("bose", "omega and temperature must be positive");
  }
  return 1.0 / std::expm1(kHbar * omega / (kBoltzmann * temperature));
}

double room_temp_calibration(double power_coherent, double power_thermal, double omega_m,
                             double temperature) {
  require_nonzero(power_thermal, "power_thermal");
  const double scale = power_thermal / bose_occupation(omega_m, temperature);
  return power_coherent / scale;
}

}  // namespace transducer::calib
