#include "transducer/temporal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "transducer/constants.hpp"
#include "transducer/error.hpp"
#include "transducer/rng.hpp"
#include "transducer/stats.hpp"

namespace transducer::temporal {

namespace {

constexpr double kMaxStepRate = 0.05;
constexpr cplx kI{0.0, 1.0};

struct PairState {
  cplx b, c;
  double lost = 0.0;
};

// Linear drift of the phonon (b) / photon (c) pair in the microwave frame.
struct PairDynamics {
  double g = 0.0;
  double gamma_i = 0.0;
  double kappa = 0.0;
  double detuning = 0.0;  // omega_m - omega_mu

  PairState rhs(const PairState& s) const {
    PairState d;
    d.b = -kI * g * s.c - (0.5 * gamma_i + kI * detuning) * s.b;
    d.c = -kI * g * s.b - 0.5 * kappa * s.c;
    d.lost = kappa * std::norm(s.c) + gamma_i * std::norm(s.b);
    return d;
  }

  PairState step(const PairState& s, double h) const {
    auto axpy = [](const PairState& x, const PairState& d, double a) {
      return PairState{x.b + a * d.b, x.c + a * d.c, x.lost + a * d.lost};
    };
    const PairState k1 = rhs(s);
    const PairState k2 = rhs(axpy(s, k1, 0.5 * h));
    const PairState k3 = rhs(axpy(s, k2, 0.5 * h));
    const PairState k4 = rhs(axpy(s, k3, h));
    return PairState{s.b + h / 6.0 * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b),
                     s.c + h / 6.0 * (k1.c + 2.0 * k2.c + 2.0 * k3.c + k4.c),
                     s.lost + h / 6.0 * (k1.lost + 2.0 * k2.lost + 2.0 * k3.lost + k4.lost)};
  }

  // RK4 one-step propagator of the linear (b, c) part as a 2x2 matrix.
  std::array<cplx, 4> propagator(double h) const {
    const PairState e1 = step({1.0, 0.0, 0.0}, h);
    const PairState e2 = step({0.0, 1.0, 0.0}, h);
    return {e1.b, e2.b, e1.c, e2.c};
  }
};

double trapezoid_weight(std::size_t k, std::size_t n, double dt) {
  return (k == 0 || k + 1 == n) ? 0.5 * dt : dt;
}

}  // namespace

double TemporalMode::energy() const {
  CompensatedSum s;
  for (std::size_t k = 0; k < amp.size(); ++k) s.add(trapezoid_weight(k, amp.size(), dt) * std::norm(amp[k]));
  return s.value();
}

TemporalMode emit_single_phonon(const model::TransducerParams& params, double gamma_i, double dt,
                                double t_max, double mech_detuning) {
  if (!(dt > 0.0) || !(t_max > dt)) throw ConfigError("temporal.dt", "need 0 < dt < t_max");
  if (!(gamma_i >= 0.0)) throw ConfigError("temporal.gamma_i", "must be non-negative");
  const auto& mu = params.microwave;
  const double fastest = std::max({mu.kappa_mu, gamma_i, std::abs(mech_detuning), 2.0 * mu.g_mu});

  TemporalMode mode;
  if (dt * fastest >= kMaxStepRate) {
    dt *= 0.5;
    std::ostringstream os;
    os << "step halved to " << dt << " s to resolve the fastest rate";
    mode.warnings.push_back(os.str());
    if (dt * fastest >= kMaxStepRate) {
      throw NumericalError("time step too coarse: dt * rate = " + std::to_string(dt * fastest) +
                           " after halving (limit 0.05)");
    }
  }
  const double slowest = std::min(gamma_i + 4.0 * mu.g_mu * mu.g_mu / mu.kappa_mu, mu.kappa_mu);
  if (slowest > 0.0 && t_max * slowest < 5.0) {
    mode.warnings.push_back("window shorter than five decay times; emitted energy truncated");
  }

  const PairDynamics dyn{mu.g_mu, gamma_i, mu.kappa_mu, mech_detuning};
  const auto n = static_cast<std::size_t>(std::floor(t_max / dt + 1e-9)) + 1;
  mode.dt = dt;
  mode.t.resize(n);
  mode.amp.resize(n);
  mode.phonon.resize(n);
  mode.photon.resize(n);
  mode.lost.resize(n);

  const double sqrt_ke = std::sqrt(mu.kappa_mue);
  PairState s{1.0, 0.0, 0.0};
  for (std::size_t k = 0; k < n; ++k) {
    mode.t[k] = static_cast<double>(k) * dt;
    mode.amp[k] = sqrt_ke * s.c;
    mode.phonon[k] = std::norm(s.b);
    mode.photon[k] = std::norm(s.c);
    mode.lost[k] = s.lost;
    if (!std::isfinite(mode.phonon[k]) || mode.phonon[k] + mode.photon[k] > 1.0 + 1e-6) {
      throw NumericalError("integration unstable at t = " + std::to_string(mode.t[k]));
    }
    if (k + 1 < n) s = dyn.step(s, dt);
  }
  return mode;
}

DemodFilter DemodFilter::exponential(double kappa_d) {
  if (!(kappa_d > 0.0)) throw ConfigError("filter.kappa_d", "must be positive");
  DemodFilter f;
  f.kind_ = FilterKind::exponential;
  f.kappa_d_ = kappa_d;
  return f;
}

DemodFilter DemodFilter::custom(std::vector<cplx> samples, double dt) {
  if (samples.size() < 2 || !(dt > 0.0)) throw ConfigError("filter", "need >= 2 samples, dt > 0");
  CompensatedSum norm;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    norm.add(trapezoid_weight(k, samples.size(), dt) * std::norm(samples[k]));
  }
  if (!(norm.value() > 0.0)) throw ConfigError("filter", "waveform has zero energy");
  const double scale = 1.0 / std::sqrt(norm.value());
  for (auto& v : samples) v *= scale;
  DemodFilter f;
  f.kind_ = FilterKind::custom;
  f.dt_ = dt;
  f.samples_ = std::move(samples);
  return f;
}

DemodFilter DemodFilter::matched(const TemporalMode& mode) {
  DemodFilter f = custom(mode.amp, mode.dt);
  f.kind_ = FilterKind::matched;
  return f;
}

cplx DemodFilter::at(double t) const {
  if (kind_ == FilterKind::exponential) {
    return t >= 0.0 ? std::sqrt(kappa_d_) * std::exp(-0.5 * kappa_d_ * t) : 0.0;
  }
  const double x = t / dt_;
  if (x < 0.0) return 0.0;
  const double last = static_cast<double>(samples_.size() - 1);
  if (x > last) return 0.0;
  const auto k = static_cast<std::size_t>(std::floor(x));
  if (k + 1 >= samples_.size()) return samples_.back();
  const double frac = x - static_cast<double>(k);
  return (1.0 - frac) * samples_[k] + frac * samples_[k + 1];
}

double demod_efficiency(const TemporalMode& mode, const DemodFilter& filter, double delay) {
  cplx acc = 0.0;
  double comp_re = 0.0, comp_im = 0.0;
  const std::size_t n = mode.size();
  for (std::size_t k = 0; k < n; ++k) {
    const cplx term = trapezoid_weight(k, n, mode.dt) * std::conj(mode.amp[k]) *
                      filter.at(mode.t[k] - delay);
    // Kahan on both components.
    const double yr = term.real() - comp_re;
    const double yi = term.imag() - comp_im;
    const double tr = acc.real() + yr;
    const double ti = acc.imag() + yi;
    comp_re = (tr - acc.real()) - yr;
    comp_im = (ti - acc.imag()) - yi;
    acc = {tr, ti};
  }
  return std::norm(acc);
}

DelayOptimum optimal_delay(const TemporalMode& mode, const DemodFilter& filter, double lo,
                           double hi, int coarse_points) {
  if (!(hi > lo) || coarse_points < 3) throw ConfigError("scan_range", "need lo < hi, >= 3 points");
  std::vector<double> grid(static_cast<std::size_t>(coarse_points));
  std::size_t best = 0;
  double best_val = -1.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    grid[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(grid.size() - 1);
    const double v = demod_efficiency(mode, filter, grid[k]);
    if (v > best_val) {
      best_val = v;
      best = k;
    }
  }
  DelayOptimum out;
  out.delay = grid[best];
  out.efficiency = best_val;
  if (best == 0 || best + 1 == grid.size()) {
    out.at_boundary = true;
    out.warnings.push_back("efficiency peak at scan-range boundary; widen the range");
    return out;
  }

  // Golden-section on the bracketing cells.
  constexpr double kInvPhi = 0.6180339887498949;
  double a = grid[best - 1], b = grid[best + 1];
  double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
  double f1 = demod_efficiency(mode, filter, x1), f2 = demod_efficiency(mode, filter, x2);
  const double tol = 1e-3 * mode.dt;
  while (b - a > tol) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = demod_efficiency(mode, filter, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = demod_efficiency(mode, filter, x2);
    }
  }
  const double mid = 0.5 * (a + b);
  const double fm = demod_efficiency(mode, filter, mid);
  if (fm > out.efficiency) {
    out.delay = mid;
    out.efficiency = fm;
  }
  return out;
}

void HeatingBath::validate() const {
  if (!(n_bath_peak >= 0.0)) throw ConfigError("heating.n_bath_peak", "must be non-negative");
  if (!(decay_rate > 0.0)) throw ConfigError("heating.decay_rate", "must be positive");
  if (!(coupling >= 0.0)) throw ConfigError("heating.coupling", "must be non-negative");
}

double HeatingBath::occupation(double t) const {
  return t >= t0 ? n_bath_peak * std::exp(-decay_rate * (t - t0)) : 0.0;
}

namespace {

// Integral over s in [sa, sb] of the driven occupation measured from t0.
double occupation_integral(double drive, double r, double G, double sa, double sb) {
  if (sb <= sa) return 0.0;
  if (std::abs(G - r) <= 1e-9 * G) {
    auto prim = [G](double s) { return -(s / G + 1.0 / (G * G)) * std::exp(-G * s); };
    return drive * (prim(sb) - prim(sa));
  }
  const double term_r = (std::exp(-r * sa) - std::exp(-r * sb)) / r;
  const double term_g = (std::exp(-G * sa) - std::exp(-G * sb)) / G;
  return drive / (G - r) * (term_r - term_g);
}

}  // namespace

std::vector<double> heating_trajectory(const HeatingBath& bath,
                                       const model::TransducerParams& params, double window,
                                       int n_windows) {
  bath.validate();
  if (!(window > 0.0)) throw ConfigError("heating.window", "must be positive");
  const auto& mu = params.microwave;
  const double gamma_tot = bath.coupling + 4.0 * mu.g_mu * mu.g_mu / mu.kappa_mu;
  const double drive = bath.coupling * bath.n_bath_peak;
  std::vector<double> out(static_cast<std::size_t>(std::max(n_windows, 0)));
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double ta = static_cast<double>(k) * window;
    const double tb = ta + window;
    const double sa = std::max(0.0, ta - bath.t0);
    const double sb = std::max(0.0, tb - bath.t0);
    out[k] = occupation_integral(drive, bath.decay_rate, gamma_tot, sa, sb) / window;
  }
  return out;
}

double fit_tail_decay(const std::vector<double>& trajectory, double window, std::size_t first) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t k = first; k < trajectory.size(); ++k) {
    if (!(trajectory[k] > 0.0)) continue;
    const double x = (static_cast<double>(k) + 0.5) * window;
    const double y = std::log(trajectory[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw NumericalError("fewer than two positive windows in the tail");
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return -slope;
}

AddedNoiseResult added_noise_mc(const HeatingBath& bath, const model::TransducerParams& params,
                                const DemodFilter& filter, double delay, int n_instances,
                                std::uint64_t seed, const StochasticGrid& grid) {
  bath.validate();
  if (n_instances < 100) {
    throw ConfigError("n_instances", "at least 100 ensemble members required");
  }
  const auto& mu = params.microwave;
  const TemporalMode mode = emit_single_phonon(params, bath.coupling, grid.dt, grid.t_max);
  const double dt = mode.dt;
  const std::size_t n = mode.size();

  AddedNoiseResult out;
  out.n_instances = n_instances;
  out.seed = seed;
  out.eta_mum = mode.energy();
  out.eta_m = demod_efficiency(mode, filter, delay);
  out.eta_d = out.eta_mum > 0.0 ? out.eta_m / out.eta_mum : 0.0;

  // Precompute the drift propagators and the per-step weights.
  const PairDynamics dyn{mu.g_mu, bath.coupling, mu.kappa_mu, 0.0};
  const auto P = dyn.propagator(dt);
  const auto H = dyn.propagator(0.5 * dt);
  std::vector<cplx> weight(n);
  std::vector<double> noise_var(n);
  const double sqrt_ke = std::sqrt(mu.kappa_mue);
  for (std::size_t k = 0; k < n; ++k) {
    weight[k] = trapezoid_weight(k, n, dt) * std::conj(filter.at(mode.t[k] - delay)) * sqrt_ke;
    // E|dW|^2 = gamma_i n_bath(t) dt, sampled at the step midpoint.
    noise_var[k] = bath.coupling * bath.occupation(mode.t[k] + 0.5 * dt) * dt;
  }

  std::vector<double> second_moment(static_cast<std::size_t>(n_instances));
  parallel_blocks(second_moment.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng(derive_seed(seed, streams::noise_mc, i));
      cplx b = 0.0, c = 0.0, acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        acc += weight[k] * c;
        if (k + 1 == n) break;
        // Midpoint injection: half-step propagate the increment, full-step the state.
        const cplx dw = noise_var[k] > 0.0 ? rng.complex_normal(noise_var[k]) : cplx(0.0);
        const cplx nb = P[0] * b + P[1] * c + H[0] * dw;
        const cplx nc = P[2] * b + P[3] * c + H[2] * dw;
        b = nb;
        c = nc;
      }
      second_moment[i] = std::norm(acc);
    }
  });

  const MomentSummary s = summarize(second_moment);
  out.demod_variance = s.mean;
  out.demod_variance_stderr = s.stderr_mean;
  const double referral = out.eta_d * (1.0 - out.eta_mum);
  if (referral > 0.0) {
    out.n_n = out.demod_variance / referral;
    out.stderr_n_n = out.demod_variance_stderr / referral;
  }
  return out;
}

JitterResult efficiency_under_jitter(const model::TransducerParams& params, double gamma_i,
                                     const DemodFilter& filter, double jitter_rms,
                                     int n_instances, std::uint64_t seed,
                                     const JitterSettings& settings) {
  if (!(jitter_rms >= 0.0)) throw ConfigError("jitter_rms", "must be non-negative");
  if (n_instances < 1) throw ConfigError("n_instances", "must be positive");
  std::vector<double> eff(static_cast<std::size_t>(n_instances));
  parallel_blocks(eff.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng(derive_seed(seed, streams::jitter_mc, i));
      const double offset = jitter_rms * rng.normal();
      // Larger offsets oscillate faster; tighten the step if needed.
      double dt = settings.dt;
      while (std::abs(offset) * dt >= 0.02) dt *= 0.5;
      const TemporalMode mode = emit_single_phonon(params, gamma_i, dt, settings.t_max, offset);
      eff[i] = optimal_delay(mode, filter, settings.delay_lo, settings.delay_hi,
                             settings.coarse_points)
                   .efficiency;
    }
  });
  const MomentSummary s = summarize(eff);
  return {s.mean, s.stderr_mean, n_instances};
}

}  // namespace transducer::temporal
