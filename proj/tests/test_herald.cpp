#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <complex>

#include "transducer/constants.hpp"
#include "transducer/error.hpp"
#include "transducer/herald.hpp"

using namespace transducer;
using cplx = std::complex<double>;

namespace {

// Q(alpha) = <alpha|rho|alpha>/pi for a diagonal state truncated at N
// photons, summed in log space.
double fock_q(const std::vector<double>& log_p, double x) {
  double q = 0.0;
  for (std::size_t m = 0; m < log_p.size(); ++m) {
    if (!std::isfinite(log_p[m])) continue;
    const double lx = m == 0 ? 0.0 : static_cast<double>(m) * std::log(x);
    q += std::exp(log_p[m] - x + lx - std::lgamma(static_cast<double>(m) + 1.0));
  }
  return q / kPi;
}

std::vector<double> thermal_log_p(double n, int N) {
  std::vector<double> lp(N + 1);
  for (int k = 0; k <= N; ++k) lp[k] = k * std::log(n) - (k + 1) * std::log(n + 1);
  if (n == 0.0) {
    for (int k = 1; k <= N; ++k) lp[k] = -INFINITY;
    lp[0] = 0.0;
  }
  return lp;
}

// a^dag rho_th a / (n + 1): weight (k + 1) p_k moves to level k + 1.
std::vector<double> added_log_p(double n, int N) {
  const auto th = thermal_log_p(n, N);
  std::vector<double> lp(N + 1, -INFINITY);
  for (int k = 0; k < N; ++k) lp[k + 1] = th[k] + std::log(k + 1.0) - std::log(n + 1);
  return lp;
}

herald::ExperimentConfig nominal(std::uint64_t shots, std::uint64_t seed) {
  herald::ExperimentConfig c;
  c.p_pair = 0.036;
  c.eta_sys = 0.01;
  c.n_th = 10;
  c.n_ex = 39;
  c.gain_scale = 3.0;
  c.n_shots = shots;
  c.seed = seed;
  // sets the herald fraction to 0.85
  const double t = c.p_pair * c.eta_sys;
  c.dark_prob = 1.0 - (1.0 - t / 0.85) / (1.0 - t);
  return c;
}

}  // namespace

TEST_CASE("Q densities agree with the Fock sum") {
  const int N = 200;
  for (double n : {0.0, 0.5, 2.0, 10.0, 20.0}) {
    const auto th = thermal_log_p(n, N);
    const auto pa = added_log_p(n, N);
    double err_t = 0.0, err_a = 0.0;
    // the truncated basis only resolves coherent states with |alpha|^2 well below N
    const double r_max = std::min(6.0 * std::sqrt(n + 1.0), std::sqrt(N / 2.0));
    for (int k = 0; k <= 300; ++k) {
      const double r = r_max * k / 300.0;
      const cplx alpha = std::polar(r, 0.3 * k);
      err_t = std::max(err_t, std::abs(herald::q_thermal_pdf(n, alpha) - fock_q(th, r * r)));
      err_a = std::max(err_a, std::abs(herald::q_added_pdf(n, alpha) - fock_q(pa, r * r)));
    }
    CHECK(err_t < 1e-6);
    CHECK(err_a < 1e-6);
  }
}

TEST_CASE("sampled moments of the Q distributions") {
  const std::size_t n = 200000;
  for (double nbar : {0.0, 1.0, 10.0, 20.0}) {
    const double s = nbar + 1.0;
    const auto th = herald::sample_q_thermal(nbar, n, 42);
    const auto pa = herald::sample_q_added(nbar, n, 42);
    double m_t = 0, m_a = 0, re_a = 0;
    for (std::size_t k = 0; k < n; ++k) {
      m_t += std::norm(th[k]);
      m_a += std::norm(pa[k]);
      re_a += pa[k].real();
    }
    m_t /= n;
    m_a /= n;
    re_a /= n;
    // |alpha|^2 ~ Gamma(1, s) and Gamma(2, s)
    CHECK(std::abs(m_t - s) < 5 * s / std::sqrt(double(n)));
    CHECK(std::abs(m_a - 2 * s) < 5 * std::sqrt(2.0) * s / std::sqrt(double(n)));
    CHECK(std::abs(re_a) < 5 * std::sqrt(s) / std::sqrt(double(n)));
  }
}

TEST_CASE("radial difference matches the analytic profile") {
  const double nbar = 2.0, s = nbar + 1.0;
  const auto pa = herald::sample_q_added(nbar, 100000, 9);
  const auto th = herald::sample_q_thermal(nbar, 400000, 9);
  herald::QuadratureDataset dh, da;
  for (auto z : pa) dh.push(z, true);
  for (auto z : th) da.push(z, false);
  const int bins = 20;
  const double r_max = 4.0 * std::sqrt(s);
  const auto prof = herald::histogram_diff_radial(dh, da, bins, r_max, 3);
  REQUIRE(prof.diff.size() == bins);

  auto cdf_t = [s](double r) { return 1.0 - std::exp(-r * r / s); };
  auto cdf_a = [s](double r) { return 1.0 - std::exp(-r * r / s) * (1.0 + r * r / s); };
  double chi2 = 0.0, chi2_control = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double lo = prof.r_edges[b], hi = prof.r_edges[b + 1];
    const double expect = (cdf_a(hi) - cdf_a(lo)) - (cdf_t(hi) - cdf_t(lo));
    // Pearson form: spread from the expected bin probabilities
    const double pa_b = cdf_a(hi) - cdf_a(lo), pt_b = cdf_t(hi) - cdf_t(lo);
    const double var = pa_b * (1 - pa_b) / dh.size() + pt_b * (1 - pt_b) / da.size();
    chi2 += std::pow(prof.diff[b] - expect, 2) / var;
    if (prof.control_error[b] > 0) chi2_control += std::pow(prof.control[b] / prof.control_error[b], 2);
  }
  // 20 degrees of freedom; 50 is far out in the tail
  CHECK(chi2 < 50);
  CHECK(chi2_control < 50);
  // negative dip at small radius, positive lobe further out
  CHECK(prof.diff[0] < 0);
  CHECK(prof.diff[bins / 2] > 0);
}

TEST_CASE("herald fraction and variance ratio") {
  auto c = nominal(1, 1);
  CHECK(herald::herald_fraction(c) == doctest::Approx(0.85).epsilon(1e-12));
  CHECK(herald::variance_ratio(10, 39, 0.85) == doctest::Approx(1.187).epsilon(1e-3));
  CHECK(herald::excess_noise_from_ratio(herald::variance_ratio(10, 39, 0.85), 10, 0.85) ==
        doctest::Approx(39).epsilon(1e-12));
  CHECK_THROWS_AS(herald::excess_noise_from_ratio(1.0, 10, 0.85), NoSignalError);
  CHECK_THROWS_AS(herald::excess_noise_from_ratio(1.2, 10, 0.0), NoSignalError);
  c.dark_prob = 0.0;
  CHECK(herald::herald_fraction(c) == doctest::Approx(1.0));
}

TEST_CASE("shot simulation reproduces the variance ratio") {
  const auto c = nominal(1000000, 7);
  const auto ds = herald::simulate_experiment(c);
  CHECK(ds.size() == c.n_shots);
  const double h = static_cast<double>(ds.heralded_count());
  const double p_click = 1.0 - (1.0 - c.p_pair * c.eta_sys) * (1.0 - c.dark_prob);
  CHECK(std::abs(h - p_click * c.n_shots) < 5 * std::sqrt(p_click * c.n_shots));
  const auto est = herald::extract_excess_noise(herald::calibrate(ds, c.gain_scale), 10, 0.85);
  CHECK(std::abs(est.ratio - 1.187) < 5 * est.ratio_stderr);
}

TEST_CASE("conditional sampler recovers the injected excess noise") {
  const auto c = nominal(0, 21);
  const auto st = herald::postselected_statistics(c, 200000, 2000000);
  CHECK(st.n_heralded == 200000);
  const auto ds = herald::simulate_postselected(c, 2000, 20000);
  const auto st_small = herald::postselected_statistics(c, 2000, 20000);
  const auto direct = herald::variance_stats(ds);
  CHECK(direct.mean_heralded() == doctest::Approx(st_small.mean_heralded()).epsilon(1e-12));
  CHECK(direct.mean_unheralded() == doctest::Approx(st_small.mean_unheralded()).epsilon(1e-12));

  // quadratures carry the gain; in alpha units the ratio is unchanged
  const auto est = herald::extract_excess_noise(st, 10, 0.85);
  CHECK(std::abs(est.ratio - herald::variance_ratio(10, 39, 0.85)) < 5 * est.ratio_stderr);
  CHECK(std::abs(est.n_ex - 39) < 5 * est.stderr);
  CHECK(st.mean_unheralded() == doctest::Approx(9.0 * 50).epsilon(0.01));
}

TEST_CASE("determinism and independence of thread count") {
  const auto c = nominal(50000, 5);
  const auto a = herald::simulate_experiment(c);
  const auto b = herald::simulate_experiment(c);
  CHECK(a.i == b.i);
  CHECK(a.q == b.q);
  CHECK(a.heralded == b.heralded);
  setenv("TRANSDUCER_THREADS", "4", 1);
  const auto threaded = herald::simulate_experiment(c);
  unsetenv("TRANSDUCER_THREADS");
  CHECK(threaded.i == a.i);
  CHECK(threaded.heralded == a.heralded);
  auto d = c;
  d.seed = 6;
  CHECK(herald::simulate_experiment(d).i != a.i);
}

TEST_CASE("rates and probabilities") {
  CHECK(herald::dark_probability(70, 0.9e-6) == doctest::Approx(70 * 0.9e-6).epsilon(1e-4));
  herald::ExperimentConfig c;
  c.p_pair = 0.036;
  c.eta_sys = 0.01;
  CHECK(herald::heralding_rate(c, 170e3) == doctest::Approx(61.2).epsilon(1e-9));
  CHECK(herald::heralding_rate(c, 170e3, 0.25) == doctest::Approx(15.3).epsilon(1e-9));
}

TEST_CASE("invalid inputs") {
  auto c = nominal(10, 1);
  c.p_pair = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(herald::sample_q_added(-1, 10, 1), ConfigError);
  herald::QuadratureDataset empty;
  CHECK_THROWS_AS(herald::extract_excess_noise(empty, 10, 0.85), NoSignalError);
}
