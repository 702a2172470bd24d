#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "transducer/config.hpp"
#include "transducer/constants.hpp"
#include "transducer/error.hpp"
#include "transducer/scattering.hpp"

using namespace transducer;
using cplx = std::complex<double>;

namespace {

config::DeviceConfig device() { return config::load(SOURCE_DIR "/config/paper_device.toml"); }

// Brute force: solve the three coupled amplitude equations at one probe
// frequency and read off the outputs. Returns {S_oo, S_mumu, S_conv}.
std::array<cplx, 3> linear_solve(const model::TransducerParams& p, double G, double gamma_i,
                                 double w) {
  const cplx I(0, 1);
  auto inv_chi = [&](double c, double k) { return cplx(0.5 * k, c - w); };
  Eigen::Matrix3cd M;
  M << inv_chi(p.mechanical.omega_m, p.optical.kappa_o), I * G, 0.0,
      I * G, inv_chi(p.mechanical.omega_m, gamma_i), I * p.microwave.g_mu,
      0.0, I * p.microwave.g_mu, inv_chi(p.microwave.omega_mu, p.microwave.kappa_mu);
  Eigen::Vector3cd opt(std::sqrt(p.optical.kappa_oe), 0, 0);
  Eigen::Vector3cd mw(0, 0, std::sqrt(p.microwave.kappa_mue));
  const Eigen::Vector3cd xo = M.partialPivLu().solve(opt);
  const Eigen::Vector3cd xm = M.partialPivLu().solve(mw);
  return {1.0 - std::sqrt(p.optical.kappa_oe) * xo(0),
          1.0 - std::sqrt(p.microwave.kappa_mue) * xm(2),
          std::sqrt(p.microwave.kappa_mue) * xo(2)};
}

}  // namespace

TEST_CASE("spectra agree with a direct linear solve") {
  const auto cfg = device();
  const auto r = model::derive_rates(cfg.params.optical, cfg.params.microwave, cfg.pump);
  const double fm = hertz(cfg.params.mechanical.omega_m);
  const auto freqs = scattering::linspace(fm - 5e6, fm + 5e6, 201);
  for (auto state : {model::PumpState::on, model::PumpState::off}) {
    const auto oo = scattering::s_oo(cfg.params, r, state, freqs);
    const auto mm = scattering::s_mumu(cfg.params, r, state, freqs);
    const auto cv = scattering::s_conversion(cfg.params, r, state, freqs,
                                             scattering::Direction::optical_to_microwave);
    double err = 0.0;
    for (std::size_t k = 0; k < freqs.size(); ++k) {
      const auto ref = linear_solve(cfg.params, r.G_o, cfg.params.mechanical.gamma_i(state),
                                    angular(freqs[k]));
      err = std::max(err, std::abs(oo.values[k] - ref[0]));
      err = std::max(err, std::abs(mm.values[k] - ref[1]));
      err = std::max(err, std::abs(std::abs(cv.values[k]) - std::abs(ref[2])));
    }
    CHECK(err < 1e-10);
  }
}

TEST_CASE("conversion peak equals the closed form efficiency") {
  const auto cfg = device();
  const auto r = model::derive_rates(cfg.params.optical, cfg.params.microwave, cfg.pump);
  const double fm = hertz(cfg.params.mechanical.omega_m);
  for (double n_a : {10.0, 100.0, 540.0, 3000.0}) {
    auto pump = cfg.pump;
    pump.n_a = n_a;
    const auto rr = model::derive_rates(cfg.params.optical, cfg.params.microwave, pump);
    const auto s = scattering::s_conversion(cfg.params, rr, model::PumpState::on, {fm},
                                            scattering::Direction::optical_to_microwave);
    const double eta = model::peak_efficiency(cfg.params, rr, model::PumpState::on);
    CHECK(std::abs(std::norm(s.values[0]) / eta - 1.0) < 1e-9);
  }
  (void)r;
}

TEST_CASE("conversion is reciprocal") {
  const auto cfg = device();
  const auto r = model::derive_rates(cfg.params.optical, cfg.params.microwave, cfg.pump);
  const double fm = hertz(cfg.params.mechanical.omega_m);
  const auto freqs = scattering::linspace(fm - 3e6, fm + 3e6, 61);
  const auto a = scattering::s_conversion(cfg.params, r, model::PumpState::on, freqs,
                                          scattering::Direction::optical_to_microwave);
  const auto b = scattering::s_conversion(cfg.params, r, model::PumpState::on, freqs,
                                          scattering::Direction::microwave_to_optical);
  for (std::size_t k = 0; k < freqs.size(); ++k) CHECK(a.values[k] == b.values[k]);
}

TEST_CASE("bandwidth of the conversion window") {
  const auto cfg = device();
  const auto r = model::derive_rates(cfg.params.optical, cfg.params.microwave, cfg.pump);
  const double fm = hertz(cfg.params.mechanical.omega_m);
  const auto s = scattering::s_conversion(cfg.params, r, model::PumpState::on,
                                          scattering::linspace(fm - 8e6, fm + 8e6, 16001),
                                          scattering::Direction::optical_to_microwave);
  const double bw = scattering::half_power_width(s);
  CHECK(bw > 1.35e6);
  CHECK(bw < 1.9e6);
}

TEST_CASE("half power width of a Lorentzian") {
  const double width = 2.0;
  const auto f = scattering::linspace(-20, 20, 40001);
  scattering::ComplexSpectrum s{f, {}};
  for (double x : f) s.values.push_back(1.0 / cplx(0.5 * width, x));
  CHECK(scattering::half_power_width(s) == doctest::Approx(width).epsilon(1e-6));
  // crossing outside the grid
  scattering::ComplexSpectrum cut{scattering::linspace(-0.5, 0.5, 101), {}};
  for (double x : cut.freqs) cut.values.push_back(1.0 / cplx(0.5 * width, x));
  CHECK(scattering::half_power_width(cut) == 0.0);
}

TEST_CASE("blue pump is rejected for conversion and optical reflection") {
  auto cfg = device();
  cfg.pump.detuning = model::Detuning::blue;
  const auto r = model::derive_rates(cfg.params.optical, cfg.params.microwave, cfg.pump);
  const std::vector<double> f{3.596e9};
  CHECK_THROWS_AS(scattering::s_oo(cfg.params, r, model::PumpState::on, f), InvalidModeError);
  CHECK_THROWS_AS(scattering::s_conversion(cfg.params, r, model::PumpState::on, f,
                                           scattering::Direction::optical_to_microwave),
                  InvalidModeError);
  CHECK_NOTHROW(scattering::s_mumu(cfg.params, r, model::PumpState::on, f));
}

TEST_CASE("reflections are passive") {
  const auto cfg = device();
  const auto r = model::derive_rates(cfg.params.optical, cfg.params.microwave, cfg.pump);
  const double fm = hertz(cfg.params.mechanical.omega_m);
  const auto f = scattering::linspace(fm - 10e6, fm + 10e6, 401);
  const auto oo = scattering::s_oo(cfg.params, r, model::PumpState::on, f);
  const auto mm = scattering::s_mumu(cfg.params, r, model::PumpState::on, f);
  const auto cv = scattering::s_conversion(cfg.params, r, model::PumpState::on, f,
                                           scattering::Direction::optical_to_microwave);
  for (std::size_t k = 0; k < f.size(); ++k) {
    CHECK(std::norm(oo.values[k]) + std::norm(cv.values[k]) <= 1.0 + 1e-12);
    CHECK(std::norm(mm.values[k]) + std::norm(cv.values[k]) <= 1.0 + 1e-12);
  }
}

TEST_CASE("non-increasing grid is rejected") {
  const auto cfg = device();
  const auto r = model::derive_rates(cfg.params.optical, cfg.params.microwave, cfg.pump);
  CHECK_THROWS_AS(scattering::s_mumu(cfg.params, r, model::PumpState::on, {2.0, 1.0}),
                  ConfigError);
}
