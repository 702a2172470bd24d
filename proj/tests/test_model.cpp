#include <doctest.h>

#include <cmath>

#include "transducer/config.hpp"
#include "transducer/constants.hpp"
#include "transducer/error.hpp"
#include "transducer/model.hpp"

using namespace transducer;

namespace {

config::DeviceConfig device() { return config::load(SOURCE_DIR "/config/paper_device.toml"); }

}  // namespace

TEST_CASE("derived rates follow the adiabatic formulas") {
  const auto cfg = device();
  const auto r = model::derive_rates(cfg.params.optical, cfg.params.microwave, cfg.pump);
  // straight from the table numbers, in Hz
  const double G = std::sqrt(540.0) * 413e3;
  CHECK(hertz(r.G_o) == doctest::Approx(G).epsilon(1e-12));
  CHECK(hertz(r.gamma_om) == doctest::Approx(4 * G * G / 1.122e9).epsilon(1e-12));
  CHECK(hertz(r.gamma_mu) == doctest::Approx(4 * 424e3 * 424e3 / 3.06e6).epsilon(1e-12));
  CHECK(hertz(r.gamma_om) == doctest::Approx(327e3).epsilon(0.01));
  CHECK(model::fast_cavity_warnings(cfg.params, r).empty());
}

TEST_CASE("peak efficiency closed form") {
  CHECK(model::peak_efficiency(1, 1, 0, 0, 0) == 0.0);
  // impedance matched, lossless
  CHECK(model::peak_efficiency(1, 1, 0, 2.0, 2.0) == doctest::Approx(1.0));
  CHECK(model::peak_efficiency(0.5, 0.8, 0, 2.0, 2.0) == doctest::Approx(0.4));
  CHECK(model::peak_efficiency(1, 1, 1.0, 1.0, 1.0) == doctest::Approx(4.0 / 9.0));

  const auto cfg = device();
  const auto r = model::derive_rates(cfg.params.optical, cfg.params.microwave, cfg.pump);
  const double eta = model::peak_efficiency(cfg.params, r, model::PumpState::on);
  const double go = r.gamma_om, gm = r.gamma_mu, gi = angular(1.07e6);
  const double oracle = 0.5 * (3.04 / 3.06) * 4 * go * gm / std::pow(gi + go + gm, 2);
  CHECK(eta == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(eta > 0.052);
  CHECK(eta < 0.062);
  // pump-off loss is lower, so the efficiency is higher
  CHECK(model::peak_efficiency(cfg.params, r, model::PumpState::off) > eta);
}

TEST_CASE("efficiency is maximal when gamma_mu matches the other losses") {
  const double gi = 1.0, go = 2.0;
  const double best = model::peak_efficiency(1, 1, gi, go, gi + go);
  for (double gm : {0.5, 1.0, 2.0, 2.9, 3.1, 5.0, 10.0}) {
    CHECK(model::peak_efficiency(1, 1, gi, go, gm) <= best);
  }
}

TEST_CASE("pair probability needs a blue pump") {
  auto cfg = device();
  auto r = model::derive_rates(cfg.params.optical, cfg.params.microwave, cfg.pump);
  CHECK_THROWS_AS(model::pair_probability(r, cfg.pump), InvalidModeError);

  cfg.pump.detuning = model::Detuning::blue;
  cfg.pump.n_a = 473;
  r = model::derive_rates(cfg.params.optical, cfg.params.microwave, cfg.pump);
  const auto p = model::pair_probability(r, cfg.pump);
  CHECK(p.p == doctest::Approx(r.gamma_om * 20e-9).epsilon(1e-14));
  CHECK(p.p == doctest::Approx(0.036).epsilon(0.01));
  CHECK_FALSE(p.warning);

  cfg.pump.tau = 200e-9;
  CHECK(model::pair_probability(r, cfg.pump).warning);
}

TEST_CASE("budget products") {
  const auto cfg = device();
  const auto b = model::budget_products(cfg.budget);
  CHECK(b.eta_setup == doctest::Approx(0.254 * 0.099 * 0.77).epsilon(1e-12));
  CHECK(b.eta_setup == doctest::Approx(0.0194).epsilon(0.01));
  CHECK(b.eta_sys == doctest::Approx(0.5 * 0.254 * 0.15 * 0.65).epsilon(1e-12));
  CHECK(b.eta_sys == doctest::Approx(0.0124).epsilon(0.01));
}

TEST_CASE("invalid modes are rejected") {
  CHECK_THROWS_AS(model::OpticalMode::from_hz(1e14, 1e9, 2e9, 1e5).validate(), ConfigError);
  CHECK_THROWS_AS(model::MicrowaveMode::from_hz(4e9, -1, 0, 1e5).validate(), ConfigError);
  model::PumpConfig pump;
  pump.n_a = -1;
  CHECK_THROWS_AS(pump.validate(), ConfigError);
}
