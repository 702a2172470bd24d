#include <doctest.h>

#include <cmath>

#include "transducer/calib.hpp"
#include "transducer/constants.hpp"

using namespace transducer;

TEST_CASE("thermometry inverts the forward counts over a grid") {
  double worst = 0.0;
  for (double n_th : {1e-4, 0.01, 0.3, 0.68, 1.0, 3.0, 10.0}) {
    for (double n_coh : {0.5, 2.0, 5.0, 50.0, 1000.0}) {
      if (n_coh == n_th) continue;
      for (double sr : {1.0, 120.0}) {
        const auto c = calib::forward_sideband_counts(n_th, n_coh, sr, 0.37 * sr);
        const auto e = calib::thermometry(c);
        worst = std::max(worst, std::abs(e.value - n_th) / std::max(1.0, n_th));
      }
    }
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("thermometry toy case and failure modes") {
  // R_r = 3, R_b = 2: A = 1/2, n = 1
  calib::SidebandCounts c{3, 1, 2, 1};
  CHECK(calib::thermometry(c).value == doctest::Approx(1.0).epsilon(1e-15));

  calib::SidebandCounts equal{1, 1, 2, 1};
  CHECK_THROWS_AS(calib::thermometry(equal), DivisionError);
  calib::SidebandCounts zero{1, 0, 2, 1};
  CHECK_THROWS_AS(calib::thermometry(zero), DivisionError);
  // A >= 1 is unphysical
  calib::SidebandCounts bad{2, 1, 3, 1};
  CHECK_THROWS_AS(calib::thermometry(bad), calib::InconsistentCountsError);
  try {
    calib::thermometry(bad);
  } catch (const calib::InconsistentCountsError& e) {
    CHECK(e.asymmetry() == doctest::Approx(2.0));
  }
}

TEST_CASE("thermometry error propagation against a numeric oracle") {
  auto c = calib::forward_sideband_counts(0.68, 5.0, 120, 95);
  c.sigma_th_red = 1.0;
  const auto e = calib::thermometry(c);
  // only rate_th_red carries error: finite difference by hand
  auto shifted = c;
  const double h = 1e-4;
  shifted.rate_th_red += h;
  const double up = calib::thermometry(shifted).value;
  shifted.rate_th_red -= 2 * h;
  const double down = calib::thermometry(shifted).value;
  CHECK(e.stderr == doctest::Approx(std::abs(up - down) / (2 * h)).epsilon(1e-5));
}

TEST_CASE("gain and efficiency round trip") {
  const double w = angular(3.596e9);
  for (double g : {1.0, 3e5, 1e8}) {
    for (double eta : {0.001, 0.049, 0.6}) {
      const auto p = calib::forward_conversion_powers({g, eta}, w, 2e9, 3e9, 0.8);
      const auto r = calib::gain_and_efficiency(p, w);
      CHECK(r.gain == doctest::Approx(g).epsilon(1e-12));
      CHECK(r.eta == doctest::Approx(eta).epsilon(1e-12));
    }
  }
  // an unknown common scale of the RSA powers lands in the gain only
  auto p = calib::forward_conversion_powers({1e7, 0.049}, w, 2e9, 3e9, 0.8);
  p.p_mu_from_o *= 0.3;
  p.p_mu_from_mu_path *= 0.3;
  const auto scaled = calib::gain_and_efficiency(p, w);
  CHECK(scaled.eta == doctest::Approx(0.049).epsilon(1e-12));
  CHECK(scaled.gain == doctest::Approx(0.3e7).epsilon(1e-12));

  p.flux_out_o = 0;
  try {
    calib::gain_and_efficiency(p, w);
    FAIL("expected DivisionError");
  } catch (const DivisionError& e) {
    CHECK(e.operand() == "flux_out_o");
  }
}

TEST_CASE("added noise referral") {
  CHECK(calib::added_noise_referred(4.9, 0.049) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK_THROWS_AS(calib::added_noise_referred(4.9, 0.0), DivisionError);
}

TEST_CASE("excess noise decomposition against the variance model") {
  const double n_ex = calib::excess_noise_decomposition(0.35, 0.24, 1.9, 2.4);
  CHECK(std::abs(n_ex - 38.5) < 0.1);
  // the same number read off the unheralded variance: <I^2> = 2 G eta_d eta_mum (n_th + n_ex + 1)
  calib::ChainModel chain{0.24, 0.35, 0.68, 0.85, 10.0};
  const double G = 2.7;
  const auto v = calib::forward_variances(chain, G, 1.9, 2.4);
  const double from_variance = v.all / (2 * G * 0.24 * 0.35) - 10.0 - 1.0;
  CHECK(n_ex == doctest::Approx(from_variance).epsilon(1e-12));
  CHECK_THROWS_AS(calib::excess_noise_decomposition(0.0, 0.24, 1.9, 2.4), DivisionError);
}

TEST_CASE("invert_noise round trip") {
  for (double nth : {0.0, 3.0, 10.0}) {
    for (double n_n : {0.0, 1.3, 1.9}) {
      for (double n_m : {0.0, 2.4, 8.0}) {
        calib::ChainModel chain{0.24, 0.35, 0.68, 0.85, nth};
        const auto v = calib::forward_variances(chain, 4.2, n_n, n_m);
        const auto s = calib::invert_noise(v, chain);
        CHECK(std::abs(s.gain.value - 4.2) < 1e-9 * 4.2);
        CHECK(std::abs(s.n_n.value - n_n) < 1e-9);
        CHECK(std::abs(s.n_m.value - n_m) < 1e-9);
      }
    }
  }
}

TEST_CASE("invert_noise rejects negative noise and propagates errors") {
  calib::ChainModel chain{0.24, 0.35, 0.68, 0.85, 10.0};
  auto v = calib::forward_variances(chain, 1.0, 1.9, 2.4);
  v.control -= 10.0;
  CHECK_THROWS_AS(calib::invert_noise(v, chain), calib::InconsistentSystemError);
  try {
    calib::invert_noise(v, chain);
  } catch (const calib::InconsistentSystemError& e) {
    CHECK(e.raw_solution().n_m.value < 0);
  }

  v = calib::forward_variances(chain, 1.0, 1.9, 2.4);
  v.sigma_ps = 0.01 * v.ps;
  const auto s = calib::invert_noise(v, chain);
  // gain = (ps - all)/k, so sigma_G = sigma_ps/k
  const double k = 0.85 * 0.24 * 0.35 * 22.0;
  CHECK(s.gain.stderr == doctest::Approx(v.sigma_ps / k).epsilon(1e-5));
  auto flat = v;
  flat.ps = flat.all;
  CHECK_THROWS_AS(calib::invert_noise(flat, chain), DivisionError);
}

TEST_CASE("two thermal states") {
  const double ed = 0.24, em = 0.35, G = 1.7, nex = 18.0;
  const double lo = 2 * G * ed * em * (0.56 + nex + 1), hi = 2 * G * ed * em * (5.9 + nex + 1);
  const auto r = calib::two_thermal_calibration(lo, hi, 0.56, 5.9, ed, em, 0.01);
  CHECK(r.n_ex.value == doctest::Approx(nex).epsilon(1e-12));
  CHECK(r.gain == doctest::Approx(G).epsilon(1e-12));
  CHECK(r.n_ex.stderr > 0);
  CHECK_THROWS_AS(calib::two_thermal_calibration(hi, lo, 0.56, 5.9, ed, em), NoSignalError);
}

TEST_CASE("room temperature reference") {
  const double w = angular(3.596e9);
  // high-temperature limit kT/hbar w - 1/2
  const double x = kBoltzmann * 295 / (kHbar * w);
  CHECK(calib::bose_occupation(w, 295) == doctest::Approx(x - 0.5).epsilon(1e-6));
  CHECK(x == doctest::Approx(1709).epsilon(1e-3));

  const double gmu = angular(235e3), gtot = angular(600e3), flux = 1e9;
  const double n_coh = calib::room_temp_coherent(gmu, gtot, flux);
  CHECK(n_coh == doctest::Approx(4 * gmu * flux / (gtot * gtot)).epsilon(1e-14));
  const double k = 3.3e-15;  // arbitrary readout scale
  const double back = calib::room_temp_calibration(k * n_coh, k * (x - 0.5), w);
  CHECK(std::abs(back / n_coh - 1) < 0.01);
}

TEST_CASE("propagate matches a linear function exactly") {
  auto f = [](const std::vector<double>& v) { return 3 * v[0] - 4 * v[1]; };
  CHECK(calib::propagate(f, {1, 2}, {0.1, 0.2}) == doctest::Approx(std::hypot(0.3, 0.8)));
  CHECK(calib::propagate(f, {1, 2}, {0, 0}) == 0.0);
}
