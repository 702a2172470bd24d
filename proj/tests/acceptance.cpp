// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failures, so ctest reports any regression.

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "transducer/calib.hpp"
#include "transducer/circuit.hpp"
#include "transducer/config.hpp"
#include "transducer/constants.hpp"
#include "transducer/herald.hpp"
#include "transducer/io.hpp"
#include "transducer/model.hpp"
#include "transducer/scattering.hpp"
#include "transducer/temporal.hpp"

using namespace transducer;
namespace fs = std::filesystem;
using cplx = std::complex<double>;

namespace {

// Tolerances.
constexpr double kRateRel = 0.01;
constexpr double kEtaLo = 0.052, kEtaHi = 0.062;
constexpr double kBwLo = 1.35e6, kBwHi = 1.9e6;
constexpr double kIdentityRel = 1e-9;
constexpr double kEtaMumLo = 0.33, kEtaMumHi = 0.45;
constexpr double kEtaDLo = 0.19, kEtaDHi = 0.29;
constexpr double kEnergyAbs = 1e-6;
constexpr double kQSup = 1e-6;
constexpr double kSigmas = 5.0;
constexpr double kRatioSigmas = 3.0;
constexpr double kNexWindow = 6.0;
constexpr double kDecompAbs = 0.1;
constexpr double kRoundTrip = 1e-9;
constexpr double kExactRel = 1e-12;
constexpr double kF0Rel = 1e-3;
constexpr double kGammaRel = 0.10;
constexpr double kFsrRel = 1e-9;
constexpr double kCouplingFactor = 3.0;
constexpr double kBudgetRel = 0.01;

int failures = 0;

void report(int id, bool ok, const std::string& what) {
  std::printf("%s %2d %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  if (!ok) ++failures;
}

void note(const std::string& s) { std::printf("        %s\n", s.c_str()); }

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double fock_q(const std::vector<double>& log_p, double x) {
  double q = 0.0;
  for (std::size_t m = 0; m < log_p.size(); ++m) {
    if (!std::isfinite(log_p[m])) continue;
    const double lx = m == 0 ? 0.0 : static_cast<double>(m) * std::log(x);
    q += std::exp(log_p[m] - x + lx - std::lgamma(static_cast<double>(m) + 1.0));
  }
  return q / kPi;
}

// Photon-added thermal populations (k + 1) p_k / (n + 1) on level k + 1.
std::vector<double> added_log_p(double n, int N) {
  std::vector<double> lp(N + 1, -INFINITY);
  for (int k = 0; k < N; ++k) {
    const double th = n == 0.0 ? (k == 0 ? 0.0 : -INFINITY)
                               : k * std::log(n) - (k + 1) * std::log(n + 1);
    lp[k + 1] = th + std::log(k + 1.0) - std::log(n + 1);
  }
  return lp;
}

herald::ExperimentConfig herald_config(std::uint64_t shots, std::uint64_t seed) {
  herald::ExperimentConfig c;
  c.p_pair = 0.036;
  c.eta_sys = 0.01;
  c.n_th = 10;
  c.n_ex = 39;
  c.gain_scale = 1.0;
  c.n_shots = shots;
  c.seed = seed;
  // dark probability chosen so that 85% of heralds carry a pair
  const double t = c.p_pair * c.eta_sys;
  c.dark_prob = 1.0 - (1.0 - t / 0.85) / (1.0 - t);
  return c;
}

bool same_tree(const fs::path& a, const fs::path& b, std::size_t& files) {
  files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    const auto other = b / e.path().filename();
    if (!fs::exists(other)) return false;
    if (io::read_text(e.path().string()) != io::read_text(other.string())) return false;
    ++files;
  }
  return files == static_cast<std::size_t>(std::distance(fs::directory_iterator(b), {}));
}

}  // namespace

int main() {
  const auto cfg = config::load(SOURCE_DIR "/config/paper_device.toml");
  const auto& P = cfg.params;
  const auto rates = model::derive_rates(P.optical, P.microwave, cfg.pump);
  const double fm = hertz(P.mechanical.omega_m);

  {
    const double g = hertz(rates.gamma_om);
    report(1, std::abs(g / 327e3 - 1) < kRateRel,
           fmt("gamma_om/2pi = %.1f kHz at n_a = %.0f (327 kHz, 1%%)", g * 1e-3, cfg.pump.n_a));
  }

  const double eta = model::peak_efficiency(P, rates, model::PumpState::on);
  report(2, eta > kEtaLo && eta < kEtaHi,
         fmt("peak efficiency %.3f%% in [5.2, 6.2]%%", 100 * eta));
  note(fmt("measured 4.9 +- 0.5%%: model is %.1f%% higher (relative), left as is",
           100 * (eta / 0.049 - 1)));

  {
    const auto s = scattering::s_conversion(P, rates, model::PumpState::on,
                                            scattering::linspace(fm - 8e6, fm + 8e6, 16001),
                                            scattering::Direction::optical_to_microwave);
    const double bw = scattering::half_power_width(s);
    report(3, bw > kBwLo && bw < kBwHi,
           fmt("3 dB bandwidth %.3f MHz in [1.35, 1.9] MHz (quoted 1.5 MHz)", bw * 1e-6));
  }

  {
    double worst = 0.0;
    for (double n_a : {1.0, 50.0, 540.0, 5000.0}) {
      for (auto state : {model::PumpState::on, model::PumpState::off}) {
        auto pump = cfg.pump;
        pump.n_a = n_a;
        const auto r = model::derive_rates(P.optical, P.microwave, pump);
        const auto s = scattering::s_conversion(P, r, state, {fm},
                                                scattering::Direction::optical_to_microwave);
        worst = std::max(worst, std::abs(std::norm(s.values[0]) /
                                             model::peak_efficiency(P, r, state) - 1));
      }
    }
    report(4, worst < kIdentityRel,
           fmt("|S_conv(omega_m)|^2 vs peak efficiency: worst rel. error %.2e (< 1e-9)", worst));
  }

  const double g_off = P.mechanical.gamma_i_off;
  {
    const auto mode = temporal::emit_single_phonon(P, g_off, cfg.temporal.dt_s, cfg.temporal.t_max_s);
    const double eta_mum = mode.energy();
    const auto f5 = temporal::DemodFilter::exponential(angular(5e6));
    const auto opt = temporal::optimal_delay(mode, f5, cfg.temporal.delay_lo_s, cfg.temporal.delay_hi_s);
    const double eta_d = opt.efficiency / eta_mum;
    report(5, eta_mum > kEtaMumLo && eta_mum < kEtaMumHi && eta_d > kEtaDLo && eta_d < kEtaDHi,
           fmt("eta_mum = %.3f in [0.33, 0.45] (quoted 0.35); 5 MHz filter eta_d = %.3f in "
               "[0.19, 0.29] (quoted 0.24) at delay %.0f ns",
               eta_mum, eta_d, opt.delay * 1e9));
  }

  {
    double worst = 0.0;
    for (double gi : {g_off, P.mechanical.gamma_i_on}) {
      for (double det : {0.0, angular(0.5e6), angular(-2e6)}) {
        const auto m = temporal::emit_single_phonon(P, gi, 1e-9, 3e-6, det);
        for (std::size_t k = 0; k < m.size(); ++k) {
          worst = std::max(worst, std::abs(m.phonon[k] + m.photon[k] + m.lost[k] - 1));
        }
      }
    }
    report(6, worst < kEnergyAbs, fmt("energy bookkeeping: worst |phonon + photon + lost - 1| = %.2e", worst));
  }

  {
    // Fock sum truncated at N = 200, compared where that basis has converged.
    const int N = 200;
    double sup = 0.0;
    for (double n : {0.0, 1.0, 5.0, 10.0, 20.0}) {
      const auto lp = added_log_p(n, N);
      const double r_max = std::min(6 * std::sqrt(n + 1), std::sqrt(N / 2.0));
      for (int k = 0; k <= 400; ++k) {
        const double r = r_max * k / 400;
        sup = std::max(sup, std::abs(herald::q_added_pdf(n, std::polar(r, 0.1 * k)) - fock_q(lp, r * r)));
      }
    }
    bool moments_ok = true;
    double worst_z = 0.0;
    const std::size_t count = 400000;
    for (double n : {0.0, 1.0, 10.0, 20.0}) {
      const auto z = herald::sample_q_added(n, count, 2024);
      double m1 = 0, m2 = 0;
      for (const auto& v : z) {
        m1 += std::norm(v);
        m2 += std::norm(v) * std::norm(v);
      }
      m1 /= count;
      m2 /= count;
      // |alpha|^2 ~ Gamma(2, n + 1): mean 2s, second moment 6s^2, variance of x^2 is 120s^4 - 36s^4
      const double s = n + 1;
      const double z1 = (m1 - 2 * s) / (std::sqrt(2.0) * s / std::sqrt(double(count)));
      const double z2 = (m2 - 6 * s * s) / (std::sqrt(84.0) * s * s / std::sqrt(double(count)));
      worst_z = std::max({worst_z, std::abs(z1), std::abs(z2)});
      moments_ok = moments_ok && std::abs(z1) < kSigmas && std::abs(z2) < kSigmas;
    }
    report(7, sup < kQSup && moments_ok,
           fmt("photon-added Q pdf vs Fock sum (N = 200): sup error %.2e; sampled moments worst "
               "%.2f sigma (< 5)",
               sup, worst_z));
  }

  {
    const auto c = herald_config(1000000, 11);
    const auto ds = herald::simulate_experiment(c);
    const auto shot = herald::extract_excess_noise(ds, c.n_th, 0.85);
    const auto cond = herald::extract_excess_noise(
        herald::postselected_statistics(herald_config(0, 12), 1000000, 10000000), c.n_th, 0.85);
    const auto full = herald::extract_excess_noise(
        herald::postselected_statistics(herald_config(0, 13), 1400000, 43000000), c.n_th, 0.85);
    const double target = 1.187;
    const bool ok = std::abs(shot.ratio - target) < kRatioSigmas * shot.ratio_stderr &&
                    std::abs(cond.ratio - target) < kRatioSigmas * cond.ratio_stderr &&
                    std::abs(full.n_ex - 39.0) < kNexWindow;
    report(8, ok,
           fmt("variance ratio vs 1.187: 1e6 shots %.4f +- %.4f, 1e6 heralded samples %.4f +- "
               "%.4f; full-scale n_ex = %.2f +- %.2f (39 +- 6)",
               shot.ratio, shot.ratio_stderr, cond.ratio, cond.ratio_stderr, full.n_ex,
               full.stderr));
    note(fmt("closed form at eta_herald 0.85: %.4f; shot run had %.0f heralds",
             herald::variance_ratio(10, 39, 0.85), double(ds.heralded_count())));
  }

  {
    const double n_ex = calib::excess_noise_decomposition(0.35, 0.24, 1.9, 2.4);
    double worst = 0.0;
    for (double nth : {0.0, 10.0}) {
      for (double n_n : {0.0, 1.9}) {
        for (double n_m : {0.5, 2.4}) {
          calib::ChainModel chain{0.24, 0.35, 0.68, 0.85, nth};
          const auto s = calib::invert_noise(calib::forward_variances(chain, 3.1, n_n, n_m), chain);
          worst = std::max({worst, std::abs(s.gain.value / 3.1 - 1), std::abs(s.n_n.value - n_n),
                            std::abs(s.n_m.value - n_m)});
        }
      }
    }
    report(9, std::abs(n_ex - 38.5) < kDecompAbs && worst < kRoundTrip,
           fmt("n_ex(0.35, 0.24, 1.9, 2.4) = %.3f (38.5 +- 0.1, quoted 39 +- 6); invert_noise "
               "round trip %.1e",
               n_ex, worst));
  }

  {
    double worst = 0.0;
    for (double n_th : {0.01, 0.1, 0.68, 2.0, 10.0}) {
      for (double n_coh : {0.5, 5.0, 100.0}) {
        const auto e = calib::thermometry(calib::forward_sideband_counts(n_th, n_coh, 120, 95));
        worst = std::max(worst, std::abs(e.value - n_th));
      }
    }
    const double toy = calib::thermometry({3, 1, 2, 1}).value;
    report(10, worst < kRoundTrip && std::abs(toy - 1) < kRoundTrip,
           fmt("thermometry grid round trip %.1e; A = 0.5 gives n_th = %.12g", worst, toy));
  }

  {
    const double w = P.microwave.omega_mu;
    double worst = 0.0;
    for (double g : {1.0, 1e7}) {
      for (double e : {0.01, 0.049, 0.5}) {
        const auto r = calib::gain_and_efficiency(
            calib::forward_conversion_powers({g, e}, w, 2e9, 3e9, 0.8), w);
        worst = std::max({worst, std::abs(r.gain / g - 1), std::abs(r.eta / e - 1)});
      }
    }
    const double n_add = calib::added_noise_referred(4.9, 0.049);
    report(11, worst < kExactRel && std::abs(n_add - 100) < 1e-9,
           fmt("gain/efficiency round trip %.1e; added noise 4.9/0.049 = %.6g (quoted 99 +- 10)",
               worst, n_add));
  }

  {
    const auto& c = cfg.circuit;
    const auto r = circuit::rlc_resonance(c.rlc);
    const double fsr = c.line.fsr();
    circuit::WirebondNetwork wb = c.wirebond;
    wb.length_wb = 0.75e-3;
    wb.n_wb = 1;
    const auto p = circuit::coupling_point(c.rlc, wb, c.line, c.coupling);
    const bool ok = std::abs(r.f0 / 3.596e9 - 1) < kF0Rel &&
                    std::abs(r.gamma_i / 0.36e6 - 1) < kGammaRel &&
                    std::abs(fsr / 110e6 - 1) < kFsrRel && p.g_hz > 424e3 / kCouplingFactor &&
                    p.g_hz < 424e3 * kCouplingFactor;
    report(12, ok,
           fmt("f0 = %.5f GHz, Q = %.0f, gamma_i = %.1f kHz (0.36 MHz, 10%%)", r.f0 * 1e-9, r.Q,
               r.gamma_i * 1e-3) +
               fmt("; FSR = %.3f MHz at v = %.4g m/s; coupling at 0.75 mm, one bond = %.0f kHz "
                   "(424 kHz, x3)",
                   fsr * 1e-6, c.line.velocity(), p.g_hz * 1e-3));
    circuit::CouplingOptions bvd = c.coupling;
    bvd.topology = circuit::Topology::bvd_shunt_c0;
    note(fmt("alternative topology with C_0 across the port gives %.3g kHz; not within x3 for "
             "these lumped values",
             circuit::coupling_point(c.rlc, wb, c.line, bvd).g_hz * 1e-3));
  }

  {
    const auto b = model::budget_products(cfg.budget);
    auto pump = cfg.pump;
    pump.detuning = model::Detuning::blue;
    pump.n_a = cfg.herald.pump_n_a;
    const auto pr = model::derive_rates(P.optical, P.microwave, pump);
    const double p = model::pair_probability(pr, pump).p;
    herald::ExperimentConfig hc;
    hc.p_pair = 0.036;
    hc.eta_sys = 0.01;
    const double bound = herald::heralding_rate(hc, cfg.pump.rep_rate);
    const bool ok = std::abs(b.eta_setup / 0.0194 - 1) < kBudgetRel &&
                    std::abs(b.eta_sys / 0.0124 - 1) < kBudgetRel &&
                    std::abs(p / 0.036 - 1) < kBudgetRel && std::abs(bound - 61.2) < 1e-9;
    report(13, ok,
           fmt("eta_setup = %.3f%%, eta_sys = %.3f%%, p = %.3f%%", 100 * b.eta_setup,
               100 * b.eta_sys, 100 * p) +
               fmt(" at tau = %.0f ns (n_a = %.0f); rate bound %.1f Hz", pump.tau * 1e9, pump.n_a,
                   bound));
  }

  {
    const fs::path root = fs::temp_directory_path() / "transducer_acceptance";
    fs::remove_all(root);
    bool ok = true;
    std::size_t total = 0;
    for (const char* cmd : {"params", "spectra", "timedomain", "herald", "circuit"}) {
      for (const char* run : {"a", "b"}) {
        const fs::path dir = root / cmd / run;
        fs::create_directories(dir);
        const std::string line = std::string(CLI_PATH) + " --config " SOURCE_DIR
                                 "/config/paper_device.toml --seed 5 --shots 200000 --out " +
                                 dir.string() + " " + cmd + " > /dev/null 2>&1";
        ok = ok && std::system(line.c_str()) == 0;
      }
      std::size_t files = 0;
      ok = ok && same_tree(root / cmd / "a", root / cmd / "b", files);
      total += files;
    }
    report(14, ok, fmt("repeated CLI runs byte-identical across %.0f output files", double(total)));
  }

  return failures;
}
