#include "transducer/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <sstream>

#include <CLI11.hpp>

#include "transducer/calib.hpp"
#include "transducer/circuit.hpp"
#include "transducer/config.hpp"
#include "transducer/constants.hpp"
#include "transducer/error.hpp"
#include "transducer/fit.hpp"
#include "transducer/herald.hpp"
#include "transducer/io.hpp"
#include "transducer/model.hpp"
#include "transducer/scattering.hpp"
#include "transducer/temporal.hpp"

#ifndef TRANSDUCER_VERSION
#define TRANSDUCER_VERSION "0.0.0"
#endif

namespace transducer::cli {

using io::Json;
namespace fs = std::filesystem;

std::string version() { return std::string("transducer ") + TRANSDUCER_VERSION; }

namespace {

struct Common {
  std::string config_path;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::string shots;
  std::string format = "csv";
};

// Collects outputs of one run and writes them under the output directory.
class Run {
 public:
  Run(const Common& common, std::string command, std::ostream& out)
      : common_(common), out_(out) {
    manifest_.command = std::move(command);
    manifest_.config_path = common.config_path;
    manifest_.seed = common.seed;
    manifest_.version = version();
    fs::create_directories(common.out_dir);
  }

  void flag(const std::string& key, const Json& value) { manifest_.flags[key] = value; }

  void json(const std::string& name, const Json& j) {
    io::write_json(path(name + ".json"), j);
    manifest_.outputs.push_back(name + ".json");
  }

  void text(const std::string& file, const std::string& content) {
    io::write_text(path(file), content);
    manifest_.outputs.push_back(file);
  }

  // Tabular output in the requested format.
  void table(const std::string& name, const std::vector<std::string>& header,
             const std::vector<std::vector<double>>& columns) {
    if (common_.format == "json") {
      Json j = Json::object();
      for (std::size_t c = 0; c < header.size(); ++c) j[header[c]] = columns[c];
      json(name, j);
    } else {
      text(name + ".csv", io::columns_csv(header, columns));
    }
  }

  void finish() {
    io::write_json(path("manifest.json"), io::manifest_json(manifest_));
    out_ << manifest_.command << ": wrote " << manifest_.outputs.size() << " file(s) and manifest.json to "
         << common_.out_dir << "\n";
  }

 private:
  std::string path(const std::string& file) const { return (fs::path(common_.out_dir) / file).string(); }

  const Common& common_;
  std::ostream& out_;
  io::RunManifest manifest_;
};

std::vector<double> real_part(const std::vector<scattering::cplx>& v) {
  std::vector<double> r;
  for (auto z : v) r.push_back(z.real());
  return r;
}

std::vector<double> imag_part(const std::vector<scattering::cplx>& v) {
  std::vector<double> r;
  for (auto z : v) r.push_back(z.imag());
  return r;
}

void spectrum_table(Run& run, const std::string& name, const scattering::ComplexSpectrum& s) {
  run.table(name, {"freq_hz", "re", "im"}, {s.freqs, real_part(s.values), imag_part(s.values)});
}

Json warnings_json(const std::vector<std::string>& w) { return Json(w); }

std::uint64_t parse_count(const std::string& s, const char* field) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !(v >= 0.0) ||
      v != std::floor(v) || v > 9e15) {
    throw ConfigError(field, "expected a non-negative integer, got '" + s + "'");
  }
  return static_cast<std::uint64_t>(v);
}

// ---- params ---------------------------------------------------------------

void cmd_params(const config::DeviceConfig& cfg, Run& run) {
  const auto& p = cfg.params;
  const auto rates = model::derive_rates(p.optical, p.microwave, cfg.pump);
  Json j;
  j["G_o_hz"] = hertz(rates.G_o);
  j["gamma_om_hz"] = hertz(rates.gamma_om);
  j["gamma_mu_hz"] = hertz(rates.gamma_mu);
  j["gamma_i_on_hz"] = hertz(p.mechanical.gamma_i_on);
  j["gamma_i_off_hz"] = hertz(p.mechanical.gamma_i_off);
  j["gamma_sum_hz"] = hertz(p.mechanical.gamma_i_on + rates.gamma_om + rates.gamma_mu);
  j["eta_o"] = p.optical.efficiency();
  j["eta_mu"] = p.microwave.efficiency();
  j["peak_efficiency"] = model::peak_efficiency(p, rates, model::PumpState::on);
  const auto products = model::budget_products(cfg.budget);
  j["eta_sys"] = products.eta_sys;
  j["eta_setup"] = products.eta_setup;

  model::PumpConfig herald_pump = cfg.pump;
  herald_pump.detuning = model::Detuning::blue;
  herald_pump.n_a = cfg.herald.pump_n_a;
  const auto herald_rates = model::derive_rates(p.optical, p.microwave, herald_pump);
  const auto pair = model::pair_probability(herald_rates, herald_pump);
  j["herald_gamma_om_hz"] = hertz(herald_rates.gamma_om);
  j["pair_probability"] = pair.p;
  const double dark = herald::dark_probability(cfg.noise.dark_rate, cfg.herald.dark_window_s);
  herald::ExperimentConfig ec;
  ec.p_pair = pair.p;
  ec.eta_sys = products.eta_sys;
  ec.dark_prob = dark;
  j["dark_probability"] = dark;
  j["eta_herald"] = herald::herald_fraction(ec);
  j["heralding_rate_upper_hz"] = herald::heralding_rate(ec, cfg.pump.rep_rate);
  std::vector<std::string> warnings = model::fast_cavity_warnings(p, rates);
  if (pair.warning) warnings.push_back(*pair.warning);
  j["warnings"] = warnings_json(warnings);
  run.json("params", j);
}

// ---- spectra --------------------------------------------------------------

std::vector<double> spectrum_grid(const config::DeviceConfig& cfg) {
  const double fm = hertz(cfg.params.mechanical.omega_m);
  return scattering::linspace(fm - cfg.spectra.span_hz / 2, fm + cfg.spectra.span_hz / 2,
                              static_cast<std::size_t>(cfg.spectra.points));
}

void cmd_spectra(const config::DeviceConfig& cfg, Run& run) {
  const auto& p = cfg.params;
  const auto rates = model::derive_rates(p.optical, p.microwave, cfg.pump);
  const auto freqs = spectrum_grid(cfg);
  const auto oo = scattering::s_oo(p, rates, model::PumpState::on, freqs);
  const auto mumu = scattering::s_mumu(p, rates, model::PumpState::on, freqs);
  const auto conv = scattering::s_conversion(p, rates, model::PumpState::on, freqs,
                                             scattering::Direction::optical_to_microwave);
  spectrum_table(run, "s_oo", oo);
  spectrum_table(run, "s_mumu", mumu);
  spectrum_table(run, "s_conversion", conv);

  double peak = 0.0, f_peak = 0.0;
  for (std::size_t k = 0; k < conv.size(); ++k) {
    if (std::norm(conv.values[k]) > peak) {
      peak = std::norm(conv.values[k]);
      f_peak = conv.freqs[k];
    }
  }
  const auto at_m = scattering::s_conversion(p, rates, model::PumpState::on,
                                             {hertz(p.mechanical.omega_m)},
                                             scattering::Direction::optical_to_microwave);
  Json j;
  j["peak_efficiency"] = model::peak_efficiency(p, rates, model::PumpState::on);
  j["conversion_at_omega_m"] = std::norm(at_m.values.front());
  j["conversion_grid_peak"] = peak;
  j["conversion_grid_peak_hz"] = f_peak;
  j["bandwidth_hz"] = scattering::half_power_width(conv);
  j["gamma_sum_hz"] = hertz(p.mechanical.gamma_i_on + rates.gamma_om + rates.gamma_mu);
  run.json("spectra_summary", j);
}

// ---- fit ------------------------------------------------------------------

struct FitFlags {
  std::string input;
  std::string kind = "mumu";
  std::string state = "on";
  std::vector<std::string> free;
};

void cmd_fit(const config::DeviceConfig& cfg, const FitFlags& flags, Run& run) {
  const auto kind = fit::parse_kind(flags.kind);
  if (!kind) throw ConfigError("--kind", "must be oo, mumu or conversion");
  if (flags.state != "on" && flags.state != "off") throw ConfigError("--state", "must be on or off");
  if (flags.input.empty()) throw ConfigError("--input", "a measured spectrum CSV is required");
  const auto measured = io::parse_spectrum_csv(io::read_text(flags.input));
  fit::FitOptions options;
  options.pump = cfg.pump;
  options.state = flags.state == "on" ? model::PumpState::on : model::PumpState::off;
  for (const auto& name : flags.free) {
    const auto par = fit::parse_parameter(name);
    if (!par) throw ConfigError("--free", "unknown parameter '" + name + "'");
    options.free.push_back(*par);
  }
  run.flag("input", flags.input);
  run.flag("kind", flags.kind);
  run.flag("state", flags.state);
  const auto res = fit::fit_spectrum(measured, *kind, cfg.params, options);
  Json j;
  j["kind"] = flags.kind;
  j["status"] = res.status;
  j["iterations"] = res.iterations;
  j["residual_norm"] = res.residual_norm;
  Json params = Json::array();
  for (std::size_t k = 0; k < res.free.size(); ++k) {
    Json e;
    e["name"] = fit::name(res.free[k]);
    e["value_hz"] = hertz(res.values[k]);
    e["stderr_hz"] = hertz(res.stderrs[k]);
    params.push_back(e);
  }
  j["parameters"] = params;
  Json frozen = Json::array();
  for (auto f : res.frozen) frozen.push_back(fit::name(f));
  j["frozen"] = frozen;
  Json cov = Json::array();
  for (Eigen::Index r = 0; r < res.covariance.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < res.covariance.cols(); ++c) {
      row.push_back(res.covariance(r, c) / (kTwoPi * kTwoPi));
    }
    cov.push_back(row);
  }
  j["covariance_hz2"] = cov;
  run.json("fit", j);
}

// ---- timedomain -----------------------------------------------------------

void cmd_timedomain(const config::DeviceConfig& cfg, std::uint64_t seed, Run& run) {
  const auto& p = cfg.params;
  const auto& t = cfg.temporal;
  const double gamma_off = p.mechanical.gamma_i_off;
  const auto mode = temporal::emit_single_phonon(p, gamma_off, t.dt_s, t.t_max_s);
  run.table("mode", {"t_s", "re", "im"}, {mode.t, real_part(mode.amp), imag_part(mode.amp)});
  run.table("occupations", {"t_s", "phonon", "photon"}, {mode.t, mode.phonon, mode.photon});

  const auto matched = temporal::DemodFilter::matched(mode);
  const auto exp1 = temporal::DemodFilter::exponential(angular(1e6));
  const auto exp_cfg = temporal::DemodFilter::exponential(angular(t.kappa_d_hz));
  const double eta_mum = mode.energy();

  std::vector<double> delays, e_matched, e_1, e_cfg;
  const int n_scan = 141;
  for (int k = 0; k < n_scan; ++k) {
    const double d = t.delay_lo_s + (t.delay_hi_s - t.delay_lo_s) * k / (n_scan - 1);
    delays.push_back(d);
    e_matched.push_back(temporal::demod_efficiency(mode, matched, d));
    e_1.push_back(temporal::demod_efficiency(mode, exp1, d));
    e_cfg.push_back(temporal::demod_efficiency(mode, exp_cfg, d));
  }
  run.table("delay_scan", {"delay_s", "matched", "exp_1mhz", "exp_readout"},
            {delays, e_matched, e_1, e_cfg});

  const auto best_cfg = temporal::optimal_delay(mode, exp_cfg, t.delay_lo_s, t.delay_hi_s);
  const auto best_1 = temporal::optimal_delay(mode, exp1, t.delay_lo_s, t.delay_hi_s);

  Json j;
  j["eta_mum"] = eta_mum;
  j["energy_error"] = std::abs(mode.phonon.back() + mode.photon.back() + mode.lost.back() - 1.0);
  j["readout_filter_hz"] = t.kappa_d_hz;
  j["readout_delay_s"] = best_cfg.delay;
  j["readout_eta_m"] = best_cfg.efficiency;
  j["readout_eta_d"] = best_cfg.efficiency / eta_mum;
  j["exp_1mhz_delay_s"] = best_1.delay;
  j["exp_1mhz_eta_m"] = best_1.efficiency;
  std::vector<std::string> warnings = mode.warnings;
  warnings.insert(warnings.end(), best_cfg.warnings.begin(), best_cfg.warnings.end());

  if (cfg.heating.n_bath_peak > 0.0) {
    temporal::HeatingBath bath;
    bath.n_bath_peak = cfg.heating.n_bath_peak;
    bath.decay_rate = 1.0 / cfg.heating.decay_time_s;
    bath.coupling = gamma_off;
    bath.t0 = cfg.heating.t0_s;
    const auto traj = temporal::heating_trajectory(bath, p, cfg.heating.window_s, cfg.heating.n_windows);
    std::vector<double> centers;
    for (int k = 0; k < cfg.heating.n_windows; ++k) centers.push_back((k + 0.5) * cfg.heating.window_s);
    run.table("heating", {"t_s", "value"}, {centers, traj});
    const std::size_t first = traj.size() / 2;
    j["heating_tail_decay_rate"] = temporal::fit_tail_decay(traj, cfg.heating.window_s, first);

    temporal::StochasticGrid grid{t.noise_dt_s, t.noise_t_max_s};
    const auto mc = temporal::added_noise_mc(bath, p, exp_cfg, best_cfg.delay, t.noise_instances,
                                             seed, grid);
    Json n;
    n["n_n"] = mc.n_n;
    n["stderr"] = mc.stderr_n_n;
    n["demod_variance"] = mc.demod_variance;
    n["demod_variance_stderr"] = mc.demod_variance_stderr;
    n["eta_m"] = mc.eta_m;
    n["eta_mum"] = mc.eta_mum;
    n["eta_d"] = mc.eta_d;
    n["instances"] = mc.n_instances;
    n["seed"] = mc.seed;
    j["added_noise"] = n;
  }
  if (p.mechanical.jitter_rms > 0.0) {
    temporal::JitterSettings js;
    js.delay_lo = t.delay_lo_s;
    js.delay_hi = t.delay_hi_s;
    Json jt = Json::object();
    const auto r5 = temporal::efficiency_under_jitter(p, gamma_off, exp_cfg, p.mechanical.jitter_rms,
                                                      t.jitter_instances, seed, js);
    const auto r1 = temporal::efficiency_under_jitter(p, gamma_off, exp1, p.mechanical.jitter_rms,
                                                      t.jitter_instances, seed, js);
    jt["jitter_rms_hz"] = hertz(p.mechanical.jitter_rms);
    jt["readout_mean_eta_m"] = r5.mean_efficiency;
    jt["readout_stderr"] = r5.stderr;
    jt["exp_1mhz_mean_eta_m"] = r1.mean_efficiency;
    jt["exp_1mhz_stderr"] = r1.stderr;
    j["jitter"] = jt;
  }
  j["warnings"] = warnings_json(warnings);
  run.json("timedomain", j);
}

// ---- herald ---------------------------------------------------------------

herald::ExperimentConfig experiment_config(const config::DeviceConfig& cfg, std::uint64_t shots,
                                           std::uint64_t seed) {
  model::PumpConfig pump = cfg.pump;
  pump.detuning = model::Detuning::blue;
  pump.n_a = cfg.herald.pump_n_a;
  const auto rates = model::derive_rates(cfg.params.optical, cfg.params.microwave, pump);
  herald::ExperimentConfig ec;
  ec.p_pair = model::pair_probability(rates, pump).p;
  ec.eta_sys = model::budget_products(cfg.budget).eta_sys;
  ec.dark_prob = herald::dark_probability(cfg.noise.dark_rate, cfg.herald.dark_window_s);
  ec.n_th = cfg.herald.n_th;
  ec.n_ex = cfg.herald.n_ex;
  ec.gain_scale = cfg.herald.gain_scale;
  ec.n_shots = shots;
  ec.seed = seed;
  return ec;
}

Json excess_json(const herald::ExcessNoise& e) {
  Json j;
  j["n_ex"] = e.n_ex;
  j["stderr"] = e.stderr;
  j["ratio"] = e.ratio;
  j["ratio_stderr"] = e.ratio_stderr;
  return j;
}

void cmd_herald(const config::DeviceConfig& cfg, const Common& common, bool full_scale, Run& run) {
  const std::uint64_t shots =
      common.shots.empty() ? cfg.herald.shots : parse_count(common.shots, "--shots");
  if (shots == 0) throw ConfigError("--shots", "must be positive");
  run.flag("shots", shots);
  run.flag("full_scale", full_scale);
  const auto ec = experiment_config(cfg, shots, common.seed);
  const double eta_h = herald::herald_fraction(ec);
  const auto raw = herald::simulate_experiment(ec);
  const auto ds = herald::calibrate(raw, ec.gain_scale);
  if (common.format == "json") {
    Json d;
    d["i"] = raw.i;
    d["q"] = raw.q;
    std::vector<int> h(raw.heralded.begin(), raw.heralded.end());
    d["heralded"] = h;
    run.json("dataset", d);
  } else {
    run.text("dataset.csv", io::dataset_csv(raw));
  }

  Json j;
  j["p_pair"] = ec.p_pair;
  j["eta_sys"] = ec.eta_sys;
  j["dark_prob"] = ec.dark_prob;
  j["eta_herald"] = eta_h;
  j["shots"] = shots;
  j["heralded"] = ds.heralded_count();
  j["true_heralds"] = raw.true_heralds;
  j["heralding_rate_upper_hz"] = herald::heralding_rate(ec, cfg.pump.rep_rate);
  j["variance_ratio_model"] = herald::variance_ratio(ec.n_th, ec.n_ex, eta_h);

  const double extent = herald::default_extent(ec.n_th, ec.n_ex);
  const auto heralded = herald::select(ds, true);
  if (heralded.size() > 0) {
    const auto h_s = herald::histogram2d(ds, true, extent);
    const auto h_all = herald::histogram2d(ds, false, extent);
    Json hist;
    hist["heralded"] = io::histogram_json(h_s);
    hist["all"] = io::histogram_json(h_all);
    std::vector<double> diff(h_s.probability.size());
    for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = h_s.probability[k] - h_all.probability[k];
    hist["difference"] = diff;
    run.json("histograms", hist);
    const auto radial = herald::histogram_diff_radial(heralded, ds, cfg.herald.radial_bins, extent,
                                                      common.seed);
    run.json("radial", io::radial_json(radial));
    try {
      j["excess_noise"] = excess_json(herald::extract_excess_noise(ds, ec.n_th, eta_h));
    } catch (const NoSignalError& e) {
      j["excess_noise"] = Json{{"error", e.what()}};
    }
  } else {
    j["excess_noise"] = Json{{"error", "no heralded samples"}};
  }
  if (full_scale) {
    const auto stats = herald::postselected_statistics(ec, cfg.herald.n_heralded, cfg.herald.n_thermal);
    Json ps = excess_json(herald::extract_excess_noise(stats, ec.n_th, eta_h));
    ps["n_heralded"] = stats.n_heralded;
    ps["n_thermal"] = stats.n_unheralded;
    j["full_scale"] = ps;
  }
  run.json("herald", j);
}

// ---- calib ----------------------------------------------------------------

double num(const Json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(key, "missing from calibration input");
  if (!j.at(key).is_number()) throw ConfigError(key, "must be a number");
  return j.at(key).get<double>();
}

double num_or(const Json& j, const char* key, double fallback) {
  return j.contains(key) ? num(j, key) : fallback;
}

const Json& section(const Json& input, const char* name) {
  return input.contains(name) && input.at(name).is_object() ? input.at(name) : input;
}

Json estimate_json(const calib::Estimate& e) { return Json{{"value", e.value}, {"stderr", e.stderr}}; }

Json calib_thermometry(const Json& in) {
  calib::SidebandCounts c;
  c.rate_coh_red = num(in, "rate_coh_red");
  c.rate_th_red = num(in, "rate_th_red");
  c.rate_coh_blue = num(in, "rate_coh_blue");
  c.rate_th_blue = num(in, "rate_th_blue");
  c.sigma_coh_red = num_or(in, "sigma_coh_red", 0.0);
  c.sigma_th_red = num_or(in, "sigma_th_red", 0.0);
  c.sigma_coh_blue = num_or(in, "sigma_coh_blue", 0.0);
  c.sigma_th_blue = num_or(in, "sigma_th_blue", 0.0);
  return Json{{"n_th", estimate_json(calib::thermometry(c))}};
}

Json calib_gain(const config::DeviceConfig& cfg, const Json& in) {
  calib::ConversionPowers p;
  p.p_mu_from_o = num(in, "p_mu_from_o");
  p.p_mu_from_mu_path = num(in, "p_mu_from_mu_path");
  p.flux_in_o = num(in, "flux_in_o");
  p.flux_out_o = num(in, "flux_out_o");
  p.s_mumu_mag2 = num(in, "s_mumu_mag2");
  const double omega = num_or(in, "omega_mu_hz", 0.0) > 0 ? angular(num(in, "omega_mu_hz"))
                                                           : cfg.params.microwave.omega_mu;
  const auto r = calib::gain_and_efficiency(p, omega);
  return Json{{"gain", r.gain}, {"eta", r.eta}};
}

Json calib_referral(const Json& in) {
  return Json{{"n_added", calib::added_noise_referred(num(in, "n_out"), num(in, "eta"))}};
}

Json calib_decomposition(const config::DeviceConfig& cfg, const Json& in) {
  const double eta_mum = num_or(in, "eta_mum", cfg.budget.eta_mum);
  const double eta_d = num_or(in, "eta_d", cfg.budget.eta_d);
  const double n_n = num_or(in, "n_n", cfg.noise.n_n);
  const double n_m = num_or(in, "n_m", cfg.noise.n_m);
  return Json{{"eta_mum", eta_mum}, {"eta_d", eta_d}, {"n_n", n_n}, {"n_m", n_m},
              {"n_ex", calib::excess_noise_decomposition(eta_mum, eta_d, n_n, n_m)}};
}

calib::ChainModel chain_from(const config::DeviceConfig& cfg, const Json& in) {
  calib::ChainModel c;
  c.eta_d = num_or(in, "eta_d", cfg.budget.eta_d);
  c.eta_mum = num_or(in, "eta_mum", cfg.budget.eta_mum);
  c.n_th_pre = num_or(in, "n_th_pre", cfg.noise.n_th);
  c.eta_herald = num_or(in, "eta_herald", cfg.budget.eta_herald);
  c.n_th_heated = num_or(in, "n_th_heated", cfg.herald.n_th);
  return c;
}

Json calib_invert(const config::DeviceConfig& cfg, const Json& in) {
  calib::Variances v;
  v.all = num(in, "var_all");
  v.ps = num(in, "var_ps");
  v.control = num(in, "var_control");
  v.sigma_all = num_or(in, "sigma_all", 0.0);
  v.sigma_ps = num_or(in, "sigma_ps", 0.0);
  v.sigma_control = num_or(in, "sigma_control", 0.0);
  const auto chain = chain_from(cfg, in);
  const auto s = calib::invert_noise(v, chain);
  return Json{{"gain", estimate_json(s.gain)},
              {"n_n", estimate_json(s.n_n)},
              {"n_m", estimate_json(s.n_m)},
              {"n_ex", calib::excess_noise_decomposition(chain.eta_mum, chain.eta_d, s.n_n.value,
                                                         s.n_m.value)}};
}

Json calib_two_thermal(const config::DeviceConfig& cfg, const Json& in) {
  const auto r = calib::two_thermal_calibration(
      num(in, "var_low"), num(in, "var_high"), num(in, "n_low"), num(in, "n_high"),
      num_or(in, "eta_d", cfg.budget.eta_d), num_or(in, "eta_mum", cfg.budget.eta_mum),
      num_or(in, "sigma_ratio", 0.0));
  return Json{{"n_ex", estimate_json(r.n_ex)}, {"gain", r.gain}};
}

Json calib_room_temp(const config::DeviceConfig& cfg, const Json& in) {
  const double omega_m = cfg.params.mechanical.omega_m;
  const double temp = num_or(in, "temperature_k", 295.0);
  Json j;
  j["n_thermal_reference"] = calib::bose_occupation(omega_m, temp);
  j["n_coh_calibrated"] =
      calib::room_temp_calibration(num(in, "power_coherent"), num(in, "power_thermal"), omega_m, temp);
  if (in.contains("input_flux")) {
    j["n_coh_predicted"] = calib::room_temp_coherent(
        angular(num(in, "gamma_mu_hz")), angular(num(in, "gamma_total_hz")), num(in, "input_flux"));
  }
  return j;
}

const std::vector<std::string> kProcedures = {"thermometry", "gain",   "referral",   "decomposition",
                                              "invert",      "two-thermal", "room-temp", "all"};

void cmd_calib(const config::DeviceConfig& cfg, const std::string& procedure,
               const std::string& input_path, Run& run) {
  if (std::find(kProcedures.begin(), kProcedures.end(), procedure) == kProcedures.end()) {
    throw ConfigError("procedure", "unknown calibration procedure '" + procedure + "'");
  }
  Json input = Json::object();
  if (!input_path.empty()) {
    input = io::read_json(input_path);
    run.flag("input", input_path);
  } else if (procedure != "decomposition") {
    throw ConfigError("--input", "calibration procedure '" + procedure + "' needs an input file");
  }
  run.flag("procedure", procedure);
  auto dispatch = [&](const std::string& p, const Json& in) -> Json {
    if (p == "thermometry") return calib_thermometry(in);
    if (p == "gain") return calib_gain(cfg, in);
    if (p == "referral") return calib_referral(in);
    if (p == "decomposition") return calib_decomposition(cfg, in);
    if (p == "invert") return calib_invert(cfg, in);
    if (p == "two-thermal") return calib_two_thermal(cfg, in);
    return calib_room_temp(cfg, in);
  };
  Json out;
  if (procedure == "all") {
    for (const auto& p : kProcedures) {
      if (p == "all" || !input.contains(p)) continue;
      out[p] = dispatch(p, input.at(p));
    }
    if (out.is_null()) throw ConfigError("--input", "no known procedure sections in input");
  } else {
    out = dispatch(procedure, section(input, procedure.c_str()));
  }
  run.json("calib_" + procedure, out);
}

// ---- circuit --------------------------------------------------------------

void cmd_circuit(const config::DeviceConfig& cfg, Run& run) {
  const auto& c = cfg.circuit;
  const auto par = circuit::rlc_resonance(c.rlc, circuit::ResistorPlacement::parallel);
  const auto ser = circuit::rlc_resonance(c.rlc, circuit::ResistorPlacement::series);
  const auto freqs = scattering::linspace(c.response_lo_hz, c.response_hi_hz,
                                          static_cast<std::size_t>(c.response_points));
  const auto resp = circuit::line_response(c.line, freqs);
  run.table("line_response", {"freq_hz", "re_z", "im_z", "group_delay_s"},
            {resp.freqs, real_part(resp.z_eff), imag_part(resp.z_eff), resp.group_delay});
  const auto sweep = circuit::coupling_vs_length(c.rlc, c.wirebond, c.line, c.sweep_lengths_m,
                                                 c.sweep_n_wb, c.coupling);
  std::vector<double> len, nwb, g, gext;
  for (const auto& p : sweep) {
    len.push_back(p.length_m);
    nwb.push_back(p.n_wb);
    g.push_back(p.g_hz);
    gext.push_back(p.gamma_ext_hz);
  }
  run.table("coupling_sweep", {"length_m", "n_wb", "coupling_hz"}, {len, nwb, g});
  const auto nominal = circuit::coupling_point(c.rlc, c.wirebond, c.line, c.coupling);

  Json j;
  j["f0_hz"] = par.f0;
  j["Q_parallel"] = par.Q;
  j["gamma_i_parallel_hz"] = par.gamma_i;
  j["Q_series"] = ser.Q;
  j["gamma_i_series_hz"] = ser.gamma_i;
  j["line_fsr_hz"] = c.line.fsr();
  j["line_kappa_hz"] = hertz(c.line.kappa());
  j["line_resonances_hz"] = resp.resonances;
  j["nominal"] = Json{{"length_m", nominal.length_m},
                      {"n_wb", nominal.n_wb},
                      {"gamma_ext_hz", nominal.gamma_ext_hz},
                      {"coupling_hz", nominal.g_hz},
                      {"phase_offset_rad", nominal.phase_offset},
                      {"warnings", nominal.warnings}};
  j["sweep_gamma_ext_hz"] = gext;
  std::vector<std::string> warnings = c.rlc.warnings();
  for (const auto& p : sweep) warnings.insert(warnings.end(), p.warnings.begin(), p.warnings.end());
  j["warnings"] = warnings;
  run.json("circuit", j);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Piezo-optomechanical transducer models and experiment runners", "transducer"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version());
  Common common;
  app.add_option("--config", common.config_path, "Device configuration (TOML)");
  app.add_option("--seed", common.seed, "Root seed for all random streams");
  app.add_option("--out", common.out_dir, "Output directory");
  app.add_option("--shots", common.shots, "Number of simulated shots (herald)");
  app.add_option("--format", common.format, "Tabular output format")
      ->check(CLI::IsMember({"csv", "json"}));

  auto* params = app.add_subcommand("params", "Derived rates, efficiencies and budgets");
  auto* spectra = app.add_subcommand("spectra", "S_oo, S_mumu and conversion spectra");
  FitFlags fit_flags;
  auto* fit = app.add_subcommand("fit", "Fit a measured spectrum");
  fit->add_option("--input", fit_flags.input, "Spectrum CSV (freq_hz, re, im)");
  fit->add_option("--kind", fit_flags.kind, "oo, mumu or conversion");
  fit->add_option("--state", fit_flags.state, "Pump state for gamma_i: on or off");
  fit->add_option("--free", fit_flags.free, "Free parameters (default per kind)")->delimiter(',');
  auto* td = app.add_subcommand("timedomain", "Temporal mode, filter scans, heating and n_n");
  bool full_scale = false;
  auto* hr = app.add_subcommand("herald", "Heralding experiment end to end");
  hr->add_flag("--full-scale", full_scale, "Also run the conditional sampler at full sample counts");
  std::string procedure, calib_input;
  auto* cal = app.add_subcommand("calib", "Calibration and inversion procedures");
  cal->add_option("procedure", procedure,
                  "thermometry, gain, referral, decomposition, invert, two-thermal, room-temp or all")
      ->required();
  cal->add_option("--input", calib_input, "Measurement record (JSON)");
  auto* circ = app.add_subcommand("circuit", "RLC, line response and wirebond coupling sweeps");
  for (auto* sub : {params, spectra, fit, td, hr, cal, circ}) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  try {
    if (common.config_path.empty()) throw ConfigError("--config", "a configuration file is required");
    const auto cfg = config::load(common.config_path);
    CLI::App* sub = app.get_subcommands().front();
    Run r(common, sub->get_name(), out);
    if (sub == params) cmd_params(cfg, r);
    else if (sub == spectra) cmd_spectra(cfg, r);
    else if (sub == fit) cmd_fit(cfg, fit_flags, r);
    else if (sub == td) cmd_timedomain(cfg, common.seed, r);
    else if (sub == hr) cmd_herald(cfg, common, full_scale, r);
    else if (sub == cal) cmd_calib(cfg, procedure, calib_input, r);
    else if (sub == circ) cmd_circuit(cfg, r);
    r.finish();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace transducer::cli
