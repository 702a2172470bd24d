#include "transducer/config.hpp"

#include <cmath>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>

#include "transducer/constants.hpp"
#include "transducer/error.hpp"
#include "transducer/toml.hpp"

namespace transducer::config {

namespace {

class Section {
 public:
  Section(const toml::Document& doc, std::string name, bool required)
      : name_(std::move(name)) {
    auto it = doc.sections.find(name_);
    if (it != doc.sections.end()) {
      table_ = &it->second;
    } else if (required) {
      throw ConfigError(name_, "missing required section [" + name_ + "]");
    }
  }

  ~Section() noexcept(false) {
    if (!table_ || std::uncaught_exceptions() > 0) return;
    for (const auto& [key, entry] : *table_) {
      if (!used_.count(key)) throw ConfigError(field(key), "unknown key");
    }
  }

  bool has(const std::string& key) const { return table_ && table_->count(key); }

  double number(const std::string& key, double fallback) {
    const auto* e = find(key);
    if (!e) return fallback;
    if (const auto* v = std::get_if<double>(&e->value)) return *v;
    throw ConfigError(field(key), "expected a number");
  }

  double required_number(const std::string& key) {
    if (!has(key)) throw ConfigError(field(key), "missing required key");
    return number(key, 0.0);
  }

  int integer(const std::string& key, int fallback) {
    const double v = number(key, fallback);
    if (v != std::floor(v) || std::abs(v) > 2e9) throw ConfigError(field(key), "expected an integer");
    return static_cast<int>(v);
  }

  std::uint64_t count(const std::string& key, std::uint64_t fallback) {
    const double v = number(key, static_cast<double>(fallback));
    if (!(v >= 0.0) || v != std::floor(v) || v > 9e15) {
      throw ConfigError(field(key), "expected a non-negative integer");
    }
    return static_cast<std::uint64_t>(v);
  }

  bool boolean(const std::string& key, bool fallback) {
    const auto* e = find(key);
    if (!e) return fallback;
    if (const auto* v = std::get_if<bool>(&e->value)) return *v;
    throw ConfigError(field(key), "expected true or false");
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const auto* e = find(key);
    if (!e) return fallback;
    if (const auto* v = std::get_if<std::string>(&e->value)) return *v;
    throw ConfigError(field(key), "expected a string");
  }

  std::vector<double> array(const std::string& key, const std::vector<double>& fallback) {
    const auto* e = find(key);
    if (!e) return fallback;
    if (const auto* v = std::get_if<std::vector<double>>(&e->value)) return *v;
    throw ConfigError(field(key), "expected an array of numbers");
  }

  std::string field(const std::string& key) const { return name_ + "." + key; }

 private:
  const toml::Entry* find(const std::string& key) {
    used_.insert(key);
    if (!table_) return nullptr;
    auto it = table_->find(key);
    return it == table_->end() ? nullptr : &it->second;
  }

  std::string name_;
  const toml::Table* table_ = nullptr;
  std::set<std::string> used_;
};

const std::set<std::string> kSections = {"",         "optical",  "mechanical", "microwave",
                                         "pump",     "budget",   "noise",      "spectra",
                                         "temporal", "heating",  "herald",     "circuit"};

}  // namespace

void DeviceConfig::validate() const {
  params.validate();
  pump.validate();
  budget.validate();
  noise.validate();
  if (spectra.points < 16) throw ConfigError("spectra.points", "must be >= 16");
  if (!(spectra.span_hz > 0.0)) throw ConfigError("spectra.span_hz", "must be positive");
  if (!(temporal.dt_s > 0.0)) throw ConfigError("temporal.dt_s", "must be positive");
  if (!(temporal.t_max_s > temporal.dt_s)) throw ConfigError("temporal.t_max_s", "must exceed dt_s");
  if (!(temporal.kappa_d_hz > 0.0)) throw ConfigError("temporal.kappa_d_hz", "must be positive");
  if (!(temporal.delay_hi_s > temporal.delay_lo_s)) {
    throw ConfigError("temporal.delay_hi_s", "must exceed delay_lo_s");
  }
  if (temporal.noise_instances < 100) throw ConfigError("temporal.noise_instances", "must be >= 100");
  if (temporal.jitter_instances < 1) throw ConfigError("temporal.jitter_instances", "must be >= 1");
  if (!(heating.n_bath_peak >= 0.0)) throw ConfigError("heating.n_bath_peak", "must be >= 0");
  if (!(heating.decay_time_s > 0.0)) throw ConfigError("heating.decay_time_s", "must be positive");
  if (!(heating.window_s > 0.0)) throw ConfigError("heating.window_s", "must be positive");
  if (heating.n_windows < 2) throw ConfigError("heating.n_windows", "must be >= 2");
  if (!(herald.n_th >= 0.0)) throw ConfigError("herald.n_th", "must be >= 0");
  if (!(herald.n_ex >= 0.0)) throw ConfigError("herald.n_ex", "must be >= 0");
  if (!(herald.pump_n_a >= 0.0)) throw ConfigError("herald.pump_n_a", "must be >= 0");
  if (!(herald.dark_window_s >= 0.0)) throw ConfigError("herald.dark_window_s", "must be >= 0");
  if (!(herald.gain_scale > 0.0)) throw ConfigError("herald.gain_scale", "must be positive");
  if (herald.radial_bins < 1) throw ConfigError("herald.radial_bins", "must be >= 1");
  circuit.rlc.validate();
  circuit.wirebond.validate();
  circuit.line.validate();
  if (circuit.sweep_lengths_m.empty()) throw ConfigError("circuit.sweep_lengths_m", "empty");
  if (circuit.sweep_n_wb.empty()) throw ConfigError("circuit.sweep_n_wb", "empty");
  if (circuit.response_points < 2 || !(circuit.response_hi_hz > circuit.response_lo_hz) ||
      !(circuit.response_lo_hz > 0.0)) {
    throw ConfigError("circuit.response_lo_hz", "need 0 < lo < hi and >= 2 points");
  }
}

DeviceConfig parse(const std::string& text) {
  const toml::Document doc = toml::parse(text);
  for (const auto& [name, table] : doc.sections) {
    if (!kSections.count(name)) throw ConfigError(name, "unknown section [" + name + "]");
  }
  if (!doc.sections.at("").empty()) {
    throw ConfigError(doc.sections.at("").begin()->first, "key outside any section");
  }

  DeviceConfig c;
  {
    Section s(doc, "optical", true);
    c.params.optical = model::OpticalMode::from_hz(
        s.required_number("frequency_hz"), s.required_number("kappa_hz"),
        s.required_number("kappa_ext_hz"), s.required_number("g0_hz"));
  }
  {
    Section s(doc, "mechanical", true);
    c.params.mechanical = model::MechanicalMode::from_hz(
        s.required_number("frequency_hz"), s.required_number("gamma_i_on_hz"),
        s.required_number("gamma_i_off_hz"), s.number("jitter_rms_hz", 0.0));
  }
  {
    Section s(doc, "microwave", true);
    c.params.microwave = model::MicrowaveMode::from_hz(
        s.required_number("frequency_hz"), s.required_number("kappa_hz"),
        s.required_number("kappa_ext_hz"), s.required_number("g_hz"));
  }
  {
    Section s(doc, "pump", true);
    const std::string det = s.string("detuning", "red");
    if (det == "red") {
      c.pump.detuning = model::Detuning::red;
    } else if (det == "blue") {
      c.pump.detuning = model::Detuning::blue;
    } else {
      throw ConfigError(s.field("detuning"), "must be \"red\" or \"blue\"");
    }
    c.pump.n_a = s.required_number("n_a");
    c.pump.tau = s.number("tau_s", c.pump.tau);
    c.pump.rep_rate = s.number("rep_rate_hz", c.pump.rep_rate);
  }
  {
    Section s(doc, "budget", false);
    auto& b = c.budget;
    b.eta_o = c.params.optical.efficiency();
    b.eta_mu = c.params.microwave.efficiency();
    b.eta_in_fridge = s.number("eta_in_fridge", b.eta_in_fridge);
    b.eta_filters = s.number("eta_filters", b.eta_filters);
    b.eta_spd = s.number("eta_spd", b.eta_spd);
    b.eta_spd_path = s.number("eta_spd_path", b.eta_spd_path);
    b.eta_circ = s.number("eta_circ", b.eta_circ);
    b.eta_d = s.number("eta_d", b.eta_d);
    b.eta_mum = s.number("eta_mum", b.eta_mum);
    b.eta_herald = s.number("eta_herald", b.eta_herald);
    const auto products = model::budget_products(b);
    b.eta_sys = products.eta_sys;
    b.eta_setup = products.eta_setup;
  }
  {
    Section s(doc, "noise", false);
    auto& n = c.noise;
    n.n_th = s.number("n_th", n.n_th);
    n.n_n = s.number("n_n", n.n_n);
    n.n_m = s.number("n_m", n.n_m);
    n.n_ex = s.number("n_ex", n.n_ex);
    n.n_coh = s.number("n_coh", n.n_coh);
    n.dark_rate = s.number("dark_rate_hz", n.dark_rate);
  }
  {
    Section s(doc, "spectra", false);
    c.spectra.span_hz = s.number("span_hz", c.spectra.span_hz);
    c.spectra.points = s.integer("points", c.spectra.points);
  }
  {
    Section s(doc, "temporal", false);
    auto& t = c.temporal;
    t.dt_s = s.number("dt_s", t.dt_s);
    t.t_max_s = s.number("t_max_s", t.t_max_s);
    t.kappa_d_hz = s.number("kappa_d_hz", t.kappa_d_hz);
    t.delay_lo_s = s.number("delay_lo_s", t.delay_lo_s);
    t.delay_hi_s = s.number("delay_hi_s", t.delay_hi_s);
    t.noise_instances = s.integer("noise_instances", t.noise_instances);
    t.noise_dt_s = s.number("noise_dt_s", t.noise_dt_s);
    t.noise_t_max_s = s.number("noise_t_max_s", t.noise_t_max_s);
    t.jitter_instances = s.integer("jitter_instances", t.jitter_instances);
  }
  {
    Section s(doc, "heating", false);
    auto& h = c.heating;
    h.n_bath_peak = s.number("n_bath_peak", h.n_bath_peak);
    h.decay_time_s = s.number("decay_time_s", h.decay_time_s);
    h.t0_s = s.number("t0_s", h.t0_s);
    h.window_s = s.number("window_s", h.window_s);
    h.n_windows = s.integer("n_windows", h.n_windows);
  }
  {
    Section s(doc, "herald", false);
    auto& h = c.herald;
    h.n_th = s.number("n_th", h.n_th);
    h.pump_n_a = s.number("pump_n_a", h.pump_n_a);
    h.dark_window_s = s.number("dark_window_s", h.dark_window_s);
    h.gain_scale = s.number("gain_scale", h.gain_scale);
    h.n_ex = s.number("n_ex", h.n_ex);
    h.shots = s.count("shots", h.shots);
    h.n_heralded = s.count("n_heralded", h.n_heralded);
    h.n_thermal = s.count("n_thermal", h.n_thermal);
    h.radial_bins = s.integer("radial_bins", h.radial_bins);
  }
  {
    Section s(doc, "circuit", false);
    auto& ci = c.circuit;
    ci.rlc.L_m = s.number("L_m_h", ci.rlc.L_m);
    ci.rlc.C_m = s.number("C_m_f", ci.rlc.C_m);
    ci.rlc.R_m = s.number("R_m_ohm", ci.rlc.R_m);
    ci.rlc.C_0 = s.number("C_0_f", ci.rlc.C_0);
    ci.line.Z = s.number("line_z_ohm", ci.line.Z);
    ci.line.length = s.number("line_length_m", ci.line.length);
    if (s.has("line_fsr_hz") && s.has("line_phase_velocity_m_s")) {
      throw ConfigError(s.field("line_fsr_hz"), "give either line_fsr_hz or line_phase_velocity_m_s");
    }
    ci.line.phase_velocity = s.number("line_phase_velocity_m_s", ci.line.phase_velocity);
    if (s.has("line_fsr_hz")) ci.line.phase_velocity = 2.0 * ci.line.length * s.number("line_fsr_hz", 0.0);
    ci.line.termination = s.number("line_termination_ohm", ci.line.termination);
    if (s.has("tuning_current") || s.has("tuning_i_star")) {
      ci.line.tuning = circuit::KineticTuning{s.number("tuning_current", 0.0),
                                              s.number("tuning_i_star", 1.0)};
    }
    ci.wirebond.n_wb = s.integer("n_wb", ci.wirebond.n_wb);
    ci.wirebond.length_wb = s.number("length_wb_m", ci.wirebond.length_wb);
    ci.wirebond.L_per_m = s.number("L_wb_per_m", ci.wirebond.L_per_m);
    ci.wirebond.C_p_per_m = s.number("C_p_per_m", ci.wirebond.C_p_per_m);
    ci.wirebond.C_wb = s.number("C_wb_f", ci.wirebond.C_wb);
    ci.wirebond.R_wb = s.number("R_wb_ohm", ci.wirebond.R_wb);
    ci.wirebond.C_pwb_per_m = s.number("C_pwb_per_m", ci.wirebond.C_pwb_per_m);
    const std::string topo = s.string("topology", "series_c0");
    if (topo == "series_c0") {
      ci.coupling.topology = circuit::Topology::series_c0_parallel_tank;
    } else if (topo == "bvd") {
      ci.coupling.topology = circuit::Topology::bvd_shunt_c0;
    } else {
      throw ConfigError(s.field("topology"), "must be \"series_c0\" or \"bvd\"");
    }
    ci.coupling.tune_line = s.boolean("tune_line", ci.coupling.tune_line);
    ci.sweep_lengths_m = s.array("sweep_lengths_m", ci.sweep_lengths_m);
    const auto nwb = s.array("sweep_n_wb", {});
    if (!nwb.empty()) {
      ci.sweep_n_wb.clear();
      for (double v : nwb) {
        if (v < 1 || v != std::floor(v)) throw ConfigError(s.field("sweep_n_wb"), "entries must be integers >= 1");
        ci.sweep_n_wb.push_back(static_cast<int>(v));
      }
    }
    ci.response_lo_hz = s.number("response_lo_hz", ci.response_lo_hz);
    ci.response_hi_hz = s.number("response_hi_hz", ci.response_hi_hz);
    ci.response_points = s.integer("response_points", ci.response_points);
  }
  c.validate();
  return c;
}

DeviceConfig load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path, "cannot open config file");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

}  // namespace transducer::config
