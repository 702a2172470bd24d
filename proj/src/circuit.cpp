#include "transducer/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "transducer/constants.hpp"
#include "transducer/error.hpp"

namespace transducer::circuit {

namespace {

void positive(double v, const char* field) {
  if (!(v > 0.0)) throw ConfigError(field, "must be positive");
}

}  // namespace

void MechanicalRLC::validate() const {
  positive(L_m, "circuit.L_m");
  positive(C_m, "circuit.C_m");
  positive(R_m, "circuit.R_m");
  positive(C_0, "circuit.C_0");
}

std::vector<std::string> MechanicalRLC::warnings() const {
  const double f0 = 1.0 / (kTwoPi * std::sqrt(L_m * C_m));
  if (f0 > 1e9 && f0 < 10e9) return {};
  return {"motional resonance " + std::to_string(f0 * 1e-9) + " GHz outside (1, 10) GHz"};
}

Resonance rlc_resonance(const MechanicalRLC& rlc, ResistorPlacement placement) {
  rlc.validate();
  Resonance r;
  r.f0 = 1.0 / (kTwoPi * std::sqrt(rlc.L_m * rlc.C_m));
  const double z_char = std::sqrt(rlc.L_m / rlc.C_m);
  r.Q = placement == ResistorPlacement::parallel ? rlc.R_m / z_char : z_char / rlc.R_m;
  r.gamma_i = r.f0 / r.Q;
  return r;
}

void TransmissionLine::validate() const {
  positive(Z, "circuit.line.Z");
  positive(length, "circuit.line.length");
  positive(phase_velocity, "circuit.line.phase_velocity");
  if (!(termination >= 0.0)) throw ConfigError("circuit.line.termination", "must be >= 0");
  if (tuning) positive(tuning->i_star, "circuit.line.i_star");
}

double TransmissionLine::impedance() const {
  return tuning ? Z * std::sqrt(tuning->inductance_factor()) : Z;
}

double TransmissionLine::velocity() const {
  return tuning ? phase_velocity / std::sqrt(tuning->inductance_factor()) : phase_velocity;
}

double TransmissionLine::fsr() const { return velocity() / (2.0 * length); }

double TransmissionLine::electrical_length(double omega) const {
  return omega * length / velocity();
}

double TransmissionLine::kappa() const {
  const double z = impedance();
  const double gamma = std::abs((termination - z) / (termination + z));
  if (gamma <= 0.0) return std::numeric_limits<double>::infinity();
  return -2.0 * std::log(gamma) * fsr();
}

cplx z_eff(const TransmissionLine& line, double omega, double phase_offset) {
  const double z = line.impedance();
  const double theta = line.electrical_length(omega) + phase_offset;
  const double c = std::cos(theta), s = std::sin(theta);
  const cplx num(line.termination * c, z * s);
  const cplx den(z * c, line.termination * s);
  if (std::abs(den) == 0.0) {
    // Open termination at a quarter-wave point: the input is an open circuit.
    return {std::numeric_limits<double>::max(), 0.0};
  }
  return z * num / den;
}

LineResponse line_response(const TransmissionLine& line, const std::vector<double>& freqs) {
  line.validate();
  LineResponse out;
  out.freqs = freqs;
  const double z = line.impedance();
  const double r = line.termination;
  const double tof = line.length / line.velocity();
  for (double f : freqs) {
    if (!(f > 0.0)) throw ConfigError("freqs", "must be positive");
    const double th = line.electrical_length(angular(f));
    const double c = std::cos(th), s = std::sin(th);
    out.z_eff.push_back(z_eff(line, angular(f)));
    // Seen from the termination the far end is open: Z_in = -i Z cot(theta).
    const cplx u(r * s, z * c);
    out.s11.push_back(-u / std::conj(u));
    const double den = r * r * s * s + z * z * c * c;
    out.group_delay.push_back(den > 0.0 ? 2.0 * r * z * tof / den
                                        : std::numeric_limits<double>::max());
  }
  if (freqs.empty() || r == z) return out;
  const auto [lo, hi] = std::minmax_element(freqs.begin(), freqs.end());
  const double fsr = line.fsr();
  const double shift = r < z ? 0.5 : 0.0;
  for (long n = static_cast<long>(std::floor(*lo / fsr - shift)); ; ++n) {
    const double f = (static_cast<double>(n) + shift) * fsr;
    if (f > *hi) break;
    if (f >= *lo && f > 0.0) out.resonances.push_back(f);
  }
  return out;
}

Abcd abcd_multiply(const Abcd& x, const Abcd& y) {
  return {x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3], x[2] * y[0] + x[3] * y[2],
          x[2] * y[1] + x[3] * y[3]};
}

cplx abcd_det(const Abcd& m) { return m[0] * m[3] - m[1] * m[2]; }

cplx abcd_input_impedance(const Abcd& m, cplx load) {
  return (m[0] * load + m[1]) / (m[2] * load + m[3]);
}

void WirebondNetwork::validate() const {
  if (n_wb < 1) throw ConfigError("circuit.wirebond.n_wb", "must be >= 1");
  if (!(length_wb >= 0.0)) throw ConfigError("circuit.wirebond.length_wb", "must be >= 0");
  positive(L_per_m, "circuit.wirebond.L_per_m");
  positive(C_p_per_m, "circuit.wirebond.C_p_per_m");
  positive(C_wb, "circuit.wirebond.C_wb");
  if (!(R_wb >= 0.0)) throw ConfigError("circuit.wirebond.R_wb", "must be >= 0");
  positive(C_pwb_per_m, "circuit.wirebond.C_pwb_per_m");
}

Abcd wirebond_abcd(const WirebondNetwork& wb, double freq) {
  wb.validate();
  if (!(freq > 0.0)) throw ConfigError("freq", "must be positive");
  const double w = angular(freq);
  const double n = wb.n_wb;
  cplx z_bond(wb.R_wb, w * wb.L_per_m * wb.length_wb);
  if (std::isfinite(wb.C_wb)) z_bond += cplx(0.0, -1.0 / (w * wb.C_wb));
  const cplx z_series = z_bond / n;
  const double c_shunt = wb.length_wb * (n * wb.C_p_per_m + (n - 1.0) * wb.C_pwb_per_m);
  const cplx y_half(0.0, 0.5 * w * c_shunt);
  const Abcd shunt{1.0, 0.0, y_half, 1.0};
  const Abcd series{1.0, z_series, 0.0, 1.0};
  return abcd_multiply(abcd_multiply(shunt, series), shunt);
}

namespace {

double external_rate(const MechanicalRLC& rlc, const Abcd& bond, const TransmissionLine& line,
                     double omega, double offset, Topology topology) {
  const cplx z_net = abcd_input_impedance(bond, z_eff(line, omega, offset));
  const cplx z_c0(0.0, -1.0 / (omega * rlc.C_0));
  switch (topology) {
    case Topology::series_c0_parallel_tank:
      return (1.0 / (z_c0 + z_net)).real() / rlc.C_m;
    case Topology::bvd_shunt_c0:
      return (z_c0 * z_net / (z_c0 + z_net)).real() / rlc.L_m;
  }
  return 0.0;
}

}  // namespace

CouplingPoint coupling_point(const MechanicalRLC& rlc, const WirebondNetwork& wb,
                             const TransmissionLine& line, const CouplingOptions& options) {
  rlc.validate();
  wb.validate();
  line.validate();
  const double omega = 1.0 / std::sqrt(rlc.L_m * rlc.C_m);
  const Abcd bond = wirebond_abcd(wb, hertz(omega));
  auto rate = [&](double offset) {
    return external_rate(rlc, bond, line, omega, offset, options.topology);
  };

  CouplingPoint p;
  p.length_m = wb.length_wb;
  p.n_wb = wb.n_wb;
  p.warnings = rlc.warnings();
  double best = rate(0.0);
  if (options.tune_line) {
    // rate(offset) has period pi; scan, then golden-section refine.
    const int n = std::max(options.tuning_points, 8);
    const double step = kPi / n;
    int k_best = 0;
    for (int k = 1; k < n; ++k) {
      const double v = rate(k * step);
      if (v > best) {
        best = v;
        k_best = k;
      }
    }
    double a = (k_best - 1) * step, b = (k_best + 1) * step;
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    double f1 = rate(x1), f2 = rate(x2);
    for (int it = 0; it < 80 && b - a > 1e-12; ++it) {
      if (f1 > f2) {
        b = x2; x2 = x1; f2 = f1;
        x1 = b - invphi * (b - a); f1 = rate(x1);
      } else {
        a = x1; x1 = x2; f1 = f2;
        x2 = a + invphi * (b - a); f2 = rate(x2);
      }
    }
    const double xm = 0.5 * (a + b);
    const double fm = rate(xm);
    if (fm > best) {
      best = fm;
      p.phase_offset = std::fmod(xm + kPi, kPi);
    } else {
      p.phase_offset = k_best * step;
    }
  } else {
    // Distance to the nearest standing-wave resonance of the bare line.
    const double fsr = line.fsr();
    const double shift = line.termination < line.impedance() ? 0.5 : 0.0;
    const double f = hertz(omega);
    const double n = std::round(f / fsr - shift);
    const double off = std::abs(f - (n + shift) * fsr);
    const double half_width = hertz(line.kappa()) / 2.0;
    if (off > half_width) {
      p.warnings.push_back("mechanical resonance " + std::to_string(off * 1e-6) +
                           " MHz from the nearest line resonance (weak coupling)");
    }
  }
  p.gamma_ext_hz = hertz(std::max(best, 0.0));
  const double kappa = line.kappa();
  p.g_hz = std::isfinite(kappa) ? hertz(std::sqrt(std::max(best, 0.0) * kappa / 4.0)) : 0.0;
  return p;
}

std::vector<CouplingPoint> coupling_vs_length(const MechanicalRLC& rlc,
                                              const WirebondNetwork& wb_template,
                                              const TransmissionLine& line,
                                              const std::vector<double>& lengths,
                                              const std::vector<int>& n_wb_values,
                                              const CouplingOptions& options) {
  if (lengths.empty() || n_wb_values.empty()) {
    throw ConfigError("circuit.sweep", "length and n_wb sweeps must be non-empty");
  }
  std::vector<CouplingPoint> out;
  out.reserve(lengths.size() * n_wb_values.size());
  for (int n : n_wb_values) {
    for (double len : lengths) {
      WirebondNetwork wb = wb_template;
      wb.length_wb = len;
      wb.n_wb = n;
      out.push_back(coupling_point(rlc, wb, line, options));
    }
  }
  return out;
}

}  // namespace transducer::circuit
