#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace transducer::circuit {

using cplx = std::complex<double>;

enum class ResistorPlacement { parallel, series };

// Lumped model of the piezoelectric mechanical mode.
struct MechanicalRLC {
  double L_m = 195.6e-9;
  double C_m = 10.01e-15;
  double R_m = 45.4e6;
  double C_0 = 0.11e-15;

  void validate() const;
  // Empty unless the resonance is outside (1, 10) GHz.
  std::vector<std::string> warnings() const;
};

struct Resonance {
  double f0 = 0.0;       // Hz
  double Q = 0.0;
  double gamma_i = 0.0;  // f0/Q, Hz
};

Resonance rlc_resonance(const MechanicalRLC& rlc,
                        ResistorPlacement placement = ResistorPlacement::parallel);

// Kinetic inductance law L(I) = L0 (1 + (I/I*)^2). Capacitance is fixed, so
// the phase velocity scales as 1/sqrt(L) and the impedance as sqrt(L).
struct KineticTuning {
  double current = 0.0;
  double i_star = 1.0;

  double inductance_factor() const {
    const double x = current / i_star;
    return 1.0 + x * x;
  }
};

// Lossless line of characteristic impedance Z, open at the mechanics end and
// terminated by `termination` at the far (measurement) end.
struct TransmissionLine {
  double Z = 1000.0;
  double length = 0.065;
  double phase_velocity = 1.43e7;
  double termination = 50.0;
  std::optional<KineticTuning> tuning;

  void validate() const;
  double impedance() const;
  double velocity() const;
  double fsr() const;                            // Hz
  double electrical_length(double omega) const;  // beta l
  // Linewidth of the standing-wave modes from the termination mismatch,
  // -2 ln|Gamma| FSR, rad/s. Zero for a matched line.
  double kappa() const;
};

// Input impedance of the line seen from the mechanics end with an extra
// electrical-length offset (rad); finite for every argument.
cplx z_eff(const TransmissionLine& line, double omega, double phase_offset = 0.0);

struct LineResponse {
  std::vector<double> freqs;
  std::vector<cplx> z_eff;
  std::vector<cplx> s11;             // at the termination port, referenced to its impedance
  std::vector<double> group_delay;   // -d arg(S11)/d omega, s
  std::vector<double> resonances;    // Hz, inside [min(freqs), max(freqs)]
};

LineResponse line_response(const TransmissionLine& line, const std::vector<double>& freqs);

using Abcd = std::array<cplx, 4>;  // {A, B, C, D}

Abcd abcd_multiply(const Abcd& x, const Abcd& y);
cplx abcd_det(const Abcd& m);
cplx abcd_input_impedance(const Abcd& m, cplx load);

// n_wb identical bonds in parallel. Series branch L_per_m length + R_wb +
// C_wb per bond; shunt parasitics C_p_per_m length per bond plus mutual
// C_pwb_per_m length (n_wb - 1), split evenly across a pi network.
// C_wb = +inf removes the contact capacitance.
struct WirebondNetwork {
  int n_wb = 1;
  double length_wb = 0.75e-3;
  double L_per_m = 1e-6;
  double C_p_per_m = 20e-15 / 0.75e-3;
  double C_wb = 20e-12;
  double R_wb = 0.4;
  double C_pwb_per_m = 12e-12;

  void validate() const;
};

Abcd wirebond_abcd(const WirebondNetwork& wb, double freq);

enum class Topology {
  series_c0_parallel_tank,  // tank loaded through C_0; gamma = Re[Y_ext]/C_m
  bvd_shunt_c0,             // series motional branch, C_0 across the port; gamma = Re[Z_ext]/L_m
};

struct CouplingOptions {
  Topology topology = Topology::series_c0_parallel_tank;
  bool tune_line = true;  // maximize over the line's electrical-length offset
  int tuning_points = 720;
};

struct CouplingPoint {
  double length_m = 0.0;
  int n_wb = 1;
  double gamma_ext_hz = 0.0;  // external decay rate / 2pi
  double g_hz = 0.0;          // equivalent coupling sqrt(gamma_ext kappa_line / 4) / 2pi
  double phase_offset = 0.0;
  std::vector<std::string> warnings;
};

CouplingPoint coupling_point(const MechanicalRLC& rlc, const WirebondNetwork& wb,
                             const TransmissionLine& line, const CouplingOptions& options = {});

// Surface over lengths x n_wb_values (lengths vary fastest).
std::vector<CouplingPoint> coupling_vs_length(const MechanicalRLC& rlc,
                                              const WirebondNetwork& wb_template,
                                              const TransmissionLine& line,
                                              const std::vector<double>& lengths,
                                              const std::vector<int>& n_wb_values,
                                              const CouplingOptions& options = {});

}  // namespace transducer::circuit
