#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "transducer/circuit.hpp"
#include "transducer/herald.hpp"
#include "transducer/scattering.hpp"
#include "transducer/temporal.hpp"

namespace transducer::io {

using Json = nlohmann::ordered_json;

// Shortest round-trip decimal representation.
std::string format_double(double v);

void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

// freq_hz, re, im
std::string spectrum_csv(const scattering::ComplexSpectrum& s);
scattering::ComplexSpectrum parse_spectrum_csv(const std::string& text);

// t_s, re, im
std::string complex_series_csv(const std::vector<double>& t, const std::vector<std::complex<double>>& v);
// header given by the caller, e.g. {"t_s", "value"}
std::string columns_csv(const std::vector<std::string>& header,
                        const std::vector<std::vector<double>>& columns);

// i, q, heralded
std::string dataset_csv(const herald::QuadratureDataset& ds);
herald::QuadratureDataset parse_dataset_csv(const std::string& text);

// length_m, n_wb, coupling_hz
std::string sweep_csv(const std::vector<circuit::CouplingPoint>& points);
// freq_hz, re_z, im_z, group_delay_s
std::string line_response_csv(const circuit::LineResponse& r);

Json histogram_json(const herald::QuadratureHistogram& h);
Json radial_json(const herald::RadialProfile& p);

struct RunManifest {
  std::string command;
  std::string config_path;
  std::uint64_t seed = 0;
  std::string version;
  std::vector<std::string> outputs;
  Json flags = Json::object();
};

Json manifest_json(const RunManifest& m);

// Writes JSON with two-space indentation and a trailing newline.
void write_json(const std::string& path, const Json& j);
Json read_json(const std::string& path);

}  // namespace transducer::io
