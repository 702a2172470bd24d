#include "transducer/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "transducer/error.hpp"

namespace transducer::io {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError(path, "cannot open for writing");
  f << content;
  if (!f) throw Error("failed writing " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError(path, "cannot open input file");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t\r");
    const auto e = item.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
  }
  return out;
}

bool to_number(const std::string& s, double& v) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

// Numeric rows of a CSV with `width` columns; a non-numeric first line is
// taken as the header.
std::vector<std::vector<double>> numeric_rows(const std::string& text, std::size_t width) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split(line);
    std::vector<double> row;
    bool ok = f.size() == width;
    for (std::size_t k = 0; ok && k < f.size(); ++k) {
      double v = 0.0;
      ok = to_number(f[k], v);
      row.push_back(v);
    }
    if (!ok) {
      if (rows.empty() && n == 1) continue;
      throw ConfigError("csv line " + std::to_string(n),
                        "expected " + std::to_string(width) + " numeric columns");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string spectrum_csv(const scattering::ComplexSpectrum& s) {
  std::string out = "freq_hz,re,im\n";
  for (std::size_t k = 0; k < s.size(); ++k) {
    out += format_double(s.freqs[k]) + "," + format_double(s.values[k].real()) + "," +
           format_double(s.values[k].imag()) + "\n";
  }
  return out;
}

scattering::ComplexSpectrum parse_spectrum_csv(const std::string& text) {
  scattering::ComplexSpectrum s;
  for (const auto& r : numeric_rows(text, 3)) {
    s.freqs.push_back(r[0]);
    s.values.emplace_back(r[1], r[2]);
  }
  s.validate();
  return s;
}

std::string complex_series_csv(const std::vector<double>& t,
                               const std::vector<std::complex<double>>& v) {
  std::string out = "t_s,re,im\n";
  for (std::size_t k = 0; k < t.size() && k < v.size(); ++k) {
    out += format_double(t[k]) + "," + format_double(v[k].real()) + "," +
           format_double(v[k].imag()) + "\n";
  }
  return out;
}

std::string columns_csv(const std::vector<std::string>& header,
                        const std::vector<std::vector<double>>& columns) {
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
  out += "\n";
  const std::size_t n = columns.empty() ? 0 : columns.front().size();
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      out += (c ? "," : "") + format_double(columns[c][k]);
    }
    out += "\n";
  }
  return out;
}

std::string dataset_csv(const herald::QuadratureDataset& ds) {
  std::string out = "i,q,heralded\n";
  out.reserve(ds.size() * 44);
  for (std::size_t k = 0; k < ds.size(); ++k) {
    out += format_double(ds.i[k]);
    out += ',';
    out += format_double(ds.q[k]);
    out += ds.heralded[k] ? ",1\n" : ",0\n";
  }
  return out;
}

herald::QuadratureDataset parse_dataset_csv(const std::string& text) {
  herald::QuadratureDataset ds;
  for (const auto& r : numeric_rows(text, 3)) {
    if (r[2] != 0.0 && r[2] != 1.0) throw ConfigError("heralded", "must be 0 or 1");
    ds.push({r[0], r[1]}, r[2] == 1.0);
  }
  return ds;
}

std::string sweep_csv(const std::vector<circuit::CouplingPoint>& points) {
  std::string out = "length_m,n_wb,coupling_hz\n";
  for (const auto& p : points) {
    out += format_double(p.length_m) + "," + std::to_string(p.n_wb) + "," +
           format_double(p.g_hz) + "\n";
  }
  return out;
}

std::string line_response_csv(const circuit::LineResponse& r) {
  std::string out = "freq_hz,re_z,im_z,group_delay_s\n";
  for (std::size_t k = 0; k < r.freqs.size(); ++k) {
    out += format_double(r.freqs[k]) + "," + format_double(r.z_eff[k].real()) + "," +
           format_double(r.z_eff[k].imag()) + "," + format_double(r.group_delay[k]) + "\n";
  }
  return out;
}

Json histogram_json(const herald::QuadratureHistogram& h) {
  Json j;
  j["bins"] = h.bins;
  j["extent"] = h.extent;
  j["bin_width"] = h.bin_width();
  j["samples"] = h.samples;
  j["overflow"] = h.overflow;
  j["layout"] = "row-major, index iq * bins + ii";
  j["values"] = h.probability;
  return j;
}

Json radial_json(const herald::RadialProfile& p) {
  Json j;
  j["r_edges"] = p.r_edges;
  j["diff"] = p.diff;
  j["error"] = p.error;
  j["control"] = p.control;
  j["control_error"] = p.control_error;
  j["n_heralded"] = p.n_heralded;
  j["n_all"] = p.n_all;
  return j;
}

Json manifest_json(const RunManifest& m) {
  Json j;
  j["command"] = m.command;
  j["config_path"] = m.config_path;
  j["seed"] = m.seed;
  j["versions"] = m.version;
  j["flags"] = m.flags;
  j["outputs"] = m.outputs;
  return j;
}

void write_json(const std::string& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

Json read_json(const std::string& path) {
  const std::string text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path, std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace transducer::io
