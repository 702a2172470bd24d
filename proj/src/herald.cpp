#include "transducer/herald.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "transducer/constants.hpp"
#include "transducer/error.hpp"
#include "transducer/rng.hpp"

namespace transducer::herald {

namespace {

constexpr std::size_t kBlock = 4096;

cplx draw_thermal(Rng& rng, double n_th) { return rng.complex_normal(n_th + 1.0); }

cplx draw_added(Rng& rng, double n_th) {
  // |alpha|^2 ~ Gamma(2, n+1): sum of two unit exponentials.
  const double x = (n_th + 1.0) * (rng.exponential() + rng.exponential());
  const double phi = kTwoPi * rng.uniform();
  return std::polar(std::sqrt(x), phi);
}

std::size_t block_count(std::size_t n) { return (n + kBlock - 1) / kBlock; }

template <class Draw>
std::vector<cplx> sample_blocks(std::size_t count, std::uint64_t seed, std::uint64_t stream,
                                Draw draw) {
  std::vector<cplx> out(count);
  parallel_blocks(block_count(count), [&](std::size_t b0, std::size_t b1) {
    for (std::size_t b = b0; b < b1; ++b) {
      Rng rng(derive_seed(seed, stream, b));
      const std::size_t end = std::min(count, (b + 1) * kBlock);
      for (std::size_t k = b * kBlock; k < end; ++k) out[k] = draw(rng);
    }
  });
  return out;
}

// One heralded sample of the conditional sampler.
struct HeraldedDraw {
  cplx z;
  bool true_herald;
};

HeraldedDraw draw_heralded(Rng& rng, const ExperimentConfig& cfg, double fraction) {
  const bool is_true = rng.bernoulli(fraction);
  const cplx alpha = is_true ? draw_added(rng, cfg.n_th) : draw_thermal(rng, cfg.n_th);
  const cplx nu = rng.complex_normal(cfg.n_ex);
  return {cfg.gain_scale * (alpha + nu), is_true};
}

cplx draw_unheralded(Rng& rng, const ExperimentConfig& cfg) {
  const cplx alpha = draw_thermal(rng, cfg.n_th);
  const cplx nu = rng.complex_normal(cfg.n_ex);
  return cfg.gain_scale * (alpha + nu);
}

constexpr std::uint64_t kStreamHeralded = streams::herald_shots + 1;
constexpr std::uint64_t kStreamThermal = streams::herald_shots + 2;

}  // namespace

void ExperimentConfig::validate() const {
  auto prob = [](double v, const char* field) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(field, "must lie in [0, 1]");
  };
  prob(p_pair, "herald.p_pair");
  prob(eta_sys, "herald.eta_sys");
  prob(dark_prob, "herald.dark_prob");
  if (!(n_th >= 0.0)) throw ConfigError("herald.n_th", "must be non-negative");
  if (!(n_ex >= 0.0)) throw ConfigError("herald.n_ex", "must be non-negative");
  if (!(gain_scale > 0.0)) throw ConfigError("herald.gain_scale", "must be positive");
}

std::size_t QuadratureDataset::heralded_count() const {
  return static_cast<std::size_t>(std::count(heralded.begin(), heralded.end(), true));
}

void QuadratureDataset::validate() const {
  if (i.size() != q.size() || i.size() != heralded.size()) {
    throw ConfigError("dataset", "i, q and heralded columns differ in length");
  }
}

std::vector<cplx> sample_q_thermal(double n_th, std::size_t count, std::uint64_t seed) {
  if (!(n_th >= 0.0)) throw ConfigError("n_th", "must be non-negative");
  return sample_blocks(count, seed, streams::q_samples,
                       [n_th](Rng& rng) { return draw_thermal(rng, n_th); });
}

std::vector<cplx> sample_q_added(double n_th, std::size_t count, std::uint64_t seed) {
  if (!(n_th >= 0.0)) throw ConfigError("n_th", "must be non-negative");
  return sample_blocks(count, seed, streams::q_samples + 1,
                       [n_th](Rng& rng) { return draw_added(rng, n_th); });
}

double q_thermal_pdf(double n_th, cplx alpha) {
  const double s = n_th + 1.0;
  return std::exp(-std::norm(alpha) / s) / (kPi * s);
}

double q_added_pdf(double n_th, cplx alpha) {
  const double s = n_th + 1.0;
  const double x = std::norm(alpha);
  return x * std::exp(-x / s) / (kPi * s * s);
}

double herald_fraction(const ExperimentConfig& cfg) {
  const double true_click = cfg.p_pair * cfg.eta_sys;
  const double any_click = 1.0 - (1.0 - true_click) * (1.0 - cfg.dark_prob);
  return any_click > 0.0 ? true_click / any_click : 0.0;
}

double variance_ratio(double n_th, double n_ex, double eta_herald) {
  return 1.0 + eta_herald * (n_th + 1.0) / (n_th + n_ex + 1.0);
}

QuadratureDataset simulate_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.n_shots;
  std::vector<cplx> z(n);
  std::vector<char> flag(n), truth(n);
  parallel_blocks(block_count(n), [&](std::size_t b0, std::size_t b1) {
    for (std::size_t b = b0; b < b1; ++b) {
      Rng rng(derive_seed(cfg.seed, streams::herald_shots, b));
      const std::size_t end = std::min(n, (b + 1) * kBlock);
      for (std::size_t k = b * kBlock; k < end; ++k) {
        const bool pair = rng.bernoulli(cfg.p_pair);
        const bool detected = rng.bernoulli(cfg.eta_sys);
        const bool dark = rng.bernoulli(cfg.dark_prob);
        const bool true_herald = pair && detected;
        flag[k] = true_herald || dark;
        truth[k] = true_herald;
        const cplx alpha = true_herald ? draw_added(rng, cfg.n_th) : draw_thermal(rng, cfg.n_th);
        const cplx nu = rng.complex_normal(cfg.n_ex);
        z[k] = cfg.gain_scale * (alpha + nu);
      }
    }
  });
  QuadratureDataset ds;
  ds.i.reserve(n);
  ds.q.reserve(n);
  ds.heralded.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    ds.push(z[k], flag[k] != 0);
    ds.true_heralds += truth[k] ? 1 : 0;
  }
  return ds;
}

QuadratureDataset simulate_postselected(const ExperimentConfig& cfg, std::size_t n_heralded,
                                        std::size_t n_thermal) {
  cfg.validate();
  const double fraction = herald_fraction(cfg);
  std::vector<HeraldedDraw> h(n_heralded);
  parallel_blocks(block_count(n_heralded), [&](std::size_t b0, std::size_t b1) {
    for (std::size_t b = b0; b < b1; ++b) {
      Rng rng(derive_seed(cfg.seed, kStreamHeralded, b));
      const std::size_t end = std::min(n_heralded, (b + 1) * kBlock);
      for (std::size_t k = b * kBlock; k < end; ++k) h[k] = draw_heralded(rng, cfg, fraction);
    }
  });
  const auto th = sample_blocks(n_thermal, cfg.seed, kStreamThermal,
                                [&cfg](Rng& rng) { return draw_unheralded(rng, cfg); });
  QuadratureDataset ds;
  for (const auto& d : h) {
    ds.push(d.z, true);
    ds.true_heralds += d.true_herald ? 1 : 0;
  }
  for (const auto& z : th) ds.push(z, false);
  return ds;
}

QuadratureDataset calibrate(const QuadratureDataset& ds, double gain_scale) {
  if (!(gain_scale > 0.0)) throw ConfigError("gain_scale", "must be positive");
  QuadratureDataset out = ds;
  for (auto& v : out.i) v /= gain_scale;
  for (auto& v : out.q) v /= gain_scale;
  return out;
}

double default_extent(double n_th, double n_ex) { return 5.0 * std::sqrt(n_th + n_ex + 1.0); }

QuadratureHistogram histogram2d(const QuadratureDataset& ds, bool heralded_only, double extent) {
  ds.validate();
  if (!(extent > 0.0)) throw ConfigError("extent", "must be positive");
  QuadratureHistogram h;
  h.extent = extent;
  const int nb = h.bins;
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(nb * nb), 0);
  std::uint64_t total = 0, outside = 0;
  const double w = h.bin_width();
  for (std::size_t k = 0; k < ds.size(); ++k) {
    if (heralded_only && !ds.heralded[k]) continue;
    ++total;
    const double fi = std::floor((ds.i[k] + extent) / w);
    const double fq = std::floor((ds.q[k] + extent) / w);
    if (fi < 0 || fq < 0 || fi >= nb || fq >= nb) {
      ++outside;
      continue;
    }
    ++counts[static_cast<std::size_t>(static_cast<int>(fq) * nb + static_cast<int>(fi))];
  }
  if (total == 0) throw ConfigError("dataset", "no samples to histogram");
  h.samples = total;
  h.probability.resize(counts.size());
  const double inv = 1.0 / static_cast<double>(total);
  for (std::size_t k = 0; k < counts.size(); ++k) h.probability[k] = counts[k] * inv;
  h.overflow = outside * inv;
  return h;
}

QuadratureDataset select(const QuadratureDataset& ds, bool heralded) {
  QuadratureDataset out;
  for (std::size_t k = 0; k < ds.size(); ++k) {
    if (ds.heralded[k] == heralded) out.push({ds.i[k], ds.q[k]}, ds.heralded[k]);
  }
  return out;
}

namespace {

std::vector<std::uint64_t> radial_counts(const QuadratureDataset& ds,
                                         const std::vector<std::size_t>* subset, int n_bins,
                                         double r_max) {
  std::vector<std::uint64_t> c(static_cast<std::size_t>(n_bins), 0);
  const double w = r_max / n_bins;
  auto add = [&](std::size_t k) {
    const double r = std::hypot(ds.i[k], ds.q[k]);
    const auto b = static_cast<long>(std::floor(r / w));
    if (b >= 0 && b < n_bins) ++c[static_cast<std::size_t>(b)];
  };
  if (subset) {
    for (std::size_t k : *subset) add(k);
  } else {
    for (std::size_t k = 0; k < ds.size(); ++k) add(k);
  }
  return c;
}

}  // namespace

RadialProfile histogram_diff_radial(const QuadratureDataset& ds_h, const QuadratureDataset& ds_all,
                                    int n_bins, double r_max, std::uint64_t control_seed) {
  ds_h.validate();
  ds_all.validate();
  if (ds_h.size() == 0 || ds_all.size() == 0) throw ConfigError("dataset", "empty dataset");
  if (n_bins < 1 || !(r_max > 0.0)) throw ConfigError("radial", "need n_bins >= 1, r_max > 0");

  // Control: a random subset of ds_all of the heralded sample count.
  const std::size_t n_s = std::min(ds_h.size(), ds_all.size());
  std::vector<std::size_t> idx(ds_all.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(derive_seed(control_seed, streams::subsample));
  for (std::size_t k = 0; k < n_s; ++k) {
    const std::size_t span = idx.size() - k;
    const std::size_t j = k + static_cast<std::size_t>(rng.uniform() * static_cast<double>(span));
    std::swap(idx[k], idx[std::min(j, idx.size() - 1)]);
  }
  idx.resize(n_s);

  const auto ch = radial_counts(ds_h, nullptr, n_bins, r_max);
  const auto ca = radial_counts(ds_all, nullptr, n_bins, r_max);
  const auto cs = radial_counts(ds_all, &idx, n_bins, r_max);

  RadialProfile out;
  out.n_heralded = ds_h.size();
  out.n_all = ds_all.size();
  const double nh = static_cast<double>(ds_h.size());
  const double na = static_cast<double>(ds_all.size());
  const double ns = static_cast<double>(n_s);
  for (int b = 0; b <= n_bins; ++b) out.r_edges.push_back(r_max * b / n_bins);
  for (std::size_t b = 0; b < ch.size(); ++b) {
    const double ph = ch[b] / nh, pa = ca[b] / na, ps = cs[b] / ns;
    out.diff.push_back(ph - pa);
    out.error.push_back(std::sqrt(ph * (1 - ph) / nh + pa * (1 - pa) / na));
    out.control.push_back(ps - pa);
    // Sampling without replacement from ds_all: finite-population variance.
    const double fpc = na > 1.0 ? (na - ns) / (na - 1.0) : 0.0;
    out.control_error.push_back(std::sqrt(pa * (1 - pa) / ns * fpc));
  }
  return out;
}

void VarianceStats::add(cplx z, bool heralded) {
  const double x = std::norm(z);
  if (heralded) {
    ++n_heralded;
    sum2_heralded.add(x);
    sum4_heralded.add(x * x);
  } else {
    ++n_unheralded;
    sum2_unheralded.add(x);
    sum4_unheralded.add(x * x);
  }
}

void VarianceStats::merge(const VarianceStats& o) {
  n_heralded += o.n_heralded;
  n_unheralded += o.n_unheralded;
  sum2_heralded.add(o.sum2_heralded.value());
  sum4_heralded.add(o.sum4_heralded.value());
  sum2_unheralded.add(o.sum2_unheralded.value());
  sum4_unheralded.add(o.sum4_unheralded.value());
}

double VarianceStats::mean_heralded() const {
  return n_heralded ? sum2_heralded.value() / static_cast<double>(n_heralded) : 0.0;
}

double VarianceStats::mean_unheralded() const {
  return n_unheralded ? sum2_unheralded.value() / static_cast<double>(n_unheralded) : 0.0;
}

VarianceStats variance_stats(const QuadratureDataset& ds) {
  ds.validate();
  VarianceStats s;
  for (std::size_t k = 0; k < ds.size(); ++k) s.add({ds.i[k], ds.q[k]}, ds.heralded[k]);
  return s;
}

VarianceStats postselected_statistics(const ExperimentConfig& cfg, std::size_t n_heralded,
                                      std::size_t n_thermal) {
  cfg.validate();
  const double fraction = herald_fraction(cfg);
  const std::size_t bh = block_count(n_heralded), bt = block_count(n_thermal);
  std::vector<VarianceStats> partial(bh + bt);
  parallel_blocks(partial.size(), [&](std::size_t b0, std::size_t b1) {
    for (std::size_t b = b0; b < b1; ++b) {
      VarianceStats& s = partial[b];
      if (b < bh) {
        Rng rng(derive_seed(cfg.seed, kStreamHeralded, b));
        const std::size_t end = std::min(n_heralded, (b + 1) * kBlock);
        for (std::size_t k = b * kBlock; k < end; ++k) s.add(draw_heralded(rng, cfg, fraction).z, true);
      } else {
        const std::size_t tb = b - bh;
        Rng rng(derive_seed(cfg.seed, kStreamThermal, tb));
        const std::size_t end = std::min(n_thermal, (tb + 1) * kBlock);
        for (std::size_t k = tb * kBlock; k < end; ++k) s.add(draw_unheralded(rng, cfg), false);
      }
    }
  });
  VarianceStats total;
  for (const auto& s : partial) total.merge(s);
  return total;
}

double excess_noise_from_ratio(double ratio, double n_th, double eta_herald) {
  if (!(eta_herald > 0.0)) throw NoSignalError("eta_herald = 0: heralded data carry no signal");
  if (!(ratio > 1.0)) throw NoSignalError("variance ratio <= 1: no heralded excess variance");
  return eta_herald * (n_th + 1.0) / (ratio - 1.0) - n_th - 1.0;
}

ExcessNoise extract_excess_noise(const VarianceStats& s, double n_th, double eta_herald) {
  if (!(eta_herald > 0.0)) throw NoSignalError("eta_herald = 0: heralded data carry no signal");
  if (s.n_heralded < 2 || s.n_unheralded < 2) {
    throw NoSignalError("need heralded and unheralded samples");
  }
  const double nh = static_cast<double>(s.n_heralded), nu = static_cast<double>(s.n_unheralded);
  const double mh = s.mean_heralded(), mu = s.mean_unheralded();
  const double var_h = std::max(s.sum4_heralded.value() / nh - mh * mh, 0.0) / nh;
  const double var_u = std::max(s.sum4_unheralded.value() / nu - mu * mu, 0.0) / nu;
  ExcessNoise out;
  out.ratio = mh / mu;
  out.ratio_stderr = out.ratio * std::sqrt(var_h / (mh * mh) + var_u / (mu * mu));
  out.n_ex = excess_noise_from_ratio(out.ratio, n_th, eta_herald);
  const double d = out.ratio - 1.0;
  out.stderr = eta_herald * (n_th + 1.0) / (d * d) * out.ratio_stderr;
  return out;
}

ExcessNoise extract_excess_noise(const QuadratureDataset& ds, double n_th, double eta_herald) {
  return extract_excess_noise(variance_stats(ds), n_th, eta_herald);
}

double heralding_rate(const ExperimentConfig& cfg, double rep_rate, double duty_factor) {
  return rep_rate * (cfg.p_pair * cfg.eta_sys + cfg.dark_prob) * duty_factor;
}

double dark_probability(double dark_rate, double window) {
  return -std::expm1(-dark_rate * window);
}

}  // namespace transducer::herald
