#pragma once
// Nearest-neighbour spacing statistics, GOE/Poisson reference curves, and the
// two spectral form factor estimators:
//   eigenvalue route: windowed periodogram |sum_n e^{2 pi i x_n tau}|^2 / W
//     averaged over consecutive windows of W unfolded levels. No comb-mean
//     subtraction; instead values at tau < 10/W sit below the estimator's
//     resolution floor and are discarded.
//   eigenphase route: K_U(n/2E) = <|tr U(k)^n|^2> / 2E over uniformly sampled
//     k, seeded and deterministic.

#include "qgraph/evolution.hpp"
#include "qgraph/metric_graph.hpp"
#include "qgraph/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace qgraph {

// Weyl unfolding: x_n = (L/pi) k_n, unit mean spacing.
inline std::vector<double> unfold(const std::vector<double>& ks, double total_length) {
  if (!(total_length > 0.0)) throw std::invalid_argument("unfold: total length must be positive");
  std::vector<double> xs(ks.size());
  double scale = total_length / std::numbers::pi;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (i > 0 && ks[i] < ks[i - 1]) throw std::invalid_argument("unfold: ks must be ascending");
    xs[i] = scale * ks[i];
  }
  return xs;
}

struct SpacingHistogram {
  std::vector<double> bin_edges;  // nbins + 1 ascending edges starting at 0
  std::vector<double> densities;
  int sample_count = 0;           // spacings inside [0, last edge)
  double bin_width = 0.0;
};

inline SpacingHistogram nn_histogram(const std::vector<double>& xs, double bin_width = 0.1,
                                     double s_max = 4.0) {
  if (xs.size() < 2) throw std::invalid_argument("nn_histogram: need at least 2 levels");
  if (!(bin_width > 0.0) || !(s_max > bin_width))
    throw std::invalid_argument("nn_histogram: need 0 < bin_width < s_max");
  int nbins = static_cast<int>(std::ceil(s_max / bin_width - 1e-9));
  std::vector<long long> counts(nbins, 0);
  long long total = 0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    double s = xs[i] - xs[i - 1];
    if (s < 0.0) throw std::invalid_argument("nn_histogram: levels must be ascending");
    int bin = static_cast<int>(s / bin_width);
    if (bin < nbins) {
      ++counts[bin];
      ++total;
    }
  }
  if (total == 0) throw std::invalid_argument("nn_histogram: no spacings below s_max");
  SpacingHistogram h;
  h.bin_width = bin_width;
  h.sample_count = static_cast<int>(total);
  h.bin_edges.resize(nbins + 1);
  h.densities.resize(nbins);
  for (int j = 0; j <= nbins; ++j) h.bin_edges[j] = j * bin_width;
  for (int j = 0; j < nbins; ++j)
    h.densities[j] = static_cast<double>(counts[j]) / (bin_width * static_cast<double>(total));
  return h;
}

// ---- reference curves ----

inline double wigner_goe_pdf(double s) {
  if (s < 0.0) throw std::domain_error("wigner_goe_pdf: s must be >= 0");
  return 0.5 * std::numbers::pi * s * std::exp(-0.25 * std::numbers::pi * s * s);
}

inline double wigner_goe_cdf(double s) {
  if (s < 0.0) throw std::domain_error("wigner_goe_cdf: s must be >= 0");
  return 1.0 - std::exp(-0.25 * std::numbers::pi * s * s);
}

inline double poisson_pdf(double s) {
  if (s < 0.0) throw std::domain_error("poisson_pdf: s must be >= 0");
  return std::exp(-s);
}

inline double poisson_cdf(double s) {
  if (s < 0.0) throw std::domain_error("poisson_cdf: s must be >= 0");
  return 1.0 - std::exp(-s);
}

// GOE form factor: 2 tau - tau ln(1 + 2 tau) up to tau = 1, then
// 2 - tau ln((2 tau + 1)/(2 tau - 1)), saturating at 1.
inline double goe_form_factor(double tau) {
  if (tau < 0.0) throw std::domain_error("goe_form_factor: tau must be >= 0");
  if (tau == 0.0) return 0.0;
  if (tau <= 1.0) return 2.0 * tau - tau * std::log1p(2.0 * tau);
  return 2.0 - tau * std::log1p(2.0 / (2.0 * tau - 1.0));
}

// ---- Kolmogorov-Smirnov distance ----

inline double ks_distance(std::vector<double> samples,
                          const std::function<double(double)>& cdf) {
  if (samples.size() < 100)
    throw std::invalid_argument("ks_distance: need at least 100 samples");
  std::sort(samples.begin(), samples.end());
  double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double f = cdf(samples[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

// ---- form factor estimators ----

struct FormFactorSeries {
  std::vector<double> taus;
  std::vector<double> values;
  std::vector<double> error_bars;
  std::string estimator;  // "eigenvalue" or "eigenphase"
};

inline FormFactorSeries sff_from_eigenvalues(const std::vector<double>& xs,
                                             const std::vector<double>& taus,
                                             std::size_t window_size = 1000) {
  if (window_size < 10) throw std::invalid_argument("sff_from_eigenvalues: window too small");
  std::size_t nw = xs.size() / window_size;
  if (nw == 0)
    throw std::invalid_argument("sff_from_eigenvalues: fewer levels than one window");
  double tau_floor = 10.0 / static_cast<double>(window_size);
  FormFactorSeries out;
  out.estimator = "eigenvalue";
  for (double tau : taus) {
    if (tau < tau_floor) continue;  // below periodogram resolution, discarded
    std::vector<double> per_window(nw);
    for (std::size_t w = 0; w < nw; ++w) {
      std::complex<double> acc = 0.0;
      for (std::size_t i = w * window_size; i < (w + 1) * window_size; ++i) {
        double phase = 2.0 * std::numbers::pi * xs[i] * tau;
        acc += std::complex<double>(std::cos(phase), std::sin(phase));
      }
      per_window[w] = std::norm(acc) / static_cast<double>(window_size);
    }
    double mean = pairwise_sum(per_window) / static_cast<double>(nw);
    double se = 0.0;
    if (nw > 1) {
      std::vector<double> dev2(nw);
      for (std::size_t w = 0; w < nw; ++w) dev2[w] = (per_window[w] - mean) * (per_window[w] - mean);
      se = std::sqrt(pairwise_sum(dev2) / static_cast<double>(nw - 1)) /
           std::sqrt(static_cast<double>(nw));
    }
    out.taus.push_back(tau);
    out.values.push_back(mean);
    out.error_bars.push_back(se);
  }
  return out;
}

struct SffEstimate {
  double value = 0.0;
  double std_error = 0.0;
  int n = 0;
  double tau = 0.0;
};

// K_U(n/2E) = <|tr U(k)^n|^2>/2E over k ~ uniform(k_window), seeded.
// Per-sample values go through a fixed pairwise reduction, so the result does
// not depend on the thread count.
inline SffEstimate sff_eigenphases(const MetricGraph& g, const VertexConditions& conds, int n,
                                   std::size_t k_samples, std::pair<double, double> k_window,
                                   ScatteringMode mode, std::uint64_t seed = 12345,
                                   int threads = 0) {
  if (n < 1) throw std::invalid_argument("sff_eigenphases: n must be >= 1");
  if (k_samples < 1000)
    throw std::invalid_argument("sff_eigenphases: need at least 1000 k samples");
  if (!(k_window.first > 0.0) || !(k_window.second > k_window.first))
    throw std::invalid_argument("sff_eigenphases: need 0 < window start < window end");
  g.require_lengths();
  std::vector<double> ks(k_samples);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(k_window.first, k_window.second);
  for (double& k : ks) k = dist(rng);

  double bonds = static_cast<double>(g.bond_count());
  std::vector<double> vals(k_samples);
  parallel_chunks(k_samples, threads, [&](std::size_t lo, std::size_t hi, int) {
    for (std::size_t i = lo; i < hi; ++i) {
      EvolutionOperator op = evolution_operator(g, conds, ks[i], mode);
      vals[i] = std::norm(trace_power(op, n)) / bonds;
    }
  });

  double nd = static_cast<double>(k_samples);
  SffEstimate est;
  est.n = n;
  est.tau = static_cast<double>(n) / bonds;
  est.value = pairwise_sum(vals) / nd;
  std::vector<double> dev2(k_samples);
  for (std::size_t i = 0; i < k_samples; ++i)
    dev2[i] = (vals[i] - est.value) * (vals[i] - est.value);
  est.std_error = std::sqrt(pairwise_sum(dev2) / (nd - 1.0)) / std::sqrt(nd);
  return est;
}

// ---- CSV emission (fixed column names) ----

inline std::string histogram_csv(const SpacingHistogram& h) {
  std::string out = "bin_left,bin_right,density\n";
  char buf[96];
  for (std::size_t j = 0; j + 1 < h.bin_edges.size(); ++j) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", h.bin_edges[j], h.bin_edges[j + 1],
                  h.densities[j]);
    out += buf;
  }
  return out;
}

inline std::string formfactor_csv(const FormFactorSeries& s, bool with_goe_reference = false) {
  std::string out = with_goe_reference ? "tau,K,stderr,K_goe\n" : "tau,K,stderr\n";
  char buf[128];
  for (std::size_t i = 0; i < s.taus.size(); ++i) {
    if (with_goe_reference)
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", s.taus[i], s.values[i],
                    s.error_bars[i], goe_form_factor(s.taus[i]));
    else
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", s.taus[i], s.values[i],
                    s.error_bars[i]);
    out += buf;
  }
  return out;
}

}  // namespace qgraph
