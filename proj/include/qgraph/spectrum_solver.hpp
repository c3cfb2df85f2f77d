#pragma once
// Roots of det(I - U(k)) = 0 on a window, with Weyl-law validation.
//
// On a grid of step (pi/L)/grid_factor, the 2E eigenphases of U(k) are reduced
// to two numbers: their sum s(k) (phases taken in [0, 2pi)) and the signed
// phase nearest zero. An eigenvalue of the graph is a phase branch wrapping
// through zero; each wrap drops s(k) by 2pi while the unwrapped total phase
// phi(k) moves smoothly, so
//     w(k) = (phi(k) - s(k)) / (2 pi)
// is an integer counting the roots passed since the window start. Cells with a
// nonzero increment are bisected on w; an isolated simple crossing is polished
// by Illinois iteration on the nearest-zero eigenphase. The grid step keeps
// per-step phase advances near 2pi/grid_factor, far below the pi unwrapping
// limit. Every solve is validated against the Weyl count N(k) ~ Lk/pi; a
// residual above 2E triggers grid doubling, then a hard error.

#include "qgraph/evolution.hpp"
#include "qgraph/metric_graph.hpp"
#include "qgraph/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qgraph {

struct SolveOptions {
  double grid_factor = 20.0;
  double refine_tol = 1e-10;
  int threads = 0;
  int max_grid_doublings = 2;
  ScatteringMode mode = ScatteringMode::Exact;
};

struct Spectrum {
  std::vector<double> ks;
  double k_min = 0.0;
  double k_max = 0.0;
  double total_length = 0.0;
  double weyl_residual = 0.0;
  double tolerance = 0.0;
  double grid_factor_used = 0.0;
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Windowed Weyl residual: max over the jump points and window endpoints of
// |#{roots in (k_min, K]} - (L/pi)(K - k_min)|.
inline double weyl_count_check(const Spectrum& s, const MetricGraph& g) {
  double density = g.total_length() / std::numbers::pi;
  double res = 0.0;
  for (std::size_t i = 0; i < s.ks.size(); ++i) {
    double x = density * (s.ks[i] - s.k_min);
    res = std::max(res, std::abs(static_cast<double>(i) - x));
    res = std::max(res, std::abs(static_cast<double>(i + 1) - x));
  }
  res = std::max(res, std::abs(static_cast<double>(s.ks.size()) -
                               density * (s.k_max - s.k_min)));
  return res;
}

namespace detail {

inline double wrap_to_pi(double x) {
  double y = std::remainder(x, 2.0 * std::numbers::pi);
  if (y <= -std::numbers::pi) y += 2.0 * std::numbers::pi;
  return y;
}

struct PhaseEval {
  double k = 0.0;
  double sum = 0.0;      // sum of eigenphases in [0, 2pi)
  double nearest = 0.0;  // signed eigenphase closest to zero, in (-pi, pi]
};

class PhaseEngine {
 public:
  PhaseEngine(const MetricGraph& g, const VertexConditions& conds, ScatteringMode mode)
      : g_(g), conds_(conds), mode_(mode) {}

  PhaseEval eval(double k) const {
    EvolutionOperator op = evolution_operator(g_, conds_, k, mode_);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ces;
    ces.compute(op.matrix, /*computeEigenvectors=*/false);
    if (ces.info() != Eigen::Success)
      throw SolverError("spectrum solver: eigenvalue iteration failed at k=" + std::to_string(k));
    PhaseEval out;
    out.k = k;
    double best = 4.0;  // anything above pi
    for (int i = 0; i < op.bond_count(); ++i) {
      double a = std::arg(ces.eigenvalues()(i));
      out.sum += a < 0.0 ? a + 2.0 * std::numbers::pi : a;
      if (std::abs(a) < std::abs(best)) best = a;
    }
    out.nearest = best;
    return out;
  }

 private:
  const MetricGraph& g_;
  const VertexConditions& conds_;
  ScatteringMode mode_;
};

// Roots counted between two evaluations lying within one grid cell, where the
// total unwrapped phase advances by less than pi.
inline long long crossings_between(const PhaseEval& a, const PhaseEval& b) {
  double dphi = wrap_to_pi(b.sum - a.sum);
  return std::llround((dphi - (b.sum - a.sum)) / (2.0 * std::numbers::pi));
}

inline double illinois_root(const PhaseEngine& eng, double a, double b, double fa, double fb,
                            double tol, bool& ok) {
  // fa < 0 < fb on entry
  int stale = 0;
  for (int it = 0; it < 90 && b - a > tol; ++it) {
    double m = (a * fb - b * fa) / (fb - fa);
    double lo = a + 0.05 * (b - a), hi = b - 0.05 * (b - a);
    m = std::min(std::max(m, lo), hi);
    double fm = eng.eval(m).nearest;
    if (fm == 0.0) {
      ok = true;
      return m;
    }
    if (fm < 0.0) {
      a = m;
      fa = fm;
      if (stale == -1) fb *= 0.5;
      stale = -1;
    } else {
      b = m;
      fb = fm;
      if (stale == 1) fa *= 0.5;
      stale = 1;
    }
  }
  ok = b - a <= tol;
  return 0.5 * (a + b);
}

inline void refine_cell(const PhaseEngine& eng, const PhaseEval& ea, const PhaseEval& eb,
                        long long count, double tol, int depth, std::vector<double>& out) {
  if (count <= 0) return;
  if (eb.k - ea.k <= tol) {
    for (long long c = 0; c < count; ++c) out.push_back(0.5 * (ea.k + eb.k));
    return;
  }
  if (count == 1 && depth >= 4 && ea.nearest < 0.0 && eb.nearest > 0.0) {
    bool ok = false;
    double r = illinois_root(eng, ea.k, eb.k, ea.nearest, eb.nearest, tol, ok);
    // A minimality swap between two near-zero branches can fake a sign change;
    // a genuine root leaves the nearest eigenphase far below this threshold.
    if (ok && std::abs(eng.eval(r).nearest) < 1e-6) {
      out.push_back(r);
      return;
    }
  }
  PhaseEval em = eng.eval(0.5 * (ea.k + eb.k));
  long long cm = crossings_between(ea, em);
  refine_cell(eng, ea, em, cm, tol, depth + 1, out);
  refine_cell(eng, em, eb, count - cm, tol, depth + 1, out);
}

inline Spectrum solve_on_grid(const PhaseEngine& eng, double k_min, double k_max, double L,
                              double grid_factor, const SolveOptions& opts) {
  double target_step = (std::numbers::pi / L) / grid_factor;
  std::size_t n_cells =
      static_cast<std::size_t>(std::max(1.0, std::ceil((k_max - k_min) / target_step)));
  double step = (k_max - k_min) / static_cast<double>(n_cells);

  std::vector<PhaseEval> evals(n_cells + 1);
  parallel_chunks(n_cells + 1, opts.threads, [&](std::size_t lo, std::size_t hi, int) {
    for (std::size_t i = lo; i < hi; ++i) {
      double k = (i == n_cells) ? k_max : k_min + static_cast<double>(i) * step;
      evals[i] = eng.eval(k);
    }
  });

  std::vector<std::size_t> hot;
  std::vector<long long> counts(n_cells, 0);
  for (std::size_t i = 0; i < n_cells; ++i) {
    counts[i] = crossings_between(evals[i], evals[i + 1]);
    if (counts[i] != 0) hot.push_back(i);
  }

  std::vector<std::vector<double>> cell_roots(hot.size());
  parallel_chunks(hot.size(), opts.threads, [&](std::size_t lo, std::size_t hi, int) {
    for (std::size_t h = lo; h < hi; ++h) {
      std::size_t i = hot[h];
      refine_cell(eng, evals[i], evals[i + 1], counts[i], opts.refine_tol, 0, cell_roots[h]);
    }
  });

  Spectrum s;
  s.k_min = k_min;
  s.k_max = k_max;
  s.total_length = L;
  s.tolerance = opts.refine_tol;
  for (auto& roots : cell_roots)
    s.ks.insert(s.ks.end(), roots.begin(), roots.end());
  std::sort(s.ks.begin(), s.ks.end());
  double dedup = 10.0 * opts.refine_tol;
  std::vector<double> unique;
  for (double k : s.ks)
    if (unique.empty() || k - unique.back() >= dedup) unique.push_back(k);
  s.ks = std::move(unique);
  return s;
}

}  // namespace detail

inline Spectrum solve_spectrum(const MetricGraph& g, const VertexConditions& conds, double k_min,
                               double k_max, const SolveOptions& opts = {}) {
  g.require_lengths();
  if (!(k_min > 0.0) || !(k_max > k_min))
    throw std::invalid_argument("solve_spectrum: need 0 < k_min < k_max");
  if (!(opts.grid_factor >= 2.0))
    throw std::invalid_argument("solve_spectrum: grid_factor must be >= 2");
  if (!(opts.refine_tol > 0.0))
    throw std::invalid_argument("solve_spectrum: refine_tol must be positive");
  double L = g.total_length();
  detail::PhaseEngine eng(g, conds, opts.mode);
  double gf = opts.grid_factor;
  for (int attempt = 0;; ++attempt) {
    Spectrum s = detail::solve_on_grid(eng, k_min, k_max, L, gf, opts);
    s.grid_factor_used = gf;
    s.weyl_residual = weyl_count_check(s, g);
    if (s.weyl_residual <= static_cast<double>(g.bond_count()) + 1e-9) return s;
    if (attempt >= opts.max_grid_doublings) {
      std::ostringstream msg;
      msg << "solve_spectrum: Weyl validation failed (residual " << s.weyl_residual
          << " > bond count " << g.bond_count() << " after " << attempt
          << " grid doublings); roots missed or spurious";
      throw SolverError(msg.str());
    }
    gf *= 2.0;
  }
}

// First `count` roots above k_min. The Weyl law pins the window size up to a
// bounded residual, so one padded solve suffices; extends defensively if not.
inline Spectrum solve_first_n(const MetricGraph& g, const VertexConditions& conds, double k_min,
                              std::size_t count, const SolveOptions& opts = {}) {
  if (count == 0) throw std::invalid_argument("solve_first_n: count must be positive");
  double spacing = std::numbers::pi / g.total_length();
  double pad = static_cast<double>(g.bond_count()) + 8.0;
  double k_max = k_min + (static_cast<double>(count) + pad) * spacing;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Spectrum s = solve_spectrum(g, conds, k_min, k_max, opts);
    if (s.ks.size() >= count) {
      s.ks.resize(count);
      s.k_max = s.ks.back();
      return s;
    }
    k_max += (static_cast<double>(count - s.ks.size()) + pad) * spacing;
  }
  throw SolverError("solve_first_n: window extension failed to reach requested count");
}

// ---- CSV serialization: header "k", one root per line, 17 significant digits ----

inline std::string spectrum_to_csv(const Spectrum& s) {
  std::string out = "k\n";
  char buf[48];
  for (double k : s.ks) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", k);
    out += buf;
  }
  return out;
}

inline std::vector<double> spectrum_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || (line != "k" && line != "k\r"))
    throw std::invalid_argument("spectrum_from_csv: missing 'k' header");
  std::vector<double> ks;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ks.push_back(std::stod(line));
  }
  return ks;
}

}  // namespace qgraph
