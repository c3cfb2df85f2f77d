#pragma once
// Exact counting of closed bond walks by edge support, and Eulerian-cycle
// counts by three independent routes: the subset-trace arithmetic transform,
// the BEST theorem over balanced orientations, and direct backtracking.
//
// A bond mask holds one bit per directed bond (2E bits). tilde_vector fills,
// for every mask b, the number of closed bond walks of length n that stay
// inside b; arithmetic_transform turns that into walks whose support is
// exactly b. Summing the exact counts over the 2^E admissible masks (one
// direction per edge) and dividing by E gives the Eulerian-cycle count.

#include <qgraph/evolution.hpp>
#include <qgraph/metric_graph.hpp>
#include <qgraph/orbit_theory.hpp>
#include <qgraph/parallel.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qgraph {

using BondMask = std::uint32_t;

inline constexpr int kMaxMaskBits = 26;  // 2^26 mask table is the memory cap

struct SubsetCountVector {
  enum class Stage { Tilde, Exact };

  Stage stage = Stage::Tilde;
  int n = 0;
  int bond_bits = 0;
  bool wide = false;
  std::vector<std::int64_t> narrow;  // used when !wide
  std::vector<BigInt> big;           // used when wide

  std::size_t size() const { return std::size_t{1} << bond_bits; }

  BigInt at(BondMask mask) const {
    if (mask >= size()) throw std::out_of_range("SubsetCountVector::at: mask out of range");
    return wide ? big[mask] : BigInt(narrow[mask]);
  }
};

// ---- masked trace sweep ----

namespace detail {

// Row-major V x V scratch for the binary powering chain; reused across masks.
template <class Int>
struct PowerWorkspace {
  int V = 0;
  std::vector<Int> a, p, q, t;

  explicit PowerWorkspace(int vertices)
      : V(vertices), a(std::size_t(vertices) * vertices), p(a.size()), q(a.size()), t(a.size()) {}
};

template <class Int>
void mat_mul(std::vector<Int>& out, const std::vector<Int>& x, const std::vector<Int>& y, int V) {
  std::fill(out.begin(), out.end(), Int(0));
  for (int i = 0; i < V; ++i) {
    for (int k = 0; k < V; ++k) {
      const Int& xv = x[std::size_t(i) * V + k];
      if (xv == 0) continue;
      const Int* yr = &y[std::size_t(k) * V];
      Int* orow = &out[std::size_t(i) * V];
      for (int j = 0; j < V; ++j) orow[j] += xv * yr[j];
    }
  }
}

// sum_ij x_ij y_ji
template <class Int>
Int transpose_dot(const std::vector<Int>& x, const std::vector<Int>& y, int V) {
  Int s = 0;
  for (int i = 0; i < V; ++i)
    for (int j = 0; j < V; ++j) s += x[std::size_t(i) * V + j] * y[std::size_t(j) * V + i];
  return s;
}

// w.p <- w.a^e (e >= 1), left-to-right binary powering via w.t.
template <class Int>
void pow_into(PowerWorkspace<Int>& w, int e) {
  w.p = w.a;
  int bit = 0;
  while ((e >> (bit + 1)) != 0) ++bit;
  for (--bit; bit >= 0; --bit) {
    mat_mul(w.t, w.p, w.p, w.V);
    std::swap(w.p, w.t);
    if ((e >> bit) & 1) {
      mat_mul(w.t, w.p, w.a, w.V);
      std::swap(w.p, w.t);
    }
  }
}

// Number of closed directed walks of length n using only the bonds in mask.
// bond_ends[b] = (origin, terminal) of bond b.
template <class Int>
Int masked_trace(const std::vector<std::pair<int, int>>& bond_ends, BondMask mask, int n,
                 PowerWorkspace<Int>& w) {
  std::fill(w.a.begin(), w.a.end(), Int(0));
  for (BondMask m = mask; m != 0; m &= m - 1) {
    int b = std::countr_zero(m);
    w.a[std::size_t(bond_ends[b].first) * w.V + bond_ends[b].second] = 1;
  }
  if (n == 1) {
    Int s = 0;
    for (int i = 0; i < w.V; ++i) s += w.a[std::size_t(i) * w.V + i];
    return s;
  }
  int q = n / 2;
  pow_into(w, q);
  if (n % 2 == 0) return transpose_dot(w.p, w.p, w.V);
  mat_mul(w.q, w.p, w.a, w.V);
  return transpose_dot(w.p, w.q, w.V);
}

inline std::vector<std::pair<int, int>> bond_endpoints(const MetricGraph& g) {
  std::vector<std::pair<int, int>> ends(g.bond_count());
  for (int b = 0; b < g.bond_count(); ++b)
    ends[b] = {g.bond_origin(b), g.bond_terminal(b)};
  return ends;
}

// Largest intermediate the powering chain can produce for any sub-mask: run
// the identical schedule on the full graph in wide integers and track the
// entrywise maximum. Every sub-mask intermediate is bounded entrywise by the
// full-graph one because all entries are non-negative counts.
inline BigInt chain_intermediate_bound(const MetricGraph& g, int n) {
  auto ends = bond_endpoints(g);
  int V = g.vertex_count();
  PowerWorkspace<BigInt> w(V);
  BondMask full = g.bond_count() >= 32 ? ~BondMask{0} : (BondMask{1} << g.bond_count()) - 1;
  std::fill(w.a.begin(), w.a.end(), BigInt(0));
  for (BondMask m = full; m != 0; m &= m - 1) {
    int b = std::countr_zero(m);
    w.a[std::size_t(ends[b].first) * V + ends[b].second] = 1;
  }
  BigInt best = 1;
  auto track = [&](const std::vector<BigInt>& mat) {
    for (const BigInt& v : mat)
      if (v > best) best = v;
  };
  if (n == 1) return BigInt(1);
  int q = n / 2;
  w.p = w.a;
  int bit = 0;
  while ((q >> (bit + 1)) != 0) ++bit;
  for (--bit; bit >= 0; --bit) {
    mat_mul(w.t, w.p, w.p, V);
    std::swap(w.p, w.t);
    track(w.p);
    if ((q >> bit) & 1) {
      mat_mul(w.t, w.p, w.a, V);
      std::swap(w.p, w.t);
      track(w.p);
    }
  }
  if (n % 2 == 0) {
    track(w.p);
    BigInt tr = transpose_dot(w.p, w.p, V);
    return std::max(best, tr);
  }
  mat_mul(w.q, w.p, w.a, V);
  track(w.q);
  BigInt tr = transpose_dot(w.p, w.q, V);
  return std::max(best, tr);
}

// transpose_dot accumulates V^2 products of bounded entries; keep 2^62 headroom.
inline bool fits_int64_chain(const MetricGraph& g, int n) {
  BigInt bound = chain_intermediate_bound(g, n);
  BigInt budget = (BigInt(1) << 62) / (std::size_t(g.vertex_count()) * g.vertex_count());
  return bound * bound < budget;
}

template <class Int>
void fill_tilde(std::vector<Int>& out, const MetricGraph& g, int n, int threads) {
  auto ends = bond_endpoints(g);
  std::size_t total = out.size();
  parallel_chunks(total, threads, [&](std::size_t lo, std::size_t hi, int) {
    PowerWorkspace<Int> w(g.vertex_count());
    for (std::size_t mask = lo; mask < hi; ++mask)
      out[mask] = masked_trace(ends, static_cast<BondMask>(mask), n, w);
  });
}

}  // namespace detail

inline void check_mask_width(const MetricGraph& g) {
  if (g.bond_count() > kMaxMaskBits)
    throw std::invalid_argument("tilde_vector: graph has " + std::to_string(g.bond_count()) +
                                " bonds; mask tables support at most " +
                                std::to_string(kMaxMaskBits));
}

// Per-mask closed-walk counts, walks confined to (but not required to cover)
// each mask. One vector per requested n from a single sweep apparatus.
inline std::vector<SubsetCountVector> tilde_vectors(const MetricGraph& g, const std::vector<int>& ns,
                                                    int threads = 0) {
  check_mask_width(g);
  if (ns.empty()) throw std::invalid_argument("tilde_vectors: no walk lengths given");
  for (int n : ns)
    if (n < 1) throw std::invalid_argument("tilde_vectors: walk length must be >= 1");
  std::vector<SubsetCountVector> out;
  out.reserve(ns.size());
  for (int n : ns) {
    SubsetCountVector v;
    v.stage = SubsetCountVector::Stage::Tilde;
    v.n = n;
    v.bond_bits = g.bond_count();
    v.wide = !detail::fits_int64_chain(g, n);
    if (v.wide) {
      v.big.resize(v.size());
      detail::fill_tilde(v.big, g, n, threads);
    } else {
      v.narrow.resize(v.size());
      detail::fill_tilde(v.narrow, g, n, threads);
    }
    out.push_back(std::move(v));
  }
  return out;
}

inline SubsetCountVector tilde_vector(const MetricGraph& g, int n, int threads = 0) {
  return std::move(tilde_vectors(g, {n}, threads).front());
}

// ---- arithmetic transform ----

namespace detail {

// One in-place Moebius/zeta layer per bit; within a layer every write touches
// a mask with the bit set and every read a mask with it clear, so chunks of
// the full range are independent and the per-layer join is the only barrier.
template <class Vec>
void transform_layers(Vec& v, int bits, int threads, bool inverse) {
  for (int bit = 0; bit < bits; ++bit) {
    std::size_t stride = std::size_t{1} << bit;
    parallel_chunks(v.size(), threads, [&](std::size_t lo, std::size_t hi, int) {
      for (std::size_t m = lo; m < hi; ++m) {
        if ((m & stride) == 0) continue;
        if (inverse)
          v[m] += v[m ^ stride];
        else
          v[m] -= v[m ^ stride];
      }
    });
  }
}

}  // namespace detail

// Tilde counts (walks within a mask) -> exact counts (walks with support
// equal to the mask), by Moebius inversion over the subset lattice.
inline SubsetCountVector arithmetic_transform(SubsetCountVector vec, int threads = 0) {
  if (vec.stage != SubsetCountVector::Stage::Tilde)
    throw std::logic_error("arithmetic_transform: input must be a tilde vector");
  if (vec.wide)
    detail::transform_layers(vec.big, vec.bond_bits, threads, /*inverse=*/false);
  else
    detail::transform_layers(vec.narrow, vec.bond_bits, threads, /*inverse=*/false);
  vec.stage = SubsetCountVector::Stage::Exact;
  return vec;
}

// Inverse of arithmetic_transform (subset zeta transform).
inline SubsetCountVector subset_zeta_transform(SubsetCountVector vec, int threads = 0) {
  if (vec.stage != SubsetCountVector::Stage::Exact)
    throw std::logic_error("subset_zeta_transform: input must be an exact vector");
  if (vec.wide)
    detail::transform_layers(vec.big, vec.bond_bits, threads, /*inverse=*/true);
  else
    detail::transform_layers(vec.narrow, vec.bond_bits, threads, /*inverse=*/true);
  vec.stage = SubsetCountVector::Stage::Tilde;
  return vec;
}

// ---- Eulerian-cycle counting ----

// The 2^E masks selecting exactly one direction per edge.
inline std::vector<BondMask> admissible_masks(const MetricGraph& g) {
  for (int v = 0; v < g.vertex_count(); ++v)
    if (g.degree(v) % 2 != 0)
      throw std::invalid_argument("admissible_masks: graph is not Eulerian (vertex " +
                                  std::to_string(v) + " has odd degree " +
                                  std::to_string(g.degree(v)) + ")");
  if (g.bond_count() > kMaxMaskBits)
    throw std::invalid_argument("admissible_masks: too many bonds");
  int E = g.edge_count();
  std::vector<BondMask> masks(std::size_t{1} << E);
  for (std::size_t s = 0; s < masks.size(); ++s) {
    BondMask m = 0;
    for (int e = 0; e < E; ++e) m |= BondMask{1} << (2 * e + ((s >> e) & 1));
    masks[s] = m;
  }
  return masks;
}

// Eulerian cycles via the arithmetic transform: exact length-E counts summed
// over admissible masks equal E times the number of Eulerian cycles
// (cyclic rotations collapse, the two traversal directions stay distinct).
inline BigInt euler_count_transform(const MetricGraph& g, int threads = 0) {
  auto masks = admissible_masks(g);
  SubsetCountVector exact = arithmetic_transform(tilde_vector(g, g.edge_count(), threads), threads);
  BigInt sum = 0;
  for (BondMask m : masks) sum += exact.at(m);
  BigInt count = sum / g.edge_count();
  if (count * g.edge_count() != sum)
    throw std::logic_error("euler_count_transform: admissible sum not divisible by edge count");
  return count;
}

namespace detail {

// Fraction-free determinant. int64 instantiation reports overflow via the
// flag instead of wrapping; BigInt instantiation never overflows.
template <class Int>
bool bareiss_det(std::vector<Int> m, int dim, Int& det_out) {
  if (dim == 0) {
    det_out = 1;
    return true;
  }
  Int prev = 1;
  int sign = 1;
  for (int p = 0; p < dim - 1; ++p) {
    if (m[std::size_t(p) * dim + p] == 0) {
      int swap_row = -1;
      for (int i = p + 1; i < dim; ++i)
        if (m[std::size_t(i) * dim + p] != 0) {
          swap_row = i;
          break;
        }
      if (swap_row < 0) {
        det_out = 0;
        return true;
      }
      for (int j = 0; j < dim; ++j)
        std::swap(m[std::size_t(p) * dim + j], m[std::size_t(swap_row) * dim + j]);
      sign = -sign;
    }
    for (int i = p + 1; i < dim; ++i) {
      for (int j = p + 1; j < dim; ++j) {
        Int a, b, num;
        if constexpr (std::is_same_v<Int, std::int64_t>) {
          if (__builtin_mul_overflow(m[std::size_t(i) * dim + j], m[std::size_t(p) * dim + p], &a))
            return false;
          if (__builtin_mul_overflow(m[std::size_t(i) * dim + p], m[std::size_t(p) * dim + j], &b))
            return false;
          if (__builtin_sub_overflow(a, b, &num)) return false;
        } else {
          a = m[std::size_t(i) * dim + j] * m[std::size_t(p) * dim + p];
          b = m[std::size_t(i) * dim + p] * m[std::size_t(p) * dim + j];
          num = a - b;
        }
        m[std::size_t(i) * dim + j] = num / prev;  // exact by Bareiss
      }
      m[std::size_t(i) * dim + p] = 0;
    }
    prev = m[std::size_t(p) * dim + p];
  }
  det_out = sign > 0 ? m.back() : Int(-m.back());
  return true;
}

inline BigInt factorial_big(int n) {
  BigInt r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace detail

// Eulerian cycles via the BEST theorem: for each balanced orientation, the
// arborescence count (Matrix-Tree determinant) times prod_v (outdeg_v - 1)!.
// Orientations give the cycles rooted along each edge direction exactly once,
// so the plain sum already counts reversal-distinct cycles.
inline BigInt euler_count_best(const MetricGraph& g, int threads = 0) {
  for (int v = 0; v < g.vertex_count(); ++v)
    if (g.degree(v) % 2 != 0)
      throw std::invalid_argument("euler_count_best: graph is not Eulerian (vertex " +
                                  std::to_string(v) + " has odd degree)");
  int E = g.edge_count();
  if (E > 24) throw std::invalid_argument("euler_count_best: more than 24 edges");
  int V = g.vertex_count();

  // Circuits only visit vertices of positive degree.
  std::vector<int> active;
  std::vector<int> index(V, -1);
  for (int v = 0; v < V; ++v)
    if (g.degree(v) > 0) {
      index[v] = static_cast<int>(active.size());
      active.push_back(v);
    }
  if (active.empty()) return 0;
  int nact = static_cast<int>(active.size());
  int dim = nact - 1;  // root = active[0] removed

  std::size_t total = std::size_t{1} << E;
  int nthreads = resolve_threads(threads);
  std::vector<BigInt> partial(static_cast<std::size_t>(nthreads), BigInt(0));
  parallel_chunks(total, nthreads, [&](std::size_t lo, std::size_t hi, int tid) {
    std::vector<int> outdeg(V);
    std::vector<std::int64_t> lap64(std::size_t(dim) * dim);
    std::vector<BigInt> lapw(std::size_t(dim) * dim);
    BigInt acc = 0;
    for (std::size_t s = lo; s < hi; ++s) {
      std::fill(outdeg.begin(), outdeg.end(), 0);
      bool balanced = true;
      for (int e = 0; e < E; ++e) {
        const Edge& ed = g.edge(e);
        ++outdeg[((s >> e) & 1) ? ed.v : ed.u];
      }
      for (int v : active)
        if (2 * outdeg[v] != g.degree(v)) {
          balanced = false;
          break;
        }
      if (!balanced) continue;

      // Reduced out-degree Laplacian D_out - A over active vertices minus root.
      std::fill(lap64.begin(), lap64.end(), 0);
      for (int v : active) {
        int iv = index[v] - 1;
        if (iv >= 0) lap64[std::size_t(iv) * dim + iv] = outdeg[v];
      }
      for (int e = 0; e < E; ++e) {
        const Edge& ed = g.edge(e);
        int from = ((s >> e) & 1) ? ed.v : ed.u;
        int to = ((s >> e) & 1) ? ed.u : ed.v;
        int fi = index[from] - 1;
        int ti = index[to] - 1;
        if (fi >= 0 && ti >= 0) lap64[std::size_t(fi) * dim + ti] -= 1;
      }

      std::int64_t det64 = 0;
      BigInt det;
      if (detail::bareiss_det(lap64, dim, det64)) {
        det = det64;
      } else {
        for (std::size_t i = 0; i < lap64.size(); ++i) lapw[i] = lap64[i];
        detail::bareiss_det(lapw, dim, det);
      }
      if (det == 0) continue;
      BigInt term = det;
      for (int v : active) term *= detail::factorial_big(outdeg[v] - 1);
      acc += term;
    }
    partial[static_cast<std::size_t>(tid)] = std::move(acc);
  });
  BigInt totalc = 0;
  for (BigInt& p : partial) totalc += p;
  return totalc;
}

// Eulerian cycles by direct backtracking from an anchored first bond. Each
// reversal-distinct cycle passes the anchor edge once in one of two
// directions, hence the factor 2.
inline BigInt euler_count_backtrack(const MetricGraph& g) {
  for (int v = 0; v < g.vertex_count(); ++v)
    if (g.degree(v) % 2 != 0)
      throw std::invalid_argument("euler_count_backtrack: graph is not Eulerian (vertex " +
                                  std::to_string(v) + " has odd degree)");
  int E = g.edge_count();
  if (E > 14) throw std::invalid_argument("euler_count_backtrack: more than 14 edges");
  if (E == 0) return 0;

  std::vector<std::vector<std::pair<int, int>>> adj(g.vertex_count());  // vertex -> (edge, other end)
  for (int e = 0; e < E; ++e) {
    adj[g.edge(e).u].push_back({e, g.edge(e).v});
    adj[g.edge(e).v].push_back({e, g.edge(e).u});
  }

  std::uint32_t all = (std::uint32_t{1} << E) - 1;
  std::uint32_t used = 1;  // anchor: edge 0 traversed u -> v
  int start = g.edge(0).u;
  long long count = 0;
  std::function<void(int)> dfs = [&](int v) {
    if (used == all) {
      if (v == start) ++count;
      return;
    }
    for (auto [e, w] : adj[v]) {
      std::uint32_t bit = std::uint32_t{1} << e;
      if (used & bit) continue;
      used |= bit;
      dfs(w);
      used &= ~bit;
    }
  };
  dfs(g.edge(0).v);
  return BigInt(count) * 2;
}

// Total weighted count of length-n orbit families whose edge support passes
// the predicate. Weight n/r_p per family makes the per-mask totals integers.
inline BigInt orbit_family_count(const MetricGraph& g, int n,
                                 const std::function<bool(BondMask)>& support_pred,
                                 int threads = 0) {
  SubsetCountVector exact = arithmetic_transform(tilde_vector(g, n, threads), threads);
  BigInt sum = 0;
  for (std::size_t m = 0; m < exact.size(); ++m)
    if (support_pred(static_cast<BondMask>(m))) sum += exact.at(static_cast<BondMask>(m));
  return sum;
}

// ---- diagonal approximation from the doubly stochastic map ----

// tr(M^n) with M_{b'b} = |Sigma_{b'b}|^2, the classical (diagonal-pair)
// approximation to |tr U^n|^2 / 2E at tau = n/2E. Asymptotic mode ignores k.
inline double diag_approx_via_M(const MetricGraph& g, const VertexConditions& conds, int n,
                                double k = 1.0, ScatteringMode mode = ScatteringMode::Asymptotic) {
  if (n < 1) throw std::invalid_argument("diag_approx_via_M: n must be >= 1");
  Eigen::MatrixXcd sigma = global_scattering(g, conds, k, mode);
  Eigen::MatrixXd m = sigma.cwiseAbs2();
  return trace_power(m, n);
}

}  // namespace qgraph
