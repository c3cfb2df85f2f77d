#pragma once
// Bond scattering matrix Sigma(k) and the unitary evolution operator
// U(k) = e^{ikL} Sigma(k) on the 2E directed bonds. Entry (b', b) of Sigma is
// the local scattering amplitude at the vertex where b terminates and b'
// emanates; both bonds of an edge use the edge's position in vertex_order as
// their local index.

#include "qgraph/metric_graph.hpp"
#include "qgraph/vertex_scattering.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace qgraph {

enum class ScatteringMode { Exact, Asymptotic };

// Either one spec applied at every vertex (size 1) or one per vertex (size V).
struct VertexConditions {
  std::vector<VertexConditionSpec> per_vertex;

  static VertexConditions uniform(VertexConditionSpec spec) {
    VertexConditions c;
    c.per_vertex.push_back(std::move(spec));
    return c;
  }
  const VertexConditionSpec& at(int v) const {
    if (per_vertex.empty()) throw std::invalid_argument("VertexConditions: empty");
    return per_vertex.size() == 1 ? per_vertex.front() : per_vertex.at(v);
  }
  void validate(const MetricGraph& g) const {
    if (per_vertex.size() != 1 &&
        per_vertex.size() != static_cast<std::size_t>(g.vertex_count()))
      throw std::invalid_argument("VertexConditions: need one spec or one per vertex");
  }
};

inline Eigen::MatrixXcd global_scattering(const MetricGraph& g, const VertexConditions& conds,
                                          double k, ScatteringMode mode) {
  conds.validate(g);
  int nb = g.bond_count();
  if (nb == 0) throw std::invalid_argument("global_scattering: graph has no edges");
  Eigen::MatrixXcd sigma = Eigen::MatrixXcd::Zero(nb, nb);
  for (int v = 0; v < g.vertex_count(); ++v) {
    int d = g.degree(v);
    if (d == 0) continue;
    Eigen::MatrixXcd sv =
        local_scattering(conds.at(v), d, k, mode == ScatteringMode::Asymptotic);
    const std::vector<int>& ord = g.vertex_order(v);
    for (int j = 0; j < d; ++j) {
      int ein = ord[j];
      int b_in = g.edge(ein).v == v ? 2 * ein : 2 * ein + 1;  // terminates at v
      for (int i = 0; i < d; ++i) {
        int eout = ord[i];
        int b_out = g.edge(eout).u == v ? 2 * eout : 2 * eout + 1;  // emanates from v
        sigma(b_out, b_in) = sv(i, j);
      }
    }
  }
  return sigma;
}

struct EvolutionOperator {
  Eigen::MatrixXcd matrix;
  double k = 0.0;
  ScatteringMode mode = ScatteringMode::Exact;
  const MetricGraph* graph = nullptr;
  std::vector<double> bond_lengths;

  int bond_count() const { return static_cast<int>(matrix.rows()); }
};

inline EvolutionOperator evolution_operator(const MetricGraph& g, const VertexConditions& conds,
                                            double k, ScatteringMode mode) {
  g.require_lengths();
  if (!(k > 0.0)) throw std::domain_error("evolution_operator: requires k > 0");
  EvolutionOperator op;
  op.matrix = global_scattering(g, conds, k, mode);
  op.k = k;
  op.mode = mode;
  op.graph = &g;
  op.bond_lengths.resize(g.bond_count());
  for (int b = 0; b < g.bond_count(); ++b) op.bond_lengths[b] = g.bond_length(b);
  for (int b = 0; b < g.bond_count(); ++b) {
    std::complex<double> phase(std::cos(k * op.bond_lengths[b]),
                               std::sin(k * op.bond_lengths[b]));
    op.matrix.row(b) *= phase;
  }
  return op;
}

template <class Scalar>
Scalar trace_power(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& m, int n) {
  if (n < 1) throw std::invalid_argument("trace_power: n must be >= 1");
  if (n == 1) return m.trace();
  // trace(m^n) from m^(n/2): n = 2q -> sum p_ij p_ji; n = 2q+1 -> sum p_ij (p a)_ji
  int q = n / 2;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> p = m;
  int bit = 0;
  while ((q >> (bit + 1)) != 0) ++bit;
  for (--bit; bit >= 0; --bit) {
    p = (p * p).eval();
    if ((q >> bit) & 1) p = (p * m).eval();
  }
  if (n % 2 == 0) return (p * p).trace();
  return (p * p * m).trace();
}

inline std::complex<double> trace_power(const EvolutionOperator& op, int n) {
  return trace_power(op.matrix, n);
}

// Ascending eigenphases of a unitary matrix, mapped to [0, 2pi).
inline std::vector<double> eigenphases(const Eigen::MatrixXcd& m) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ces;
  ces.compute(m, /*computeEigenvectors=*/false);
  if (ces.info() != Eigen::Success)
    throw std::runtime_error("eigenphases: eigenvalue iteration failed to converge");
  std::vector<double> phases(m.rows());
  for (int i = 0; i < m.rows(); ++i) {
    double a = std::arg(ces.eigenvalues()(i));
    phases[i] = a < 0.0 ? a + 2.0 * std::numbers::pi : a;
  }
  std::sort(phases.begin(), phases.end());
  return phases;
}

inline std::vector<double> eigenphases(const EvolutionOperator& op) {
  return eigenphases(op.matrix);
}

}  // namespace qgraph
