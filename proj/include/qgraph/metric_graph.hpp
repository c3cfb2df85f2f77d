#pragma once
// Combinatorial metric graphs with directed-bond bookkeeping.
//
// Conventions used throughout the library:
//   edge e joins edge(e).u and edge(e).v; length 0 means "not yet assigned"
//   bond 2e runs u -> v, bond 2e+1 runs v -> u, reversal(b) == (b ^ 1)
//   vertex_order(v) lists the edges incident to v; the position of an edge in
//   that list is its local index, the row/column it occupies in the vertex
//   scattering matrix at v

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qgraph {

struct Edge {
  int u = 0;
  int v = 0;
  double length = 0.0;
};

class MetricGraph {
 public:
  MetricGraph(int vertex_count, std::vector<Edge> edges)
      : vcount_(vertex_count), edges_(std::move(edges)) {
    if (vcount_ <= 0) throw std::invalid_argument("MetricGraph: vertex count must be positive");
    order_.resize(vcount_);
    for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
      const Edge& ed = edges_[e];
      if (ed.u < 0 || ed.u >= vcount_ || ed.v < 0 || ed.v >= vcount_)
        throw std::invalid_argument("MetricGraph: edge endpoint out of range");
      if (ed.u == ed.v) throw std::invalid_argument("MetricGraph: loop edges are not supported");
      if (ed.length < 0.0 || !std::isfinite(ed.length))
        throw std::invalid_argument("MetricGraph: edge length must be finite and non-negative");
      order_[ed.u].push_back(e);
      order_[ed.v].push_back(e);
    }
    std::vector<std::pair<int, int>> keys;
    keys.reserve(edges_.size());
    for (const Edge& ed : edges_)
      keys.emplace_back(std::min(ed.u, ed.v), std::max(ed.u, ed.v));
    std::sort(keys.begin(), keys.end());
    if (std::adjacent_find(keys.begin(), keys.end()) != keys.end())
      throw std::invalid_argument("MetricGraph: parallel edges are not supported");
  }

  int vertex_count() const { return vcount_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  int bond_count() const { return 2 * edge_count(); }

  const Edge& edge(int e) const { return edges_.at(e); }
  const std::vector<Edge>& edges() const { return edges_; }

  int degree(int v) const { return static_cast<int>(order_.at(v).size()); }
  const std::vector<int>& vertex_order(int v) const { return order_.at(v); }

  // Replaces the incidence order at v. Must be a permutation of the current order.
  void set_vertex_order(int v, std::vector<int> edge_ids) {
    auto sorted_new = edge_ids;
    auto sorted_old = order_.at(v);
    std::sort(sorted_new.begin(), sorted_new.end());
    std::sort(sorted_old.begin(), sorted_old.end());
    if (sorted_new != sorted_old)
      throw std::invalid_argument("set_vertex_order: not a permutation of the incident edges");
    order_[v] = std::move(edge_ids);
  }

  // Position of edge e in vertex_order(v). Both bonds of e share this index.
  int local_index(int v, int e) const {
    const auto& ord = order_.at(v);
    for (int i = 0; i < static_cast<int>(ord.size()); ++i)
      if (ord[i] == e) return i;
    throw std::invalid_argument("local_index: edge not incident to vertex");
  }

  static int reversal(int b) { return b ^ 1; }
  static int bond_edge(int b) { return b >> 1; }
  int bond_origin(int b) const {
    const Edge& ed = edges_.at(static_cast<std::size_t>(b) >> 1);
    return (b & 1) == 0 ? ed.u : ed.v;
  }
  int bond_terminal(int b) const {
    const Edge& ed = edges_.at(static_cast<std::size_t>(b) >> 1);
    return (b & 1) == 0 ? ed.v : ed.u;
  }
  double bond_length(int b) const { return edges_.at(static_cast<std::size_t>(b) >> 1).length; }

  bool has_lengths() const {
    for (const Edge& ed : edges_)
      if (!(ed.length > 0.0)) return false;
    return true;
  }
  void require_lengths() const {
    if (!has_lengths()) throw std::invalid_argument("metric graph has unassigned edge lengths");
  }
  double total_length() const {
    require_lengths();
    double s = 0.0;
    for (const Edge& ed : edges_) s += ed.length;
    return s;
  }
  double min_length() const {
    require_lengths();
    double m = edges_.front().length;
    for (const Edge& ed : edges_) m = std::min(m, ed.length);
    return m;
  }

  void set_length(int e, double length) {
    if (!(length > 0.0) || !std::isfinite(length))
      throw std::invalid_argument("set_length: length must be positive and finite");
    edges_.at(e).length = length;
  }

  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> adjacency_matrix() const {
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> a =
        Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(vcount_, vcount_);
    for (const Edge& ed : edges_) {
      a(ed.u, ed.v) = 1;
      a(ed.v, ed.u) = 1;
    }
    return a;
  }

  // Connectivity over vertices that carry at least one edge.
  bool is_connected() const {
    if (edges_.empty()) return true;
    std::vector<char> seen(vcount_, 0);
    std::vector<int> stack{edges_.front().u};
    seen[edges_.front().u] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int e : order_[v]) {
        int w = edges_[e].u == v ? edges_[e].v : edges_[e].u;
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
    for (int v = 0; v < vcount_; ++v)
      if (!order_[v].empty() && !seen[v]) return false;
    return true;
  }

  bool is_eulerian() const {
    if (!is_connected()) return false;
    for (int v = 0; v < vcount_; ++v)
      if (degree(v) % 2 != 0) return false;
    return true;
  }

 private:
  int vcount_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> order_;
};

struct LengthSampler {
  std::uint64_t seed = 1;
  double low = 1.0;
  double high = 2.0;
};

// Returns a copy of g with every edge length drawn i.i.d. uniform [low, high),
// in edge order. Deterministic per seed.
inline MetricGraph sample_lengths(const MetricGraph& g, const LengthSampler& sampler) {
  if (!(sampler.low > 0.0) || !(sampler.high > sampler.low))
    throw std::invalid_argument("sample_lengths: need 0 < low < high");
  std::mt19937_64 rng(sampler.seed);
  std::uniform_real_distribution<double> dist(sampler.low, sampler.high);
  std::vector<Edge> edges = g.edges();
  for (Edge& ed : edges) ed.length = dist(rng);
  MetricGraph out(g.vertex_count(), std::move(edges));
  for (int v = 0; v < g.vertex_count(); ++v) out.set_vertex_order(v, g.vertex_order(v));
  return out;
}

// ---- builders (lengths left unassigned unless stated) ----

inline MetricGraph build_complete(int vertices) {
  if (vertices < 3) throw std::invalid_argument("build_complete: need at least 3 vertices");
  std::vector<Edge> edges;
  for (int u = 0; u < vertices; ++u)
    for (int v = u + 1; v < vertices; ++v) edges.push_back({u, v, 0.0});
  return MetricGraph(vertices, std::move(edges));
}

// Octahedron: vertices 0..5, antipodal pairs (0,3), (1,4), (2,5); 12 edges.
inline MetricGraph build_octahedron() {
  std::vector<Edge> edges;
  for (int u = 0; u < 6; ++u)
    for (int v = u + 1; v < 6; ++v)
      if (v - u != 3) edges.push_back({u, v, 0.0});
  return MetricGraph(6, std::move(edges));
}

// Cube: vertices 0..7 as 3-bit strings, edges between strings at Hamming distance 1.
inline MetricGraph build_cube() {
  std::vector<Edge> edges;
  for (int u = 0; u < 8; ++u)
    for (int v = u + 1; v < 8; ++v) {
      int x = u ^ v;
      if ((x & (x - 1)) == 0) edges.push_back({u, v, 0.0});
    }
  return MetricGraph(8, std::move(edges));
}

inline MetricGraph build_cycle(int vertices) {
  if (vertices < 3) throw std::invalid_argument("build_cycle: need at least 3 vertices");
  std::vector<Edge> edges;
  for (int v = 0; v < vertices; ++v) edges.push_back({v, (v + 1) % vertices, 0.0});
  return MetricGraph(vertices, std::move(edges));
}

inline MetricGraph build_interval(double length) {
  MetricGraph g(2, {{0, 1, 0.0}});
  g.set_length(0, length);
  return g;
}

// ---- plain-text exchange format: one "u v length" line per edge ----

inline MetricGraph parse_graph_file(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<Edge> edges;
  int max_vertex = -1;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::istringstream ls(line);
    int u, v;
    double length;
    if (!(ls >> u >> v >> length)) {
      throw std::invalid_argument("parse_graph_file: malformed line " + std::to_string(line_no));
    }
    std::string trailing;
    if (ls >> trailing)
      throw std::invalid_argument("parse_graph_file: trailing tokens on line " +
                                  std::to_string(line_no));
    if (!(length > 0.0))
      throw std::invalid_argument("parse_graph_file: non-positive length on line " +
                                  std::to_string(line_no));
    edges.push_back({u, v, length});
    max_vertex = std::max({max_vertex, u, v});
  }
  if (edges.empty()) throw std::invalid_argument("parse_graph_file: no edges");
  return MetricGraph(max_vertex + 1, std::move(edges));
}

inline std::string format_graph_file(const MetricGraph& g) {
  std::string out;
  char buf[64];
  for (const Edge& ed : g.edges()) {
    std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", ed.u, ed.v, ed.length);
    out += buf;
  }
  return out;
}

}  // namespace qgraph
