#include <catch2/catch_amalgamated.hpp>

#include <qgraph/spectrum_solver.hpp>

#include <algorithm>

using namespace qgraph;

namespace {

const VertexConditions kNeumann =
    VertexConditions::uniform(VertexConditionSpec::neumann_kirchhoff());
const VertexConditions kPreferred =
    VertexConditions::uniform(VertexConditionSpec::preferred_orientation());

}  // namespace

TEST_CASE("interval spectrum is n pi over L") {
  MetricGraph g = build_interval(1.0);
  Spectrum s = solve_spectrum(g, kNeumann, 0.5, 100.5);
  REQUIRE(s.ks.size() == 31);
  for (std::size_t i = 0; i < s.ks.size(); ++i) {
    double expect = (static_cast<double>(i) + 1.0) * std::numbers::pi;
    REQUIRE(std::abs(s.ks[i] - expect) < 1e-9);
  }
  REQUIRE(s.weyl_residual <= 1.5);
  REQUIRE(weyl_count_check(s, g) == s.weyl_residual);

  // Non-unit length rescales the ladder.
  MetricGraph h = build_interval(2.5);
  Spectrum t = solve_spectrum(h, kNeumann, 0.5, 20.0);
  for (std::size_t i = 0; i < t.ks.size(); ++i)
    REQUIRE(std::abs(t.ks[i] - (static_cast<double>(i) + 1.0) * std::numbers::pi / 2.5) <
            1e-9);
}

TEST_CASE("roots kill det(I - U)") {
  MetricGraph g = sample_lengths(build_octahedron(), {3, 1.0, 2.0});
  auto det_at = [&](double k) {
    EvolutionOperator op = evolution_operator(g, kPreferred, k, ScatteringMode::Exact);
    Eigen::MatrixXcd m = -op.matrix;
    m.diagonal().array() += 1.0;
    return std::abs(m.determinant());
  };
  Spectrum s = solve_spectrum(g, kPreferred, 100.0, 102.0);
  REQUIRE(s.ks.size() >= 5);
  std::vector<double> grid_dets;
  for (int i = 0; i < 200; ++i) grid_dets.push_back(det_at(100.0 + 2.0 * i / 199.0));
  std::nth_element(grid_dets.begin(), grid_dets.begin() + 100, grid_dets.end());
  double median = grid_dets[100];
  REQUIRE(median > 0.0);
  for (double k : s.ks) REQUIRE(det_at(k) < 1e-6 * median);
}

TEST_CASE("grid refinement leaves the spectrum fixed") {
  MetricGraph g = sample_lengths(build_octahedron(), {5, 1.0, 2.0});
  SolveOptions coarse;
  coarse.grid_factor = 20.0;
  SolveOptions fine;
  fine.grid_factor = 40.0;
  Spectrum a = solve_spectrum(g, kPreferred, 50.0, 53.0, coarse);
  Spectrum b = solve_spectrum(g, kPreferred, 50.0, 53.0, fine);
  REQUIRE(a.ks.size() == b.ks.size());
  for (std::size_t i = 0; i < a.ks.size(); ++i) REQUIRE(std::abs(a.ks[i] - b.ks[i]) < 1e-8);
}

TEST_CASE("edge relabeling with matched vertex orders is a gauge choice") {
  MetricGraph g = sample_lengths(build_octahedron(), {7, 1.0, 2.0});
  // Reverse the edge list, then restore each vertex's original edge sequence
  // under the new ids so every local scattering block is unchanged.
  int ne = g.edge_count();
  std::vector<Edge> reversed;
  for (int e = ne - 1; e >= 0; --e) reversed.push_back(g.edge(e));
  MetricGraph h(g.vertex_count(), std::move(reversed));
  for (int v = 0; v < g.vertex_count(); ++v) {
    std::vector<int> order;
    for (int e : g.vertex_order(v)) order.push_back(ne - 1 - e);
    h.set_vertex_order(v, order);
  }
  Spectrum a = solve_spectrum(g, kPreferred, 40.0, 42.0);
  Spectrum b = solve_spectrum(h, kPreferred, 40.0, 42.0);
  REQUIRE(a.ks.size() == b.ks.size());
  for (std::size_t i = 0; i < a.ks.size(); ++i) REQUIRE(std::abs(a.ks[i] - b.ks[i]) < 1e-8);
}

TEST_CASE("identity vertex unitaries decouple the edges") {
  // U = I gives S(k) = I at every k: each bond reflects into its reversal and
  // the spectrum is the union of the single-edge ladders n pi / l_e.
  MetricGraph g = sample_lengths(build_octahedron(), {9, 1.0, 2.0});
  VertexConditions ident;
  ident.per_vertex.push_back(
      VertexConditionSpec::custom_unitary(Eigen::MatrixXcd::Identity(4, 4)));
  double k_lo = 100.0, k_hi = 103.0;
  std::vector<double> oracle;
  for (int e = 0; e < g.edge_count(); ++e) {
    double l = g.edge(e).length;
    for (int n = static_cast<int>(std::ceil(k_lo * l / std::numbers::pi));
         n * std::numbers::pi / l < k_hi; ++n) {
      double r = n * std::numbers::pi / l;
      if (r > k_lo) oracle.push_back(r);
    }
  }
  std::sort(oracle.begin(), oracle.end());
  Spectrum s = solve_spectrum(g, ident, k_lo, k_hi);
  REQUIRE(s.ks.size() == oracle.size());
  for (std::size_t i = 0; i < oracle.size(); ++i)
    REQUIRE(std::abs(s.ks[i] - oracle[i]) < 1e-8);
}

TEST_CASE("empty window") {
  MetricGraph g = build_interval(1.0);
  Spectrum s = solve_spectrum(g, kNeumann, 0.6, 0.7);
  REQUIRE(s.ks.empty());
  REQUIRE(s.weyl_residual < 1.0);
}

TEST_CASE("argument validation") {
  MetricGraph g = build_interval(1.0);
  REQUIRE_THROWS_AS(solve_spectrum(g, kNeumann, 0.0, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(solve_spectrum(g, kNeumann, 2.0, 1.0), std::invalid_argument);
  SolveOptions bad_grid;
  bad_grid.grid_factor = 1.0;
  REQUIRE_THROWS_AS(solve_spectrum(g, kNeumann, 1.0, 2.0, bad_grid), std::invalid_argument);
  SolveOptions bad_tol;
  bad_tol.refine_tol = 0.0;
  REQUIRE_THROWS_AS(solve_spectrum(g, kNeumann, 1.0, 2.0, bad_tol), std::invalid_argument);
  REQUIRE_THROWS_AS(solve_spectrum(build_complete(4), kNeumann, 1.0, 2.0),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(solve_first_n(g, kNeumann, 1.0, 0), std::invalid_argument);
}

TEST_CASE("first n roots") {
  MetricGraph g = build_interval(1.0);
  Spectrum s = solve_first_n(g, kNeumann, 0.5, 10);
  REQUIRE(s.ks.size() == 10);
  for (int i = 0; i < 10; ++i)
    REQUIRE(std::abs(s.ks[i] - (i + 1) * std::numbers::pi) < 1e-9);
  REQUIRE(s.k_max == s.ks.back());
}

TEST_CASE("spectrum csv round trip") {
  // Degree-2 vertices transmit fully under every coupling here, so a ring
  // would be doubly degenerate everywhere and fail the solver's Weyl
  // validation; K4 has degree 3.
  MetricGraph g = sample_lengths(build_complete(4), {2, 1.0, 2.0});
  Spectrum s = solve_spectrum(g, kNeumann, 1.0, 12.0);
  REQUIRE_FALSE(s.ks.empty());
  std::string csv = spectrum_to_csv(s);
  REQUIRE(csv.rfind("k\n", 0) == 0);
  std::vector<double> back = spectrum_from_csv(csv);
  REQUIRE(back.size() == s.ks.size());
  for (std::size_t i = 0; i < back.size(); ++i) REQUIRE(back[i] == s.ks[i]);
  REQUIRE_THROWS_AS(spectrum_from_csv("wrong\n1.0\n"), std::invalid_argument);
}
