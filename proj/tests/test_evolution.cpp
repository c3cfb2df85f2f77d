#include <catch2/catch_amalgamated.hpp>

#include <qgraph/evolution.hpp>

#include <random>

using namespace qgraph;

namespace {

std::complex<double> trace_from_phases(const std::vector<double>& phases, int n) {
  std::complex<double> acc = 0.0;
  for (double t : phases) acc += std::exp(std::complex<double>(0.0, n * t));
  return acc;
}

}  // namespace

TEST_CASE("interval bond scattering is a flip") {
  MetricGraph g = build_interval(1.0);
  auto nk = VertexConditions::uniform(VertexConditionSpec::neumann_kirchhoff());
  Eigen::MatrixXcd sigma = global_scattering(g, nk, 1.0, ScatteringMode::Exact);
  REQUIRE(sigma.rows() == 2);
  REQUIRE(std::abs(sigma(0, 0)) == 0.0);
  REQUIRE(std::abs(sigma(1, 1)) == 0.0);
  REQUIRE(sigma(0, 1) == std::complex<double>(1.0, 0.0));
  REQUIRE(sigma(1, 0) == std::complex<double>(1.0, 0.0));
}

TEST_CASE("octahedron asymptotic scattering entries") {
  MetricGraph g = build_octahedron();
  auto po = VertexConditions::uniform(VertexConditionSpec::preferred_orientation());
  Eigen::MatrixXcd sigma = global_scattering(g, po, 1.0, ScatteringMode::Asymptotic);
  int nb = g.bond_count();
  REQUIRE(sigma.rows() == nb);
  int nonzero = 0;
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j) {
      double a = std::abs(sigma(i, j));
      bool zero = a < 1e-15;
      bool half = std::abs(a - 0.5) < 1e-15;
      REQUIRE((zero || half));
      REQUIRE(std::abs(sigma(i, j).imag()) < 1e-15);
      if (!zero) {
        ++nonzero;
        // Sigma_{b'b} needs bond b to terminate where b' originates.
        REQUIRE(g.bond_terminal(j) == g.bond_origin(i));
      }
    }
  // Each column scatters into the full degree of its terminal vertex.
  REQUIRE(nonzero == 24 * 4);
  for (int j = 0; j < nb; ++j)
    REQUIRE(sigma.col(j).squaredNorm() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("evolution operator is unitary") {
  MetricGraph g = sample_lengths(build_octahedron(), {3, 1.0, 2.0});
  auto po = VertexConditions::uniform(VertexConditionSpec::preferred_orientation());
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ks(0.5, 500.0);
  for (int trial = 0; trial < 20; ++trial) {
    double k = ks(rng);
    EvolutionOperator op = evolution_operator(g, po, k, ScatteringMode::Exact);
    REQUIRE(is_unitary(op.matrix, 1e-9));
    REQUIRE(op.k == k);
  }
}

TEST_CASE("trace powers match the eigenphase sum") {
  MetricGraph g = sample_lengths(build_complete(5), {5, 1.0, 2.0});
  auto po = VertexConditions::uniform(VertexConditionSpec::preferred_orientation());
  EvolutionOperator op = evolution_operator(g, po, 13.7, ScatteringMode::Exact);
  std::vector<double> phases = eigenphases(op);
  double bound = static_cast<double>(g.bond_count());
  for (int n = 1; n <= 12; ++n) {
    std::complex<double> direct = trace_power(op, n);
    std::complex<double> via_phases = trace_from_phases(phases, n);
    REQUIRE(std::abs(direct - via_phases) < 1e-8);
    REQUIRE(std::abs(direct) <= bound + 1e-9);
  }
}

TEST_CASE("trace power of a real matrix") {
  Eigen::MatrixXd m(3, 3);
  m << 1, 2, 0, 0, 1, 3, 4, 0, 1;
  Eigen::MatrixXd p = m;
  for (int n = 1; n <= 7; ++n) {
    REQUIRE(trace_power(m, n) == Catch::Approx(p.trace()).epsilon(1e-12));
    p = (p * m).eval();
  }
  REQUIRE_THROWS_AS(trace_power(m, 0), std::invalid_argument);
}

TEST_CASE("exact scattering approaches the asymptotic one") {
  MetricGraph g = sample_lengths(build_octahedron(), {3, 1.0, 2.0});
  auto po = VertexConditions::uniform(VertexConditionSpec::preferred_orientation());
  Eigen::MatrixXcd exact = global_scattering(g, po, 1e5, ScatteringMode::Exact);
  Eigen::MatrixXcd asym = global_scattering(g, po, 1e5, ScatteringMode::Asymptotic);
  REQUIRE((exact - asym).cwiseAbs().maxCoeff() < 1e-3);
  // At k = 1 the exact matrix is far from the asymptotic one.
  Eigen::MatrixXcd low = global_scattering(g, po, 1.0, ScatteringMode::Exact);
  REQUIRE((low - asym).cwiseAbs().maxCoeff() > 0.1);
}

TEST_CASE("cycle with transparent vertices splits into two rings") {
  MetricGraph g = sample_lengths(build_cycle(5), {17, 1.0, 2.0});
  auto nk = VertexConditions::uniform(VertexConditionSpec::neumann_kirchhoff());
  double k = 2.31;
  EvolutionOperator op = evolution_operator(g, nk, k, ScatteringMode::Exact);
  // Degree-2 transparent vertices give pure transmission: no length-1 closed
  // walk exists, while each full loop contributes e^{ik L_tot} per bond.
  REQUIRE(std::abs(trace_power(op, 1)) < 1e-12);
  REQUIRE(std::abs(trace_power(op, 3)) < 1e-12);
  std::complex<double> full = trace_power(op, 5);
  std::complex<double> expected =
      10.0 * std::exp(std::complex<double>(0.0, k * g.total_length()));
  REQUIRE(std::abs(full - expected) < 1e-9);
  // saturates |tr U^n| = 2E exactly at n = 5
  REQUIRE(std::abs(full) == Catch::Approx(10.0).margin(1e-9));
}

TEST_CASE("eigenphases are sorted and complete") {
  MetricGraph g = sample_lengths(build_cube(), {29, 1.0, 2.0});
  auto nk = VertexConditions::uniform(VertexConditionSpec::neumann_kirchhoff());
  EvolutionOperator op = evolution_operator(g, nk, 4.2, ScatteringMode::Exact);
  std::vector<double> phases = eigenphases(op);
  REQUIRE(static_cast<int>(phases.size()) == g.bond_count());
  for (std::size_t i = 0; i + 1 < phases.size(); ++i) REQUIRE(phases[i] <= phases[i + 1]);
  for (double t : phases) {
    REQUIRE(t >= 0.0);
    REQUIRE(t < 2.0 * std::numbers::pi);
  }
  // Product of eigenvalues reproduces det U.
  std::complex<double> prod = 1.0;
  for (double t : phases) prod *= std::exp(std::complex<double>(0.0, t));
  std::complex<double> det = op.matrix.determinant();
  REQUIRE(std::abs(prod - det) < 1e-8);
  REQUIRE(std::abs(std::abs(det) - 1.0) < 1e-10);
}

TEST_CASE("condition validation") {
  MetricGraph g = sample_lengths(build_cycle(4), {1, 1.0, 2.0});
  VertexConditions bad;
  bad.per_vertex.assign(3, VertexConditionSpec::neumann_kirchhoff());
  REQUIRE_THROWS_AS(global_scattering(g, bad, 1.0, ScatteringMode::Exact),
                    std::invalid_argument);
  VertexConditions empty;
  REQUIRE_THROWS_AS(global_scattering(g, empty, 1.0, ScatteringMode::Exact),
                    std::invalid_argument);
  auto nk = VertexConditions::uniform(VertexConditionSpec::neumann_kirchhoff());
  REQUIRE_THROWS_AS(evolution_operator(g, nk, 0.0, ScatteringMode::Exact), std::domain_error);
  REQUIRE_THROWS_AS(evolution_operator(build_complete(4), nk, 1.0, ScatteringMode::Exact),
                    std::invalid_argument);
  // Per-vertex specs: transparent ring vertices except one reflecting insert.
  VertexConditions mixed;
  mixed.per_vertex.assign(4, VertexConditionSpec::neumann_kirchhoff());
  mixed.per_vertex[2] = VertexConditionSpec::preferred_orientation();
  EvolutionOperator op = evolution_operator(g, mixed, 1.5, ScatteringMode::Exact);
  REQUIRE(is_unitary(op.matrix, 1e-9));
}
