#include <catch2/catch_amalgamated.hpp>

#include <qgraph/orbit_theory.hpp>
#include <qgraph/spectral_stats.hpp>

using namespace qgraph;

namespace {

// Pascal-triangle oracle, independent of the prefix-division route.
BigInt pascal(int n, int k) {
  std::vector<BigInt> row{1};
  for (int i = 1; i <= n; ++i) {
    std::vector<BigInt> next(i + 1, 1);
    for (int j = 1; j < i; ++j) next[j] = row[j - 1] + row[j];
    row = std::move(next);
  }
  return row.at(k);
}

BigRational rho_squared(int V) {
  BigRational rho(V - 3, V - 1);
  return rho * rho;
}

BigRational transmission_weight(int V) {
  BigRational t(2, V - 1);
  return t * t;
}

}  // namespace

TEST_CASE("binomial coefficients") {
  REQUIRE(binomial(0, 0) == 1);
  REQUIRE(binomial(5, 2) == 10);
  REQUIRE(binomial(10, 10) == 1);
  REQUIRE(binomial(7, 9) == 0);
  for (int n = 0; n <= 40; ++n)
    for (int k = 0; k <= n; ++k) {
      REQUIRE(binomial(n, k) == pascal(n, k));
      REQUIRE(binomial(n, k) == binomial(n, n - k));
    }
  REQUIRE_THROWS_AS(binomial(-1, 0), std::invalid_argument);
  REQUIRE(binomial(3, -1) == 0);
}

TEST_CASE("rational powers") {
  REQUIRE(rational_pow(BigRational(2, 3), 0) == BigRational(1));
  REQUIRE(rational_pow(BigRational(2, 3), 3) == BigRational(8, 27));
  REQUIRE(rational_pow(BigRational(2, 3), -2) == BigRational(9, 4));
  REQUIRE_THROWS_AS(rational_pow(BigRational(0), -1), std::domain_error);
}

TEST_CASE("orbit family counts on complete graphs") {
  // Back-and-forth families: one per edge, even length only.
  REQUIRE(orbit_count_complete(5, 4, 0) == BigRational(10));
  REQUIRE(orbit_count_complete(7, 6, 0) == BigRational(21));
  REQUIRE(orbit_count_complete(5, 3, 0) == BigRational(0));
  // A single transmission cannot close a walk.
  for (int n = 2; n <= 8; ++n) REQUIRE(orbit_count_complete(5, n, 1) == BigRational(0));
  // All-transmission length-3 families are directed triangles up to rotation:
  // V(V-1)(V-2) rooted walks, 3 rotations each.
  REQUIRE(orbit_count_complete(5, 3, 3) == BigRational(20));
  REQUIRE(orbit_count_complete(7, 3, 3) == BigRational(7 * 6 * 5 / 3));
  REQUIRE(orbit_count_complete(5, 3, 3) ==
          BigRational(BigInt(5) * 4 * 3, 3));
  REQUIRE_THROWS_AS(orbit_count_complete(4, 3, 3), std::invalid_argument);
  REQUIRE_THROWS_AS(orbit_count_complete(5, 1, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(orbit_count_complete(5, 3, 4), std::invalid_argument);
}

TEST_CASE("family sum rule") {
  // Weighted over the (2/(V-1))^2 transmission and rho^2 reflection factors,
  // the family counts resum to a binomial power of 1:
  // sum_t term(V,n,t) a^t b^(n-t) = 2 C(V,2) / (n (V-2)^2) exactly.
  for (int V : {5, 7, 9}) {
    BigRational a = transmission_weight(V) * BigRational(V - 2);
    BigRational b = rho_squared(V);
    REQUIRE(a + b == BigRational(1));
    for (int n = 2; n <= 20; ++n) {
      BigRational lhs(0);
      for (int t = 0; t <= n; ++t)
        lhs += orbit_formula_term(V, n, t) * rational_pow(transmission_weight(V), t) *
               rational_pow(rho_squared(V), n - t);
      BigRational rhs = BigRational(2) * BigRational(binomial(V, 2)) /
                        (BigRational(n) * BigRational((V - 2) * (V - 2)));
      REQUIRE(lhs == rhs);
    }
  }
  // V = 5, n = 3 lands on 20/27.
  BigRational lhs(0);
  for (int t = 0; t <= 3; ++t)
    lhs += orbit_formula_term(5, 3, t) * rational_pow(transmission_weight(5), t) *
           rational_pow(rho_squared(5), 3 - t);
  REQUIRE(lhs == BigRational(20, 27));
}

TEST_CASE("diagonal form factor closed form matches the term sum") {
  // K = (n^2/E) [ (1/2)(2/n)^2 C(V,2) rho^(2n)
  //             + sum_{t=2}^n term(V,n,t) (2/(V-1))^(2t) rho^(2(n-t)) ].
  for (int V : {5, 7}) {
    for (int n = 3; n <= 20; ++n) {
      BigRational sum = BigRational(1, 2) * BigRational(4) / BigRational(n * n) *
                        BigRational(binomial(V, 2)) * rational_pow(rho_squared(V), n);
      for (int t = 2; t <= n; ++t)
        sum += orbit_formula_term(V, n, t) * rational_pow(transmission_weight(V), t) *
               rational_pow(rho_squared(V), n - t);
      BigRational k = BigRational(n * n) / BigRational(binomial(V, 2)) * sum;
      double expect = k.convert_to<double>();
      REQUIRE(k_diag_complete(V, n) == Catch::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("diagonal form factor short-orbit values") {
  // n = 2 keeps only the back-and-forth families: K = 2 rho^4.
  REQUIRE(k_diag_complete(6, 2) == Catch::Approx(0.2592).epsilon(1e-14));
  REQUIRE(k_diag_complete(5, 2) == Catch::Approx(0.125).epsilon(1e-14));
  REQUIRE(k_diag_complete(9, 2) == Catch::Approx(2.0 * std::pow(0.75, 4)).epsilon(1e-14));
  REQUIRE_THROWS_AS(k_diag_complete(2, 2), std::invalid_argument);
  REQUIRE_THROWS_AS(k_diag_complete(5, 1), std::invalid_argument);
  DiagonalPrediction p = diag_prediction(6, 2);
  REQUIRE(p.V == 6);
  REQUIRE(p.n == 2);
  REQUIRE(p.value == k_diag_complete(6, 2));
}

TEST_CASE("diagonal form factor approaches 2 tau") {
  // tau = 0.1 with n = tau V(V-1) integral; the deviation from the leading
  // random-matrix slope 2 tau shrinks monotonically with V.
  REQUIRE(k_diag_complete(101, 1010) == Catch::Approx(0.2).margin(0.02));
  double prev = 1e9;
  for (int V : {11, 21, 41, 81}) {
    int n = V * (V - 1) / 10;
    REQUIRE(n == Catch::Approx(0.1 * V * (V - 1)));
    double dev = std::abs(k_diag_complete(V, n) - 0.2);
    REQUIRE(dev < prev);
    prev = dev;
  }
}

TEST_CASE("eulerian contribution values") {
  // (E/2)(2/d)^{2E} count^2 at the three reference graphs; the first two are
  // dyadic rationals, so the doubles are exact.
  REQUIRE(euler_ff_contribution(10, 4, BigInt(264)) ==
          Catch::Approx(0.33233642578125).margin(1e-15));
  REQUIRE(euler_ff_contribution(12, 4, BigInt(744)) ==
          Catch::Approx(0.19795989990234375).margin(1e-15));
  REQUIRE(euler_ff_contribution(21, 6, BigInt(129976320)) ==
          Catch::Approx(0.001621156993824838).margin(1e-15));
  // Exact rational route agrees with itself under count scaling: quadratic.
  double one = euler_ff_contribution(10, 4, BigInt(264));
  double four = euler_ff_contribution(10, 4, BigInt(528));
  REQUIRE(four == Catch::Approx(4.0 * one).epsilon(1e-14));
  REQUIRE_THROWS_AS(euler_ff_contribution(0, 4, BigInt(1)), std::invalid_argument);
  REQUIRE_THROWS_AS(euler_ff_contribution(10, 4, BigInt(-1)), std::invalid_argument);
}

TEST_CASE("log route matches the exact contribution") {
  BigInt k9_count("911520057021235200");
  double exact = euler_ff_contribution(36, 8, k9_count);
  double logv = euler_ff_contribution_log(
      36, 8, std::log(k9_count.convert_to<double>()));
  REQUIRE(logv == Catch::Approx(std::log(exact)).epsilon(1e-12));
  REQUIRE(std::exp(logv) == Catch::Approx(exact).epsilon(1e-10));
}

TEST_CASE("asymptotic eulerian count") {
  // Against the exact counts of K_7 and K_9.
  double exact7 = std::log(129976320.0);
  REQUIRE(asymptotic_euler_complete(7) == Catch::Approx(exact7).margin(0.02 * exact7));
  REQUIRE(std::exp(asymptotic_euler_complete(7) - exact7) ==
          Catch::Approx(1.0).margin(0.02));
  double exact9 = std::log(BigInt("911520057021235200").convert_to<double>());
  REQUIRE(std::exp(asymptotic_euler_complete(9) - exact9) ==
          Catch::Approx(1.0).margin(0.01));
  REQUIRE_THROWS_AS(asymptotic_euler_complete(4), std::invalid_argument);
  REQUIRE_THROWS_AS(asymptotic_euler_complete(3), std::invalid_argument);
}

TEST_CASE("eulerian contribution vanishes with graph size") {
  // The count grows far slower than (d/2)^{2E}: successive odd complete
  // graphs suppress the tau = 1/2 contribution by orders of magnitude.
  double prev = std::numeric_limits<double>::infinity();
  for (int m : {5, 7, 9, 11, 13}) {
    int e = m * (m - 1) / 2;
    double c = euler_ff_contribution_log(e, m - 1, asymptotic_euler_complete(m));
    REQUIRE(c < prev);
    prev = c;
  }
}
