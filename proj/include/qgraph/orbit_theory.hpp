#pragma once
// Closed-form periodic-orbit predictions on complete graphs K_V: orbit family
// counts by transmission number, the diagonal-approximation form factor, the
// Eulerian contribution to K(1/2), and the asymptotic Eulerian-circuit count.
// All combinatorics run in exact integer/rational arithmetic; floating point
// appears only at the API boundary.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qgraph {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

inline BigInt binomial(int n, int k) {
  if (n < 0) throw std::invalid_argument("binomial: n must be >= 0");
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  BigInt r = 1;
  for (int i = 0; i < k; ++i) {
    r *= n - i;
    r /= i + 1;  // exact: r is a binomial prefix
  }
  return r;
}

inline BigRational rational_pow(const BigRational& base, int e) {
  if (e == 0) return BigRational(1);
  if (e < 0) {
    if (base == 0) throw std::domain_error("rational_pow: zero base, negative exponent");
    return BigRational(1) / rational_pow(base, -e);
  }
  BigRational acc = 1;
  BigRational b = base;
  int r = e;
  while (r > 0) {
    if (r & 1) acc *= b;
    b *= b;
    r >>= 1;
  }
  return acc;
}

// Raw family-count formula (2/n) C(n,t) C(V,2) (V-2)^{t-2}, defined for every
// t >= 0 (rational because of the t-2 exponent). The sum rule runs over this.
inline BigRational orbit_formula_term(int V, int n, int t) {
  if (V < 3 || n < 1 || t < 0) throw std::invalid_argument("orbit_formula_term: out of range");
  return BigRational(2, n) * BigRational(binomial(n, t)) * BigRational(binomial(V, 2)) *
         rational_pow(BigRational(V - 2), t - 2);
}

// Number of distinct length-n periodic-orbit families on K_V with exactly t
// transmissions (directed orbits counted up to cyclic rotation). The formula
// above applies for t >= 2; t=1 is impossible (a single transmission cannot
// close), and t=0 consists of the E = C(V,2) back-and-forth edge families,
// even n only.
inline BigRational orbit_count_complete(int V, int n, int t) {
  if (V < 5 || n < 2 || t < 0 || t > n)
    throw std::invalid_argument("orbit_count_complete: out of range (need V >= 5, n >= 2, 0 <= t <= n)");
  if (t == 1) return BigRational(0);
  if (t == 0) return n % 2 == 0 ? BigRational(binomial(V, 2)) : BigRational(0);
  return orbit_formula_term(V, n, t);
}

struct DiagonalPrediction {
  int V = 0;
  int n = 0;
  double value = 0.0;
};

// Diagonal-approximation form factor of K_V at tau = n/(V(V-1)).
// n = 2 is the lone special case: only the t=0 back-and-forth families exist
// on a simple graph, giving 2 rho^4 with rho = 1 - 2/(V-1). For n >= 3 the
// binomial collapse of the family sum gives the closed form below.
inline double k_diag_complete(int V, int n) {
  if (V < 3 || n < 2) throw std::invalid_argument("k_diag_complete: need V >= 3, n >= 2");
  double rho = 1.0 - 2.0 / (V - 1.0);
  if (n == 2) return 2.0 * rho * rho * rho * rho;
  double vm2 = static_cast<double>(V - 2);
  double vm1 = static_cast<double>(V - 1);
  double nn = static_cast<double>(n);
  double rho2n = std::pow(rho, 2 * n);
  return 2.0 * nn / (vm2 * vm2) +
         2.0 * rho2n *
             (1.0 - nn / (vm2 * vm2) -
              (4.0 * nn * nn / (vm1 * vm1 * vm2)) / (rho * rho));
}

inline DiagonalPrediction diag_prediction(int V, int n) {
  return DiagonalPrediction{V, n, k_diag_complete(V, n)};
}

// Eulerian-cycle contribution to K_U(1/2): (1/2) E (2/d)^{2E} count^2,
// evaluated as an exact rational before conversion.
inline double euler_ff_contribution(int E, int d, const BigInt& euler_count) {
  if (E < 1 || d < 1) throw std::invalid_argument("euler_ff_contribution: need E >= 1, d >= 1");
  if (euler_count < 0) throw std::invalid_argument("euler_ff_contribution: negative count");
  BigRational r = BigRational(E, 2) * rational_pow(BigRational(2, d), 2 * E) *
                  BigRational(euler_count * euler_count);
  return r.convert_to<double>();
}

// Natural log of the asymptotic Eulerian-circuit count of K_m (m odd):
// 2^{(m+1)/2} sqrt(pi) e^{-m^2/2 + 11/12} m^{(m-2)(m+1)/2}, in log space
// because the linear value overflows double well before m = 21.
inline double asymptotic_euler_complete(int m) {
  if (m < 5 || m % 2 == 0)
    throw std::invalid_argument("asymptotic_euler_complete: need odd m >= 5");
  double md = static_cast<double>(m);
  return 0.5 * (md + 1.0) * std::numbers::ln2 + 0.5 * std::log(std::numbers::pi) -
         0.5 * md * md + 11.0 / 12.0 + 0.5 * (md - 2.0) * (md + 1.0) * std::log(md);
}

// Log-space companion of euler_ff_contribution for asymptotic counts.
inline double euler_ff_contribution_log(int E, int d, double log_count) {
  if (E < 1 || d < 1)
    throw std::invalid_argument("euler_ff_contribution_log: need E >= 1, d >= 1");
  return std::log(0.5 * E) + 2.0 * E * std::log(2.0 / d) + 2.0 * log_count;
}

}  // namespace qgraph
