#pragma once
// Vertex scattering matrices for unitary vertex conditions.
//
// A vertex of degree d carries a unitary U (d x d). The k-dependent scattering
// matrix is
//     S(k) = ((k-1) I + (k+1) U) ((k+1) I + (k-1) U)^{-1},
// unitary for every k > 0. Writing eta = (1-k)/(1+k), S(k) for the cyclic-shift
// U has the closed form
//     S_ij = -eta (1 - eta^{d-2}) / (1 - eta^d)                    if i == j
//     S_ij = (1 - eta^2)/(1 - eta^d) * eta^{(j-i-1) mod d}         otherwise.
// As k -> infinity, S -> I - 2 P_{-1} with P_{-1} the projector onto the
// eigenvalue -1 subspace of U.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace qgraph {

inline bool is_unitary(const Eigen::MatrixXcd& m, double tol) {
  if (m.rows() != m.cols()) return false;
  Eigen::MatrixXcd g = m.adjoint() * m;
  g.diagonal().array() -= 1.0;
  return g.cwiseAbs().maxCoeff() <= tol;
}

inline double eta_param(double k) {
  if (!(k > 0.0)) throw std::domain_error("eta_param: requires k > 0");
  return (1.0 - k) / (1.0 + k);
}

// Cyclic shift: ones on the superdiagonal plus one in the lower-left corner.
inline Eigen::MatrixXcd circulant_unitary(int d) {
  if (d < 2) throw std::invalid_argument("circulant_unitary: degree must be >= 2");
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 0; i + 1 < d; ++i) u(i, i + 1) = 1.0;
  u(d - 1, 0) = 1.0;
  return u;
}

inline Eigen::MatrixXcd distorted_unitary(int d, double mu) {
  return std::exp(std::complex<double>(0.0, mu)) * circulant_unitary(d);
}

// Generic route: direct linear solve. k = 1 gives S = U identically.
inline Eigen::MatrixXcd vertex_scattering(const Eigen::MatrixXcd& u, double k) {
  if (!(k > 0.0)) throw std::domain_error("vertex_scattering: requires k > 0");
  if (u.rows() != u.cols() || u.rows() < 1)
    throw std::invalid_argument("vertex_scattering: U must be square");
  if (!is_unitary(u, 1e-10)) throw std::invalid_argument("vertex_scattering: U must be unitary");
  if (k == 1.0) return u;
  int d = static_cast<int>(u.rows());
  Eigen::MatrixXcd num =
      (k - 1.0) * Eigen::MatrixXcd::Identity(d, d) + (k + 1.0) * u;
  Eigen::MatrixXcd den =
      (k + 1.0) * Eigen::MatrixXcd::Identity(d, d) + (k - 1.0) * u;
  // num and den are polynomials in U, so they commute: N D^{-1} = D^{-1} N.
  Eigen::MatrixXcd s = den.partialPivLu().solve(num);
  if (!is_unitary(s, 1e-9))
    throw std::runtime_error("vertex_scattering: result lost unitarity");
  return s;
}

// Closed form for the cyclic-shift U.
inline Eigen::MatrixXcd vertex_scattering_closed_form(int d, double k) {
  if (d < 2) throw std::invalid_argument("vertex_scattering_closed_form: degree must be >= 2");
  double eta = eta_param(k);
  double denom = 1.0 - std::pow(eta, d);
  double pref = (1.0 - eta * eta) / denom;
  double diag = -eta * (1.0 - std::pow(eta, d - 2)) / denom;
  Eigen::MatrixXcd s(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (i == j) {
        s(i, j) = diag;
      } else {
        int p = ((j - i - 1) % d + d) % d;
        s(i, j) = pref * std::pow(eta, p);
      }
    }
  return s;
}

// k -> infinity limit of the cyclic-shift scattering matrix:
// identity for odd d; for even d the reflection I - (2/d) w w^T with
// w_i = (-1)^i, i.e. entries delta_ij - (2/d)(-1)^{i+j}.
inline Eigen::MatrixXd high_energy_scattering(int d) {
  if (d < 2) throw std::invalid_argument("high_energy_scattering: degree must be >= 2");
  if (d % 2 != 0) return Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd s(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      s(i, j) = (i == j ? 1.0 : 0.0) - (2.0 / d) * (((i + j) % 2 == 0) ? 1.0 : -1.0);
  return s;
}

// General k -> infinity limit: I - 2 P_{-1}(U). Eigenvalues within 1e-8 of -1
// count as -1. Uses a Schur basis so degenerate clusters stay orthonormal.
inline Eigen::MatrixXcd asymptotic_scattering(const Eigen::MatrixXcd& u) {
  if (!is_unitary(u, 1e-10))
    throw std::invalid_argument("asymptotic_scattering: U must be unitary");
  int d = static_cast<int>(u.rows());
  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(u, /*computeU=*/true);
  if (schur.info() != Eigen::Success)
    throw std::runtime_error("asymptotic_scattering: Schur decomposition failed");
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Identity(d, d);
  for (int i = 0; i < d; ++i) {
    if (std::abs(schur.matrixT()(i, i) + 1.0) < 1e-8) {
      Eigen::VectorXcd q = schur.matrixU().col(i);
      s -= 2.0 * (q * q.adjoint());
    }
  }
  return s;
}

// Neumann-Kirchhoff scattering: 2/d - delta_ij, k-independent.
inline Eigen::MatrixXd neumann_scattering(int d) {
  if (d < 1) throw std::invalid_argument("neumann_scattering: degree must be >= 1");
  Eigen::MatrixXd s = Eigen::MatrixXd::Constant(d, d, 2.0 / d);
  s.diagonal().array() -= 1.0;
  return s;
}

// ---- time-reversal asymmetry measure ----

// ||S(k) - S(k)^T|| (spectral norm) for the scattering matrix of U.
inline double trs_measure(const Eigen::MatrixXcd& u, double k) {
  Eigen::MatrixXcd s = vertex_scattering(u, k);
  Eigen::MatrixXcd a = s - s.transpose();
  return a.jacobiSvd().singularValues()(0);
}

// Eigenvalues of the antisymmetric part's circulant representation:
// lambda_n = sum_{j=1}^{d-1} (eta^{j-1} - eta^{d-j-1}) omega^{jn}, omega = e^{2 pi i / d}.
// lambda_0 = 0 identically. The measure is (1-eta^2)/(1-eta^d) * max_n |lambda_n|.
inline Eigen::VectorXcd trs_difference_eigenvalues(int d, double eta) {
  if (d < 2) throw std::invalid_argument("trs_difference_eigenvalues: degree must be >= 2");
  Eigen::VectorXcd lam = Eigen::VectorXcd::Zero(d);
  for (int n = 0; n < d; ++n) {
    std::complex<double> acc = 0.0;
    for (int j = 1; j <= d - 1; ++j) {
      double coeff = std::pow(eta, j - 1) - std::pow(eta, d - j - 1);
      double phase = 2.0 * std::numbers::pi * j * n / d;
      acc += coeff * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    lam(n) = acc;
  }
  return lam;
}

// Circulant route to the same measure, exercised against trs_measure in tests.
inline double trs_measure_circulant(int d, double k) {
  double eta = eta_param(k);
  double pref = (1.0 - eta * eta) / (1.0 - std::pow(eta, d));
  return pref * trs_difference_eigenvalues(d, eta).cwiseAbs().maxCoeff();
}

// ---- per-vertex condition specification ----

enum class VertexKind { PreferredOrientation, Distorted, NeumannKirchhoff, CustomUnitary };

struct VertexConditionSpec {
  VertexKind kind = VertexKind::PreferredOrientation;
  double mu = 0.0;
  Eigen::MatrixXcd custom;
  bool asymptotic = false;

  static VertexConditionSpec preferred_orientation(bool asymptotic = false) {
    VertexConditionSpec s;
    s.kind = VertexKind::PreferredOrientation;
    s.asymptotic = asymptotic;
    return s;
  }
  static VertexConditionSpec distorted(double mu, bool asymptotic = false) {
    VertexConditionSpec s;
    s.kind = VertexKind::Distorted;
    s.mu = mu;
    s.asymptotic = asymptotic;
    return s;
  }
  static VertexConditionSpec neumann_kirchhoff() {
    VertexConditionSpec s;
    s.kind = VertexKind::NeumannKirchhoff;
    return s;
  }
  static VertexConditionSpec custom_unitary(Eigen::MatrixXcd u, bool asymptotic = false) {
    VertexConditionSpec s;
    s.kind = VertexKind::CustomUnitary;
    s.custom = std::move(u);
    s.asymptotic = asymptotic;
    return s;
  }
};

// Scattering matrix at one vertex of the given degree. `asymptotic_mode` is
// ORed with the spec's own flag. k is ignored by k-independent variants and
// must be > 0 otherwise.
inline Eigen::MatrixXcd local_scattering(const VertexConditionSpec& spec, int degree, double k,
                                         bool asymptotic_mode) {
  bool asym = asymptotic_mode || spec.asymptotic;
  switch (spec.kind) {
    case VertexKind::PreferredOrientation:
      if (asym) return high_energy_scattering(degree).cast<std::complex<double>>();
      return vertex_scattering_closed_form(degree, k);
    case VertexKind::Distorted: {
      Eigen::MatrixXcd u = distorted_unitary(degree, spec.mu);
      return asym ? asymptotic_scattering(u) : vertex_scattering(u, k);
    }
    case VertexKind::NeumannKirchhoff:
      return neumann_scattering(degree).cast<std::complex<double>>();
    case VertexKind::CustomUnitary:
      if (spec.custom.rows() != degree || spec.custom.cols() != degree)
        throw std::invalid_argument("local_scattering: custom unitary dimension != vertex degree");
      return asym ? asymptotic_scattering(spec.custom) : vertex_scattering(spec.custom, k);
  }
  throw std::logic_error("local_scattering: unknown vertex kind");
}

}  // namespace qgraph
