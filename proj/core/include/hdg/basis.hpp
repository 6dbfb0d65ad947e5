#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hdg/matrix.hpp"

namespace hdg {

/// Gauss-Lobatto-Legendre points and weights on [-1, 1].
struct GllRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Returns the p+1 GLL points (roots of (1 - x^2) P'_p) and weights
/// 2 / (p (p+1) P_p(x_i)^2). Throws hdg::Error for p < 1.
[[nodiscard]] GllRule gll_nodes_weights(int p);

/// Nodal differentiation matrix of the Lagrange basis on `nodes`:
/// result(i, j) = phi_j'(x_i).
[[nodiscard]] Matrix lagrange_derivative_matrix(const std::vector<double>& nodes);

/// Solution of the generalized problem L s = lambda M s for diagonal
/// positive M, normalized such that S^T M S = I and S^T L S = diag(values).
struct GeneralizedEigen {
  Matrix vectors;              // S, columns are eigenvectors
  std::vector<double> values;  // ascending
};

/// Symmetric reduction M^{-1/2} L M^{-1/2}, dense symmetric eigensolve,
/// back-substitution S = M^{-1/2} V. Eigenvalues come out ascending; each
/// column of S is signed so that its largest-magnitude entry is positive.
/// Throws hdg::Error for non-positive mass entries, asymmetric L (relative
/// asymmetry above 1e-10) or solver failure.
[[nodiscard]] GeneralizedEigen generalized_eigendecomposition(
    const std::vector<double>& mass_diagonal, const Matrix& stiffness);

/// All one-dimensional standard-element quantities for a nodal GLL basis of
/// degree p with reference penalty tau_hat. Immutable once built.
///
/// Conventions: the two trace functions are ordered (left, right); the
/// outward normals are (-1, +1). The mass matrix is the lumped GLL mass.
struct Basis1D {
  int p = 0;
  double tau_hat = 0.0;

  std::vector<double> nodes;
  std::vector<double> weights;

  Matrix M;    // diag(weights)
  Matrix D;    // D_ij = int phi_i dphi_j
  Matrix Dhat; // nodal derivative, Dhat = M^{-1} D
  Matrix E;    // tau_hat at both endpoints
  Matrix G;    // 2x2, tau_hat * I
  Matrix B;    // (p+1)x2, -tau_hat * phi_i(endpoint_j)
  Matrix C;    // (p+1)x2, phi_i(endpoint_j) * n_j
  Matrix L;    // E + D M^{-1} D^T
  Matrix S;    // S^T M S = I, S^T L S = diag(Lambda)
  std::vector<double> Lambda;
  Matrix B_S;  // S^T B - S^T D M^{-1} C
  Matrix GCC;  // G + C^T M^{-1} C

  // Derived transforms used throughout the face kernels.
  Matrix StM;  // S^T M, maps face values into the face eigenspace
  Matrix MS;   // M S = (S^T M)^T
  Matrix St;   // S^T

  [[nodiscard]] int n() const noexcept { return p + 1; }

  /// Plain-text dump of every matrix (debugging aid).
  [[nodiscard]] std::string describe() const;
};

/// Builds every Basis1D field. Throws hdg::Error for p < 1 or tau_hat <= 0.
[[nodiscard]] Basis1D build_basis(int p, double tau_hat);

}  // namespace hdg
