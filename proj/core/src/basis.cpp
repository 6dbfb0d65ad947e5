#include "hdg/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "hdg/error.hpp"

namespace hdg {
namespace {

// Legendre P_n and P_{n-1} at x by the three-term recurrence.
std::pair<double, double> legendre_pair(int n, double x) {
  double prev = 1.0;  // P_0
  double cur = x;     // P_1
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    const double next = ((2.0 * k - 1.0) * x * cur - (k - 1.0) * prev) / k;
    prev = cur;
    cur = next;
  }
  return {cur, prev};
}

void print_matrix(std::ostringstream& os, const char* name, const Matrix& m) {
  os << name << " (" << m.rows() << "x" << m.cols() << ")\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) os << ' ' << m(i, j);
    os << '\n';
  }
}

}  // namespace

GllRule gll_nodes_weights(int p) {
  if (p < 1) throw Error("gll_nodes_weights: degree must be >= 1, got " + std::to_string(p));
  const auto n = static_cast<std::size_t>(p) + 1;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = -std::cos(std::numbers::pi * static_cast<double>(i) / p);

  // Newton on (1 - x^2) P'_p(x) = p (P_{p-1} - x P_p), started from the
  // Chebyshev extrema. The endpoints are fixed points of the update.
  for (int it = 0; it < 100; ++it) {
    double change = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const auto [pp, pm] = legendre_pair(p, x[i]);
      const double step = (x[i] * pp - pm) / ((p + 1.0) * pp);
      x[i] -= step;
      change = std::max(change, std::abs(step));
    }
    if (change < 1e-15) break;
  }
  x.front() = -1.0;
  x.back() = 1.0;
  // Enforce exact symmetry about 0.
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double s = 0.5 * (x[n - 1 - i] - x[i]);
    x[i] = -s;
    x[n - 1 - i] = s;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;

  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pp = legendre_pair(p, x[i]).first;
    w[i] = 2.0 / (p * (p + 1.0) * pp * pp);
  }
  return {std::move(x), std::move(w)};
}

Matrix lagrange_derivative_matrix(const std::vector<double>& nodes) {
  const std::size_t n = nodes.size();
  std::vector<double> c(n, 1.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k)
      if (k != j) c[j] *= nodes[j] - nodes[k];

  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      d(i, j) = (c[i] / c[j]) / (nodes[i] - nodes[j]);
      row += d(i, j);
    }
    // Negative-sum trick: rows annihilate constants exactly.
    d(i, i) = -row;
  }
  return d;
}

GeneralizedEigen generalized_eigendecomposition(const std::vector<double>& mass_diagonal,
                                                const Matrix& stiffness) {
  const std::size_t n = mass_diagonal.size();
  if (stiffness.rows() != n || stiffness.cols() != n)
    throw Error("generalized_eigendecomposition: dimension mismatch");
  for (double m : mass_diagonal)
    if (!(m > 0.0)) throw Error("generalized_eigendecomposition: mass diagonal must be positive");

  const double scale = std::max(stiffness.max_abs(), 1e-300);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(stiffness(i, j) - stiffness(j, i)) > 1e-10 * scale)
        throw Error("generalized_eigendecomposition: stiffness matrix is not symmetric");

  Eigen::VectorXd inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) inv_sqrt(i) = 1.0 / std::sqrt(mass_diagonal[i]);

  Eigen::MatrixXd reduced(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      reduced(i, j) = 0.5 * (stiffness(i, j) + stiffness(j, i)) * inv_sqrt(i) * inv_sqrt(j);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(reduced);
  if (solver.info() != Eigen::Success)
    throw Error("generalized_eigendecomposition: eigensolver did not converge");

  GeneralizedEigen out;
  out.vectors = Matrix(n, n);
  out.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = solver.eigenvalues()(k);
    std::size_t arg = 0;
    double big = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = std::abs(solver.eigenvectors()(i, k) * inv_sqrt(i));
      if (v > big * (1.0 + 1e-12)) {
        big = v;
        arg = i;
      }
    }
    const double sign = solver.eigenvectors()(arg, k) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i)
      out.vectors(i, k) = sign * solver.eigenvectors()(i, k) * inv_sqrt(i);
  }
  return out;
}

Basis1D build_basis(int p, double tau_hat) {
  if (p < 1) throw Error("build_basis: degree must be >= 1");
  if (!(tau_hat > 0.0)) throw Error("build_basis: tau_hat must be positive");

  Basis1D b;
  b.p = p;
  b.tau_hat = tau_hat;
  auto rule = gll_nodes_weights(p);
  b.nodes = std::move(rule.nodes);
  b.weights = std::move(rule.weights);
  const std::size_t n = b.nodes.size();
  const std::size_t last = n - 1;

  b.M = Matrix::diagonal(b.weights);
  b.Dhat = lagrange_derivative_matrix(b.nodes);
  // GLL quadrature integrates phi_i dphi_j (degree 2p-1) exactly.
  b.D = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) b.D(i, j) = b.weights[i] * b.Dhat(i, j);

  b.E = Matrix(n, n);
  b.E(0, 0) = tau_hat;
  b.E(last, last) += tau_hat;

  b.G = Matrix(2, 2);
  b.G(0, 0) = tau_hat;
  b.G(1, 1) = tau_hat;

  b.B = Matrix(n, 2);
  b.B(0, 0) = -tau_hat;
  b.B(last, 1) = -tau_hat;

  b.C = Matrix(n, 2);
  b.C(0, 0) = -1.0;
  b.C(last, 1) = 1.0;

  Matrix minv(n, n);
  for (std::size_t i = 0; i < n; ++i) minv(i, i) = 1.0 / b.weights[i];

  b.L = b.E + b.D * minv * b.D.transposed();
  // Remove rounding asymmetry of the triple product.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const double s = 0.5 * (b.L(i, j) + b.L(j, i));
      b.L(i, j) = s;
      b.L(j, i) = s;
    }

  auto eig = generalized_eigendecomposition(b.weights, b.L);
  b.S = std::move(eig.vectors);
  b.Lambda = std::move(eig.values);

  const Matrix st = b.S.transposed();
  b.B_S = st * b.B - st * b.D * minv * b.C;
  b.GCC = b.G + b.C.transposed() * minv * b.C;
  b.GCC(0, 1) = b.GCC(1, 0) = 0.5 * (b.GCC(0, 1) + b.GCC(1, 0));

  b.St = st;
  b.StM = st * b.M;
  b.MS = b.M * b.S;
  return b;
}

std::string Basis1D::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "Basis1D p=" << p << " tau_hat=" << tau_hat << '\n';
  os << "nodes";
  for (double x : nodes) os << ' ' << x;
  os << "\nweights";
  for (double w : weights) os << ' ' << w;
  os << "\nLambda";
  for (double l : Lambda) os << ' ' << l;
  os << '\n';
  print_matrix(os, "M", M);
  print_matrix(os, "D", D);
  print_matrix(os, "E", E);
  print_matrix(os, "G", G);
  print_matrix(os, "B", B);
  print_matrix(os, "C", C);
  print_matrix(os, "L", L);
  print_matrix(os, "S", S);
  print_matrix(os, "B_S", B_S);
  print_matrix(os, "GCC", GCC);
  return os.str();
}

}  // namespace hdg
