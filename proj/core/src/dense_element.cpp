#include <cmath>
#include <iostream>

#include <Eigen/Dense>

#include "hdg/error.hpp"
#include "hdg/operator.hpp"

namespace hdg {
namespace {

// Position of the direction-`dir` index and the two tangential indices
// (lower direction first) of the element coefficient (a, b, c).
struct Split {
  std::size_t normal;
  std::size_t tangential;  // t1 + n t2
  std::size_t w1, w2;      // tangential indices
};

Split split(int dir, std::size_t a, std::size_t b, std::size_t c, std::size_t n) {
  switch (dir) {
    case 0: return {a, b + n * c, b, c};
    case 1: return {b, a + n * c, a, c};
    default: return {c, a + n * b, a, b};
  }
}

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

Matrix from_eigen(const Eigen::MatrixXd& m) {
  Matrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = m(i, j);
  return out;
}

Matrix dense_matrix_free(const OperatorContext& ctx, std::size_t e) {
  const std::size_t n = ctx.n();
  const std::size_t n2 = n * n;
  const std::size_t dofs = 6 * n2;
  Matrix k(dofs, dofs);
  std::array<std::vector<double>, 6> in_store;
  std::array<std::vector<double>, 6> out_store;
  std::array<std::span<const double>, 6> in;
  std::array<std::span<double>, 6> out;
  for (int f = 0; f < 6; ++f) {
    in_store[f].assign(n2, 0.0);
    out_store[f].assign(n2, 0.0);
    in[f] = in_store[f];
    out[f] = out_store[f];
  }
  ElementWorkspace ws(n);
  for (std::size_t col = 0; col < dofs; ++col) {
    in_store[col / n2][col % n2] = 1.0;
    apply_element_operator(ctx, e, in, out, ws, false);
    in_store[col / n2][col % n2] = 0.0;
    for (std::size_t row = 0; row < dofs; ++row) k(row, col) = out_store[row / n2][row % n2];
  }
  return k;
}

Matrix dense_explicit_schur(const OperatorContext& ctx, std::size_t e) {
  const LocalLdgBlocks blk = assemble_local_ldg_blocks(ctx, e);
  const Eigen::MatrixXd a = to_eigen(blk.A);
  const Eigen::MatrixXd r = to_eigen(blk.R);
  const Eigen::MatrixXd g = to_eigen(blk.G);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const Eigen::MatrixXd k = g - r.transpose() * lu.solve(r);
  return from_eigen(k);
}

}  // namespace

LocalLdgBlocks assemble_local_ldg_blocks(const OperatorContext& ctx, std::size_t e) {
  const Basis1D& basis = ctx.basis();
  const ElementGeometry& geo = ctx.mesh().geometry(e);
  const std::size_t n = ctx.n();
  const std::size_t n2 = n * n;
  const std::size_t n3 = n2 * n;
  const auto& w = basis.weights;

  LocalLdgBlocks out;
  out.A = Matrix(4 * n3, 4 * n3);
  out.R = Matrix(4 * n3, 6 * n2);
  out.G = Matrix(6 * n2, 6 * n2);
  Matrix& A = out.A;
  Matrix& R = out.R;
  Matrix& G = out.G;

  auto idx = [n](std::size_t a, std::size_t b, std::size_t c) { return a + n * (b + n * c); };

  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t a = 0; a < n; ++a) {
        const std::size_t i = idx(a, b, c);
        const double mass = geo.alpha0 * w[a] * w[b] * w[c];
        A(i, i) += ctx.lambda() * mass;
        for (int d = 0; d < 3; ++d) A((d + 1) * n3 + i, (d + 1) * n3 + i) = -mass;

        for (int d = 0; d < 3; ++d) {
          const Split si = split(d, a, b, c, n);
          const double face_w = w[si.w1] * w[si.w2];
          // Couplings along direction d keep the two tangential indices.
          for (std::size_t m = 0; m < n; ++m) {
            std::array<std::size_t, 3> j3{a, b, c};
            j3[d] = m;
            const std::size_t j = idx(j3[0], j3[1], j3[2]);
            // E_d,e = alpha_d (M (x) M (x) E)
            A(i, j) += geo.alpha[d] * face_w * basis.E(si.normal, m);
            // D_d,e = (h_d / 2) alpha_d (M (x) M (x) D)
            const double dij = geo.half_width[d] * geo.alpha[d] * face_w * basis.D(si.normal, m);
            A(i, (d + 1) * n3 + j) -= dij;
            A((d + 1) * n3 + j, i) -= dij;
          }
          for (int s = 0; s < 2; ++s) {
            const std::size_t col = (2 * d + s) * n2 + si.tangential;
            R(i, col) += geo.alpha[d] * face_w * basis.B(si.normal, s);
            R((d + 1) * n3 + i, col) +=
                geo.half_width[d] * geo.alpha[d] * face_w * basis.C(si.normal, s);
          }
        }
      }

  for (int d = 0; d < 3; ++d)
    for (std::size_t t2 = 0; t2 < n; ++t2)
      for (std::size_t t1 = 0; t1 < n; ++t1) {
        const std::size_t t = t1 + n * t2;
        for (int s = 0; s < 2; ++s)
          for (int s2 = 0; s2 < 2; ++s2)
            G((2 * d + s) * n2 + t, (2 * d + s2) * n2 + t) =
                geo.alpha[d] * w[t1] * w[t2] * basis.G(s, s2);
      }
  return out;
}

Matrix assemble_dense_element(const OperatorContext& ctx, std::size_t e, DenseRoute route) {
  if (ctx.p() > 4)
    std::cerr << "assemble_dense_element: p = " << ctx.p()
              << " is expensive for dense assembly (intended for p <= 4)\n";
  if (route == DenseRoute::MatrixFree) return dense_matrix_free(ctx, e);
  if (route == DenseRoute::ExplicitSchur) return dense_explicit_schur(ctx, e);

  Matrix mf = dense_matrix_free(ctx, e);
  const Matrix ex = dense_explicit_schur(ctx, e);
  const double scale = std::max(ex.max_abs(), 1e-300);
  const double diff = (mf - ex).max_abs();
  if (!(diff <= 1e-10 * scale))
    throw Error("assemble_dense_element: matrix-free and explicit Schur routes disagree (" +
                std::to_string(diff / scale) + " relative)");
  return mf;
}

}  // namespace hdg
