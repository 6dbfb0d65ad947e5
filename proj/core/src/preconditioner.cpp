#include "hdg/preconditioner.hpp"

#include <cmath>
#include <string>

#include "hdg/error.hpp"
#include "hdg/flops.hpp"
#include "hdg/tensor.hpp"

namespace hdg {

std::vector<double> face_eigen_self_coupling(const OperatorContext& ctx) {
  const Mesh& mesh = ctx.mesh();
  const std::size_t n = ctx.n();
  const std::size_t n2 = n * n;
  std::vector<double> y(mesh.num_faces() * n2, 0.0);

  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    if (!mesh.is_unknown(f)) continue;
    const int d = mesh.face_direction(f);
    const auto adj = mesh.face_elements(f);
    double* yf = y.data() + f * n2;
    for (int k = 0; k < 2; ++k) {
      const std::size_t e = adj[k];
      if (e == kNoElement) continue;
      // adj[0] sees this face as its high side, adj[1] as its low side.
      const int s = k == 0 ? 1 : 0;
      const ElementKernelData& kd = ctx.kernel(e);
      const double* inv = kd.scale.inv.data();
      const Matrix& bs = kd.bs[d];
      const double self = kd.gcc[d](s, s);
      for (std::size_t t2 = 0; t2 < n; ++t2)
        for (std::size_t t1 = 0; t1 < n; ++t1) {
          double sum = 0.0;
          for (std::size_t m = 0; m < n; ++m) {
            std::size_t idx = 0;
            switch (d) {
              case 0: idx = m + n * (t1 + n * t2); break;
              case 1: idx = t1 + n * (m + n * t2); break;
              default: idx = t1 + n * (t2 + n * m); break;
            }
            sum += bs(m, s) * bs(m, s) * inv[idx];
          }
          yf[t1 + n * t2] += self - sum;
        }
    }
    for (std::size_t i = 0; i < n2; ++i)
      if (!(yf[i] > 0.0) || !std::isfinite(yf[i]))
        throw Error("face self-coupling is not positive on face " + std::to_string(f) +
                    "; invalid penalty / lambda combination");
  }
  return y;
}

BlockPreconditioner build_block_preconditioner(const OperatorContext& ctx) {
  BlockPreconditioner pc;
  pc.block = ctx.n() * ctx.n();
  pc.inverse = face_eigen_self_coupling(ctx);
  const Mesh& mesh = ctx.mesh();
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    double* yf = pc.inverse.data() + f * pc.block;
    if (!mesh.is_unknown(f)) continue;
    for (std::size_t i = 0; i < pc.block; ++i) yf[i] = 1.0 / yf[i];
  }
  pc.S = ctx.basis().S;
  pc.St = ctx.basis().St;
  return pc;
}

void apply_block_preconditioner(const BlockPreconditioner& pc, const FluxField& r, FluxField& z) {
  const std::size_t nb = pc.block;
  std::vector<double> scratch(nb);
  for (std::size_t f = 0; f < r.num_faces(); ++f) {
    auto src = r.face(f);
    auto dst = z.face(f);
    const double* inv = pc.inverse.data() + f * nb;
    if (inv[0] == 0.0) {  // Dirichlet face
      std::fill(dst.begin(), dst.end(), 0.0);
      continue;
    }
    std::copy(src.begin(), src.end(), dst.begin());
    apply_tp2_square(pc.St, pc.St, dst, scratch);
    for (std::size_t i = 0; i < nb; ++i) dst[i] *= inv[i];
    flops::add(nb);
    apply_tp2_square(pc.S, pc.S, dst, scratch);
  }
}

DiagonalPreconditioner build_diagonal_preconditioner(const OperatorContext& ctx) {
  const std::vector<double> y = face_eigen_self_coupling(ctx);
  const Mesh& mesh = ctx.mesh();
  const std::size_t n = ctx.n();
  const std::size_t n2 = n * n;
  const Matrix& v = ctx.basis().MS;
  Matrix v2(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) v2(i, j) = v(i, j) * v(i, j);

  // diag(K_ff)[i + n j] = sum_{b,c} MS(i,b)^2 MS(j,c)^2 Yhat[b + n c]
  DiagonalPreconditioner pc;
  pc.inverse.assign(y.size(), 0.0);
  std::vector<double> tmp(n2);
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    if (!mesh.is_unknown(f)) continue;
    const double* yf = y.data() + f * n2;
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t b = 0; b < n; ++b) s += v2(i, b) * yf[b + n * c];
        tmp[i + n * c] = s;
      }
    double* out = pc.inverse.data() + f * n2;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < n; ++c) s += v2(j, c) * tmp[i + n * c];
        if (!(s > 0.0) || !std::isfinite(s))
          throw Error("diagonal of the trace operator is not positive on face " +
                      std::to_string(f));
        out[i + n * j] = 1.0 / s;
      }
  }
  return pc;
}

DiagonalPreconditioner transformed_preconditioner(const OperatorContext& ctx) {
  DiagonalPreconditioner pc;
  pc.inverse = face_eigen_self_coupling(ctx);
  for (double& v : pc.inverse)
    if (v != 0.0) v = 1.0 / v;
  return pc;
}

void apply_diagonal_preconditioner(const DiagonalPreconditioner& pc, const FluxField& r,
                                   FluxField& z) {
  const auto src = r.values();
  auto dst = z.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = pc.inverse[i] * src[i];
  flops::add(src.size());
}

}  // namespace hdg
