#include "hdg/operator.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "hdg/error.hpp"
#include "hdg/flops.hpp"
#include "hdg/tensor.hpp"
#include "parallel.hpp"

namespace hdg {

double Penalty::tau_hat(const Mesh& mesh) const {
  if (!(value > 0.0) || !std::isfinite(value)) throw Error("penalty must be positive and finite");
  if (kind == Kind::Reference) return value;
  const auto& h = mesh.widths();
  for (int d = 1; d < 3; ++d)
    if (std::abs(h[d] - h[0]) > 1e-12 * h[0])
      throw Error(
          "a fixed face penalty needs cubic elements; use a reference penalty (tau_hat) for "
          "anisotropic meshes");
  return value * h[0] / 2.0;
}

EigenScale3D build_eigen_scale(const Basis1D& basis, const ElementGeometry& geom, double lambda) {
  if (lambda < 0.0 || !std::isfinite(lambda))
    throw Error("Helmholtz parameter lambda must be finite and >= 0");
  const std::size_t n = basis.Lambda.size();
  EigenScale3D s;
  s.lambda = lambda;
  s.inv.resize(n * n * n);
  const double base = lambda * geom.alpha0;
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t a = 0; a < n; ++a) {
        const double denom = base + geom.alpha[0] * basis.Lambda[a] +
                             geom.alpha[1] * basis.Lambda[b] + geom.alpha[2] * basis.Lambda[c];
        if (!(denom > 0.0) || !std::isfinite(denom))
          throw Error("eigenspace diagonal is not positive; check tau_hat and lambda");
        s.inv[a + n * (b + n * c)] = 1.0 / denom;
      }
  return s;
}

OperatorContext::OperatorContext(Basis1D basis, Mesh mesh, double lambda, unsigned threads)
    : basis_(std::move(basis)),
      mesh_(std::move(mesh)),
      lambda_(lambda),
      threads_(threads == 0 ? 1 : threads) {
  const std::size_t ne = mesh_.num_elements();
  class_of_.resize(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& g = mesh_.geometry(e);
    auto it = std::find_if(classes_.begin(), classes_.end(), [&](const ElementKernelData& k) {
      return k.geometry.half_width == g.half_width;
    });
    if (it == classes_.end()) {
      ElementKernelData k;
      k.geometry = g;
      k.scale = build_eigen_scale(basis_, g, lambda_);
      for (int d = 0; d < 3; ++d) {
        k.bs[d] = g.alpha[d] * basis_.B_S;
        k.gcc[d] = g.alpha[d] * basis_.GCC;
      }
      classes_.push_back(std::move(k));
      it = classes_.end() - 1;
    }
    class_of_[e] = static_cast<std::size_t>(it - classes_.begin());
  }
  const std::size_t n = this->n();
  face_mass_.resize(n * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) face_mass_[i + n * j] = basis_.weights[i] * basis_.weights[j];
}

OperatorContext make_context(const Mesh& mesh, int p, const Penalty& penalty, double lambda,
                             unsigned threads) {
  return OperatorContext(build_basis(p, penalty.tau_hat(mesh)), mesh, lambda, threads);
}

std::vector<std::array<double, 2>> hdg_op_1d(const Basis1D& basis, std::span<const double> widths,
                                             double lambda,
                                             std::span<const std::array<double, 2>> flux) {
  if (widths.size() != flux.size()) throw Error("hdg_op_1d: one flux pair per element expected");
  const std::size_t n = basis.Lambda.size();
  std::vector<double> eig(n);
  std::vector<std::array<double, 2>> out(flux.size());
  for (std::size_t e = 0; e < flux.size(); ++e) {
    const double h = widths[e];
    const double a0 = h / 2.0;
    const double a1 = 2.0 / h;
    const auto& u = flux[e];
    for (std::size_t a = 0; a < n; ++a) {
      const double f = a1 * (basis.B_S(a, 0) * u[0] + basis.B_S(a, 1) * u[1]);
      eig[a] = f / (lambda * a0 + a1 * basis.Lambda[a]);
    }
    for (int s = 0; s < 2; ++s) {
      double back = 0.0;
      for (std::size_t a = 0; a < n; ++a) back += basis.B_S(a, s) * eig[a];
      out[e][s] = a1 * (basis.GCC(s, 0) * u[0] + basis.GCC(s, 1) * u[1]) - a1 * back;
    }
  }
  return out;
}

ElementWorkspace::ElementWorkspace(std::size_t n)
    : eigen(n * n * n), scratch(n * n) {
  for (auto& f : face_in) f.resize(n * n);
  for (auto& f : face_tmp) f.resize(n * n);
}

namespace {

// F += bs(., 0) (x) v0 + bs(., 1) (x) v1 along direction `dir`.
void expand_direction(int dir, std::size_t n, const Matrix& bs, std::span<const double> v0,
                      std::span<const double> v1, double* f) {
  const double* b = bs.data().data();  // row-major n x 2
  if (dir == 0) {
    for (std::size_t t = 0; t < n * n; ++t) {
      const double x0 = v0[t];
      const double x1 = v1[t];
      double* line = f + t * n;
      for (std::size_t a = 0; a < n; ++a) line[a] += b[2 * a] * x0 + b[2 * a + 1] * x1;
    }
  } else if (dir == 1) {
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t bi = 0; bi < n; ++bi) {
        const double c0 = b[2 * bi];
        const double c1 = b[2 * bi + 1];
        const double* x0 = v0.data() + n * c;
        const double* x1 = v1.data() + n * c;
        double* row = f + n * (bi + n * c);
        for (std::size_t a = 0; a < n; ++a) row[a] += c0 * x0[a] + c1 * x1[a];
      }
  } else {
    for (std::size_t c = 0; c < n; ++c) {
      const double c0 = b[2 * c];
      const double c1 = b[2 * c + 1];
      double* plane = f + n * n * c;
      for (std::size_t t = 0; t < n * n; ++t) plane[t] += c0 * v0[t] + c1 * v1[t];
    }
  }
  flops::add(4 * n * n * n);
}

// t_s = (bs(., s)^T along `dir`) u for s = 0, 1.
void reduce_direction(int dir, std::size_t n, const Matrix& bs, const double* u,
                      std::span<double> t0, std::span<double> t1) {
  const double* b = bs.data().data();
  if (dir == 0) {
    for (std::size_t t = 0; t < n * n; ++t) {
      const double* line = u + t * n;
      double s0 = b[0] * line[0];
      double s1 = b[1] * line[0];
      for (std::size_t a = 1; a < n; ++a) {
        s0 += b[2 * a] * line[a];
        s1 += b[2 * a + 1] * line[a];
      }
      t0[t] = s0;
      t1[t] = s1;
    }
  } else if (dir == 1) {
    for (std::size_t c = 0; c < n; ++c) {
      double* r0 = t0.data() + n * c;
      double* r1 = t1.data() + n * c;
      for (std::size_t bi = 0; bi < n; ++bi) {
        const double c0 = b[2 * bi];
        const double c1 = b[2 * bi + 1];
        const double* row = u + n * (bi + n * c);
        if (bi == 0) {
          for (std::size_t a = 0; a < n; ++a) {
            r0[a] = c0 * row[a];
            r1[a] = c1 * row[a];
          }
        } else {
          for (std::size_t a = 0; a < n; ++a) {
            r0[a] += c0 * row[a];
            r1[a] += c1 * row[a];
          }
        }
      }
    }
  } else {
    for (std::size_t c = 0; c < n; ++c) {
      const double c0 = b[2 * c];
      const double c1 = b[2 * c + 1];
      const double* plane = u + n * n * c;
      if (c == 0) {
        for (std::size_t t = 0; t < n * n; ++t) {
          t0[t] = c0 * plane[t];
          t1[t] = c1 * plane[t];
        }
      } else {
        for (std::size_t t = 0; t < n * n; ++t) {
          t0[t] += c0 * plane[t];
          t1[t] += c1 * plane[t];
        }
      }
    }
  }
  flops::add(2 * n * n * (2 * n - 1));
}

}  // namespace

void apply_element_operator(const OperatorContext& ctx, std::size_t e,
                            const std::array<std::span<const double>, 6>& in,
                            const std::array<std::span<double>, 6>& out, ElementWorkspace& ws,
                            bool transformed) {
  const Basis1D& basis = ctx.basis();
  const ElementKernelData& k = ctx.kernel(e);
  const std::size_t n = ctx.n();
  const std::size_t n2 = n * n;
  const std::size_t n3 = n2 * n;

  // Faces into the face eigenspace (identity in the transformed system).
  std::array<std::span<const double>, 6> v;
  if (transformed) {
    v = in;
  } else {
    for (int f = 0; f < 6; ++f) {
      std::copy(in[f].begin(), in[f].end(), ws.face_in[f].begin());
      apply_tp2_square(basis.StM, basis.StM, ws.face_in[f], ws.scratch);
      v[f] = ws.face_in[f];
    }
  }

  double* eig = ws.eigen.data();
  std::fill(ws.eigen.begin(), ws.eigen.end(), 0.0);
  for (int d = 0; d < 3; ++d) expand_direction(d, n, k.bs[d], v[2 * d], v[2 * d + 1], eig);

  const double* inv = k.scale.inv.data();
  for (std::size_t i = 0; i < n3; ++i) eig[i] *= inv[i];
  flops::add(n3);

  const double* fm = ctx.face_mass().data();
  for (int d = 0; d < 3; ++d) {
    auto& t0 = ws.face_tmp[2 * d];
    auto& t1 = ws.face_tmp[2 * d + 1];
    reduce_direction(d, n, k.bs[d], eig, t0, t1);
    const Matrix& g = k.gcc[d];
    const auto u0 = in[2 * d];
    const auto u1 = in[2 * d + 1];
    for (int s = 0; s < 2; ++s) {
      auto& t = s == 0 ? t0 : t1;
      auto r = out[2 * d + s];
      const double g0 = g(s, 0);
      const double g1 = g(s, 1);
      if (transformed) {
        for (std::size_t i = 0; i < n2; ++i) r[i] = g0 * u0[i] + g1 * u1[i] - t[i];
        flops::add(4 * n2);
      } else {
        apply_tp2_square(basis.MS, basis.MS, t, ws.scratch);
        for (std::size_t i = 0; i < n2; ++i) r[i] = fm[i] * (g0 * u0[i] + g1 * u1[i]) - t[i];
        flops::add(5 * n2);
      }
    }
  }
}

HdgOperator::HdgOperator(const OperatorContext& ctx, Variant variant, unsigned threads)
    : ctx_(&ctx), variant_(variant) {
  const unsigned t = threads == 0 ? ctx.threads() : threads;
  workspaces_.reserve(t);
  for (unsigned i = 0; i < t; ++i) workspaces_.emplace_back(ctx.n());
  if (t > 1) element_residual_.resize(ctx.mesh().num_elements() * 6 * ctx.n() * ctx.n());
}

void HdgOperator::apply(const FluxField& in, FluxField& out) {
  const OperatorContext& ctx = *ctx_;
  const Mesh& mesh = ctx.mesh();
  const std::size_t n2 = ctx.n() * ctx.n();
  const std::size_t ne = mesh.num_elements();
  const bool transformed = variant_ == Variant::Transformed;
  if (in.size() != out.size() || in.block_size() != n2 || in.num_faces() != mesh.num_faces())
    throw Error("HdgOperator::apply: flux field does not match the operator context");

  auto inputs = [&](std::size_t e) {
    std::array<std::span<const double>, 6> s;
    for (int f = 0; f < 6; ++f) s[f] = in.face(mesh.element_face(e, f / 2, f % 2));
    return s;
  };

  const unsigned threads = static_cast<unsigned>(workspaces_.size());
  if (threads <= 1) {
    // Sequential: element order visits the low-side element of every face
    // first, matching the per-face summation order of the threaded path.
    out.fill(0.0);
    ElementWorkspace& ws = workspaces_.front();
    std::array<std::vector<double>, 6> local;
    for (auto& l : local) l.resize(n2);
    std::array<std::span<double>, 6> outs;
    for (int f = 0; f < 6; ++f) outs[f] = local[f];
    for (std::size_t e = 0; e < ne; ++e) {
      apply_element_operator(ctx, e, inputs(e), outs, ws, transformed);
      for (int f = 0; f < 6; ++f) {
        const std::size_t face = mesh.element_face(e, f / 2, f % 2);
        if (!mesh.is_unknown(face)) continue;
        auto dst = out.face(face);
        for (std::size_t i = 0; i < n2; ++i) dst[i] += local[f][i];
        flops::add(n2);
      }
    }
    return;
  }

  double* res = element_residual_.data();
  detail::parallel_for(ne, threads, [&](std::size_t begin, std::size_t end, unsigned worker) {
    ElementWorkspace& ws = workspaces_[worker];
    for (std::size_t e = begin; e < end; ++e) {
      std::array<std::span<double>, 6> outs;
      for (int f = 0; f < 6; ++f) outs[f] = {res + (6 * e + f) * n2, n2};
      apply_element_operator(ctx, e, inputs(e), outs, ws, transformed);
    }
  });
  detail::parallel_for(mesh.num_faces(), threads, [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t f = begin; f < end; ++f) {
      auto dst = out.face(f);
      std::fill(dst.begin(), dst.end(), 0.0);
      if (!mesh.is_unknown(f)) continue;
      const int d = mesh.face_direction(f);
      const auto adj = mesh.face_elements(f);
      // Low-side element (this is its high face) first.
      if (adj[0] != kNoElement) {
        const double* src = res + (6 * adj[0] + 2 * d + 1) * n2;
        for (std::size_t i = 0; i < n2; ++i) dst[i] += src[i];
      }
      if (adj[1] != kNoElement) {
        const double* src = res + (6 * adj[1] + 2 * d) * n2;
        for (std::size_t i = 0; i < n2; ++i) dst[i] += src[i];
      }
    }
  });
}

FluxField hdg_op_3d(const OperatorContext& ctx, const FluxField& in) {
  HdgOperator op(ctx, HdgOperator::Variant::SumFactorized);
  FluxField out(ctx.mesh(), ctx.p());
  op.apply(in, out);
  return out;
}

FluxField hdg_op_3d_transformed(const OperatorContext& ctx, const FluxField& in) {
  HdgOperator op(ctx, HdgOperator::Variant::Transformed);
  FluxField out(ctx.mesh(), ctx.p());
  op.apply(in, out);
  return out;
}

void transform_faces(const OperatorContext& ctx, FaceTransform kind, FluxField& field) {
  const Basis1D& b = ctx.basis();
  const Matrix* t = nullptr;
  switch (kind) {
    case FaceTransform::UnknownToEigen: t = &b.StM; break;
    case FaceTransform::ResidualToEigen: t = &b.St; break;
    case FaceTransform::EigenToUnknown: t = &b.S; break;
    case FaceTransform::EigenToResidual: t = &b.MS; break;
  }
  std::vector<double> scratch(field.block_size());
  for (std::size_t f = 0; f < field.num_faces(); ++f)
    apply_tp2_square(*t, *t, field.face(f), scratch);
}

}  // namespace hdg
