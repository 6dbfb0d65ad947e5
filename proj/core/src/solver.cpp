#include "hdg/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "hdg/error.hpp"
#include "hdg/flops.hpp"
#include "hdg/preconditioner.hpp"
#include "hdg/tensor.hpp"

namespace hdg {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Volume index of the node with normal index m along `dir` and tangential
// indices (t1, t2), lower direction first.
inline std::size_t vol(int dir, std::size_t m, std::size_t t1, std::size_t t2, std::size_t n) {
  switch (dir) {
    case 0: return m + n * (t1 + n * t2);
    case 1: return t1 + n * (m + n * t2);
    default: return t1 + n * (t2 + n * m);
  }
}

constexpr std::array<std::array<int, 2>, 3> kTangential{{{1, 2}, {0, 2}, {0, 1}}};

// 1D factors of the element inverse, shared by every element.
struct LocalFactors {
  Matrix dminv;  // D M^{-1}
  Matrix minvdt; // M^{-1} D^T
  explicit LocalFactors(const Basis1D& b) : dminv(b.D), minvdt(b.D.transposed()) {
    const std::size_t n = b.weights.size();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        dminv(i, j) /= b.weights[j];
        minvdt(i, j) /= b.weights[i];
      }
  }
};

void element_inverse(const OperatorContext& ctx, const LocalFactors& lf, std::size_t e,
                     std::span<const double> f_u, const std::array<std::span<const double>, 3>& f_q,
                     std::span<double> u, const std::array<std::span<double>, 3>& q) {
  const Basis1D& b = ctx.basis();
  const ElementKernelData& k = ctx.kernel(e);
  const ElementGeometry& g = k.geometry;
  const std::size_t n = ctx.n();
  const std::size_t n3 = n * n * n;
  const Shape3 shape{n, n, n};

  std::vector<double> pf(f_u.begin(), f_u.end());
  std::vector<double> tmp(n3);
  for (int d = 0; d < 3; ++d) {
    contract(d, lf.dminv, shape, f_q[d], tmp);
    const double s = 1.0 / g.half_width[d];
    for (std::size_t i = 0; i < n3; ++i) pf[i] -= s * tmp[i];
  }
  std::vector<double> y = apply_tp3(b.St, b.St, b.St, pf);
  for (std::size_t i = 0; i < n3; ++i) y[i] *= k.scale.inv[i];
  y = apply_tp3(b.S, b.S, b.S, y);

  const auto& w = b.weights;
  for (int d = 0; d < 3; ++d) {
    contract(d, lf.minvdt, shape, y, tmp);
    const double s = 1.0 / g.half_width[d];
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t bb = 0; bb < n; ++bb)
        for (std::size_t a = 0; a < n; ++a) {
          const std::size_t i = a + n * (bb + n * c);
          q[d][i] = -s * tmp[i] - f_q[d][i] / (g.alpha0 * w[a] * w[bb] * w[c]);
        }
  }
  std::copy(y.begin(), y.end(), u.begin());
}

std::array<std::span<const double>, 6> element_trace(const Mesh& mesh, const FluxField& field,
                                                     std::size_t e) {
  std::array<std::span<const double>, 6> s;
  for (int f = 0; f < 6; ++f) s[f] = field.face(mesh.element_face(e, f / 2, f % 2));
  return s;
}

double dot(const FluxField& a, const FluxField& b) {
  const auto x = a.values();
  const auto y = b.values();
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

}  // namespace

std::string to_string(PreconditionerKind kind) {
  switch (kind) {
    case PreconditionerKind::None: return "unprec";
    case PreconditionerKind::Diagonal: return "diag";
    case PreconditionerKind::Block: return "block";
    case PreconditionerKind::Transformed: return "trans";
  }
  return "?";
}

PreconditionerKind parse_preconditioner(const std::string& name) {
  if (name == "none" || name == "unprec") return PreconditionerKind::None;
  if (name == "diag" || name == "diagonal") return PreconditionerKind::Diagonal;
  if (name == "block") return PreconditionerKind::Block;
  if (name == "trans" || name == "transformed") return PreconditionerKind::Transformed;
  throw Error("unknown solver variant '" + name + "' (expected unprec, diag, block or trans)");
}

void SolverConfig::validate() const {
  if (!(rtol > 0.0 && rtol < 1.0)) throw Error("rtol must lie in (0, 1)");
  if (max_iters < 1) throw Error("max_iters must be >= 1");
}

Point element_node(const OperatorContext& ctx, std::size_t e, std::size_t a, std::size_t b,
                   std::size_t c) {
  const auto o = ctx.mesh().element_origin(e);
  const auto& hw = ctx.mesh().geometry(e).half_width;
  const auto& x = ctx.basis().nodes;
  return {o[0] + hw[0] * (1.0 + x[a]), o[1] + hw[1] * (1.0 + x[b]), o[2] + hw[2] * (1.0 + x[c])};
}

Point face_node(const OperatorContext& ctx, std::size_t f, std::size_t t1, std::size_t t2) {
  const Mesh& mesh = ctx.mesh();
  const int d = mesh.face_direction(f);
  const auto adj = mesh.face_elements(f);
  const bool low_side = adj[1] != kNoElement;
  const std::size_t e = low_side ? adj[1] : adj[0];
  const auto o = mesh.element_origin(e);
  const auto& hw = mesh.geometry(e).half_width;
  const auto& x = ctx.basis().nodes;
  Point p = o;
  p[d] = low_side ? o[d] : o[d] + 2.0 * hw[d];
  const auto [d1, d2] = kTangential[d];
  p[d1] = o[d1] + hw[d1] * (1.0 + x[t1]);
  p[d2] = o[d2] + hw[d2] * (1.0 + x[t2]);
  return p;
}

ElementField interpolate(const OperatorContext& ctx, const ScalarFunction& fn) {
  const std::size_t n = ctx.n();
  ElementField out(ctx.mesh(), ctx.p());
  for (std::size_t e = 0; e < out.num_elements(); ++e) {
    auto v = out.element(e);
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t a = 0; a < n; ++a)
          v[a + n * (b + n * c)] = fn(element_node(ctx, e, a, b, c));
  }
  return out;
}

ErrorNorms error_norms(const OperatorContext& ctx, const ElementField& u,
                       const ScalarFunction& exact) {
  const std::size_t n = ctx.n();
  const auto& w = ctx.basis().weights;
  ErrorNorms out;
  double sum = 0.0;
  for (std::size_t e = 0; e < u.num_elements(); ++e) {
    const auto v = u.element(e);
    const double a0 = ctx.mesh().geometry(e).alpha0;
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t a = 0; a < n; ++a) {
          const double err = v[a + n * (b + n * c)] - exact(element_node(ctx, e, a, b, c));
          out.max = std::max(out.max, std::abs(err));
          sum += a0 * w[a] * w[b] * w[c] * err * err;
        }
  }
  out.l2 = std::sqrt(sum);
  return out;
}

void apply_element_inverse(const OperatorContext& ctx, std::size_t e, std::span<const double> f_u,
                           const std::array<std::span<const double>, 3>& f_q, std::span<double> u,
                           const std::array<std::span<double>, 3>& q) {
  const LocalFactors lf(ctx.basis());
  element_inverse(ctx, lf, e, f_u, f_q, u, q);
}

void apply_element_lift(const OperatorContext& ctx, std::size_t e,
                        const std::array<std::span<const double>, 6>& trace, std::span<double> u,
                        const std::array<std::span<double>, 3>& q, double scale) {
  const Basis1D& b = ctx.basis();
  const ElementGeometry& g = ctx.mesh().geometry(e);
  const std::size_t n = ctx.n();
  const auto& w = b.weights;
  for (int d = 0; d < 3; ++d)
    for (int s = 0; s < 2; ++s) {
      const auto tr = trace[2 * d + s];
      for (std::size_t m = 0; m < n; ++m) {
        const double bm = scale * g.alpha[d] * b.B(m, s);
        const double cm = scale * g.half_width[d] * g.alpha[d] * b.C(m, s);
        if (bm == 0.0 && cm == 0.0) continue;
        for (std::size_t t2 = 0; t2 < n; ++t2)
          for (std::size_t t1 = 0; t1 < n; ++t1) {
            const double v = w[t1] * w[t2] * tr[t1 + n * t2];
            const std::size_t i = vol(d, m, t1, t2, n);
            u[i] += bm * v;
            q[d][i] += cm * v;
          }
      }
    }
}

void apply_element_lift_transpose(const OperatorContext& ctx, std::size_t e,
                                  std::span<const double> u,
                                  const std::array<std::span<const double>, 3>& q,
                                  const std::array<std::span<double>, 6>& trace) {
  const Basis1D& b = ctx.basis();
  const ElementGeometry& g = ctx.mesh().geometry(e);
  const std::size_t n = ctx.n();
  const auto& w = b.weights;
  for (int d = 0; d < 3; ++d)
    for (int s = 0; s < 2; ++s) {
      auto tr = trace[2 * d + s];
      std::fill(tr.begin(), tr.end(), 0.0);
      for (std::size_t m = 0; m < n; ++m) {
        const double bm = g.alpha[d] * b.B(m, s);
        const double cm = g.half_width[d] * g.alpha[d] * b.C(m, s);
        if (bm == 0.0 && cm == 0.0) continue;
        for (std::size_t t2 = 0; t2 < n; ++t2)
          for (std::size_t t1 = 0; t1 < n; ++t1) {
            const std::size_t i = vol(d, m, t1, t2, n);
            tr[t1 + n * t2] += w[t1] * w[t2] * (bm * u[i] + cm * q[d][i]);
          }
      }
    }
}

FluxField dirichlet_lift(const OperatorContext& ctx, const ScalarFunction& g_dirichlet) {
  const Mesh& mesh = ctx.mesh();
  const std::size_t n = ctx.n();
  FluxField out(mesh, ctx.p());
  if (!g_dirichlet) return out;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    if (mesh.is_unknown(f)) continue;
    auto v = out.face(f);
    for (std::size_t t2 = 0; t2 < n; ++t2)
      for (std::size_t t1 = 0; t1 < n; ++t1) v[t1 + n * t2] = g_dirichlet(face_node(ctx, f, t1, t2));
  }
  return out;
}

FluxField hybridize_initial_guess(const OperatorContext& ctx, const ElementField& u,
                                  const ScalarFunction& g_dirichlet) {
  const Mesh& mesh = ctx.mesh();
  const Basis1D& b = ctx.basis();
  const std::size_t n = ctx.n();
  const std::size_t p = n - 1;
  FluxField out = dirichlet_lift(ctx, g_dirichlet);

  // Trace value and outward normal derivative of element e at node
  // (m, t1, t2), m in {0, p}.
  auto trace_of = [&](std::size_t e, int d, std::size_t m, std::size_t t1, std::size_t t2) {
    const auto v = u.element(e);
    double deriv = 0.0;
    for (std::size_t j = 0; j < n; ++j) deriv += b.Dhat(m, j) * v[vol(d, j, t1, t2, n)];
    deriv /= mesh.geometry(e).half_width[d];
    return std::array<double, 2>{v[vol(d, m, t1, t2, n)], deriv};
  };

  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    if (!mesh.is_unknown(f)) continue;
    const int d = mesh.face_direction(f);
    const auto adj = mesh.face_elements(f);
    auto dst = out.face(f);
    for (std::size_t t2 = 0; t2 < n; ++t2)
      for (std::size_t t1 = 0; t1 < n; ++t1) {
        double value = 0.0;
        if (adj[0] != kNoElement && adj[1] != kNoElement) {
          const auto lo = trace_of(adj[0], d, p, t1, t2);  // outward normal +e_d
          const auto hi = trace_of(adj[1], d, 0, t1, t2);  // outward normal -e_d
          const double tau = b.tau_hat / mesh.geometry(adj[0]).half_width[d];
          value = 0.5 * (lo[0] + hi[0]) - (lo[1] - hi[1]) / (2.0 * tau);
        } else if (adj[0] != kNoElement) {
          value = trace_of(adj[0], d, p, t1, t2)[0];
        } else {
          value = trace_of(adj[1], d, 0, t1, t2)[0];
        }
        dst[t1 + n * t2] = value;
      }
  }
  return out;
}

FluxField build_rhs(const OperatorContext& ctx, const ElementField& f, const BoundaryData& bc) {
  const Mesh& mesh = ctx.mesh();
  const Basis1D& b = ctx.basis();
  const std::size_t n = ctx.n();
  const std::size_t n2 = n * n;
  const std::size_t n3 = n2 * n;
  const auto& w = b.weights;
  const LocalFactors lf(b);

  FluxField rhs(mesh, ctx.p());
  std::vector<double> fu(n3), u(n3);
  std::array<std::vector<double>, 3> fq, q;
  for (int d = 0; d < 3; ++d) {
    fq[d].assign(n3, 0.0);
    q[d].resize(n3);
  }
  ElementFlux local;
  for (auto& l : local.blocks) l.resize(n2);

  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto fe = f.element(e);
    const double a0 = mesh.geometry(e).alpha0;
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t bb = 0; bb < n; ++bb)
        for (std::size_t a = 0; a < n; ++a) {
          const std::size_t i = a + n * (bb + n * c);
          fu[i] = a0 * w[a] * w[bb] * w[c] * fe[i];
        }
    element_inverse(ctx, lf, e, fu, {fq[0], fq[1], fq[2]}, u, {q[0], q[1], q[2]});
    std::array<std::span<double>, 6> tr;
    for (int k = 0; k < 6; ++k) tr[k] = local.blocks[k];
    apply_element_lift_transpose(ctx, e, u, {q[0], q[1], q[2]}, tr);
    for (auto& l : local.blocks)
      for (double& v : l) v = -v;
    scatter_add(mesh, local, e, rhs);
  }

  if (bc.neumann) {
    for (std::size_t f_idx = 0; f_idx < mesh.num_faces(); ++f_idx) {
      if (mesh.face_kind(f_idx) != FaceKind::Neumann) continue;
      const int d = mesh.face_direction(f_idx);
      const auto adj = mesh.face_elements(f_idx);
      const std::size_t e = adj[0] != kNoElement ? adj[0] : adj[1];
      Point normal{0.0, 0.0, 0.0};
      normal[d] = adj[1] == kNoElement ? 1.0 : -1.0;
      const auto& hw = mesh.geometry(e).half_width;
      const auto [d1, d2] = kTangential[d];
      const double jac = hw[d1] * hw[d2];
      auto dst = rhs.face(f_idx);
      for (std::size_t t2 = 0; t2 < n; ++t2)
        for (std::size_t t1 = 0; t1 < n; ++t1)
          dst[t1 + n * t2] +=
              jac * w[t1] * w[t2] * bc.neumann(face_node(ctx, f_idx, t1, t2), normal);
    }
  }

  if (bc.dirichlet) {
    const FluxField ud = dirichlet_lift(ctx, bc.dirichlet);
    const FluxField kud = hdg_op_3d(ctx, ud);
    auto r = rhs.values();
    const auto k = kud.values();
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= k[i];
  }
  zero_dirichlet(mesh, rhs);
  return rhs;
}

void recover(const OperatorContext& ctx, const ElementField& f, const FluxField& trace,
             ElementField& u, std::array<ElementField, 3>& q) {
  const Mesh& mesh = ctx.mesh();
  const std::size_t n = ctx.n();
  const std::size_t n3 = n * n * n;
  const auto& w = ctx.basis().weights;
  const LocalFactors lf(ctx.basis());
  u = ElementField(mesh, ctx.p());
  for (auto& qd : q) qd = ElementField(mesh, ctx.p());

  std::vector<double> fu(n3);
  std::array<std::vector<double>, 3> fq;
  for (auto& v : fq) v.resize(n3);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto fe = f.element(e);
    const double a0 = mesh.geometry(e).alpha0;
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t bb = 0; bb < n; ++bb)
        for (std::size_t a = 0; a < n; ++a) {
          const std::size_t i = a + n * (bb + n * c);
          fu[i] = a0 * w[a] * w[bb] * w[c] * fe[i];
        }
    for (auto& v : fq) std::fill(v.begin(), v.end(), 0.0);
    apply_element_lift(ctx, e, element_trace(mesh, trace, e), fu, {fq[0], fq[1], fq[2]}, -1.0);
    element_inverse(ctx, lf, e, fu, {fq[0], fq[1], fq[2]}, u.element(e),
                    {q[0].element(e), q[1].element(e), q[2].element(e)});
  }
}

PcgResult pcg(const LinearMap& apply_k, const LinearMap& apply_p, const FluxField& rhs,
              FluxField& x, double rtol, std::size_t max_iters) {
  const auto t0 = Clock::now();
  PcgResult res;
  FluxField r = rhs;
  FluxField kp = rhs;
  apply_k(x, kp);
  {
    auto rv = r.values();
    const auto kv = kp.values();
    for (std::size_t i = 0; i < rv.size(); ++i) rv[i] -= kv[i];
  }
  const double r0 = std::sqrt(dot(r, r));
  if (!std::isfinite(r0)) throw Error("pcg: initial residual is not finite");
  res.initial_residual = r0;
  if (r0 == 0.0) {
    res.converged = true;
    res.seconds = seconds_since(t0);
    return res;
  }

  FluxField z = rhs;
  apply_p(r, z);
  FluxField p = z;
  double rz = dot(r, z);
  double rnorm = r0;
  auto xv = x.values();
  auto rv = r.values();
  auto pv = p.values();
  const auto zv = z.values();
  const auto kv = kp.values();

  while (res.iterations < max_iters) {
    apply_k(p, kp);
    const double pkp = dot(p, kp);
    if (!(pkp > 0.0) || !std::isfinite(pkp))
      throw Error("pcg: non-positive curvature p^T K p; operator is not SPD");
    const double alpha = rz / pkp;
    for (std::size_t i = 0; i < xv.size(); ++i) {
      xv[i] += alpha * pv[i];
      rv[i] -= alpha * kv[i];
    }
    ++res.iterations;
    rnorm = std::sqrt(dot(r, r));
    if (!std::isfinite(rnorm)) throw Error("pcg: residual became non-finite");
    if (rnorm <= rtol * r0) {
      res.converged = true;
      break;
    }
    apply_p(r, z);
    const double rz_new = dot(r, z);
    if (!std::isfinite(rz_new)) throw Error("pcg: preconditioned residual is not finite");
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < pv.size(); ++i) pv[i] = zv[i] + beta * pv[i];
  }
  res.relative_residual = rnorm / r0;
  res.seconds = seconds_since(t0);
  return res;
}

namespace {

SolveResult solve_impl(const OperatorContext& ctx, const ElementField& u0, const ElementField& f,
                       const BoundaryData& bc, const SolverConfig& cfg,
                       const ScalarFunction& exact, bool transformed) {
  const auto t0 = Clock::now();
  cfg.validate();
  if (cfg.lambda != ctx.lambda())
    throw Error("solver configuration and operator context disagree on lambda");
  const Mesh& mesh = ctx.mesh();
  if (u0.num_elements() != mesh.num_elements() || f.num_elements() != mesh.num_elements() ||
      u0.block_size() != ctx.n() * ctx.n() * ctx.n() || f.block_size() != u0.block_size())
    throw Error("solve: element fields do not match the operator context");

  FluxField x = hybridize_initial_guess(ctx, u0, bc.dirichlet);
  zero_dirichlet(mesh, x);
  FluxField rhs = build_rhs(ctx, f, bc);

  const auto variant =
      transformed ? HdgOperator::Variant::Transformed : HdgOperator::Variant::SumFactorized;
  HdgOperator op(ctx, variant);
  LinearMap apply_k = [&op](const FluxField& in, FluxField& out) { op.apply(in, out); };

  LinearMap apply_p;
  BlockPreconditioner block;
  DiagonalPreconditioner diag;
  PreconditionerKind kind = cfg.preconditioner;
  if (transformed) {
    // Any preconditioner on the transformed system is the eigenspace diagonal.
    if (kind != PreconditionerKind::None) {
      kind = PreconditionerKind::Transformed;
      diag = transformed_preconditioner(ctx);
    }
  } else if (kind == PreconditionerKind::Transformed) {
    throw Error("the transformed preconditioner requires solve_transformed");
  } else if (kind == PreconditionerKind::Diagonal) {
    diag = build_diagonal_preconditioner(ctx);
  } else if (kind == PreconditionerKind::Block) {
    block = build_block_preconditioner(ctx);
  }
  switch (kind) {
    case PreconditionerKind::None:
      apply_p = [](const FluxField& in, FluxField& out) {
        std::copy(in.values().begin(), in.values().end(), out.values().begin());
      };
      break;
    case PreconditionerKind::Block:
      apply_p = [&block](const FluxField& in, FluxField& out) {
        apply_block_preconditioner(block, in, out);
      };
      break;
    default:
      apply_p = [&diag](const FluxField& in, FluxField& out) {
        apply_diagonal_preconditioner(diag, in, out);
      };
      break;
  }

  if (transformed) {
    transform_faces(ctx, FaceTransform::ResidualToEigen, rhs);
    transform_faces(ctx, FaceTransform::UnknownToEigen, x);
  }

  SolveResult out;
  SolveReport& rep = out.report;
  if (cfg.measure_ops) {
    HdgOperator counted(ctx, variant, 1);
    FluxField tmp(mesh, ctx.p());
    {
      flops::Scope scope;
      counted.apply(x, tmp);
      rep.ops_operator = scope.count();
    }
    {
      flops::Scope scope;
      apply_p(rhs, tmp);
      rep.ops_preconditioner = scope.count();
    }
  }

  const PcgResult pr = pcg(apply_k, apply_p, rhs, x, cfg.rtol, cfg.max_iters);
  rep.iterations = pr.iterations;
  rep.converged = pr.converged;
  rep.initial_residual = pr.initial_residual;
  rep.relative_residual = pr.relative_residual;
  rep.solve_seconds = pr.seconds;
  rep.seconds_per_iteration =
      pr.iterations > 0 ? pr.seconds / static_cast<double>(pr.iterations) : 0.0;

  if (transformed) transform_faces(ctx, FaceTransform::EigenToUnknown, x);
  const FluxField ud = dirichlet_lift(ctx, bc.dirichlet);
  {
    auto xv = x.values();
    const auto dv = ud.values();
    for (std::size_t i = 0; i < xv.size(); ++i) xv[i] += dv[i];
  }
  recover(ctx, f, x, out.u, out.q);
  out.trace = std::move(x);
  rep.total_seconds = seconds_since(t0);
  if (exact) {
    const ErrorNorms en = error_norms(ctx, out.u, exact);
    rep.error_max = en.max;
    rep.error_l2 = en.l2;
  }
  return out;
}

}  // namespace

SolveResult solve(const OperatorContext& ctx, const ElementField& u0, const ElementField& f,
                  const BoundaryData& bc, const SolverConfig& cfg, const ScalarFunction& exact) {
  return solve_impl(ctx, u0, f, bc, cfg, exact, false);
}

SolveResult solve_transformed(const OperatorContext& ctx, const ElementField& u0,
                              const ElementField& f, const BoundaryData& bc,
                              const SolverConfig& cfg, const ScalarFunction& exact) {
  return solve_impl(ctx, u0, f, bc, cfg, exact, true);
}

SolveResult run_solver(const OperatorContext& ctx, const ElementField& u0, const ElementField& f,
                       const BoundaryData& bc, const SolverConfig& cfg,
                       const ScalarFunction& exact) {
  if (cfg.preconditioner == PreconditionerKind::Transformed)
    return solve_transformed(ctx, u0, f, bc, cfg, exact);
  return solve(ctx, u0, f, bc, cfg, exact);
}

}  // namespace hdg
