#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>

#include "hdg/mesh.hpp"
#include "hdg/operator.hpp"

namespace hdg {

using Point = std::array<double, 3>;
using ScalarFunction = std::function<double(const Point&)>;
/// Neumann data g_N(x, n) = grad u . n for the outward unit normal n.
using NeumannFunction = std::function<double(const Point&, const Point&)>;

struct BoundaryData {
  ScalarFunction dirichlet;  // may be empty: homogeneous
  NeumannFunction neumann;   // may be empty: homogeneous
};

enum class PreconditionerKind { None, Diagonal, Block, Transformed };

[[nodiscard]] std::string to_string(PreconditionerKind kind);
/// Accepts none|unprec, diag|diagonal, block, trans|transformed.
[[nodiscard]] PreconditionerKind parse_preconditioner(const std::string& name);

struct SolverConfig {
  double lambda = 0.0;
  Penalty penalty{};
  double rtol = 1e-10;
  std::size_t max_iters = 20000;
  PreconditionerKind preconditioner = PreconditionerKind::Block;
  bool measure_ops = false;

  /// Throws hdg::Error unless rtol is in (0, 1) and max_iters >= 1.
  void validate() const;
};

struct SolveReport {
  std::size_t iterations = 0;
  bool converged = false;
  double initial_residual = 0.0;
  double relative_residual = 0.0;
  double solve_seconds = 0.0;      // PCG loop only
  double total_seconds = 0.0;      // guess, rhs, PCG and recovery
  double seconds_per_iteration = 0.0;
  std::uint64_t ops_operator = 0;  // one operator application (measure_ops)
  std::uint64_t ops_preconditioner = 0;
  double error_max = std::numeric_limits<double>::quiet_NaN();
  double error_l2 = std::numeric_limits<double>::quiet_NaN();
};

struct SolveResult {
  ElementField u;
  std::array<ElementField, 3> q;
  FluxField trace;  // including the Dirichlet data
  SolveReport report;
};

/// Physical coordinates of GLL node (a, b, c) of element e.
[[nodiscard]] Point element_node(const OperatorContext& ctx, std::size_t e, std::size_t a,
                                 std::size_t b, std::size_t c);
/// Physical coordinates of node (t1, t2) of face f.
[[nodiscard]] Point face_node(const OperatorContext& ctx, std::size_t f, std::size_t t1,
                              std::size_t t2);

/// Nodal interpolant of fn on every element.
[[nodiscard]] ElementField interpolate(const OperatorContext& ctx, const ScalarFunction& fn);

/// Max-norm and GLL-quadrature L2 norm of u - exact over all nodes.
struct ErrorNorms {
  double max = 0.0;
  double l2 = 0.0;
};
[[nodiscard]] ErrorNorms error_norms(const OperatorContext& ctx, const ElementField& u,
                                     const ScalarFunction& exact);

/// Applies A_e^{-1} by fast diagonalization. `f_u` and `f_q` hold the four
/// right-hand side blocks (u, q1, q2, q3), each (p+1)^3; the solution is
/// written to `u` and `q` (which may alias the inputs).
void apply_element_inverse(const OperatorContext& ctx, std::size_t e, std::span<const double> f_u,
                           const std::array<std::span<const double>, 3>& f_q, std::span<double> u,
                           const std::array<std::span<double>, 3>& q);

/// R_e applied to the six element-local trace blocks, added into (u, q).
void apply_element_lift(const OperatorContext& ctx, std::size_t e,
                        const std::array<std::span<const double>, 6>& trace, std::span<double> u,
                        const std::array<std::span<double>, 3>& q, double scale);

/// R_e^T (u, q) written to the six element-local trace blocks.
void apply_element_lift_transpose(const OperatorContext& ctx, std::size_t e,
                                  std::span<const double> u,
                                  const std::array<std::span<const double>, 3>& q,
                                  const std::array<std::span<double>, 6>& trace);

/// Trace values from an element field: q = grad u nodally, central average
/// with penalty correction on interior faces, g_D on Dirichlet faces and
/// the interior trace on Neumann faces.
[[nodiscard]] FluxField hybridize_initial_guess(const OperatorContext& ctx, const ElementField& u,
                                                const ScalarFunction& g_dirichlet);

/// Flux field holding g_D on Dirichlet faces and zero elsewhere.
[[nodiscard]] FluxField dirichlet_lift(const OperatorContext& ctx,
                                       const ScalarFunction& g_dirichlet);

/// Right-hand side of the trace system over the unknown faces:
/// F = g_N - sum_e R_e^T A_e^{-1} (M_e f_e, 0) - K u_D. Zero on Dirichlet faces.
[[nodiscard]] FluxField build_rhs(const OperatorContext& ctx, const ElementField& f,
                                  const BoundaryData& bc);

/// Local solves (u_e, q_e) = A_e^{-1} ((M_e f_e, 0) - R_e trace_e).
void recover(const OperatorContext& ctx, const ElementField& f, const FluxField& trace,
             ElementField& u, std::array<ElementField, 3>& q);

using LinearMap = std::function<void(const FluxField&, FluxField&)>;

struct PcgResult {
  std::size_t iterations = 0;
  bool converged = false;
  double initial_residual = 0.0;
  double relative_residual = 0.0;
  double seconds = 0.0;
};

/// Preconditioned conjugate gradients (Hestenes-Stiefel, no restart) on
/// K x = F starting from x. Stops when ||r||_2 <= rtol ||r_0||_2 or after
/// max_iters (flagged non-converged). Throws hdg::Error on a non-finite or
/// non-positive curvature / residual product.
PcgResult pcg(const LinearMap& apply_k, const LinearMap& apply_p, const FluxField& rhs,
              FluxField& x, double rtol, std::size_t max_iters);

/// Full pipeline on the untransformed trace system: initial guess from u0,
/// right-hand side, PCG with the configured preconditioner (None, Diagonal
/// or Block), local recovery. `exact` (optional) fills the error norms.
[[nodiscard]] SolveResult solve(const OperatorContext& ctx, const ElementField& u0,
                                const ElementField& f, const BoundaryData& bc,
                                const SolverConfig& cfg, const ScalarFunction& exact = {});

/// Same pipeline on the face-eigenspace system with the product-factorized
/// operator and its diagonal preconditioner.
[[nodiscard]] SolveResult solve_transformed(const OperatorContext& ctx, const ElementField& u0,
                                            const ElementField& f, const BoundaryData& bc,
                                            const SolverConfig& cfg,
                                            const ScalarFunction& exact = {});

/// Dispatches on cfg.preconditioner (Transformed selects solve_transformed).
[[nodiscard]] SolveResult run_solver(const OperatorContext& ctx, const ElementField& u0,
                                     const ElementField& f, const BoundaryData& bc,
                                     const SolverConfig& cfg, const ScalarFunction& exact = {});

}  // namespace hdg
