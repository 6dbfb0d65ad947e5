// Acceptance checks. Prints one PASS/FAIL line per criterion; the exit
// status is non-zero if any hard criterion fails. Criterion 7 (timing) is
// soft: a failure is printed but not counted.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "hdg/basis.hpp"
#include "hdg/experiment.hpp"
#include "hdg/flops.hpp"
#include "hdg/manufactured.hpp"
#include "hdg/preconditioner.hpp"
#include "hdg/solver.hpp"
#include "ldg_oracle.hpp"

using namespace hdg;

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

FluxField random_flux(const Mesh& mesh, int p, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  FluxField x(mesh, p);
  for (double& v : x.values()) v = dist(gen);
  return x;
}

double dot(const FluxField& a, const FluxField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.values()[i] * b.values()[i];
  return s;
}

double max_abs(const FluxField& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

const std::vector<std::array<std::size_t, 3>> kMeshes{{1, 1, 1}, {2, 2, 2}, {3, 2, 2}};

Mesh small_mesh(const std::array<std::size_t, 3>& n) {
  return build_mesh(n, {0.0, 0.0, 0.0},
                    {0.5 * static_cast<double>(n[0]), 0.5 * static_cast<double>(n[1]),
                     0.5 * static_cast<double>(n[2])});
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(11);
  double worst = 0.0;
  for (const auto& n : kMeshes)
    for (int p : {1, 2, 3})
      for (double lambda : {0.0, 1.7}) {
        const Mesh mesh = small_mesh(n);
        const auto ctx = make_context(mesh, p, Penalty{}, lambda);
        const Eigen::MatrixXd k = oracle::global_schur(ctx);
        const FluxField x = random_flux(mesh, p, gen);
        const Eigen::VectorXd ref =
            oracle::apply_global(k, mesh, x.block_size(), oracle::to_eigen(x.values()));
        const FluxField y = hdg_op_3d(ctx, x);
        const double diff = (ref - oracle::to_eigen(y.values())).cwiseAbs().maxCoeff();
        worst = std::max(worst, diff / k.cwiseAbs().maxCoeff());
      }
  const double t = elapsed(t0);
  return {worst <= 1e-11 && t < 30.0,
          fmt("max |K_mf x - K_dense x| / |K|_max = %.2e", worst) + fmt(" (limit 1e-11), %.1f s", t)};
}

Outcome transformed_equivalence() {
  std::mt19937_64 gen(12);
  double worst = 0.0;
  for (const auto& n : kMeshes)
    for (int p : {1, 2, 3})
      for (double lambda : {0.0, 1.7}) {
        const Mesh mesh = small_mesh(n);
        const auto ctx = make_context(mesh, p, Penalty{}, lambda);
        const FluxField x = random_flux(mesh, p, gen);
        const FluxField y = hdg_op_3d(ctx, x);
        FluxField xt = x;
        transform_faces(ctx, FaceTransform::UnknownToEigen, xt);
        FluxField yt = hdg_op_3d_transformed(ctx, xt);
        transform_faces(ctx, FaceTransform::EigenToResidual, yt);
        double diff = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i)
          diff = std::max(diff, std::abs(y.values()[i] - yt.values()[i]));
        worst = std::max(worst, diff / std::max(max_abs(y), 1e-300));
      }
  return {worst <= 1e-11, fmt("max relative difference %.2e (limit 1e-11)", worst)};
}

Outcome end_to_end_monolithic() {
  const auto t0 = Clock::now();
  const double k = 2.0;
  const Mesh mesh = build_mesh({2, 2, 2}, {0, 0, 0}, {kTwoPi, kTwoPi, kTwoPi});
  const auto ctx = make_context(mesh, 2, Penalty{}, 0.0);
  const ElementField f = interpolate(ctx, [k](const Point& x) { return rhs_f(x, k, 0.0); });
  const BoundaryData bc = manufactured_boundary(k);
  const ElementField ref = oracle::monolithic_solve(ctx, f, bc);
  const SolveResult res = solve(ctx, random_element_field(mesh, 2, 3), f, bc, SolverConfig{});
  double diff = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i)
    diff = std::max(diff, std::abs(ref.values()[i] - res.u.values()[i]));
  const double t = elapsed(t0);
  return {res.report.converged && diff <= 1e-8 && t < 10.0,
          fmt("max |u_solve - u_monolithic| = %.2e (limit 1e-8)", diff) +
              fmt(", %.2f s", t)};
}

ExperimentConfig base_experiment() {
  ExperimentConfig cfg;
  cfg.k = 2.0;
  cfg.lambda = 0.0;
  cfg.tau_list = {25.0};
  cfg.repetitions = 1;
  cfg.rtol = 1e-10;
  return cfg;
}

Outcome spectral_convergence() {
  const auto t0 = Clock::now();
  ExperimentConfig cfg = base_experiment();
  cfg.sweep = SweepKind::P;
  cfg.p_list = {2, 4, 6, 8, 10, 12};
  cfg.n_list = {4};
  cfg.variants = {PreconditionerKind::Transformed};
  const auto rows = run_experiment(cfg);
  bool monotone = true;
  std::string errs;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    errs += (i ? ", " : "") + fmt("%.2e", rows[i].error_max);
    if (i > 0 && !(rows[i].error_max < rows[i - 1].error_max)) monotone = false;
  }
  const double ratio = rows[5].error_max / rows[1].error_max;
  const double t = elapsed(t0);
  return {monotone && ratio <= 1e-4 && t < 120.0,
          "err_max(p=2..12) = [" + errs + "], " + (monotone ? "monotone" : "NOT monotone") +
              fmt(", err(12)/err(4) = %.2e (limit 1e-4)", ratio)};
}

// Same sweep with a smoother solution, reported for context only.
std::string spectral_convergence_resolved() {
  ExperimentConfig cfg = base_experiment();
  cfg.k = 0.5;
  cfg.p_list = {4, 12};
  cfg.n_list = {4};
  cfg.variants = {PreconditionerKind::Transformed};
  const auto rows = run_experiment(cfg);
  return fmt("k = 0.5: err(12)/err(4) = %.2e", rows[1].error_max / rows[0].error_max);
}

Outcome preconditioner_ordering() {
  ExperimentConfig cfg = base_experiment();
  cfg.p_list = {8, 16};
  cfg.n_list = {4};
  cfg.variants = {PreconditionerKind::None, PreconditionerKind::Diagonal,
                  PreconditionerKind::Block, PreconditionerKind::Transformed};
  const auto rows = run_experiment(cfg);
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i + 3 < rows.size(); i += 4) {
    const auto un = rows[i].iterations, dg = rows[i + 1].iterations, bl = rows[i + 2].iterations,
               tr = rows[i + 3].iterations;
    for (std::size_t j = 0; j < 4; ++j) ok = ok && rows[i + j].converged;
    ok = ok && bl < dg && dg <= un && (tr + 2 >= bl && tr <= bl + 2);
    detail += "p=" + std::to_string(rows[i].p) + ": unprec " + std::to_string(un) + ", diag " +
              std::to_string(dg) + ", block " + std::to_string(bl) + ", trans " +
              std::to_string(tr) + "; ";
  }
  return {ok, detail + "need block < diag <= unprec, trans = block +- 2"};
}

Outcome operation_counts() {
  bool ok = true;
  std::string detail;
  for (int p : {3, 7, 15}) {
    const Mesh mesh = build_mesh({2, 2, 2}, {0, 0, 0}, {1, 1, 1});
    const auto ctx = make_context(mesh, p, Penalty{}, 0.0);
    std::mt19937_64 gen(5);
    const FluxField x = random_flux(mesh, p, gen);
    FluxField y(mesh, p);
    const double n = p + 1.0;
    const double ne = static_cast<double>(mesh.num_elements());
    for (auto variant : {HdgOperator::Variant::SumFactorized, HdgOperator::Variant::Transformed}) {
      HdgOperator op(ctx, variant, 1);
      flops::Scope scope;
      op.apply(x, y);
      const double per_element = static_cast<double>(scope.count()) / ne;
      const bool untransformed = variant == HdgOperator::Variant::SumFactorized;
      const double lo = (untransformed ? 73.0 : 25.0) * n * n * n - 30.0 * n * n;
      const double hi = (untransformed ? 73.0 : 27.0) * n * n * n + 30.0 * n * n;
      ok = ok && per_element >= lo && per_element <= hi;
      detail += std::string(untransformed ? "TP" : "TPT") + " p=" + std::to_string(p) +
                fmt(": %.2f n^3", per_element / (n * n * n)) + "; ";
    }
  }
  return {ok, detail + "limits 73 n^3 / 25-27 n^3 +- 30 n^2"};
}

Outcome linear_scaling() {
  std::vector<double> rate;
  std::string detail;
  for (int p : {4, 8, 16}) {
    const Mesh mesh = build_mesh({4, 4, 4}, {0, 0, 0}, {kTwoPi, kTwoPi, kTwoPi});
    const auto ctx = make_context(mesh, p, Penalty{}, 0.0, 1);
    std::mt19937_64 gen(9);
    const FluxField x = random_flux(mesh, p, gen);
    FluxField y(mesh, p);
    HdgOperator op(ctx, HdgOperator::Variant::SumFactorized, 1);
    op.apply(x, y);
    std::vector<double> t;
    for (int r = 0; r < 7; ++r) {
      const auto t0 = Clock::now();
      op.apply(x, y);
      t.push_back(elapsed(t0));
    }
    std::sort(t.begin(), t.end());
    const double dofs = std::pow(p + 1.0, 3) * static_cast<double>(mesh.num_elements());
    rate.push_back(t[t.size() / 2] / dofs);
    detail += "p=" + std::to_string(p) + fmt(": %.2e s/DOF; ", rate.back());
  }
  const double spread =
      *std::max_element(rate.begin(), rate.end()) / *std::min_element(rate.begin(), rate.end());
  return {spread <= 2.0, detail + fmt("spread %.2fx (limit 2x)", spread)};
}

Outcome element_count_sensitivity() {
  ExperimentConfig cfg = base_experiment();
  cfg.sweep = SweepKind::Ne;
  cfg.p_list = {8};
  cfg.n_list = {2, 4, 8};
  cfg.variants = {PreconditionerKind::Transformed};
  const auto rows = run_experiment(cfg);
  bool ok = true;
  std::string detail = "iterations:";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    detail += " n_e=" + std::to_string(rows[i].elements) + " -> " +
              std::to_string(rows[i].iterations) + ";";
    ok = ok && rows[i].converged;
    if (i > 0 && !(rows[i].iterations > rows[i - 1].iterations)) ok = false;
  }
  return {ok, detail + " need strictly increasing"};
}

Outcome property_suites() {
  std::string detail;
  bool ok = true;

  double eig = 0.0;
  for (int p = 1; p <= 16; ++p) {
    const Basis1D b = build_basis(p, 25.0);
    const Matrix stms = b.St * b.M * b.S;
    eig = std::max(eig, (stms - Matrix::identity(b.S.rows())).max_abs());
  }
  ok = ok && eig <= 1e-12;
  detail += fmt("|S^T M S - I| = %.1e; ", eig);

  std::mt19937_64 gen(21);
  double sym = 0.0, lin = 0.0;
  bool spd = true;
  double adj = 0.0;
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 1 + trial % 3;
    const int p = 1 + trial % 4;
    const double lambda = trial % 2 ? 1.7 : 0.0;
    BoxBoundary bcs = all_dirichlet();
    if (trial % 5 == 0) bcs[1] = BoundaryKind::Neumann;
    const Mesh mesh = build_mesh({m, 1 + trial % 2, 2}, {0, 0, 0}, {1, 1, 1}, bcs);
    const auto ctx = make_context(mesh, p, Penalty{Penalty::Kind::Reference, 2.0}, lambda);
    FluxField x = random_flux(mesh, p, gen);
    FluxField y = random_flux(mesh, p, gen);
    zero_dirichlet(mesh, x);
    zero_dirichlet(mesh, y);
    const FluxField kx = hdg_op_3d(ctx, x);
    const FluxField ky = hdg_op_3d(ctx, y);
    const double a = dot(kx, y), b = dot(x, ky);
    sym = std::max(sym, std::abs(a - b) / std::max(std::abs(a), 1e-300));

    const double s = coef(gen), t = coef(gen);
    FluxField comb(mesh, p);
    for (std::size_t i = 0; i < comb.size(); ++i)
      comb.values()[i] = s * x.values()[i] + t * y.values()[i];
    const FluxField kc = hdg_op_3d(ctx, comb);
    double d = 0.0;
    for (std::size_t i = 0; i < kc.size(); ++i)
      d = std::max(d, std::abs(kc.values()[i] - s * kx.values()[i] - t * ky.values()[i]));
    lin = std::max(lin, d / std::max(max_abs(kc), 1e-300));

    const BlockPreconditioner pc = build_block_preconditioner(ctx);
    FluxField px(mesh, p), py(mesh, p);
    apply_block_preconditioner(pc, x, px);
    apply_block_preconditioner(pc, y, py);
    const double ps = std::abs(dot(px, y) - dot(x, py)) / std::max(std::abs(dot(px, y)), 1e-300);
    spd = spd && ps <= 1e-12 && dot(px, x) > 0.0;
    const DiagonalPreconditioner dg = build_diagonal_preconditioner(ctx);
    apply_diagonal_preconditioner(dg, x, px);
    spd = spd && dot(px, x) > 0.0;

    // <Q x, l> = <x, Q^T l> with element-local data l.
    const FluxField g = random_flux(mesh, p, gen);
    FluxField qt(mesh, p);
    double lhs = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
      ElementFlux l;
      for (auto& blk : l.blocks) {
        blk.resize(x.block_size());
        for (double& v : blk) v = coef(gen);
      }
      const ElementFlux gx = gather(mesh, g, e);
      for (int f = 0; f < 6; ++f) {
        const std::size_t face = mesh.element_face(e, f / 2, f % 2);
        if (!mesh.is_unknown(face)) continue;  // Q^T discards Dirichlet rows
        for (std::size_t i = 0; i < l.blocks[f].size(); ++i)
          lhs += gx.blocks[f][i] * l.blocks[f][i];
      }
      scatter_add(mesh, l, e, qt);
    }
    const double rhs = dot(g, qt);
    adj = std::max(adj, std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300));
  }
  ok = ok && sym <= 1e-11 && lin <= 1e-11 && spd && adj <= 1e-13;
  detail += fmt("symmetry %.1e, ", sym) + fmt("linearity %.1e, ", lin) +
            (spd ? "preconditioners SPD, " : "preconditioner NOT SPD, ") +
            fmt("gather/scatter adjoint %.1e", adj);
  return {ok, detail};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
    bool soft;
  };
  const std::vector<Criterion> criteria{
      {1, "oracle equivalence", oracle_equivalence, false},
      {2, "transformed equivalence", transformed_equivalence, false},
      {3, "end-to-end vs monolithic LDG", end_to_end_monolithic, false},
      {4, "spectral convergence", spectral_convergence, false},
      {5, "preconditioner ordering", preconditioner_ordering, false},
      {6, "operation-count audit", operation_counts, false},
      {7, "linear scaling in p (soft)", linear_scaling, true},
      {8, "element-count sensitivity", element_count_sensitivity, false},
      {9, "property suites", property_suites, false},
  };

  int hard_failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %d (%s): %s%s\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), !o.pass && c.soft ? " [warning only]" : "");
    if (c.id == 4 && !o.pass) std::printf("     note: %s\n", spectral_convergence_resolved().c_str());
    std::fflush(stdout);
    if (!o.pass && !c.soft) ++hard_failures;
  }
  std::printf("%d hard criteria failed\n", hard_failures);
  return hard_failures == 0 ? 0 : 1;
}
