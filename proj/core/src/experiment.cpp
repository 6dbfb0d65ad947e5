#include "hdg/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hdg/error.hpp"
#include "hdg/manufactured.hpp"

namespace hdg {
namespace {

constexpr const char* kSchemaLine = "# hdg-results v1";
constexpr const char* kColumns =
    "sweep,variant,p,n,elements,tau,lambda,k,iterations,converged,relative_residual,seconds,"
    "seconds_per_iteration,seconds_per_dof_iteration,error_max,error_l2,equivalent_dofs,"
    "trace_unknowns,ops_operator,ops_preconditioner";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::size_t count_trace_unknowns(const Mesh& mesh, int p) {
  std::size_t faces = 0;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) faces += mesh.is_unknown(f) ? 1 : 0;
  return faces * static_cast<std::size_t>((p + 1) * (p + 1));
}

}  // namespace

std::string to_string(SweepKind kind) {
  switch (kind) {
    case SweepKind::P: return "p";
    case SweepKind::Tau: return "tau";
    case SweepKind::Ne: return "ne";
    case SweepKind::Single: return "single";
  }
  return "?";
}

SweepKind parse_sweep(const std::string& name) {
  if (name == "p") return SweepKind::P;
  if (name == "tau") return SweepKind::Tau;
  if (name == "ne") return SweepKind::Ne;
  if (name == "single") return SweepKind::Single;
  throw Error("unknown sweep '" + name + "' (expected p, tau, ne or single)");
}

void ExperimentConfig::validate() const {
  if (p_list.empty() || n_list.empty() || tau_list.empty() || variants.empty())
    throw Error("experiment: p, n, tau and variant lists must be non-empty");
  if (repetitions < 1) throw Error("experiment: repetitions must be >= 1");
  for (int p : p_list)
    if (p < 1) throw Error("experiment: polynomial degree must be >= 1");
  for (std::size_t n : n_list)
    if (n < 1) throw Error("experiment: element count must be >= 1");
}

ElementField random_element_field(const Mesh& mesh, int p, std::uint64_t seed) {
  ElementField u(mesh, p);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (double& v : u.values()) v = dist(gen);
  return u;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, std::ostream* log) {
  cfg.validate();
  const double two_pi = 2.0 * std::numbers::pi;
  const double k = cfg.k;
  const double lambda = cfg.lambda;
  const BoundaryData bc = manufactured_boundary(k);
  const ScalarFunction exact = [k](const Point& x) { return exact_solution(x, k); };

  std::vector<ResultRow> rows;
  for (std::size_t n : cfg.n_list) {
    const Mesh mesh = build_mesh({n, n, n}, {0.0, 0.0, 0.0}, {two_pi, two_pi, two_pi});
    for (int p : cfg.p_list) {
      for (double tau : cfg.tau_list) {
        const Penalty penalty{cfg.penalty_kind, tau};
        const OperatorContext ctx = make_context(mesh, p, penalty, lambda, cfg.threads);
        const ElementField f =
            interpolate(ctx, [k, lambda](const Point& x) { return rhs_f(x, k, lambda); });
        const ElementField u0 = random_element_field(mesh, p, cfg.seed);

        for (PreconditionerKind variant : cfg.variants) {
          SolverConfig sc;
          sc.lambda = lambda;
          sc.penalty = penalty;
          sc.rtol = cfg.rtol;
          sc.max_iters = cfg.max_iters;
          sc.preconditioner = variant;
          sc.measure_ops = cfg.count_ops;

          SolveReport last;
          std::vector<double> times;
          for (std::size_t rep = 0; rep <= cfg.repetitions; ++rep) {
            const SolveResult res = run_solver(ctx, u0, f, bc, sc, exact);
            last = res.report;
            if (rep > 0) times.push_back(res.report.solve_seconds);  // rep 0 is warmup
          }

          ResultRow row;
          row.sweep = to_string(cfg.sweep);
          row.variant = to_string(variant);
          row.p = p;
          row.n = n;
          row.elements = mesh.num_elements();
          row.tau = tau;
          row.lambda = lambda;
          row.k = k;
          row.iterations = last.iterations;
          row.converged = last.converged;
          row.relative_residual = last.relative_residual;
          row.seconds = median(times);
          row.equivalent_dofs = ctx.n() * ctx.n() * ctx.n() * mesh.num_elements();
          row.trace_unknowns = count_trace_unknowns(mesh, p);
          const double iters = static_cast<double>(std::max<std::size_t>(last.iterations, 1));
          row.seconds_per_iteration = row.seconds / iters;
          row.seconds_per_dof_iteration =
              row.seconds_per_iteration / static_cast<double>(row.equivalent_dofs);
          row.error_max = last.error_max;
          row.error_l2 = last.error_l2;
          row.ops_operator = last.ops_operator;
          row.ops_preconditioner = last.ops_preconditioner;
          if (log)
            *log << row.variant << " p=" << p << " n=" << n << "^3 tau=" << tau
                 << " iters=" << row.iterations << (row.converged ? "" : " (not converged)")
                 << " err_max=" << row.error_max << " t=" << row.seconds << "s\n";
          rows.push_back(std::move(row));
        }
      }
    }
  }
  return rows;
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kSchemaLine << '\n' << kColumns << '\n';
  for (const ResultRow& r : rows) {
    out << r.sweep << ',' << r.variant << ',' << r.p << ',' << r.n << ',' << r.elements << ','
        << fmt(r.tau) << ',' << fmt(r.lambda) << ',' << fmt(r.k) << ',' << r.iterations << ','
        << (r.converged ? 1 : 0) << ',' << fmt(r.relative_residual) << ',' << fmt(r.seconds)
        << ',' << fmt(r.seconds_per_iteration) << ',' << fmt(r.seconds_per_dof_iteration) << ','
        << fmt(r.error_max) << ',' << fmt(r.error_l2) << ',' << r.equivalent_dofs << ','
        << r.trace_unknowns << ',' << r.ops_operator << ',' << r.ops_preconditioner << '\n';
  }
}

std::vector<ResultRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSchemaLine)
    throw Error("read_csv: missing or unsupported schema line");
  if (!std::getline(in, line) || line != kColumns) throw Error("read_csv: unexpected columns");

  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> c;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) c.push_back(cell);
    if (c.size() != 20) throw Error("read_csv: expected 20 columns, got " + std::to_string(c.size()));
    try {
      ResultRow r;
      r.sweep = c[0];
      r.variant = c[1];
      r.p = std::stoi(c[2]);
      r.n = std::stoull(c[3]);
      r.elements = std::stoull(c[4]);
      r.tau = std::stod(c[5]);
      r.lambda = std::stod(c[6]);
      r.k = std::stod(c[7]);
      r.iterations = std::stoull(c[8]);
      r.converged = c[9] == "1";
      r.relative_residual = std::stod(c[10]);
      r.seconds = std::stod(c[11]);
      r.seconds_per_iteration = std::stod(c[12]);
      r.seconds_per_dof_iteration = std::stod(c[13]);
      r.error_max = std::stod(c[14]);
      r.error_l2 = std::stod(c[15]);
      r.equivalent_dofs = std::stoull(c[16]);
      r.trace_unknowns = std::stoull(c[17]);
      r.ops_operator = std::stoull(c[18]);
      r.ops_preconditioner = std::stoull(c[19]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error& e) {
      throw Error(std::string("read_csv: malformed number in '") + line + "'");
    }
  }
  return rows;
}

void write_json(std::ostream& out, const std::vector<ResultRow>& rows) {
  nlohmann::json j;
  j["schema"] = "hdg-results";
  j["version"] = 1;
  j["rows"] = nlohmann::json::array();
  for (const ResultRow& r : rows) {
    j["rows"].push_back({
        {"sweep", r.sweep},
        {"variant", r.variant},
        {"p", r.p},
        {"n", r.n},
        {"elements", r.elements},
        {"tau", r.tau},
        {"lambda", r.lambda},
        {"k", r.k},
        {"iterations", r.iterations},
        {"converged", r.converged},
        {"relative_residual", r.relative_residual},
        {"seconds", r.seconds},
        {"seconds_per_iteration", r.seconds_per_iteration},
        {"seconds_per_dof_iteration", r.seconds_per_dof_iteration},
        {"error_max", r.error_max},
        {"error_l2", r.error_l2},
        {"equivalent_dofs", r.equivalent_dofs},
        {"trace_unknowns", r.trace_unknowns},
        {"ops_operator", r.ops_operator},
        {"ops_preconditioner", r.ops_preconditioner},
    });
  }
  out << j.dump(2) << '\n';
}

}  // namespace hdg
