#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hdg/solver.hpp"

namespace hdg {

enum class SweepKind { P, Tau, Ne, Single };

[[nodiscard]] std::string to_string(SweepKind kind);
[[nodiscard]] SweepKind parse_sweep(const std::string& name);

/// One experiment: the cartesian product of the p, n and tau lists, each
/// point solved with every variant on (0, 2 pi)^3 with Dirichlet data from
/// the manufactured solution. `n_list` holds elements per direction.
struct ExperimentConfig {
  SweepKind sweep = SweepKind::Single;
  std::vector<int> p_list{4};
  std::vector<std::size_t> n_list{4};
  std::vector<double> tau_list{25.0};
  Penalty::Kind penalty_kind = Penalty::Kind::FaceValue;
  double lambda = 0.0;
  double k = 2.0;
  std::vector<PreconditionerKind> variants{PreconditionerKind::Block};
  std::size_t repetitions = 3;
  double rtol = 1e-10;
  std::size_t max_iters = 20000;
  std::uint64_t seed = 1;
  bool count_ops = false;
  unsigned threads = 1;

  /// Throws hdg::Error on empty lists or zero repetitions.
  void validate() const;
};

struct ResultRow {
  std::string sweep;
  std::string variant;
  int p = 0;
  std::size_t n = 0;          // elements per direction
  std::size_t elements = 0;
  double tau = 0.0;
  double lambda = 0.0;
  double k = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double relative_residual = 0.0;
  double seconds = 0.0;       // median PCG time over the timed repetitions
  double seconds_per_iteration = 0.0;
  double seconds_per_dof_iteration = 0.0;
  double error_max = 0.0;
  double error_l2 = 0.0;
  std::size_t equivalent_dofs = 0;  // (p+1)^3 n_e
  std::size_t trace_unknowns = 0;   // (p+1)^2 per non-Dirichlet face
  std::uint64_t ops_operator = 0;
  std::uint64_t ops_preconditioner = 0;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

/// Uniform random initial guess in [-1, 1] from a seeded generator.
[[nodiscard]] ElementField random_element_field(const Mesh& mesh, int p, std::uint64_t seed);

/// Runs every point of the experiment: one warmup solve, then
/// `repetitions` timed solves. Non-converged runs are recorded, not thrown.
/// `log` (optional) receives one progress line per row.
[[nodiscard]] std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg,
                                                    std::ostream* log = nullptr);

/// Versioned CSV ("# hdg-results v1" header, %.17g numbers) and a JSON
/// mirror with the same columns.
void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);
[[nodiscard]] std::vector<ResultRow> read_csv(std::istream& in);
void write_json(std::ostream& out, const std::vector<ResultRow>& rows);

}  // namespace hdg
