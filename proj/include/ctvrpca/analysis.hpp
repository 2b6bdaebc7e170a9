#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ctvrpca/solvers.hpp"
#include "ctvrpca/synth.hpp"
#include "ctvrpca/tensor.hpp"

namespace ctvrpca {

// ---------------------------------------------------------------------------
// Incoherence

/// Smallest constants for which the three incoherence bounds hold with
/// equality at the maximum, using the top-r singular subspaces:
///   mu_u  = (n1 / r) max_k ||U^T e_k||^2
///   mu_v  = (n2 / r) max_k ||V^T e_k||^2
///   mu_uv = (n1 n2 / r) ||U V^T||_inf^2
struct IncoherenceTriple {
  double mu_u = 0.0;
  double mu_v = 0.0;
  double mu_uv = 0.0;

  double max() const;
};

/// Throws ArgumentError unless 1 <= r <= min(n1, n2).
IncoherenceTriple incoherence_mu(const Matrix& x, Index r);

struct IncoherenceReport {
  Index rank = 0;
  IncoherenceTriple original;
  /// Triples of the gradient maps D_1 X, D_2 X, D_3 X.
  std::array<IncoherenceTriple, 3> gradient;
  /// max over `original`.
  double mu_pcp = 0.0;
  /// max over all three gradient triples.
  double mu_3dctv = 0.0;
};

IncoherenceReport report_mu(const UnfoldedMatrix& x0, Index r);
IncoherenceReport report_mu(const SyntheticInstance& instance, Index r);

// ---------------------------------------------------------------------------
// Recovery metrics. Matrices are hw x s with one band per column.

/// ||estimate - reference||_F / ||reference||_F (0 when both vanish).
double metric_rel_err(const Matrix& estimate, const Matrix& reference);

inline constexpr double kPsnrCap = 99.0;

/// Per-band 10 log10(peak^2 / MSE), capped at kPsnrCap.
Vector band_psnr(const Matrix& estimate, const Matrix& reference,
                 double peak = 1.0);
/// Mean of band_psnr.
double metric_psnr(const Matrix& estimate, const Matrix& reference,
                   double peak = 1.0);
/// 100 * ratio * sqrt(mean_b (RMSE_b / mean_b(reference))^2). Throws
/// ArgumentError when a reference band has zero mean.
double metric_ergas(const Matrix& estimate, const Matrix& reference,
                    double ratio = 1.0);

// ---------------------------------------------------------------------------
// Phase transition

enum class SolverKind { Ctv3d, Pcp };

std::string_view solver_name(SolverKind kind);
/// Parses "3dctv" / "pcp"; throws ArgumentError otherwise.
SolverKind parse_solver(std::string_view name);

/// Runs the named solver on `m`.
DecompositionResult run_solver(SolverKind kind, const UnfoldedMatrix& m,
                               const SolverConfig& cfg);

struct PhaseConfig {
  /// Sparsity values, one grid column each.
  std::vector<double> rho_s;
  /// Rank ratios r / n2, one grid row each; r = max(1, round(ratio * n2)).
  std::vector<double> rank_ratio;
  int trials = 5;
  double threshold = 0.05;
  std::uint64_t seed = 0;
  std::vector<SolverKind> solvers = {SolverKind::Ctv3d, SolverKind::Pcp};
  SolverConfig solver;
  /// Extents, smoother and noise; r, rho_s and seed are set per trial.
  SyntheticSpec base;
  /// Worker threads; 0 means std::thread::hardware_concurrency().
  unsigned threads = 0;

  /// The reduced default grid: 7 x 7 over [0.05, 0.35]^2, 5 trials.
  static PhaseConfig desk_scale();
  void validate() const;
};

struct TrialOutcome {
  std::size_t rank_index = 0;
  std::size_t rho_index = 0;
  int trial = 0;
  SolverKind solver = SolverKind::Ctv3d;
  std::uint64_t seed = 0;
  Index rank = 0;
  double rho_s = 0.0;
  /// NaN when the solver threw.
  double rel_err = 0.0;
  bool success = false;
  bool solver_failed = false;
  int iterations = 0;
};

struct PhaseGrid {
  PhaseConfig config;
  /// Ordered by (rank_index, rho_index, trial, solver position in config).
  std::vector<TrialOutcome> outcomes;

  /// Fraction of trials in the cell with rel_err <= threshold.
  double success_fraction(SolverKind solver, std::size_t rank_index,
                          std::size_t rho_index, double threshold) const;
  double success_fraction(SolverKind solver, std::size_t rank_index,
                          std::size_t rho_index) const;
  /// Mean success fraction over all cells.
  double success_area(SolverKind solver, double threshold) const;
  double success_area(SolverKind solver) const;
};

/// Trial seed as a pure function of (base seed, cell index, trial index).
std::uint64_t trial_seed(std::uint64_t base, std::size_t cell, int trial);

/// Sweeps the grid. Each (cell, trial) generates one instance and runs every
/// configured solver on it; solver exceptions count as failures. The result
/// does not depend on the thread count.
PhaseGrid run_phase_transition(const PhaseConfig& config);

}  // namespace ctvrpca
