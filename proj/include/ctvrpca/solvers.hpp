#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "ctvrpca/instrumentation.hpp"
#include "ctvrpca/tensor.hpp"

namespace ctvrpca {

struct SolverConfig {
  /// Weight of the sparse term; unset means 1 / sqrt(max(n1, n2)).
  std::optional<double> lambda;
  double mu0 = 1e-2;
  /// Penalty growth factor per iteration, > 1.
  double rho = 1.1;
  double eps1 = 1e-6;
  double eps2 = 1e-6;
  int max_iters = 500;
  double mu_cap = 1e10;
  /// Seeds the standard-normal initial X of the 3DCTV solver.
  std::uint64_t seed = 0;

  /// Throws ArgumentError on an out-of-domain field.
  void validate() const;
  double lambda_for(Index n1, Index n2) const;
};

struct IterationDiagnostics {
  int iter = 0;
  // Infinity-norm changes.
  double chg_m = 0.0;
  double chg_x = 0.0;
  double chg_s = 0.0;
  double chg = 0.0;
  // Relative Frobenius changes, capped at 1.
  double rel_err_m = 0.0;
  double rel_err_x = 0.0;
  double rel_err_s = 0.0;
  double objective = 0.0;
  /// ||D_i X - G_i||_F^2 / ||M||_F^2; zero for PCP.
  std::array<double, 3> feas_g{};
  /// Penalty used for this iteration's updates.
  double mu = 0.0;
};

struct DecompositionResult {
  UnfoldedMatrix x;
  UnfoldedMatrix s;
  /// Gradient maps of the 3DCTV run; empty for PCP.
  std::array<UnfoldedMatrix, 3> g;
  std::vector<IterationDiagnostics> diagnostics;
  bool converged = false;
  int iters_used = 0;
  double lambda = 0.0;
  /// SVDs and FFTs executed inside the iteration loop.
  OpCounts ops;
};

/// ADMM for  min sum_i ||D_i X||_* + 3 lambda ||S||_1  s.t.  M = X + S,
/// splitting G_i = D_i X. Each iteration updates G_i (SVT), S (soft
/// threshold), X (FFT solve) and the multipliers, then grows mu. Stops once
/// ||M - X - S||_F^2 / ||M||_F^2 <= eps1 and every
/// ||D_i X - G_i||_F^2 / ||M||_F^2 <= eps2, or after max_iters.
///
/// `m` must carry its tensor extents. Throws ArgumentError for non-finite
/// input or an invalid config, NumericalError (tagged with the iteration)
/// when an SVD or FFT fails.
DecompositionResult solve_3dctv_rpca(const UnfoldedMatrix& m,
                                     const SolverConfig& cfg);

/// Principal component pursuit baseline, min ||X||_* + lambda ||S||_1,
/// by two-block ADMM with the same penalty schedule and stopping rule.
DecompositionResult solve_pcp(const UnfoldedMatrix& m, const SolverConfig& cfg);

/// sum_i ||D_i X||_* + 3 lambda ||S||_1.
double objective_3dctv(const UnfoldedMatrix& x, const UnfoldedMatrix& s,
                       double lambda);

}  // namespace ctvrpca
