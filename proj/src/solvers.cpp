#include "ctvrpca/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ctvrpca/errors.hpp"
#include "ctvrpca/gradient_system.hpp"
#include "ctvrpca/prng.hpp"
#include "ctvrpca/prox.hpp"

namespace ctvrpca {

void SolverConfig::validate() const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (lambda && !positive(*lambda)) {
    throw ArgumentError("lambda must be positive and finite");
  }
  if (!positive(mu0)) throw ArgumentError("mu0 must be positive");
  if (!(rho > 1.0) || !std::isfinite(rho)) {
    throw ArgumentError("rho must be greater than 1");
  }
  if (!positive(eps1) || !positive(eps2)) {
    throw ArgumentError("eps1 and eps2 must be positive");
  }
  if (max_iters <= 0) throw ArgumentError("max_iters must be positive");
  if (!positive(mu_cap) || mu0 > mu_cap) {
    throw ArgumentError("mu_cap must be positive and at least mu0");
  }
}

double SolverConfig::lambda_for(Index n1, Index n2) const {
  if (lambda) return *lambda;
  return 1.0 / std::sqrt(static_cast<double>(std::max(n1, n2)));
}

namespace {

double inf_norm(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

// ||num|| / ||den|| capped at 1, with 0/0 = 0 and x/0 = 1.
double capped_ratio(double num, double den) {
  if (num == 0.0) return 0.0;
  if (den == 0.0) return 1.0;
  return std::min(1.0, num / den);
}

void check_input(const UnfoldedMatrix& m, const SolverConfig& cfg) {
  cfg.validate();
  if (m.rows() == 0 || m.cols() == 0) throw ShapeError("empty input matrix");
  if (!m.values().allFinite()) {
    throw ArgumentError("input matrix has non-finite entries");
  }
}

DecompositionResult zero_result(const UnfoldedMatrix& m, double lambda,
                                bool with_gradients) {
  DecompositionResult r;
  const Matrix zero = Matrix::Zero(m.rows(), m.cols());
  auto wrap = [&](Matrix v) {
    return m.dims() ? UnfoldedMatrix(*m.dims(), std::move(v))
                    : UnfoldedMatrix(std::move(v));
  };
  r.x = wrap(zero);
  r.s = wrap(zero);
  if (with_gradients) {
    for (auto& g : r.g) g = wrap(zero);
  }
  r.converged = true;
  r.lambda = lambda;
  return r;
}

}  // namespace

DecompositionResult solve_3dctv_rpca(const UnfoldedMatrix& m,
                                     const SolverConfig& cfg) {
  check_input(m, cfg);
  const Dims d = m.require_dims();
  const Matrix& mv = m.values();
  const double lambda = cfg.lambda_for(mv.rows(), mv.cols());
  const double norm_m = mv.norm();
  // X = S = G = 0 satisfies every constraint exactly.
  if (norm_m == 0.0) return zero_result(m, lambda, true);
  const double norm_m_sq = norm_m * norm_m;

  GradientSystemSolver system(d);
  const std::array<DiffOperator, 3> ops = {DiffOperator(Mode::Height, d),
                                           DiffOperator(Mode::Width, d),
                                           DiffOperator(Mode::Band, d)};

  Prng rng(cfg.seed);
  Matrix x(mv.rows(), mv.cols());
  for (Index p = 0; p < x.size(); ++p) x.data()[p] = rng.normal();
  Matrix s = Matrix::Zero(mv.rows(), mv.cols());
  std::array<Matrix, 3> g;
  std::array<Matrix, 4> gamma;
  for (auto& gm : gamma) gm = Matrix::Zero(mv.rows(), mv.cols());
  std::array<Matrix, 3> dx;
  for (std::size_t n = 0; n < 3; ++n) ops[n].apply(x, dx[n]);

  DecompositionResult result;
  result.lambda = lambda;
  const OpCounts start = thread_op_counts();
  double mu = cfg.mu0;
  Matrix x_prev;
  Matrix s_prev;
  Matrix residual;

  for (int k = 1; k <= cfg.max_iters; ++k) {
    IterationDiagnostics diag;
    diag.iter = k;
    diag.mu = mu;
    try {
      double nuclear_sum = 0.0;
      for (std::size_t n = 0; n < 3; ++n) {
        SvtResult r = svt(Matrix(dx[n] + gamma[n] / mu), 1.0 / mu);
        g[n] = std::move(r.value.values());
        nuclear_sum += r.shrunk_singular_values.sum();
      }
      s_prev = s;
      s = soft_threshold(Matrix(mv - x + gamma[3] / mu), 3.0 * lambda / mu);
      x_prev = x;
      x = system.solve(mv - s, {&g[0], &g[1], &g[2]},
                       {&gamma[0], &gamma[1], &gamma[2], &gamma[3]}, mu);
      for (std::size_t n = 0; n < 3; ++n) {
        ops[n].apply(x, dx[n]);
        const Matrix gap = dx[n] - g[n];
        gamma[n] += mu * gap;
        diag.feas_g[n] = gap.squaredNorm() / norm_m_sq;
      }
      residual = mv - x - s;
      gamma[3] += mu * residual;
      diag.objective = nuclear_sum + 3.0 * lambda * l1_norm(s);
    } catch (const NumericalError& e) {
      throw NumericalError("3DCTV iteration " + std::to_string(k) + ": " +
                           e.what());
    }
    mu = std::min(cfg.rho * mu, cfg.mu_cap);

    diag.chg_m = inf_norm(residual);
    diag.chg_x = inf_norm(x - x_prev);
    diag.chg_s = inf_norm(s - s_prev);
    diag.chg = std::max({diag.chg_m, diag.chg_x, diag.chg_s});
    const double residual_norm = residual.norm();
    diag.rel_err_m = capped_ratio(residual_norm, norm_m);
    diag.rel_err_x = capped_ratio((x_prev - x).norm(), x_prev.norm());
    diag.rel_err_s = capped_ratio((s_prev - s).norm(), s_prev.norm());
    result.diagnostics.push_back(diag);
    result.iters_used = k;

    const bool feasible =
        residual_norm * residual_norm / norm_m_sq <= cfg.eps1 &&
        std::all_of(diag.feas_g.begin(), diag.feas_g.end(),
                    [&](double v) { return v <= cfg.eps2; });
    if (feasible) {
      result.converged = true;
      break;
    }
  }

  result.ops = thread_op_counts() - start;
  result.x = UnfoldedMatrix(d, std::move(x));
  result.s = UnfoldedMatrix(d, std::move(s));
  for (std::size_t n = 0; n < 3; ++n) {
    result.g[n] = UnfoldedMatrix(d, std::move(g[n]));
  }
  return result;
}

DecompositionResult solve_pcp(const UnfoldedMatrix& m, const SolverConfig& cfg) {
  check_input(m, cfg);
  const Matrix& mv = m.values();
  const double lambda = cfg.lambda_for(mv.rows(), mv.cols());
  const double norm_m = mv.norm();
  if (norm_m == 0.0) return zero_result(m, lambda, false);
  const double norm_m_sq = norm_m * norm_m;

  Matrix x = Matrix::Zero(mv.rows(), mv.cols());
  Matrix s = Matrix::Zero(mv.rows(), mv.cols());
  Matrix gamma = Matrix::Zero(mv.rows(), mv.cols());
  DecompositionResult result;
  result.lambda = lambda;
  const OpCounts start = thread_op_counts();
  double mu = cfg.mu0;
  Matrix x_prev;
  Matrix s_prev;
  Matrix residual;

  for (int k = 1; k <= cfg.max_iters; ++k) {
    IterationDiagnostics diag;
    diag.iter = k;
    diag.mu = mu;
    double nuclear = 0.0;
    x_prev = x;
    try {
      SvtResult r = svt(Matrix(mv - s + gamma / mu), 1.0 / mu);
      x = std::move(r.value.values());
      nuclear = r.shrunk_singular_values.sum();
    } catch (const NumericalError& e) {
      throw NumericalError("PCP iteration " + std::to_string(k) + ": " +
                           e.what());
    }
    s_prev = s;
    s = soft_threshold(Matrix(mv - x + gamma / mu), lambda / mu);
    residual = mv - x - s;
    gamma += mu * residual;
    mu = std::min(cfg.rho * mu, cfg.mu_cap);

    diag.objective = nuclear + lambda * l1_norm(s);
    diag.chg_m = inf_norm(residual);
    diag.chg_x = inf_norm(x - x_prev);
    diag.chg_s = inf_norm(s - s_prev);
    diag.chg = std::max({diag.chg_m, diag.chg_x, diag.chg_s});
    const double residual_norm = residual.norm();
    diag.rel_err_m = capped_ratio(residual_norm, norm_m);
    diag.rel_err_x = capped_ratio((x_prev - x).norm(), x_prev.norm());
    diag.rel_err_s = capped_ratio((s_prev - s).norm(), s_prev.norm());
    result.diagnostics.push_back(diag);
    result.iters_used = k;
    if (residual_norm * residual_norm / norm_m_sq <= cfg.eps1) {
      result.converged = true;
      break;
    }
  }

  result.ops = thread_op_counts() - start;
  auto wrap = [&](Matrix v) {
    return m.dims() ? UnfoldedMatrix(*m.dims(), std::move(v))
                    : UnfoldedMatrix(std::move(v));
  };
  result.x = wrap(std::move(x));
  result.s = wrap(std::move(s));
  return result;
}

double objective_3dctv(const UnfoldedMatrix& x, const UnfoldedMatrix& s,
                       double lambda) {
  if (x.rows() != s.rows() || x.cols() != s.cols()) {
    throw ShapeError("objective: X and S shapes differ");
  }
  return ctv3d_norm(x) + 3.0 * lambda * l1_norm(s);
}

}  // namespace ctvrpca
