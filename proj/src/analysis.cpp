#include "ctvrpca/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "ctvrpca/errors.hpp"
#include "linalg.hpp"

namespace ctvrpca {

double IncoherenceTriple::max() const { return std::max({mu_u, mu_v, mu_uv}); }

IncoherenceTriple incoherence_mu(const Matrix& x, Index r) {
  const Index n1 = x.rows();
  const Index n2 = x.cols();
  if (r < 1 || r > std::min(n1, n2)) {
    throw ArgumentError("incoherence rank " + std::to_string(r) +
                        " outside [1, min(n1, n2)]");
  }
  const detail::ThinSvd svd = detail::thin_svd(x);
  const auto u = svd.u.leftCols(r);
  const auto v = svd.v.leftCols(r);
  const double rd = static_cast<double>(r);
  IncoherenceTriple t;
  t.mu_u = static_cast<double>(n1) / rd * u.rowwise().squaredNorm().maxCoeff();
  t.mu_v = static_cast<double>(n2) / rd * v.rowwise().squaredNorm().maxCoeff();
  const double uv_inf = (u * v.transpose()).cwiseAbs().maxCoeff();
  t.mu_uv = static_cast<double>(n1) * static_cast<double>(n2) / rd * uv_inf *
            uv_inf;
  return t;
}

IncoherenceReport report_mu(const UnfoldedMatrix& x0, Index r) {
  const Dims& d = x0.require_dims();
  IncoherenceReport rep;
  rep.rank = r;
  rep.original = incoherence_mu(x0.values(), r);
  rep.mu_pcp = rep.original.max();
  rep.mu_3dctv = 0.0;
  for (Mode m : kModes) {
    auto& t = rep.gradient[static_cast<std::size_t>(m)];
    t = incoherence_mu(DiffOperator(m, d).apply(x0.values()), r);
    rep.mu_3dctv = std::max(rep.mu_3dctv, t.max());
  }
  return rep;
}

IncoherenceReport report_mu(const SyntheticInstance& instance, Index r) {
  return report_mu(instance.x0, r);
}

namespace {

void same_shape(const Matrix& a, const Matrix& b, const char* who) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(who) + ": operand shapes differ");
  }
}

}  // namespace

double metric_rel_err(const Matrix& estimate, const Matrix& reference) {
  same_shape(estimate, reference, "metric_rel_err");
  const double num = (estimate - reference).norm();
  const double den = reference.norm();
  if (den == 0.0) {
    return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return num / den;
}

Vector band_psnr(const Matrix& estimate, const Matrix& reference, double peak) {
  same_shape(estimate, reference, "metric_psnr");
  Vector out(reference.cols());
  for (Index b = 0; b < reference.cols(); ++b) {
    const double mse = (estimate.col(b) - reference.col(b)).squaredNorm() /
                       static_cast<double>(reference.rows());
    out(b) = mse == 0.0 ? kPsnrCap
                        : std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
  }
  return out;
}

double metric_psnr(const Matrix& estimate, const Matrix& reference,
                   double peak) {
  return band_psnr(estimate, reference, peak).mean();
}

double metric_ergas(const Matrix& estimate, const Matrix& reference,
                    double ratio) {
  same_shape(estimate, reference, "metric_ergas");
  const auto n = static_cast<double>(reference.rows());
  double acc = 0.0;
  for (Index b = 0; b < reference.cols(); ++b) {
    const double mean = reference.col(b).sum() / n;
    if (mean == 0.0) {
      throw ArgumentError("metric_ergas: reference band " + std::to_string(b) +
                          " has zero mean");
    }
    const double rmse =
        std::sqrt((estimate.col(b) - reference.col(b)).squaredNorm() / n);
    acc += (rmse / mean) * (rmse / mean);
  }
  return 100.0 * ratio * std::sqrt(acc / static_cast<double>(reference.cols()));
}

std::string_view solver_name(SolverKind kind) {
  return kind == SolverKind::Ctv3d ? "3dctv" : "pcp";
}

SolverKind parse_solver(std::string_view name) {
  if (name == "3dctv") return SolverKind::Ctv3d;
  if (name == "pcp") return SolverKind::Pcp;
  throw ArgumentError("unknown solver '" + std::string(name) +
                      "' (expected 3dctv or pcp)");
}

DecompositionResult run_solver(SolverKind kind, const UnfoldedMatrix& m,
                               const SolverConfig& cfg) {
  return kind == SolverKind::Ctv3d ? solve_3dctv_rpca(m, cfg)
                                   : solve_pcp(m, cfg);
}

PhaseConfig PhaseConfig::desk_scale() {
  PhaseConfig c;
  for (int t = 0; t < 7; ++t) {
    const double v = 0.05 + 0.05 * t;
    c.rho_s.push_back(v);
    c.rank_ratio.push_back(v);
  }
  c.trials = 5;
  c.threshold = 0.05;
  return c;
}

namespace {

Index cell_rank(double ratio, Index n2) {
  return std::max<Index>(1, std::llround(ratio * static_cast<double>(n2)));
}

}  // namespace

void PhaseConfig::validate() const {
  if (rho_s.empty() || rank_ratio.empty()) {
    throw ArgumentError("phase grid axes must be non-empty");
  }
  if (trials < 1) throw ArgumentError("trials must be at least 1");
  if (!(threshold > 0.0)) throw ArgumentError("threshold must be positive");
  if (solvers.empty()) throw ArgumentError("no solvers selected");
  solver.validate();
  for (double ratio : rank_ratio) {
    if (!(ratio >= 0.0)) throw ArgumentError("rank ratios must be nonnegative");
    SyntheticSpec probe = base;
    probe.r = cell_rank(ratio, base.s);
    for (double rho : rho_s) {
      probe.rho_s = rho;
      probe.validate();
    }
  }
}

double PhaseGrid::success_fraction(SolverKind solver, std::size_t rank_index,
                                   std::size_t rho_index,
                                   double threshold) const {
  int hits = 0;
  int total = 0;
  for (const auto& o : outcomes) {
    if (o.solver != solver || o.rank_index != rank_index ||
        o.rho_index != rho_index) {
      continue;
    }
    ++total;
    if (!o.solver_failed && o.rel_err <= threshold) ++hits;
  }
  return total == 0 ? 0.0 : static_cast<double>(hits) / total;
}

double PhaseGrid::success_fraction(SolverKind solver, std::size_t rank_index,
                                   std::size_t rho_index) const {
  return success_fraction(solver, rank_index, rho_index, config.threshold);
}

double PhaseGrid::success_area(SolverKind solver, double threshold) const {
  double acc = 0.0;
  for (std::size_t a = 0; a < config.rank_ratio.size(); ++a) {
    for (std::size_t b = 0; b < config.rho_s.size(); ++b) {
      acc += success_fraction(solver, a, b, threshold);
    }
  }
  return acc /
         static_cast<double>(config.rank_ratio.size() * config.rho_s.size());
}

double PhaseGrid::success_area(SolverKind solver) const {
  return success_area(solver, config.threshold);
}

std::uint64_t trial_seed(std::uint64_t base, std::size_t cell, int trial) {
  return derive_seed(base, cell, static_cast<std::uint64_t>(trial));
}

PhaseGrid run_phase_transition(const PhaseConfig& config) {
  config.validate();
  const std::size_t cols = config.rho_s.size();
  const std::size_t cells = config.rank_ratio.size() * cols;
  const auto trials = static_cast<std::size_t>(config.trials);
  const std::size_t per_task = config.solvers.size();
  const std::size_t tasks = cells * trials;

  PhaseGrid grid;
  grid.config = config;
  grid.outcomes.resize(tasks * per_task);

  auto run_task = [&](std::size_t task) {
    const std::size_t cell = task / trials;
    const int trial = static_cast<int>(task % trials);
    const std::size_t rank_index = cell / cols;
    const std::size_t rho_index = cell % cols;
    const std::uint64_t seed = trial_seed(config.seed, cell, trial);

    SyntheticSpec spec = config.base;
    spec.r = cell_rank(config.rank_ratio[rank_index], spec.s);
    spec.rho_s = config.rho_s[rho_index];
    spec.seed = seed;
    const SyntheticInstance inst = generate(spec);
    SolverConfig cfg = config.solver;
    cfg.seed = seed;

    for (std::size_t k = 0; k < per_task; ++k) {
      TrialOutcome& o = grid.outcomes[task * per_task + k];
      o.rank_index = rank_index;
      o.rho_index = rho_index;
      o.trial = trial;
      o.solver = config.solvers[k];
      o.seed = seed;
      o.rank = spec.r;
      o.rho_s = spec.rho_s;
      try {
        const DecompositionResult res = run_solver(o.solver, inst.m, cfg);
        o.rel_err = metric_rel_err(res.x.values(), inst.x0.values());
        o.iterations = res.iters_used;
        o.success = o.rel_err <= config.threshold;
      } catch (const std::exception&) {
        o.rel_err = std::numeric_limits<double>::quiet_NaN();
        o.solver_failed = true;
        o.success = false;
      }
    }
  };

  unsigned threads = config.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, tasks));
  if (threads <= 1) {
    for (std::size_t t = 0; t < tasks; ++t) run_task(t);
    return grid;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t t = next++; t < tasks; t = next++) {
        try {
          run_task(t);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
  return grid;
}

}  // namespace ctvrpca
