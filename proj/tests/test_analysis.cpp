#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "ctvrpca/analysis.hpp"
#include "ctvrpca/errors.hpp"
#include "oracles.hpp"

using namespace ctvrpca;

namespace {

// Naive per-band loops, independent of the Eigen reductions in the library.
double naive_psnr(const Matrix& e, const Matrix& r, double peak) {
  double acc = 0.0;
  for (Index c = 0; c < r.cols(); ++c) {
    double mse = 0.0;
    for (Index p = 0; p < r.rows(); ++p) {
      const double diff = e(p, c) - r(p, c);
      mse += diff * diff;
    }
    mse /= static_cast<double>(r.rows());
    acc += 10.0 * std::log10(peak * peak / mse);
  }
  return acc / static_cast<double>(r.cols());
}

double naive_ergas(const Matrix& e, const Matrix& r, double ratio) {
  double acc = 0.0;
  for (Index c = 0; c < r.cols(); ++c) {
    double mse = 0.0, mean = 0.0;
    for (Index p = 0; p < r.rows(); ++p) {
      const double diff = e(p, c) - r(p, c);
      mse += diff * diff;
      mean += r(p, c);
    }
    mse /= static_cast<double>(r.rows());
    mean /= static_cast<double>(r.rows());
    acc += mse / (mean * mean);
  }
  return 100.0 * ratio * std::sqrt(acc / static_cast<double>(r.cols()));
}

}  // namespace

TEST(Incoherence, FlatRankOneIsOne) {
  const Vector u = Vector::Constant(12, 0.5);
  Vector v = Vector::Constant(8, 2.0);
  for (Index c = 1; c < 8; c += 2) v(c) = -2.0;
  const IncoherenceTriple t = incoherence_mu(u * v.transpose(), 1);
  EXPECT_NEAR(t.mu_u, 1.0, 1e-12);
  EXPECT_NEAR(t.mu_v, 1.0, 1e-12);
  EXPECT_NEAR(t.mu_uv, 1.0, 1e-12);
}

TEST(Incoherence, DiagonalSlab) {
  const Index n1 = 10, n2 = 6, r = 3;
  Matrix x = Matrix::Zero(n1, n2);
  for (Index i = 0; i < r; ++i) x(i, i) = 3.0 - static_cast<double>(i);
  const IncoherenceTriple t = incoherence_mu(x, r);
  EXPECT_NEAR(t.mu_u, double(n1) / double(r), 1e-10);
  EXPECT_NEAR(t.mu_v, double(n2) / double(r), 1e-10);
}

TEST(Incoherence, ScaleInvariant) {
  std::mt19937_64 rng(4);
  const Matrix x = oracle::random_matrix(rng, 20, 3) * oracle::random_matrix(rng, 3, 15);
  const IncoherenceTriple a = incoherence_mu(x, 3);
  for (double c : {-2.5, 1e-3, 7.0}) {
    const IncoherenceTriple b = incoherence_mu(c * x, 3);
    EXPECT_NEAR(a.mu_u, b.mu_u, 1e-10);
    EXPECT_NEAR(a.mu_v, b.mu_v, 1e-10);
    EXPECT_NEAR(a.mu_uv, b.mu_uv, 1e-10);
  }
}

TEST(Incoherence, AtLeastOne) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    const Matrix x = oracle::random_matrix(rng, 15, 9);
    const IncoherenceTriple m = incoherence_mu(x, 1 + t % 5);
    EXPECT_GE(m.mu_u, 1.0 - 1e-12);
    EXPECT_GE(m.mu_v, 1.0 - 1e-12);
  }
}

TEST(Incoherence, RankOutOfRange) {
  EXPECT_THROW(incoherence_mu(Matrix::Ones(4, 3), 0), ArgumentError);
  EXPECT_THROW(incoherence_mu(Matrix::Ones(4, 3), 4), ArgumentError);
}

TEST(Incoherence, ReportAggregates) {
  SyntheticSpec spec;
  spec.h = spec.w = 8;
  spec.s = 30;
  spec.r = 3;
  spec.seed = 2;
  const IncoherenceReport rep = report_mu(generate(spec), 3);
  EXPECT_EQ(rep.rank, 3);
  EXPECT_EQ(rep.mu_pcp, rep.original.max());
  double g = 0.0;
  for (const auto& t : rep.gradient) g = std::max({g, t.mu_u, t.mu_v, t.mu_uv});
  EXPECT_EQ(rep.mu_3dctv, g);
  EXPECT_EQ(rep.original.max(),
            std::max({rep.original.mu_u, rep.original.mu_v, rep.original.mu_uv}));
}

TEST(Incoherence, FlatRankOneReport) {
  // Tensor whose every mode has a flat rank-one gradient: alternating
  // signs along each mode make each gradient map a flat rank-one matrix.
  const Dims d{4, 4, 4};
  Matrix x(d.pixels(), d.s);
  for (Index k = 0; k < d.s; ++k)
    for (Index j = 0; j < d.w; ++j)
      for (Index i = 0; i < d.h; ++i) {
        const double a = (i % 2 ? -1.0 : 1.0);
        const double b = (j % 2 ? -1.0 : 1.0);
        const double c = (k % 2 ? -1.0 : 1.0);
        x(j * d.h + i, k) = a * b * c;
      }
  const IncoherenceReport rep = report_mu(UnfoldedMatrix(d, x), 1);
  EXPECT_NEAR(rep.mu_pcp, 1.0, 1e-12);
  EXPECT_NEAR(rep.mu_3dctv, 1.0, 1e-12);
}

TEST(Metrics, RelErr) {
  const Matrix a = Matrix::Ones(3, 2);
  EXPECT_EQ(metric_rel_err(a, a), 0.0);
  EXPECT_NEAR(metric_rel_err(2.0 * a, a), 1.0, 1e-15);
  EXPECT_EQ(metric_rel_err(Matrix::Zero(2, 2), Matrix::Zero(2, 2)), 0.0);
  EXPECT_THROW(metric_rel_err(Matrix::Ones(2, 2), Matrix::Ones(3, 2)), ShapeError);
}

TEST(Metrics, IdenticalInputs) {
  std::mt19937_64 rng(1);
  const Matrix a = oracle::random_matrix(rng, 5, 4).cwiseAbs() + Matrix::Ones(5, 4);
  EXPECT_EQ(metric_psnr(a, a), kPsnrCap);
  EXPECT_EQ(metric_ergas(a, a), 0.0);
}

TEST(Metrics, TwentyDecibelBand) {
  const Matrix x0 = Matrix::Constant(6, 3, 0.5);
  Matrix xh = x0;
  xh.col(1).array() += 0.1;
  const Vector b = band_psnr(xh, x0);
  EXPECT_NEAR(b(1), 20.0, 1e-9);
  EXPECT_EQ(b(0), kPsnrCap);
}

TEST(Metrics, MatchNaiveLoops) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 5; ++t) {
    const Matrix r = oracle::random_matrix(rng, 30, 7).cwiseAbs() + Matrix::Constant(30, 7, 0.2);
    const Matrix e = r + 0.05 * oracle::random_matrix(rng, 30, 7);
    EXPECT_NEAR(metric_psnr(e, r, 2.0), naive_psnr(e, r, 2.0), 1e-10);
    EXPECT_NEAR(metric_ergas(e, r, 0.25), naive_ergas(e, r, 0.25), 1e-10);
  }
}

TEST(Metrics, ErgasZeroMeanBand) {
  Matrix r = Matrix::Ones(4, 2);
  r.col(1) << 1.0, -1.0, 2.0, -2.0;
  EXPECT_THROW(metric_ergas(r, r), ArgumentError);
}

TEST(Phase, SolverNames) {
  EXPECT_EQ(parse_solver("3dctv"), SolverKind::Ctv3d);
  EXPECT_EQ(parse_solver("pcp"), SolverKind::Pcp);
  EXPECT_EQ(solver_name(SolverKind::Pcp), "pcp");
  EXPECT_THROW(parse_solver("rpca"), ArgumentError);
}

TEST(Phase, DeskScaleDefaults) {
  const PhaseConfig c = PhaseConfig::desk_scale();
  ASSERT_EQ(c.rho_s.size(), 7u);
  ASSERT_EQ(c.rank_ratio.size(), 7u);
  EXPECT_DOUBLE_EQ(c.rho_s.front(), 0.05);
  EXPECT_DOUBLE_EQ(c.rho_s.back(), 0.35);
  EXPECT_DOUBLE_EQ(c.rank_ratio.front(), 0.05);
  EXPECT_DOUBLE_EQ(c.rank_ratio.back(), 0.35);
  EXPECT_EQ(c.trials, 5);
  EXPECT_DOUBLE_EQ(c.threshold, 0.05);
}

namespace {

PhaseConfig tiny_phase() {
  PhaseConfig c;
  c.rho_s = {0.0, 0.1};
  c.rank_ratio = {0.1, 0.3};
  c.trials = 2;
  c.seed = 9;
  c.base.h = c.base.w = 6;
  c.base.s = 10;
  c.solver.max_iters = 200;
  return c;
}

}  // namespace

TEST(Phase, IndependentOfThreadCount) {
  PhaseConfig c = tiny_phase();
  c.threads = 1;
  const PhaseGrid a = run_phase_transition(c);
  c.threads = 3;
  const PhaseGrid b = run_phase_transition(c);
  ASSERT_EQ(a.outcomes.size(), 2u * 2u * 2u * 2u);
  ASSERT_EQ(a.outcomes.size(), b.outcomes.size());
  for (std::size_t q = 0; q < a.outcomes.size(); ++q) {
    EXPECT_EQ(a.outcomes[q].seed, b.outcomes[q].seed);
    EXPECT_EQ(a.outcomes[q].rel_err, b.outcomes[q].rel_err);
    EXPECT_EQ(a.outcomes[q].iterations, b.outcomes[q].iterations);
  }
}

TEST(Phase, FractionsAndAreas) {
  const PhaseGrid g = run_phase_transition(tiny_phase());
  for (SolverKind k : {SolverKind::Ctv3d, SolverKind::Pcp}) {
    double mean = 0.0;
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 0; b < 2; ++b) {
        const double f = g.success_fraction(k, a, b);
        EXPECT_GE(f, 0.0);
        EXPECT_LE(f, 1.0);
        // Tightening the threshold never adds successes.
        EXPECT_LE(g.success_fraction(k, a, b, 1e-6), f);
        mean += f;
      }
    EXPECT_DOUBLE_EQ(g.success_area(k), mean / 4.0);
  }
  // Uncorrupted low-rank cell recovers.
  EXPECT_EQ(g.success_fraction(SolverKind::Pcp, 0, 0), 1.0);
  EXPECT_EQ(g.success_fraction(SolverKind::Ctv3d, 0, 0), 1.0);
}

TEST(Phase, TrialSeedIsPure) {
  EXPECT_EQ(trial_seed(1, 2, 3), trial_seed(1, 2, 3));
  EXPECT_NE(trial_seed(1, 2, 3), trial_seed(1, 3, 2));
}

TEST(Phase, IterationCapHonored) {
  PhaseConfig c = tiny_phase();
  c.rho_s = {0.3};
  c.rank_ratio = {0.3};
  c.trials = 1;
  c.solver.max_iters = 1;
  const PhaseGrid g = run_phase_transition(c);
  for (const auto& o : g.outcomes) EXPECT_EQ(o.iterations, 1);
}

TEST(Phase, ValidatesConfig) {
  PhaseConfig c = tiny_phase();
  c.trials = 0;
  EXPECT_THROW(run_phase_transition(c), ArgumentError);
  c = tiny_phase();
  c.rho_s.clear();
  EXPECT_THROW(run_phase_transition(c), ArgumentError);
}
