#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "ctvrpca/errors.hpp"
#include "ctvrpca/tensor.hpp"
#include "oracles.hpp"

using namespace ctvrpca;

namespace {

Tensor3 random_tensor(std::mt19937_64& rng, Dims d) {
  std::normal_distribution<double> n01;
  std::vector<double> v(static_cast<std::size_t>(d.size()));
  for (auto& x : v) x = n01(rng);
  return Tensor3(d, std::move(v));
}

bool bitwise_equal(const Tensor3& a, const Tensor3& b) {
  return a.dims() == b.dims() &&
         std::memcmp(a.data().data(), b.data().data(),
                     a.data().size() * sizeof(double)) == 0;
}

}  // namespace

TEST(Tensor3, LayoutOffsets) {
  const Dims d{3, 4, 5};
  EXPECT_EQ(Tensor3::offset(d, 0, 0, 0), 0);
  EXPECT_EQ(Tensor3::offset(d, 1, 0, 0), 1);
  EXPECT_EQ(Tensor3::offset(d, 0, 1, 0), 3);
  EXPECT_EQ(Tensor3::offset(d, 0, 0, 1), 12);
  EXPECT_EQ(Tensor3::offset(d, 2, 3, 4), (4 * 4 + 3) * 3 + 2);
}

TEST(Tensor3, RejectsBadBuffers) {
  EXPECT_THROW(Tensor3(Dims{2, 2, 2}, std::vector<double>(7)), ShapeError);
  EXPECT_THROW(Tensor3(Dims{0, 2, 2}), ShapeError);
  std::vector<double> v(8, 1.0);
  v[3] = std::nan("");
  EXPECT_THROW(Tensor3(Dims{2, 2, 2}, v), ArgumentError);
}

TEST(Unfold, Singleton) {
  const Tensor3 t(Dims{1, 1, 1}, {5.0});
  const UnfoldedMatrix m = unfold(t);
  ASSERT_EQ(m.rows(), 1);
  ASSERT_EQ(m.cols(), 1);
  EXPECT_EQ(m.values()(0, 0), 5.0);
}

TEST(Unfold, IndexBookkeeping) {
  // t(i, 0, k) = i + 2k on a 2x1x2 tensor.
  Tensor3 t(Dims{2, 1, 2});
  for (Index i = 0; i < 2; ++i)
    for (Index k = 0; k < 2; ++k) t(i, 0, k) = static_cast<double>(i + 2 * k);
  const Matrix& m = unfold(t).values();
  EXPECT_EQ(m(0, 0), 0.0);
  EXPECT_EQ(m(0, 1), 2.0);
  EXPECT_EQ(m(1, 0), 1.0);
  EXPECT_EQ(m(1, 1), 3.0);
}

TEST(Unfold, RowIndexIsJTimesHPlusI) {
  std::mt19937_64 rng(3);
  const Tensor3 t = random_tensor(rng, Dims{3, 4, 5});
  const Matrix& m = unfold(t).values();
  for (Index k = 0; k < 5; ++k)
    for (Index j = 0; j < 4; ++j)
      for (Index i = 0; i < 3; ++i) EXPECT_EQ(m(j * 3 + i, k), t(i, j, k));
}

TEST(Fold, RoundTripIsBitwiseOnRandomTensors) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> extent(1, 6);
  for (int trial = 0; trial < 100; ++trial) {
    const Dims d{extent(rng), extent(rng), extent(rng)};
    const Tensor3 t = random_tensor(rng, d);
    EXPECT_TRUE(bitwise_equal(fold(unfold(t)), t));
    const UnfoldedMatrix m = unfold(t);
    const UnfoldedMatrix back = unfold(fold(m));
    EXPECT_EQ(std::memcmp(back.values().data(), m.values().data(),
                          sizeof(double) * static_cast<std::size_t>(m.values().size())),
              0);
  }
}

TEST(Fold, MissingProvenanceIsShapeError) {
  const UnfoldedMatrix raw(Matrix::Ones(4, 3));
  EXPECT_THROW(fold(raw), ShapeError);
  EXPECT_THROW(UnfoldedMatrix(Dims{2, 2, 2}, Matrix::Ones(4, 3)), ShapeError);
}

TEST(Grad, ConstantTensorHasZeroGradient) {
  const Dims d{3, 4, 5};
  const UnfoldedMatrix x(d, Matrix::Constant(12, 5, 2.5));
  for (Mode m : kModes) {
    EXPECT_EQ(grad(DiffOperator(m, d), x).values().cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Grad, HeightTwoWrapIsAntisymmetric) {
  const Dims d{2, 1, 1};
  const UnfoldedMatrix x(d, (Matrix(2, 1) << 1.5, 4.0).finished());
  const Matrix g = grad(DiffOperator(Mode::Height, d), x).values();
  EXPECT_DOUBLE_EQ(g(0, 0), 4.0 - 1.5);
  EXPECT_DOUBLE_EQ(g(1, 0), 1.5 - 4.0);
}

TEST(Grad, MatchesDenseOperator) {
  std::mt19937_64 rng(5);
  for (const Dims d : {Dims{4, 4, 3}, Dims{3, 5, 2}, Dims{1, 3, 4}}) {
    const UnfoldedMatrix x = oracle::random_unfolded(rng, d);
    for (Mode m : kModes) {
      const Matrix dense = oracle::dense_difference(d, m);
      const Vector expect = dense * oracle::vec(x.values());
      const Matrix got = grad(DiffOperator(m, d), x).values();
      EXPECT_LE((oracle::vec(got) - expect).cwiseAbs().maxCoeff(), 1e-14);
      const Vector expect_adj = dense.transpose() * oracle::vec(x.values());
      const Matrix got_adj = grad_adjoint(DiffOperator(m, d), x).values();
      EXPECT_LE((oracle::vec(got_adj) - expect_adj).cwiseAbs().maxCoeff(), 1e-14);
    }
  }
}

TEST(Grad, PeriodicOperatorRowsAndColumnsSumToZero) {
  const Dims d{3, 4, 2};
  for (Mode m : kModes) {
    const Matrix a = oracle::dense_difference(d, m);
    // Same operator, assembled column by column from the library.
    Matrix lib(d.size(), d.size());
    const DiffOperator op(m, d);
    for (Index c = 0; c < d.size(); ++c) {
      Matrix e = Matrix::Zero(d.pixels(), d.s);
      e.data()[c] = 1.0;
      lib.col(c) = oracle::vec(op.apply(e));
    }
    EXPECT_EQ((lib - a).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(lib.rowwise().sum().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(lib.colwise().sum().cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Grad, RankOfBandGradientAgainstDenseRoute) {
  // Low-rank X on 4x4x3; compare the numerical rank of D_3 X from the
  // library with the dense circular and non-circular operators.
  std::mt19937_64 rng(17);
  const Dims d{4, 4, 3};
  const Matrix x = oracle::random_matrix(rng, 16, 2) * oracle::random_matrix(rng, 2, 3);
  const UnfoldedMatrix xu(d, x);
  const Matrix g3 = grad(DiffOperator(Mode::Band, d), xu).values();
  const Index lib_rank = oracle::rank_of(oracle::jacobi_singular_values(g3));
  const Vector dense = oracle::dense_difference(d, Mode::Band) * oracle::vec(x);
  const Index dense_rank =
      oracle::rank_of(oracle::jacobi_singular_values(oracle::unvec(dense, d)));
  const Vector open = oracle::dense_difference(d, Mode::Band, false) * oracle::vec(x);
  const Index open_rank =
      oracle::rank_of(oracle::jacobi_singular_values(oracle::unvec(open, d)));
  const Index x_rank = oracle::rank_of(oracle::jacobi_singular_values(x));
  EXPECT_EQ(lib_rank, dense_rank);
  EXPECT_LE(std::abs(lib_rank - x_rank), 1);
  EXPECT_LE(std::abs(open_rank - x_rank), 1);
}

TEST(Grad, SpatialGradientRankStaysWithinOneOfX) {
  std::mt19937_64 rng(23);
  const Dims d{5, 6, 8};
  for (int r = 1; r <= 4; ++r) {
    const Matrix x = oracle::random_matrix(rng, 30, r) * oracle::random_matrix(rng, r, 8);
    const UnfoldedMatrix xu(d, x);
    for (Mode m : kModes) {
      const Index gr = numerical_rank(grad(DiffOperator(m, d), xu).values());
      EXPECT_LE(std::abs(gr - r), 1) << "mode " << mode_number(m);
    }
  }
}

TEST(Grad, AdjointIdentityOnRandomPairs) {
  std::mt19937_64 rng(29);
  const Dims d{3, 3, 4};
  for (Mode m : kModes) {
    const DiffOperator op(m, d);
    for (int trial = 0; trial < 20; ++trial) {
      const UnfoldedMatrix x = oracle::random_unfolded(rng, d);
      const UnfoldedMatrix y = oracle::random_unfolded(rng, d);
      const double lhs = oracle::frob_inner(grad(op, x).values(), y.values());
      const double rhs = oracle::frob_inner(x.values(), grad_adjoint(op, y).values());
      EXPECT_LE(std::abs(lhs - rhs),
                1e-12 * x.values().norm() * y.values().norm());
    }
  }
}

TEST(Grad, AdjointOfAdjointIsOperator) {
  // <D x, y> = <x, D^T y> makes (D^T)^T = D; check via the dense transpose.
  std::mt19937_64 rng(31);
  const Dims d{3, 2, 4};
  for (Mode m : kModes) {
    const DiffOperator op(m, d);
    const Matrix at = oracle::dense_difference(d, m).transpose();
    Matrix adj(d.size(), d.size());
    for (Index c = 0; c < d.size(); ++c) {
      Matrix e = Matrix::Zero(d.pixels(), d.s);
      e.data()[c] = 1.0;
      adj.col(c) = oracle::vec(op.apply_adjoint(e));
    }
    const UnfoldedMatrix x = oracle::random_unfolded(rng, d);
    const Vector via_transpose = adj.transpose() * oracle::vec(x.values());
    EXPECT_LE((via_transpose - oracle::vec(op.apply(x.values()))).cwiseAbs().maxCoeff(),
              1e-14);
    EXPECT_EQ((adj - at).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Grad, ZeroInputGivesZeroAdjoint) {
  const Dims d{2, 3, 4};
  for (Mode m : kModes) {
    const Matrix out = DiffOperator(m, d).apply_adjoint(Matrix::Zero(6, 4));
    EXPECT_EQ(out.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Grad, ShapeMismatchThrows) {
  const DiffOperator op(Mode::Height, Dims{2, 2, 2});
  EXPECT_THROW(grad(op, UnfoldedMatrix(Dims{2, 3, 2})), ShapeError);
  EXPECT_THROW(grad(op, UnfoldedMatrix(Matrix::Zero(4, 2))), ShapeError);
  EXPECT_THROW(op.apply(Matrix::Zero(5, 2)), ShapeError);
}

TEST(Grad, Linearity) {
  std::mt19937_64 rng(37);
  const Dims d{4, 3, 5};
  for (Mode m : kModes) {
    const DiffOperator op(m, d);
    const Matrix x = oracle::random_matrix(rng, 12, 5);
    const Matrix y = oracle::random_matrix(rng, 12, 5);
    const double a = 1.7, b = -0.3;
    const Matrix lhs = op.apply(a * x + b * y);
    const Matrix rhs = a * op.apply(x) + b * op.apply(y);
    EXPECT_LE((lhs - rhs).norm(), 1e-12 * rhs.norm());
  }
}

TEST(NuclearNorm, IdentityAndRankOne) {
  EXPECT_NEAR(nuclear_norm(Matrix::Identity(6, 6)), 6.0, 1e-12);
  Vector u(4), v(3);
  u << 1, -2, 0.5, 3;
  v << 2, 0, -1;
  EXPECT_NEAR(nuclear_norm(Matrix(u * v.transpose())), u.norm() * v.norm(), 1e-12);
}

TEST(NuclearNorm, AgreesWithJacobiOracle) {
  std::mt19937_64 rng(41);
  const Matrix x = oracle::random_matrix(rng, 5, 4);
  const Vector sigma = oracle::jacobi_singular_values(x);
  EXPECT_NEAR(nuclear_norm(x), sigma.sum(), 1e-12 * sigma.sum());
}

TEST(NuclearNorm, NonFiniteInputIsNumericalError) {
  Matrix x = Matrix::Ones(3, 3);
  x(1, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(nuclear_norm(x), NumericalError);
}

TEST(Norms, ConstantTensorHasZeroVariation) {
  const Dims d{3, 3, 3};
  const Tensor3 t(d, std::vector<double>(27, 0.75));
  EXPECT_EQ(tv3d_norm(t), 0.0);
  EXPECT_NEAR(ctv3d_norm(unfold(t)), 0.0, 1e-14);
}

TEST(Norms, FrobeniusNuclearL1Chain) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    const Dims d{4, 3, 5};
    const UnfoldedMatrix x = oracle::random_unfolded(rng, d);
    for (Mode m : kModes) {
      const Matrix g = DiffOperator(m, d).apply(x.values());
      const double fro = g.norm();
      const double nuc = nuclear_norm(g);
      const double l1 = l1_norm(g);
      EXPECT_LE(fro, nuc * (1 + 1e-12));
      EXPECT_LE(nuc, l1 * (1 + 1e-12));
    }
  }
}

TEST(Norms, Compositions) {
  std::mt19937_64 rng(47);
  const Dims d{3, 4, 3};
  const UnfoldedMatrix x = oracle::random_unfolded(rng, d);
  double ctv = 0.0, tv = 0.0;
  for (Mode m : kModes) {
    const Matrix g = grad(DiffOperator(m, d), x).values();
    ctv += nuclear_norm(g);
    tv += g.cwiseAbs().sum();
    EXPECT_DOUBLE_EQ(ctv_norm(x, m), nuclear_norm(g));
  }
  EXPECT_NEAR(ctv3d_norm(x), ctv, 1e-12 * ctv);
  EXPECT_NEAR(tv3d_norm(fold(x)), tv, 1e-12 * tv);
}
