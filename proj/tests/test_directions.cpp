#include <gtest/gtest.h>

#include "qnlab/directions.hpp"
#include "qnlab/measures.hpp"
#include "qnlab/rng.hpp"
#include "test_support.hpp"

using namespace qnlab;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// E[uuᵀ/uᵀu] over n draws.
template <typename Draw>
Matrix isotropy(Index d, int n, Draw draw) {
  Matrix acc = Matrix::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    const Vector u = draw();
    acc += u * u.transpose() / u.squaredNorm();
  }
  return acc / n;
}

}  // namespace

TEST(GreedyBroyden, SpecExamples) {
  EXPECT_EQ(greedy_broyden_dir(vec({2, 5}), vec({1, 1})), 1);
  EXPECT_EQ(greedy_broyden_dir(vec({3, 3}), vec({3, 3})), 0);
  EXPECT_EQ(greedy_broyden_dir(vec({6, 5}), vec({3, 1})), 1);
  EXPECT_THROW(greedy_broyden_dir(vec({1, 1}), vec({1, 0})), std::invalid_argument);
  EXPECT_THROW(greedy_broyden_dir(vec({1, 1}), vec({1})), DimensionMismatch);
}

TEST(GreedySR1, SpecExamples) {
  EXPECT_EQ(greedy_sr1_dir(vec({4, 2}), vec({1, 1})), 0);
  EXPECT_EQ(greedy_sr1_dir(vec({2, 3, 4}), vec({1, 2, 3})), 0);
  EXPECT_EQ(greedy_sr1_dir(vec({1, 1, 8}), vec({1, 1, 1})), 2);
}

TEST(GreedyBFGS, SpecExamples) {
  EXPECT_EQ(greedy_bfgs_dir(SymMatrix::diagonal(vec({1, 4}))), 1);
  EXPECT_EQ(greedy_bfgs_dir(SymMatrix::identity(3)), 0);
  EXPECT_EQ(greedy_bfgs_dir(SymMatrix::diagonal(vec({9, 2, 9}))), 0);
  const SymMatrix w = greedy_bfgs_weight(Matrix::Identity(2, 2), SymMatrix::diagonal(vec({1, 0.25})));
  EXPECT_NEAR(w(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(w(1, 1), 4.0, 1e-14);
}

TEST(GreedyBFGS, WeightMatchesOracle) {
  Rng rng(1, 0);
  const Matrix l = oracle::wishart(5, rng);
  const Matrix a = oracle::wishart(5, rng);
  const Matrix li = oracle::inverse(l);
  const Matrix want = li.transpose() * oracle::inverse(a) * li;
  EXPECT_LT(oracle::rel_err(greedy_bfgs_weight(l, SymMatrix(a)).matrix(), want), 1e-10);
}

TEST(Greedy, ArgmaxScaleInvariance) {
  Rng rng(2, 0);
  for (int t = 0; t < 50; ++t) {
    const Vector g = rng.gaussian(6).cwiseAbs() + Vector::Constant(6, 1.0);
    const Vector a = rng.gaussian(6).cwiseAbs() + Vector::Constant(6, 0.5);
    const double c = 0.1 + 10.0 * rng.uniform();
    EXPECT_EQ(greedy_broyden_dir(g, a), greedy_broyden_dir(c * g, a));
    EXPECT_EQ(greedy_sr1_dir(g, a), greedy_sr1_dir(c * g, c * a));
  }
}

TEST(GreedySR1, SelectedGapIsAtLeastAverage) {
  Rng rng(3, 0);
  for (int t = 0; t < 100; ++t) {
    const Index d = 2 + t % 9;
    const Matrix a = oracle::wishart(d, rng);
    const Matrix g = a + oracle::wishart(d, rng, 0.0);
    const Index i = greedy_sr1_dir(g.diagonal(), a.diagonal());
    EXPECT_GE((g - a)(i, i), tau_measure(SymMatrix(a), SymMatrix(g)) / d - 1e-12);
  }
}

TEST(Sphere, SpecExamples) {
  RngState s = seed_rng(7);
  for (int i = 0; i < 20; ++i) {
    auto [u, next] = sample_sphere(1, s);
    EXPECT_EQ(std::abs(u(0)), 1.0);
    s = next;
  }
  for (int i = 0; i < 200; ++i) {
    auto [u, next] = sample_sphere(1 + i % 13, s);
    EXPECT_NEAR(u.norm(), 1.0, 1e-12);
    s = next;
  }
}

TEST(Sphere, Isotropy) {
  RngState s = seed_rng(11);
  const Matrix m = isotropy(4, 20000, [&] {
    auto [u, next] = sample_sphere(4, s);
    s = next;
    return u;
  });
  EXPECT_LE((m - 0.25 * Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 0.02);
}

TEST(Gaussian, SpecExamples) {
  const RngState s = seed_rng(5, 3);
  EXPECT_EQ(sample_gaussian(6, s).first, sample_gaussian(6, s).first);
  EXPECT_EQ(sample_gaussian(6, s).second, sample_gaussian(6, s).second);

  RngState t = seed_rng(13);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    auto [x, next] = next_normal(t);
    sum += x;
    t = next;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.02);

  const Matrix m = isotropy(4, 20000, [&] {
    auto [u, next] = sample_gaussian(4, t);
    t = next;
    return u;
  });
  EXPECT_LE((m - 0.25 * Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 0.02);
}

TEST(Rng, StreamsAndSeedsDiffer) {
  EXPECT_NE(seed_rng(1, 0), seed_rng(1, 1));
  EXPECT_NE(seed_rng(1, 0), seed_rng(2, 0));
  EXPECT_EQ(seed_rng(1, 4), seed_rng(1, 4));
  const auto [a, s1] = next_uniform(seed_rng(9));
  EXPECT_GE(a, 0.0);
  EXPECT_LT(a, 1.0);
  EXPECT_NE(s1, seed_rng(9));
}

TEST(Rng, SplitMixReferenceValue) {
  // SplitMix64 with state 0: first output of the reference implementation.
  const auto [x, s] = next_u64(RngState{0});
  (void)s;
  EXPECT_EQ(x, 0xE220A8397B1DCDAFULL);
}

TEST(DirectionSource, ValidatesCombinations) {
  DirectionStrategy greedy_bfgs{DirectionKind::GreedyBFGS, 0, false, false};
  EXPECT_THROW(DirectionSource(greedy_bfgs, UpdateRule::bfgs()), std::invalid_argument);
  greedy_bfgs.allow_expensive = true;
  EXPECT_NO_THROW(DirectionSource(greedy_bfgs, UpdateRule::bfgs()));
  EXPECT_THROW(DirectionSource(greedy_bfgs, UpdateRule::sr1()), std::invalid_argument);
  DirectionStrategy scaled{DirectionKind::RandomSphere, 0, true, false};
  EXPECT_THROW(DirectionSource(scaled, UpdateRule::sr1()), std::invalid_argument);
  DirectionStrategy scaled_greedy{DirectionKind::GreedySR1, 0, true, false};
  EXPECT_THROW(DirectionSource(scaled_greedy, UpdateRule::bfgs()), std::invalid_argument);
  EXPECT_EQ(scaled.name(), "random_sphere_scaled");
  EXPECT_EQ(parse_direction_kind("random_gaussian"), DirectionKind::RandomGaussian);
  EXPECT_FALSE(parse_direction_kind("greedy"));
}

TEST(DirectionSource, SameSeedSameSequence) {
  const DirectionStrategy st{DirectionKind::RandomGaussian, 42, false, false};
  DirectionSource a(st, UpdateRule::sr1()), b(st, UpdateRule::sr1());
  const ApproxState s = ApproxState::scaled_identity(5, 1.0, false);
  const Vector diag = Vector::Ones(5);
  auto none = [] { return SymMatrix::identity(5); };
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next(s, diag, none).u, b.next(s, diag, none).u);
}

TEST(DirectionSource, ScaledDirectionsUseTheFactor) {
  const DirectionStrategy st{DirectionKind::RandomSphere, 3, true, false};
  DirectionSource src(st, UpdateRule::bfgs());
  const ApproxState s = ApproxState::scaled_identity(4, 4.0, true);
  const Direction dir = src.next(s, Vector::Ones(4), [] { return SymMatrix::identity(4); });
  ASSERT_TRUE(dir.u_tilde);
  EXPECT_NEAR(dir.u_tilde->norm(), 1.0, 1e-12);
  EXPECT_LT((dir.u - 0.5 * *dir.u_tilde).norm(), 1e-15);
}
