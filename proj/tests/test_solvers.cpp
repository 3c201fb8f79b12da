#include <gtest/gtest.h>

#include <limits>

#include "qnlab/envelopes.hpp"
#include "qnlab/measures.hpp"
#include "qnlab/solvers.hpp"
#include "test_support.hpp"

using namespace qnlab;

namespace {

DirectionStrategy greedy(DirectionKind kind) { return {kind, 0, false, true}; }
DirectionStrategy random_dir(std::uint64_t seed, bool scaled = false) {
  return {DirectionKind::RandomSphere, seed, scaled, false};
}

QuadraticObjective quadratic(Index d, double kappa, std::uint64_t seed) {
  const SymMatrix a = random_spd(d, 1.0, kappa, seed);
  Rng rng(seed, 9);
  return QuadraticObjective(a, a * rng.gaussian(d));
}

}  // namespace

TEST(ApproxMatrix, SpecExamples) {
  const SymMatrix g0 = SymMatrix::diagonal(Vector::Constant(1, 5.0));
  const SymMatrix a = SymMatrix::diagonal(Vector::Constant(1, 2.0));
  const MatrixRunResult r = approx_matrix(a, g0, UpdateRule::sr1(), greedy(DirectionKind::GreedySR1), 1);
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_EQ(*r.records[0].tau, 3.0);
  EXPECT_EQ(*r.records[1].tau, 0.0);
  EXPECT_EQ((*r.g_final)(0, 0), 2.0);
  EXPECT_EQ(r.termination, Termination::MaxIters);

  const SymMatrix b = random_spd(5, 1.0, 10.0, 3);
  const MatrixRunResult same = approx_matrix(b, b, UpdateRule::bfgs(), random_dir(1), 4);
  for (const auto& rec : same.records) {
    EXPECT_NEAR(*rec.sigma, 0.0, 1e-12);
    EXPECT_NEAR(*rec.tau, 0.0, 1e-12);
  }
  EXPECT_LT(oracle::rel_err(same.g_final->matrix(), b.matrix()), 1e-12);

  EXPECT_THROW(approx_matrix(b, SymMatrix::identity(5), UpdateRule::sr1(), random_dir(0), 2),
               std::invalid_argument);
}

TEST(ApproxMatrix, GreedySR1PerStepBound) {
  for (Index d : {3, 8, 15}) {
    for (double kappa : {5.0, 300.0}) {
      const SymMatrix a = random_spd(d, 1.0, kappa, 7 + d);
      const auto r = approx_matrix(a, SymMatrix::identity(d, kappa), UpdateRule::sr1(),
                                   greedy(DirectionKind::GreedySR1), d);
      ASSERT_TRUE(r.ok()) << r.diagnostic;
      const double tau0 = *r.records[0].tau;
      for (Index k = 0; k < d; ++k) {
        const double bound = (1.0 - 1.0 / static_cast<double>(d - k)) * *r.records[k].tau;
        EXPECT_LE(*r.records[k + 1].tau, bound + 1e-9 * tau0) << "d=" << d << " k=" << k;
      }
      EXPECT_LE(*r.records[d].tau, 1e-8 * tau0);
    }
  }
}

TEST(ApproxMatrix, GreedyScaledBFGSPerStepBound) {
  for (Index d : {3, 8, 15}) {
    const SymMatrix a = random_spd(d, 1.0, 50.0, 20 + d);
    DirectionStrategy dir = greedy(DirectionKind::GreedyBFGS);
    const auto r = approx_matrix(a, SymMatrix::identity(d, 50.0), UpdateRule::bfgs(), dir, 3 * d);
    ASSERT_TRUE(r.ok()) << r.diagnostic;
    const double sigma0 = *r.records[0].sigma;
    for (std::size_t k = 0; k + 1 < r.records.size(); ++k) {
      EXPECT_LE(*r.records[k + 1].sigma,
                (1.0 - 1.0 / d) * *r.records[k].sigma + 1e-9 * sigma0);
    }
  }
}

TEST(ApproxMatrix, GreedyBroydenDFPPerStepBound) {
  for (Index d : {3, 6, 10}) {
    const double kappa = 20.0;
    const SymMatrix a = random_spd(d, 1.0, kappa, 30 + d);
    const auto r = approx_matrix(a, SymMatrix::identity(d, kappa), UpdateRule::broyden(1.0),
                                 greedy(DirectionKind::GreedyBroyden), 5 * d);
    ASSERT_TRUE(r.ok()) << r.diagnostic;
    const double sigma0 = *r.records[0].sigma;
    for (std::size_t k = 0; k + 1 < r.records.size(); ++k) {
      EXPECT_LE(*r.records[k + 1].sigma,
                (1.0 - 1.0 / (d * kappa)) * *r.records[k].sigma + 1e-9 * sigma0);
    }
  }
}

TEST(ApproxMatrix, RandomRunsKeepDominance) {
  const SymMatrix a = random_spd(10, 1.0, 100.0, 5);
  for (const UpdateRule& rule : {UpdateRule::sr1(), UpdateRule::bfgs(), UpdateRule::dfp(),
                                 UpdateRule::broyden(0.5)}) {
    const auto r = approx_matrix(a, SymMatrix::identity(10, 100.0), rule, random_dir(3), 30);
    EXPECT_TRUE(r.ok()) << rule.name() << ": " << r.diagnostic;
    EXPECT_TRUE(oracle::psd_le(a.matrix(), r.g_final->matrix(), 1e-9));
  }
  const auto scaled = approx_matrix(a, SymMatrix::identity(10, 100.0), UpdateRule::bfgs(),
                                    random_dir(3, true), 30);
  EXPECT_TRUE(scaled.ok()) << scaled.diagnostic;
}

TEST(SolveQuadratic, SpecExamples) {
  const SymMatrix a = SymMatrix::diagonal(Vector{{1.0, 4.0}});
  const QuadraticObjective f(a, Vector::Zero(2));
  SolverOptions opts;
  opts.stop.max_iters = 1;
  const RunResult r = solve_quadratic(f, Vector{{1.0, 1.0}}, SymMatrix::identity(2, 4.0),
                                      UpdateRule::sr1(), greedy(DirectionKind::GreedySR1), opts);
  EXPECT_NEAR(*r.records[0].lambda, std::sqrt(5.0), 1e-15);
  EXPECT_NEAR(r.x(0), 0.75, 1e-15);
  EXPECT_NEAR(r.x(1), 0.0, 1e-15);

  const QuadraticObjective g = quadratic(6, 30.0, 1);
  const RunResult newton = solve_quadratic(g, Vector::Zero(6), g.a(), UpdateRule::bfgs(), random_dir(0));
  EXPECT_EQ(newton.termination, Termination::Converged);
  ASSERT_EQ(newton.records.size(), 2u);
  EXPECT_LE(*newton.records[1].lambda, 1e-12 * *newton.records[0].lambda);
}

TEST(SolveQuadratic, SR1FiniteTermination) {
  const Index d = 12;
  const QuadraticObjective f = quadratic(d, 100.0, 2);
  const SymMatrix g0 = SymMatrix::identity(d, f.constants().lip);
  SolverOptions opts;
  opts.stop.lambda_tol = 0.0;
  opts.stop.max_iters = d + 1;
  for (const DirectionStrategy& dir : {greedy(DirectionKind::GreedySR1), random_dir(4)}) {
    const RunResult r = solve_quadratic(f, Vector::Zero(d), g0, UpdateRule::sr1(), dir, opts);
    ASSERT_TRUE(r.ok()) << r.diagnostic;
    ASSERT_GE(r.records.size(), static_cast<std::size_t>(d + 2));
    EXPECT_LE(*r.records[d + 1].lambda, 1e-8 * *r.records[0].lambda) << dir.name();
  }
}

TEST(SolveQuadratic, LambdaRatioBoundedBySigma) {
  const Index d = 10;
  const QuadraticObjective f = quadratic(d, 50.0, 3);
  const SymMatrix g0 = SymMatrix::identity(d, f.constants().lip);
  SolverOptions opts;
  opts.stop.max_iters = 40;
  const std::vector<std::pair<UpdateRule, DirectionStrategy>> runs{
      {UpdateRule::sr1(), greedy(DirectionKind::GreedySR1)},
      {UpdateRule::bfgs(), greedy(DirectionKind::GreedyBFGS)},
      {UpdateRule::broyden(0.5), greedy(DirectionKind::GreedyBroyden)},
      {UpdateRule::bfgs(), random_dir(5, true)},
      {UpdateRule::dfp(), random_dir(6)}};
  const double eps = std::numeric_limits<double>::epsilon();
  for (const auto& [rule, dir] : runs) {
    const RunResult r = solve_quadratic(f, Vector::Zero(d), g0, rule, dir, opts);
    ASSERT_TRUE(r.ok()) << r.diagnostic;
    // Rounding floor of λ for iterates with λ ≤ λ₀ (μ = 1).
    const double lambda0 = *r.records[0].lambda;
    const double floor = d * eps * (f.constants().lip * (f.minimizer().norm() + lambda0) + f.b().norm());
    for (std::size_t k = 0; k + 1 < r.records.size(); ++k) {
      const double lk = *r.records[k].lambda;
      if (lk <= 1e-12 * lambda0) break;
      EXPECT_LE(*r.records[k + 1].lambda / lk, *r.records[k].sigma * (1.0 + 1e-9) + floor / lk)
          << rule.name() << " " << dir.name() << " k=" << k;
    }
  }
}

TEST(SolveQuadratic, RecordsStepNorm) {
  const QuadraticObjective f = quadratic(5, 10.0, 4);
  SolverOptions opts;
  opts.stop.max_iters = 3;
  const RunResult r = solve_quadratic(f, Vector::Zero(5), SymMatrix::identity(5, 10.0),
                                      UpdateRule::bfgs(), random_dir(1), opts);
  ASSERT_EQ(r.records.size(), 4u);
  EXPECT_TRUE(r.records[0].r.has_value());
  EXPECT_FALSE(r.records[3].r.has_value());
  const Vector s = -(f.gradient(Vector::Zero(5)) / 10.0);
  EXPECT_NEAR(*r.records[0].r, std::sqrt(s.dot(f.a() * s)), 1e-12);
}

TEST(SolveGeneral, MatchesQuadraticSolverWithoutCorrection) {
  const Index d = 8;
  const QuadraticObjective f = quadratic(d, 40.0, 5);
  SolverOptions opts;
  opts.stop.max_iters = 20;
  for (const auto& [rule, dir] : std::vector<std::pair<UpdateRule, DirectionStrategy>>{
           {UpdateRule::sr1(), greedy(DirectionKind::GreedySR1)},
           {UpdateRule::bfgs(), random_dir(2, true)},
           {UpdateRule::broyden(0.3), random_dir(3)}}) {
    const RunResult q = solve_quadratic(f, Vector::Zero(d), SymMatrix::identity(d, f.constants().lip),
                                        rule, dir, opts);
    const RunResult g = solve_general(f, Vector::Zero(d), rule, dir, 0.0, opts);
    ASSERT_EQ(q.records.size(), g.records.size());
    for (std::size_t k = 0; k < q.records.size(); ++k) {
      EXPECT_LT(oracle::rel_err(*g.records[k].lambda, *q.records[k].lambda), 1e-12);
      EXPECT_LT(oracle::rel_err(*g.records[k].grad_norm, *q.records[k].grad_norm), 1e-12);
    }
  }
}

TEST(SolveGeneral, LogSumExpGreedySR1) {
  const auto f = make_logsumexp_synthetic(20, 30, 1.0, 0);
  const Vector x0 = initial_point_on_sphere(Vector::Zero(20), 1.0, 0);
  const Vector xw = newton_warm_start(f, x0, 20, 1e-1);
  ASSERT_LE(f.gradient(xw).norm(), 1e-1);
  SolverOptions opts;
  opts.stop.max_iters = 60;
  opts.stop.grad_tol = 1e-9;
  opts.check_sandwich = true;
  const RunResult r = solve_general(f, xw, UpdateRule::sr1(), greedy(DirectionKind::GreedySR1), 2.0, opts);
  EXPECT_EQ(r.termination, Termination::Converged) << r.diagnostic;
  EXPECT_LE(*r.records.back().grad_norm, 1e-9);
}

TEST(SolveGeneral, SandwichHoldsWithCorrection) {
  const auto f = make_logsumexp_synthetic(10, 12, 1.0, 1);
  const Vector x0 = initial_point_on_sphere(Vector::Zero(10), 0.1, 1);
  SolverOptions opts;
  opts.stop.max_iters = 40;
  opts.check_sandwich = true;
  for (const auto& [rule, dir] : std::vector<std::pair<UpdateRule, DirectionStrategy>>{
           {UpdateRule::sr1(), random_dir(1)},
           {UpdateRule::bfgs(), random_dir(2, true)},
           {UpdateRule::bfgs(), greedy(DirectionKind::GreedyBFGS)},
           {UpdateRule::broyden(0.5), greedy(DirectionKind::GreedyBroyden)}}) {
    const RunResult r = solve_general(f, x0, rule, dir, 2.0, opts);
    EXPECT_TRUE(r.ok()) << rule.name() << " " << dir.name() << ": " << r.diagnostic;
  }
}

TEST(SolveGeneral, RejectsNegativeCorrection) {
  const QuadraticObjective f = quadratic(3, 2.0, 1);
  EXPECT_THROW(solve_general(f, Vector::Zero(3), UpdateRule::sr1(), random_dir(0), -1.0),
               std::invalid_argument);
}

TEST(Newton, SpecExamples) {
  const QuadraticObjective f = quadratic(6, 20.0, 7);
  const Vector x1 = newton_warm_start(f, Vector::Zero(6), 1);
  EXPECT_LT((x1 - f.minimizer()).norm(), 1e-10 * std::max(1.0, f.minimizer().norm()));
  const Vector x0 = Vector::LinSpaced(6, -1.0, 1.0);
  EXPECT_EQ(newton_warm_start(f, x0, 0), x0);

  const auto lg = make_logistic_synthetic(8, 40, 0.1, 3);
  Vector w = Vector::Zero(8);
  double prev = lg.gradient(w).norm();
  for (int i = 0; i < 3; ++i) {
    w = newton_warm_start(lg, w, 1);
    const double cur = lg.gradient(w).norm();
    EXPECT_LT(cur, prev);
    prev = cur;
  }
}

TEST(Agd, SpecExamples) {
  EXPECT_EQ(agd_momentum(1.0), 0.0);
  EXPECT_THROW(agd_momentum(0.5), std::invalid_argument);

  const QuadraticObjective iso(SymMatrix::identity(4, 3.0), Vector{{1.0, 2.0, 3.0, 4.0}});
  const AgdResult one = agd_baseline(iso, Vector::Zero(4), 1);
  EXPECT_LT((one.x - iso.minimizer()).norm(), 1e-15);
  ASSERT_EQ(one.grad_norms.size(), 2u);
}

TEST(Agd, ConvergesOnRandomQuadratic) {
  const QuadraticObjective f = quadratic(10, 25.0, 8);
  const AgdResult r = agd_baseline(f, Vector::Zero(10), 300);
  const double fstar = f.value(f.minimizer());
  // The constant-momentum scheme is not monotone in f; its gap obeys
  // f_k − f* ≤ (f_0 − f* + μ/2‖x_0 − x*‖²)(1 − 1/√κ)^k.
  const double mu = f.constants().mu;
  const double kappa = f.constants().kappa();
  const double v0 = r.values[0] - fstar + 0.5 * mu * f.minimizer().squaredNorm();
  for (std::size_t k = 0; k < r.values.size(); ++k) {
    EXPECT_LE(r.values[k] - fstar, v0 * std::pow(1.0 - 1.0 / std::sqrt(kappa), k) + 1e-12);
  }
  EXPECT_LE(r.grad_norms.back(), 1e-8);
}

TEST(Envelopes, SpecExamples) {
  EnvelopeParams p;
  p.d = 4;
  p.tau0 = 8.0;
  EXPECT_EQ(bound_envelope(EnvelopeKind::SR1Matrix, p, 5), (std::vector<double>{8, 6, 4, 2, 0, 0}));

  EnvelopeParams b;
  b.d = 2;
  b.sigma0 = 1.0;
  const auto bf = bound_envelope(EnvelopeKind::BFGSMatrix, b, 3);
  EXPECT_EQ(bf, (std::vector<double>{1.0, 0.5, 0.25, 0.125}));

  EnvelopeParams c;
  c.d = 1;
  c.kappa = 1.0;
  c.sigma0 = 3.0;
  EXPECT_EQ(envelope_value(EnvelopeKind::BroydenMatrix, c, 0), 3.0);
  EXPECT_EQ(envelope_value(EnvelopeKind::BroydenMatrix, c, 1), 0.0);
}

TEST(Envelopes, NamesRoundTrip) {
  for (auto k : {EnvelopeKind::None, EnvelopeKind::BroydenMatrix, EnvelopeKind::SR1Matrix,
                 EnvelopeKind::BFGSMatrix, EnvelopeKind::BroydenRatio, EnvelopeKind::SR1Ratio,
                 EnvelopeKind::BFGSRatio, EnvelopeKind::BroydenLambda, EnvelopeKind::SR1Lambda,
                 EnvelopeKind::BFGSLambda, EnvelopeKind::GreedyBroydenTwoPhase,
                 EnvelopeKind::RandomBroydenTwoPhase, EnvelopeKind::GreedyTwoPhase,
                 EnvelopeKind::RandomTwoPhase, EnvelopeKind::BroydenHighProb}) {
    EXPECT_EQ(parse_envelope_kind(to_string(k)), k);
  }
  EXPECT_FALSE(parse_envelope_kind("bogus"));
  EXPECT_EQ(envelope_metric(EnvelopeKind::SR1Matrix), EnvelopeMetric::Tau);
  EXPECT_EQ(envelope_metric(EnvelopeKind::BFGSMatrix), EnvelopeMetric::Sigma);
  EXPECT_EQ(envelope_metric(EnvelopeKind::GreedyTwoPhase), EnvelopeMetric::Lambda);
}

TEST(Envelopes, LambdaIsProductOfRatios) {
  EnvelopeParams p;
  p.d = 5;
  p.kappa = 10.0;
  p.mu = 2.0;
  p.sigma0 = 3.0;
  p.tau0 = 4.0;
  p.lambda0 = 7.0;
  for (auto [ratio, lam] : {std::pair{EnvelopeKind::BFGSRatio, EnvelopeKind::BFGSLambda},
                            std::pair{EnvelopeKind::SR1Ratio, EnvelopeKind::SR1Lambda},
                            std::pair{EnvelopeKind::BroydenRatio, EnvelopeKind::BroydenLambda}}) {
    double prod = p.lambda0;
    for (Index k = 0; k < 8; ++k) {
      EXPECT_NEAR(envelope_value(lam, p, k), prod, 1e-12 * std::max(1.0, prod));
      prod *= std::min(1.0, envelope_value(ratio, p, k));
    }
  }
  EXPECT_NEAR(envelope_value(EnvelopeKind::SR1Ratio, p, 1), 0.8 * 4.0 / 2.0, 1e-15);
}

TEST(Envelopes, TwoPhaseShape) {
  EnvelopeParams p;
  p.d = 4;
  p.kappa = 8.0;
  p.lambda0 = 1.0;
  p.k0 = 3;
  const double lin = 1.0 - 1.0 / 16.0;
  EXPECT_NEAR(envelope_value(EnvelopeKind::GreedyTwoPhase, p, 2), lin * lin, 1e-15);
  const double base = std::pow(lin, 3);
  EXPECT_NEAR(envelope_value(EnvelopeKind::GreedyTwoPhase, p, 3), base, 1e-15);
  // j = 2: q^{1}·(1/2)^2
  EXPECT_NEAR(envelope_value(EnvelopeKind::GreedyTwoPhase, p, 5), 0.75 * 0.25 * base, 1e-15);
  EXPECT_NEAR(envelope_value(EnvelopeKind::RandomTwoPhase, p, 5), 0.8 * 0.25 * base, 1e-15);
}

TEST(Envelopes, StartMoments) {
  EXPECT_NEAR(start_moment(MethodFamily::GreedyBFGS, 10, 100.0), 20.0 * std::log(2000.0) + 1.0, 1e-9);
  EXPECT_NEAR(start_moment(MethodFamily::GreedySR1, 10, 100.0), 20.0 * std::log(2e5) + 1.0, 1e-9);
  EXPECT_NEAR(start_moment(MethodFamily::RandomBFGS, 10, 100.0, 0.1),
              22.0 * std::log(4000.0 * 100.0 / 0.1) + 1.0, 1e-9);
  EXPECT_GT(two_phase_k0(MethodFamily::GreedyBFGS, 10, 100.0), 0);
  EXPECT_EQ(two_phase_k0(MethodFamily::GreedyBFGS, 10, 100.0),
            static_cast<Index>(std::ceil(2.0 * 100.0 * std::log(32.0) + 1.0 + 10.0 * std::log(6000.0) + 1.0)));
}

TEST(Envelopes, HighProbabilityCurve) {
  EnvelopeParams p;
  p.d = 3;
  p.kappa = 2.0;
  p.sigma0 = 1.5;
  p.delta = 0.1;
  EXPECT_NEAR(envelope_value(EnvelopeKind::BroydenHighProb, p, 2),
              2.0 * 9.0 * 4.0 * 1.5 / 0.1 * std::pow(1.0 - 1.0 / 7.0, 2), 1e-9);
}
