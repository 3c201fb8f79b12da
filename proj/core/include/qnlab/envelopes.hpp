#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qnlab/linalg.hpp"

namespace qnlab {

/// Closed-form reference curves. For step k (k = 0, 1, ...):
///
///   broyden_matrix    (1 − 1/(dκ))^k σ₀
///   sr1_matrix        max(0, 1 − k/d) τ₀
///   bfgs_matrix       (1 − 1/d)^k σ₀
///   broyden_ratio     (1 − 1/(dκ))^k σ₀          bound on λ_{k+1}/λ_k
///   sr1_ratio         max(0, 1 − k/d) τ₀/μ       bound on λ_{k+1}/λ_k
///   bfgs_ratio        (1 − 1/d)^k σ₀             bound on λ_{k+1}/λ_k
///   *_lambda          λ₀ ∏_{i<k} min(1, ratio_i)  product of the capped ratio curve
///   two_phase         (1 − 1/(2κ))^k λ₀ for k ≤ k₀, then
///                     q^{j(j−1)/2} (1/2)^j (1 − 1/(2κ))^{k₀} λ₀, j = k − k₀
///   broyden_highprob  2d²κ²σ₀/δ · (1 − 1/(dκ+1))^k
enum class EnvelopeKind {
  None,
  BroydenMatrix,
  SR1Matrix,
  BFGSMatrix,
  BroydenRatio,
  SR1Ratio,
  BFGSRatio,
  BroydenLambda,
  SR1Lambda,
  BFGSLambda,
  GreedyBroydenTwoPhase,  // q = 1 − 1/(dκ)
  RandomBroydenTwoPhase,  // q = 1 − 1/(dκ+1)
  GreedyTwoPhase,         // q = 1 − 1/d        (greedy BFGS / SR1)
  RandomTwoPhase,         // q = 1 − 1/(d+1)    (random BFGS / SR1)
  BroydenHighProb,
};

std::optional<EnvelopeKind> parse_envelope_kind(std::string_view name);
std::string to_string(EnvelopeKind kind);

/// Which trace column an envelope is compared against.
enum class EnvelopeMetric { None, Sigma, Tau, Lambda, LambdaRatio };
EnvelopeMetric envelope_metric(EnvelopeKind kind);

struct EnvelopeParams {
  Index d = 1;
  double kappa = 1.0;
  double mu = 1.0;
  double sigma0 = 0.0;
  double tau0 = 0.0;
  double lambda0 = 0.0;
  double delta = 0.1;
  Index k0 = 0;
};

double envelope_value(EnvelopeKind kind, const EnvelopeParams& p, Index k);

/// Values for k = 0..steps.
std::vector<double> bound_envelope(EnvelopeKind kind, const EnvelopeParams& p, Index steps);

enum class MethodFamily { GreedyBroyden, GreedyBFGS, GreedySR1, RandomBroyden, RandomBFGS, RandomSR1 };

/// Starting moment K₂ of the superlinear phase:
///   G-BFGS 2d ln(2dκ)+1, G-SR1 2d ln(2dκ²)+1, G-Broyden 2dκ ln(2dκ)+1,
///   R-BFGS 2(d+1) ln(4d³κ/δ)+1, R-SR1 2(d+1) ln(4d³κ²/δ)+1,
///   R-Broyden 2(dκ+1) ln(4d³κ³/δ)+1.
double start_moment(MethodFamily family, Index d, double kappa, double delta = 0.1);

/// k₀ = k₁ + k₂ for the two-phase envelope (warm-up plus start moment),
/// rounded up.
Index two_phase_k0(MethodFamily family, Index d, double kappa, double delta = 0.1);

}  // namespace qnlab
