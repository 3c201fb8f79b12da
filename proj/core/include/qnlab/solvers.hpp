#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qnlab/directions.hpp"
#include "qnlab/linalg.hpp"
#include "qnlab/objectives.hpp"
#include "qnlab/updates.hpp"

namespace qnlab {

/// One row of a run trace. Record k describes the iterate x_k and the
/// approximation G_k; r is ‖x_{k+1} − x_k‖ in the x_k Hessian norm and is
/// therefore filled in once step k has been taken.
struct IterationRecord {
  Index k = 0;
  std::optional<double> grad_norm;
  std::optional<double> lambda;
  std::optional<double> sigma;
  std::optional<double> tau;
  std::optional<double> r;
  /// tr(G_k − ∇²f(x_k)) / tr(∇²f(x_k)); not part of the CSV trace.
  std::optional<double> eta;
  bool skipped = false;
  /// Wall time since the start of the run.
  double elapsed_s = 0.0;
};

struct StopRule {
  int max_iters = 100;
  double grad_tol = 0.0;
  /// Relative to λ₀.
  double lambda_tol = 1e-12;
};

enum class Termination { Converged, MaxIters, InvariantBreach, NotPD };
std::string to_string(Termination t);

struct SolverOptions {
  StopRule stop;
  /// Dense Hessian instrumentation (λ, σ, τ, η). Default: on for d <= 256.
  std::optional<bool> dense;
  double skip_tol = kSkipTol;
  /// PSD-order tolerance, applied after dividing both sides by max(1, λ_max).
  double psd_tol = kPsdOrderTol;
  /// General solver: verify ∇²f(x_k) ⪯ G_k after every update (dense only).
  bool check_sandwich = false;
  /// Matrix approximation with SR1: stop once τ_k ≤ tau_tol·τ₀ (0 disables).
  double tau_tol = 0.0;
};

struct RunResult {
  Vector x;
  std::vector<IterationRecord> records;
  Termination termination = Termination::MaxIters;
  std::string diagnostic;

  bool ok() const {
    return termination == Termination::Converged || termination == Termination::MaxIters;
  }
};

struct MatrixRunResult {
  std::vector<IterationRecord> records;
  std::optional<SymMatrix> g_final;
  Termination termination = Termination::MaxIters;
  std::string diagnostic;

  bool ok() const {
    return termination == Termination::Converged || termination == Termination::MaxIters;
  }
};

/// Approximates a by repeated updates from g0 ⪰ a. Records σ and τ for
/// k = 0..steps; G ⪰ A is checked at every step.
MatrixRunResult approx_matrix(const SymMatrix& a, const SymMatrix& g0, const UpdateRule& rule,
                              const DirectionStrategy& dir, Index steps,
                              const SolverOptions& opts = {});

/// x_{k+1} = x_k − G_k⁻¹∇f(x_k) with G_k updated towards A.
RunResult solve_quadratic(const QuadraticObjective& obj, const Vector& x0, const SymMatrix& g0,
                          const UpdateRule& rule, const DirectionStrategy& dir,
                          const SolverOptions& opts = {});

/// Quasi-Newton method with correction for a strongly self-concordant
/// objective, started from G₀ = L·I (or g0 when given).
RunResult solve_general(const Objective& obj, const Vector& x0, const UpdateRule& rule,
                        const DirectionStrategy& dir, double m_const,
                        const SolverOptions& opts = {},
                        const std::optional<SymMatrix>& g0 = std::nullopt);

/// Full Newton steps. Stops early once ‖∇f‖ ≤ grad_target.
Vector newton_warm_start(const Objective& obj, const Vector& x0, int steps,
                         double grad_target = 0.0);

struct AgdResult {
  Vector x;
  std::vector<double> grad_norms;
  std::vector<double> values;
  std::vector<double> elapsed_s;
};

/// Nesterov's constant-step scheme: y = x_k + β(x_k − x_{k−1}),
/// x_{k+1} = y − ∇f(y)/L, β = (√κ − 1)/(√κ + 1).
AgdResult agd_baseline(const Objective& obj, const Vector& x0, int iters);

double agd_momentum(double kappa);

}  // namespace qnlab
