#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "qnlab/linalg.hpp"

namespace qnlab {

enum class UpdateKind { Broyden, SR1, BFGS, DFP };

/// Member of the Broyden family. tau is only read for UpdateKind::Broyden,
/// where tau = 0 is SR1 and tau = 1 is DFP.
struct UpdateRule {
  UpdateKind kind = UpdateKind::BFGS;
  double tau = 0.0;

  static UpdateRule broyden(double tau);
  static UpdateRule sr1() { return {UpdateKind::SR1, 0.0}; }
  static UpdateRule bfgs() { return {UpdateKind::BFGS, 0.0}; }
  static UpdateRule dfp() { return {UpdateKind::DFP, 1.0}; }

  std::string name() const;
};

/// Accepts "sr1", "bfgs", "dfp", "broyden" (tau taken from the argument).
std::optional<UpdateRule> parse_update_rule(std::string_view name, double tau = 0.0);

/// Relative threshold for the degenerate branch Gu = Au. SR1 is skipped when
/// uᵀ(G−A)u ≤ skip_tol·gap·‖u‖², the Broyden family when
/// ‖(G−A)u‖ ≤ skip_tol·gap·‖u‖, with gap = ‖G−A‖_F for the matrix-level
/// functions below.
inline constexpr double kSkipTol = 1e-12;

// Matrix-level updates of an approximation g towards the target a along u.
// Every result is symmetrized.

SymMatrix broyden_update(const SymMatrix& g, const SymMatrix& a, const Vector& u, double tau,
                         double skip_tol = kSkipTol);
SymMatrix sr1_update(const SymMatrix& g, const SymMatrix& a, const Vector& u,
                     double skip_tol = kSkipTol);
SymMatrix bfgs_update(const SymMatrix& g, const SymMatrix& a, const Vector& u);
SymMatrix dfp_update(const SymMatrix& g, const SymMatrix& a, const Vector& u);

// Inverse updates: given h = g⁻¹, return the inverse of the matching primal
// update. The SR1 skip decision is taken on the primal quantities, so it
// always agrees with sr1_update.

SymMatrix sr1_inverse_update(const SymMatrix& h, const SymMatrix& a, const Vector& u,
                             double skip_tol = kSkipTol);
SymMatrix bfgs_inverse_update(const SymMatrix& h, const SymMatrix& a, const Vector& u);
SymMatrix dfp_inverse_update(const SymMatrix& h, const SymMatrix& a, const Vector& u);

/// BFGS update of a square factor with lᵀl = g⁻¹ along u = lᵀũ:
///   l₊ = l − (l·A·u − v)uᵀ / (uᵀAu),   v = (‖u‖_A / ‖ũ‖)·ũ,
/// so that l₊ᵀl₊ = [bfgs_update(g, a, u)]⁻¹. O(d²).
Matrix bfgs_factor_update(const Matrix& l, const SymMatrix& a, const Vector& u,
                          const Vector& u_tilde);

/// Hessian approximation bundle. h is always g⁻¹; l (lᵀl = h) is carried
/// only for the scaled BFGS directions.
struct ApproxState {
  SymMatrix g;
  SymMatrix h;
  std::optional<Matrix> l;

  Index dim() const { return g.dim(); }

  /// g0 must be SPD; l starts as g0^{-1/2}.
  static ApproxState from(const SymMatrix& g0, bool with_factor);
  /// g = scale·I, h = I/scale, l = I/√scale.
  static ApproxState scaled_identity(Index dim, double scale, bool with_factor);
};

/// Correction step: g ← (1 + m_const·r)g, h ← h/(1 + m_const·r),
/// l ← l/√(1 + m_const·r).
ApproxState correct(const ApproxState& state, double m_const, double r);

enum class UpdateOutcome { Applied, Skipped };

/// Updates every representation in `state` towards a target A that is only
/// available through the product au = A·u. gap_scale plays the role of
/// ‖G−A‖ in the skip test. For BFGS with a factor, u_tilde must be the
/// unscaled direction with u = lᵀũ.
UpdateOutcome apply_update(ApproxState& state, const UpdateRule& rule, const Vector& u,
                           const Vector& au, double gap_scale, double skip_tol = kSkipTol,
                           const Vector* u_tilde = nullptr);

}  // namespace qnlab
