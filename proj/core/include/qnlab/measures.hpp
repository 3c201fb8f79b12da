#pragma once

#include "qnlab/linalg.hpp"

namespace qnlab {

// Convergence measures. Values are signed: a negative σ or τ means the
// ordering g ⪰ a has been lost, and callers are expected to notice.

/// tr[(g − a)a⁻¹] = ⟨a⁻¹, g⟩ − d, via column-wise Cholesky solves.
double sigma_measure(const SymMatrix& a, const SymMatrix& g);
double sigma_measure(const CholFactor& a_fac, const SymMatrix& g);

/// tr(g − a)
double tau_measure(const SymMatrix& a, const SymMatrix& g);

/// sqrt(gradᵀ hess⁻¹ grad)
double lambda_measure(const Vector& grad, const SymMatrix& hess);
double lambda_measure(const Vector& grad, const CholFactor& hess_fac);

/// tr(g − hess) / tr(hess)
double eta_trace_ratio(const SymMatrix& hess, const SymMatrix& g);

}  // namespace qnlab
