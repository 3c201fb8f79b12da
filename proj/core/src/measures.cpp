#include "qnlab/measures.hpp"

#include <algorithm>
#include <cmath>

namespace qnlab {

double sigma_measure(const CholFactor& a_fac, const SymMatrix& g) {
  require_same_dim(a_fac.dim(), g.dim(), "sigma_measure");
  const Matrix x = a_fac.solve(g.matrix());
  return x.trace() - static_cast<double>(g.dim());
}

double sigma_measure(const SymMatrix& a, const SymMatrix& g) {
  require_same_dim(a.dim(), g.dim(), "sigma_measure");
  return sigma_measure(cholesky(a), g);
}

double tau_measure(const SymMatrix& a, const SymMatrix& g) {
  require_same_dim(a.dim(), g.dim(), "tau_measure");
  return g.trace() - a.trace();
}

double lambda_measure(const Vector& grad, const CholFactor& hess_fac) {
  const double q = grad.dot(hess_fac.solve(grad));
  return std::sqrt(std::max(0.0, q));
}

double lambda_measure(const Vector& grad, const SymMatrix& hess) {
  require_same_dim(hess.dim(), grad.size(), "lambda_measure");
  return lambda_measure(grad, cholesky(hess));
}

double eta_trace_ratio(const SymMatrix& hess, const SymMatrix& g) {
  require_same_dim(hess.dim(), g.dim(), "eta_trace_ratio");
  return (g.trace() - hess.trace()) / hess.trace();
}

}  // namespace qnlab
