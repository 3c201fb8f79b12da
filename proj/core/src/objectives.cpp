#include "qnlab/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qnlab/rng.hpp"

namespace qnlab {

void Objective::check_point(const Vector& x) const {
  require_same_dim(dim(), x.size(), "objective");
}

void Objective::check_dense_allowed() const {
  if (dim() > kMaxDenseHessianDim) {
    throw std::length_error("dense Hessian assembly is limited to d <= 1024");
  }
}

// ---------------------------------------------------------------- quadratic

QuadraticObjective::QuadraticObjective(SymMatrix a, Vector b)
    : a_(std::move(a)), b_(std::move(b)), a_fac_(cholesky(a_)) {
  require_same_dim(a_.dim(), b_.size(), "QuadraticObjective");
  const EigenRange r = extreme_eigs(a_);
  constants_ = {r.lambda_min, r.lambda_max, 0.0};
}

double QuadraticObjective::value(const Vector& x) const {
  check_point(x);
  return 0.5 * x.dot(a_.matrix() * x) - b_.dot(x);
}

Vector QuadraticObjective::gradient(const Vector& x) const {
  check_point(x);
  return a_.matrix() * x - b_;
}

SymMatrix QuadraticObjective::hessian(const Vector& x) const {
  check_point(x);
  return a_;
}

Vector QuadraticObjective::hess_vec(const Vector& x, const Vector& v) const {
  check_point(x);
  return a_ * v;
}

Vector QuadraticObjective::hess_diag(const Vector& x) const {
  check_point(x);
  return a_.diagonal();
}

// --------------------------------------------------------------- log-sum-exp

LogSumExpObjective::LogSumExpObjective(Matrix c, Vector b, double gamma)
    : c_(std::move(c)), b_(std::move(b)), gamma_(gamma) {
  require_same_dim(c_.cols(), b_.size(), "LogSumExpObjective");
  if (c_.rows() < 1 || c_.cols() < 1) throw DimensionMismatch("LogSumExpObjective: empty data");
  if (!(gamma_ > 0.0)) throw std::invalid_argument("LogSumExpObjective: gamma must be positive");
  const SymMatrix cct = SymMatrix::symmetrized(c_ * c_.transpose());
  const double top = std::max(0.0, extreme_eigs(cct).lambda_max);
  constants_ = {gamma_, 2.0 * top + gamma_, 2.0};
}

Vector LogSumExpObjective::softmax(const Vector& x) const {
  check_point(x);
  Vector z = c_.transpose() * x - b_;
  const double zmax = z.maxCoeff();
  Vector e = (z.array() - zmax).exp().matrix();
  return e / e.sum();
}

double LogSumExpObjective::value(const Vector& x) const {
  check_point(x);
  const Vector z = c_.transpose() * x - b_;
  const double zmax = z.maxCoeff();
  const double lse = zmax + std::log((z.array() - zmax).exp().sum());
  const Vector cx = c_.transpose() * x;
  return lse + 0.5 * cx.squaredNorm() + 0.5 * gamma_ * x.squaredNorm();
}

Vector LogSumExpObjective::gradient(const Vector& x) const {
  const Vector pi = softmax(x);
  const Vector cx = c_.transpose() * x;
  return c_ * (pi + cx) + gamma_ * x;
}

SymMatrix LogSumExpObjective::hessian(const Vector& x) const {
  check_dense_allowed();
  const Vector pi = softmax(x);
  const Vector g = c_ * pi;
  Matrix h = c_ * (pi.array() + 1.0).matrix().asDiagonal() * c_.transpose();
  h -= g * g.transpose();
  h.diagonal().array() += gamma_;
  return SymMatrix::symmetrized(h);
}

Vector LogSumExpObjective::hess_vec(const Vector& x, const Vector& v) const {
  require_same_dim(dim(), v.size(), "hess_vec");
  const Vector pi = softmax(x);
  const Vector g = c_ * pi;
  const Vector cv = c_.transpose() * v;
  return c_ * ((pi.array() + 1.0) * cv.array()).matrix() - g.dot(v) * g + gamma_ * v;
}

Vector LogSumExpObjective::hess_diag(const Vector& x) const {
  const Vector pi = softmax(x);
  const Vector g = c_ * pi;
  Vector diag = c_.array().square().matrix() * (pi.array() + 1.0).matrix();
  diag.array() -= g.array().square();
  diag.array() += gamma_;
  return diag;
}

// ------------------------------------------------------------------ logistic

namespace {

// ln(1 + e^z)
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

// 1/(1 + e^{-z})
double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

LogisticObjective::LogisticObjective(Matrix samples, Vector labels, double gamma,
                                     double self_concordance)
    : x_(std::move(samples)), y_(std::move(labels)), gamma_(gamma) {
  require_same_dim(x_.cols(), y_.size(), "LogisticObjective");
  if (x_.rows() < 1) throw DimensionMismatch("LogisticObjective: dim must be >= 1");
  if (!(gamma_ > 0.0)) throw std::invalid_argument("LogisticObjective: gamma must be positive");
  for (Index i = 0; i < y_.size(); ++i) {
    if (y_(i) != 1.0 && y_(i) != -1.0) {
      throw std::invalid_argument("LogisticObjective: labels must be +1 or -1");
    }
  }
  double top = 0.0;
  if (x_.cols() > 0) {
    top = std::max(0.0, extreme_eigs(SymMatrix::symmetrized(x_ * x_.transpose())).lambda_max);
  }
  constants_ = {gamma_, top / 4.0 + gamma_, self_concordance};
}

double LogisticObjective::value(const Vector& w) const {
  check_point(w);
  const Vector t = y_.cwiseProduct(x_.transpose() * w);
  double s = 0.0;
  for (Index i = 0; i < t.size(); ++i) s += softplus(-t(i));
  return s + 0.5 * gamma_ * w.squaredNorm();
}

Vector LogisticObjective::gradient(const Vector& w) const {
  check_point(w);
  const Vector t = y_.cwiseProduct(x_.transpose() * w);
  Vector coef(t.size());
  for (Index i = 0; i < t.size(); ++i) coef(i) = -sigmoid(-t(i)) * y_(i);
  return x_ * coef + gamma_ * w;
}

Vector LogisticObjective::curvature_weights(const Vector& w) const {
  check_point(w);
  const Vector t = y_.cwiseProduct(x_.transpose() * w);
  Vector s(t.size());
  for (Index i = 0; i < t.size(); ++i) s(i) = sigmoid(t(i)) * sigmoid(-t(i));
  return s;
}

SymMatrix LogisticObjective::hessian(const Vector& w) const {
  check_dense_allowed();
  const Vector s = curvature_weights(w);
  Matrix h = x_ * s.asDiagonal() * x_.transpose();
  h.diagonal().array() += gamma_;
  return SymMatrix::symmetrized(h);
}

Vector LogisticObjective::hess_vec(const Vector& w, const Vector& v) const {
  require_same_dim(dim(), v.size(), "hess_vec");
  const Vector s = curvature_weights(w);
  return x_ * s.cwiseProduct(x_.transpose() * v) + gamma_ * v;
}

Vector LogisticObjective::hess_diag(const Vector& w) const {
  const Vector s = curvature_weights(w);
  Vector diag = x_.array().square().matrix() * s;
  diag.array() += gamma_;
  return diag;
}

// ---------------------------------------------------------------- generators

SymMatrix random_spd(Index d, double mu, double lip, std::uint64_t seed) {
  if (d < 1) throw DimensionMismatch("random_spd: d must be >= 1");
  if (!(mu > 0.0 && lip >= mu)) throw std::invalid_argument("random_spd: need 0 < mu <= lip");
  Rng rng(seed, 2);
  Matrix z(d, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i) z(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  // Sign fix on R's diagonal makes Q Haar distributed.
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < d; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);

  Vector spectrum(d);
  for (Index i = 0; i < d; ++i) spectrum(i) = rng.uniform(mu, lip);
  spectrum(0) = mu;
  if (d > 1) spectrum(d - 1) = lip;
  return SymMatrix::symmetrized(q * spectrum.asDiagonal() * q.transpose());
}

LogSumExpObjective make_logsumexp_synthetic(Index d, Index m, double gamma, std::uint64_t seed) {
  if (d < 1 || m < 1) throw DimensionMismatch("make_logsumexp_synthetic: d, m must be >= 1");
  Rng rng(seed, 3);
  Matrix c_hat(d, m);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < d; ++i) c_hat(i, j) = rng.uniform(-1.0, 1.0);
  Vector b(m);
  for (Index j = 0; j < m; ++j) b(j) = rng.uniform(-1.0, 1.0);

  // ∇f̂(0) = Σⱼ softmax(−b)ⱼ ĉⱼ
  const double bmax = (-b).maxCoeff();
  Vector w = ((-b).array() - bmax).exp().matrix();
  w /= w.sum();
  const Vector shift = c_hat * w;
  Matrix c = c_hat.colwise() - shift;
  return LogSumExpObjective(std::move(c), std::move(b), gamma);
}

LogisticObjective make_logistic_synthetic(Index d, Index n, double gamma, std::uint64_t seed,
                                          double self_concordance) {
  if (d < 1) throw DimensionMismatch("make_logistic_synthetic: d must be >= 1");
  Rng rng(seed, 4);
  const Vector truth = rng.gaussian(d);
  Matrix x(d, n);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) x(j, i) = rng.normal() / std::sqrt(static_cast<double>(d));
    double label = truth.dot(x.col(i)) >= 0.0 ? 1.0 : -1.0;
    if (rng.uniform() < 0.1) label = -label;
    y(i) = label;
  }
  return LogisticObjective(std::move(x), std::move(y), gamma, self_concordance);
}

Vector initial_point_on_sphere(const Vector& center, double radius, std::uint64_t seed) {
  if (!(radius > 0.0)) throw std::invalid_argument("initial_point_on_sphere: radius must be positive");
  auto [u, next] = sample_sphere(center.size(), seed_rng(seed, 5));
  (void)next;
  return center + radius * u;
}

}  // namespace qnlab
