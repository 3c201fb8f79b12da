#pragma once

#include <cstdint>
#include <optional>

#include "qnlab/linalg.hpp"

namespace qnlab {

/// μ, L and the strong self-concordance parameter M of an objective.
struct ObjectiveConstants {
  double mu = 0.0;
  double lip = 0.0;
  double self_concordance = 0.0;

  double kappa() const { return lip / mu; }
};

/// Dense Hessian assembly is refused above this dimension.
inline constexpr Index kMaxDenseHessianDim = 1024;

/// Twice differentiable, μ-strongly convex, L-smooth objective. The solvers
/// only need gradient, hess_vec and hess_diag; hessian() exists for
/// instrumentation and test oracles.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual Index dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual SymMatrix hessian(const Vector& x) const = 0;
  virtual Vector hess_vec(const Vector& x, const Vector& v) const = 0;
  virtual Vector hess_diag(const Vector& x) const = 0;

  const ObjectiveConstants& constants() const { return constants_; }

 protected:
  void check_point(const Vector& x) const;
  void check_dense_allowed() const;

  ObjectiveConstants constants_;
};

/// f(x) = ½xᵀAx − bᵀx
class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(SymMatrix a, Vector b);

  Index dim() const override { return a_.dim(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  SymMatrix hessian(const Vector& x) const override;
  Vector hess_vec(const Vector& x, const Vector& v) const override;
  Vector hess_diag(const Vector& x) const override;

  const SymMatrix& a() const { return a_; }
  const Vector& b() const { return b_; }
  const CholFactor& a_factor() const { return a_fac_; }
  Vector minimizer() const { return a_fac_.solve(b_); }

 private:
  SymMatrix a_;
  Vector b_;
  CholFactor a_fac_;
};

/// f(x) = ln Σⱼ exp(cⱼᵀx − bⱼ) + ½ Σⱼ (cⱼᵀx)² + (γ/2)‖x‖²
///
/// L = 2·λ_max(CCᵀ) + γ, μ = γ, M = 2.
class LogSumExpObjective final : public Objective {
 public:
  /// c is d×m with columns cⱼ.
  LogSumExpObjective(Matrix c, Vector b, double gamma);

  Index dim() const override { return c_.rows(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  SymMatrix hessian(const Vector& x) const override;
  Vector hess_vec(const Vector& x, const Vector& v) const override;
  Vector hess_diag(const Vector& x) const override;

  const Matrix& c() const { return c_; }
  const Vector& b() const { return b_; }
  double gamma() const { return gamma_; }

  /// Softmax weights πⱼ(x), computed with a max shift.
  Vector softmax(const Vector& x) const;

 private:
  Matrix c_;
  Vector b_;
  double gamma_;
};

/// f(w) = Σᵢ ln(1 + exp(−yᵢ wᵀxᵢ)) + (γ/2)‖w‖²
///
/// L = λ_max(XXᵀ)/4 + γ, μ = γ. M is not known in closed form and is
/// whatever the caller passes (0 means no correction).
class LogisticObjective final : public Objective {
 public:
  /// samples is d×n with columns xᵢ; labels are ±1.
  LogisticObjective(Matrix samples, Vector labels, double gamma, double self_concordance = 0.0);

  Index dim() const override { return x_.rows(); }
  double value(const Vector& w) const override;
  Vector gradient(const Vector& w) const override;
  SymMatrix hessian(const Vector& w) const override;
  Vector hess_vec(const Vector& w, const Vector& v) const override;
  Vector hess_diag(const Vector& w) const override;

  const Matrix& samples() const { return x_; }
  const Vector& labels() const { return y_; }
  Index num_samples() const { return x_.cols(); }
  double gamma() const { return gamma_; }

 private:
  /// e^{t}/(1+e^{t})² at tᵢ = yᵢwᵀxᵢ
  Vector curvature_weights(const Vector& w) const;

  Matrix x_;
  Vector y_;
  double gamma_;
};

/// A = QΛQᵀ with Q Haar-random orthogonal and spectrum in [mu, lip]
/// (both endpoints attained, interior eigenvalues uniform).
SymMatrix random_spd(Index d, double mu, double lip, std::uint64_t seed);

/// Synthetic log-sum-exp instance: ĉⱼ and bⱼ uniform in [−1, 1], then
/// cⱼ = ĉⱼ − ∇f̂(0) so that ∇f(0) = 0 and x* = 0.
LogSumExpObjective make_logsumexp_synthetic(Index d, Index m, double gamma, std::uint64_t seed);

/// Synthetic binary classification data: Gaussian features, labels from a
/// random hyperplane with 10% flipped.
LogisticObjective make_logistic_synthetic(Index d, Index n, double gamma, std::uint64_t seed,
                                          double self_concordance = 0.0);

/// center + radius·u with u uniform on the unit sphere.
Vector initial_point_on_sphere(const Vector& center, double radius, std::uint64_t seed);

}  // namespace qnlab
