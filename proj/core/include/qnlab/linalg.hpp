#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qnlab {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kCholeskyTol = 1e-13;
inline constexpr double kPsdOrderTol = 1e-9;

class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void require_same_dim(Index a, Index b, const char* what);

/// Dense symmetric matrix. Entries are exactly symmetric: the constructor
/// rejects input whose asymmetry exceeds kSymmetryTol relative to its
/// largest entry and stores the symmetrized average otherwise.
class SymMatrix {
 public:
  explicit SymMatrix(Matrix m);

  /// (m + mᵀ)/2 without an asymmetry check; used after rank-k updates.
  static SymMatrix symmetrized(const Matrix& m);
  static SymMatrix identity(Index dim, double scale = 1.0);
  static SymMatrix diagonal(const Vector& diag);

  Index dim() const { return m_.rows(); }
  double operator()(Index i, Index j) const { return m_(i, j); }
  const Matrix& matrix() const { return m_; }
  Vector diagonal() const { return m_.diagonal(); }
  double trace() const { return m_.trace(); }
  double frobenius_norm() const { return m_.norm(); }

  Vector operator*(const Vector& v) const;
  SymMatrix scaled(double factor) const;

  friend SymMatrix operator+(const SymMatrix& a, const SymMatrix& b);
  friend SymMatrix operator-(const SymMatrix& a, const SymMatrix& b);

 private:
  struct Trusted {};
  SymMatrix(Matrix m, Trusted) : m_(std::move(m)) {}

  Matrix m_;
};

/// Lower-triangular factor with lower·lowerᵀ equal to the source matrix.
class CholFactor {
 public:
  Index dim() const { return lower_.rows(); }
  const Matrix& lower() const { return lower_; }

  Vector solve(const Vector& rhs) const;
  Matrix solve(const Matrix& rhs) const;
  /// lower·lowerᵀ
  Matrix reconstruct() const;

 private:
  friend std::optional<CholFactor> try_cholesky(const SymMatrix&, double);
  explicit CholFactor(Matrix lower) : lower_(std::move(lower)) {}

  Matrix lower_;
};

/// Cholesky factorization. Fails when a pivot drops to rel_tol times the
/// largest diagonal entry or below.
std::optional<CholFactor> try_cholesky(const SymMatrix& m, double rel_tol = kCholeskyTol);

/// Throws NotPositiveDefinite where try_cholesky returns nullopt.
CholFactor cholesky(const SymMatrix& m, double rel_tol = kCholeskyTol);

Vector solve_spd(const CholFactor& fac, const Vector& rhs);

struct EigenRange {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  int sweeps = 0;
  bool converged = false;
};

/// Extreme eigenvalues by cyclic Jacobi rotation. Stops once the
/// off-diagonal Frobenius mass falls below tol times the matrix norm, or
/// after max_sweeps sweeps (converged = false, best estimate returned).
EigenRange extreme_eigs(const SymMatrix& m, int max_sweeps = 100, double tol = 1e-14);

/// All eigenvalues, ascending, by the same Jacobi iteration.
Vector jacobi_eigenvalues(const SymMatrix& m, int max_sweeps = 100, double tol = 1e-14);

/// a ⪯ b up to tolerance: λ_min(b − a) ≥ −tol·(1 + ‖b − a‖₂).
bool psd_order_holds(const SymMatrix& a, const SymMatrix& b, double tol = kPsdOrderTol);

/// Symmetric inverse square root via Jacobi eigenvectors; m must be SPD.
Matrix inverse_sqrt(const SymMatrix& m);

}  // namespace qnlab
