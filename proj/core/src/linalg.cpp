#include "qnlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qnlab {

void require_same_dim(Index a, Index b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw DimensionMismatch(os.str());
  }
}

SymMatrix::SymMatrix(Matrix m) {
  if (m.rows() < 1 || m.rows() != m.cols()) {
    throw DimensionMismatch("SymMatrix: expected a non-empty square matrix");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= kSymmetryTol * scale)) {
    std::ostringstream os;
    os << "SymMatrix: asymmetry " << asym << " exceeds tolerance";
    throw std::invalid_argument(os.str());
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::symmetrized(const Matrix& m) {
  if (m.rows() < 1 || m.rows() != m.cols()) {
    throw DimensionMismatch("SymMatrix: expected a non-empty square matrix");
  }
  return SymMatrix(0.5 * (m + m.transpose()), Trusted{});
}

SymMatrix SymMatrix::identity(Index dim, double scale) {
  if (dim < 1) throw DimensionMismatch("SymMatrix: dim must be >= 1");
  return SymMatrix(scale * Matrix::Identity(dim, dim), Trusted{});
}

SymMatrix SymMatrix::diagonal(const Vector& diag) {
  if (diag.size() < 1) throw DimensionMismatch("SymMatrix: dim must be >= 1");
  return SymMatrix(Matrix(diag.asDiagonal()), Trusted{});
}

Vector SymMatrix::operator*(const Vector& v) const {
  require_same_dim(dim(), v.size(), "SymMatrix * vector");
  return m_ * v;
}

SymMatrix SymMatrix::scaled(double factor) const { return SymMatrix(factor * m_, Trusted{}); }

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
  require_same_dim(a.dim(), b.dim(), "SymMatrix +");
  return SymMatrix(a.m_ + b.m_, SymMatrix::Trusted{});
}

SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
  require_same_dim(a.dim(), b.dim(), "SymMatrix -");
  return SymMatrix(a.m_ - b.m_, SymMatrix::Trusted{});
}

Vector CholFactor::solve(const Vector& rhs) const {
  require_same_dim(dim(), rhs.size(), "solve_spd");
  const auto l = lower_.triangularView<Eigen::Lower>();
  Vector y = l.solve(rhs);
  return l.transpose().solve(y);
}

Matrix CholFactor::solve(const Matrix& rhs) const {
  require_same_dim(dim(), rhs.rows(), "solve_spd");
  const auto l = lower_.triangularView<Eigen::Lower>();
  Matrix y = l.solve(rhs);
  return l.transpose().solve(y);
}

Matrix CholFactor::reconstruct() const { return lower_ * lower_.transpose(); }

std::optional<CholFactor> try_cholesky(const SymMatrix& m, double rel_tol) {
  const Index n = m.dim();
  const Matrix& a = m.matrix();
  const double max_diag = a.diagonal().maxCoeff();
  if (!(max_diag > 0.0)) return std::nullopt;
  const double floor = rel_tol * max_diag;

  Matrix l = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    double pivot = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > floor)) return std::nullopt;
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (Index i = j + 1; i < n; ++i) {
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / ljj;
    }
  }
  return CholFactor(std::move(l));
}

CholFactor cholesky(const SymMatrix& m, double rel_tol) {
  auto fac = try_cholesky(m, rel_tol);
  if (!fac) throw NotPositiveDefinite("cholesky: matrix is not positive definite");
  return *std::move(fac);
}

Vector solve_spd(const CholFactor& fac, const Vector& rhs) { return fac.solve(rhs); }

namespace {

struct JacobiResult {
  Vector values;
  Matrix vectors;
  int sweeps = 0;
  bool converged = false;
};

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

JacobiResult jacobi(const SymMatrix& m, int max_sweeps, double tol, bool want_vectors) {
  const Index n = m.dim();
  Matrix a = m.matrix();
  Matrix v;
  if (want_vectors) v = Matrix::Identity(n, n);

  JacobiResult out;
  const double norm = a.norm();
  if (norm == 0.0 || n == 1) {
    out.values = a.diagonal();
    out.vectors = want_vectors ? v : Matrix();
    out.converged = true;
    return out;
  }

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off_diagonal_norm(a) <= tol * norm) {
      out.converged = true;
      break;
    }
    ++out.sweeps;
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::hypot(1.0, theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        if (want_vectors) {
          for (Index k = 0; k < n; ++k) {
            const double vkp = v(k, p), vkq = v(k, q);
            v(k, p) = c * vkp - s * vkq;
            v(k, q) = s * vkp + c * vkq;
          }
        }
      }
    }
  }
  if (!out.converged && off_diagonal_norm(a) <= tol * norm) out.converged = true;
  out.values = a.diagonal();
  if (want_vectors) out.vectors = std::move(v);
  return out;
}

}  // namespace

EigenRange extreme_eigs(const SymMatrix& m, int max_sweeps, double tol) {
  const JacobiResult r = jacobi(m, max_sweeps, tol, false);
  return {r.values.minCoeff(), r.values.maxCoeff(), r.sweeps, r.converged};
}

Vector jacobi_eigenvalues(const SymMatrix& m, int max_sweeps, double tol) {
  Vector values = jacobi(m, max_sweeps, tol, false).values;
  std::sort(values.data(), values.data() + values.size());
  return values;
}

bool psd_order_holds(const SymMatrix& a, const SymMatrix& b, double tol) {
  require_same_dim(a.dim(), b.dim(), "psd_order_holds");
  const EigenRange r = extreme_eigs(b - a);
  const double spectral = std::max(std::abs(r.lambda_min), std::abs(r.lambda_max));
  return r.lambda_min >= -tol * (1.0 + spectral);
}

Matrix inverse_sqrt(const SymMatrix& m) {
  const JacobiResult r = jacobi(m, 100, 1e-15, true);
  if (!(r.values.minCoeff() > 0.0)) {
    throw NotPositiveDefinite("inverse_sqrt: matrix is not positive definite");
  }
  const Vector scale = r.values.cwiseSqrt().cwiseInverse();
  Matrix out = r.vectors * scale.asDiagonal() * r.vectors.transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace qnlab
