#include "qnlab/updates.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qnlab {

UpdateRule UpdateRule::broyden(double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("Broyden update: tau must lie in [0, 1]");
  }
  return {UpdateKind::Broyden, tau};
}

std::string UpdateRule::name() const {
  switch (kind) {
    case UpdateKind::SR1: return "sr1";
    case UpdateKind::BFGS: return "bfgs";
    case UpdateKind::DFP: return "dfp";
    case UpdateKind::Broyden: {
      std::ostringstream os;
      os << "broyden(" << tau << ")";
      return os.str();
    }
  }
  return "unknown";
}

std::optional<UpdateRule> parse_update_rule(std::string_view name, double tau) {
  if (name == "sr1") return UpdateRule::sr1();
  if (name == "bfgs") return UpdateRule::bfgs();
  if (name == "dfp") return UpdateRule::dfp();
  if (name == "broyden") {
    if (!(tau >= 0.0 && tau <= 1.0)) return std::nullopt;
    return UpdateRule::broyden(tau);
  }
  return std::nullopt;
}

namespace {

void check_nonzero(const Vector& u, const char* what) {
  if (!(u.squaredNorm() > 0.0)) {
    throw std::invalid_argument(std::string(what) + ": zero direction");
  }
}

void check_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw std::domain_error(std::string(what) + ": non-finite result (positive definiteness lost?)");
  }
}

// Quantities shared by all primal formulas.
struct Actions {
  Vector gu;
  Vector au;
  Vector r;     // (G − A)u
  double ugu;   // uᵀGu
  double uau;   // uᵀAu
  double urr;   // uᵀ(G − A)u
};

Actions actions(const SymMatrix& g, const Vector& u, const Vector& au) {
  Actions a;
  a.gu = g.matrix() * u;
  a.au = au;
  a.r = a.gu - au;
  a.ugu = u.dot(a.gu);
  a.uau = u.dot(au);
  a.urr = u.dot(a.r);
  return a;
}

bool sr1_degenerate(const Actions& x, const Vector& u, double gap, double skip_tol) {
  return x.urr <= skip_tol * gap * u.squaredNorm();
}

bool broyden_degenerate(const Actions& x, const Vector& u, double tau, double gap,
                        double skip_tol) {
  if (x.r.norm() <= skip_tol * gap * u.norm()) return true;
  return tau < 1.0 && sr1_degenerate(x, u, gap, skip_tol);
}

Matrix sr1_delta(const Actions& x) { return -(x.r * x.r.transpose()) / x.urr; }

Matrix dfp_delta(const Actions& x) {
  Matrix d = -(x.au * x.gu.transpose() + x.gu * x.au.transpose()) / x.uau;
  d += ((x.ugu / x.uau + 1.0) / x.uau) * (x.au * x.au.transpose());
  return d;
}

Matrix bfgs_delta(const Actions& x) {
  return -(x.gu * x.gu.transpose()) / x.ugu + (x.au * x.au.transpose()) / x.uau;
}

Matrix broyden_delta(const Actions& x, double tau) {
  Matrix d = Matrix::Zero(x.gu.size(), x.gu.size());
  if (tau > 0.0) d += tau * dfp_delta(x);
  if (tau < 1.0) d += (1.0 - tau) * sr1_delta(x);
  return d;
}

SymMatrix finish(const SymMatrix& base, const Matrix& delta, const char* what) {
  Matrix out = base.matrix() + delta;
  check_finite(out, what);
  return SymMatrix::symmetrized(out);
}

void require_positive_curvature(double uau, const char* what) {
  if (!(uau > 0.0)) {
    throw std::domain_error(std::string(what) + ": uᵀAu must be positive");
  }
}

// Inverse forms in terms of h and the actions au (and u).

Matrix sr1_inverse_delta(const SymMatrix& h, const Vector& u, const Vector& au) {
  const Vector hau = h.matrix() * au;
  const Vector w = u - hau;                // (I − HA)u
  const double denom = u.dot(au) - au.dot(hau);  // uᵀ(A − AHA)u
  return (w * w.transpose()) / denom;
}

Matrix bfgs_inverse_delta(const SymMatrix& h, const Vector& u, const Vector& au) {
  const Vector hy = h.matrix() * au;
  const double rho = 1.0 / u.dot(au);
  const double yhy = au.dot(hy);
  Matrix d = -rho * (u * hy.transpose() + hy * u.transpose());
  d += (rho * rho * yhy + rho) * (u * u.transpose());
  return d;
}

Matrix dfp_inverse_delta(const SymMatrix& h, const Vector& u, const Vector& au) {
  const Vector hy = h.matrix() * au;
  return -(hy * hy.transpose()) / au.dot(hy) + (u * u.transpose()) / u.dot(au);
}

// G₊ = G + U·C·Uᵀ with U = [Gu, Au]; the inverse follows from
// H₊ = H − (HU)(I + C·UᵀHU)⁻¹C(HU)ᵀ, with HU = [u, H·Au].
Matrix broyden_inverse_delta(const SymMatrix& h, const Actions& x, const Vector& u, double tau) {
  Eigen::Matrix2d c = Eigen::Matrix2d::Zero();
  if (tau < 1.0) {
    const double s = (1.0 - tau) / x.urr;
    c(0, 0) -= s;
    c(0, 1) += s;
    c(1, 0) += s;
    c(1, 1) -= s;
  }
  if (tau > 0.0) {
    c(0, 1) -= tau / x.uau;
    c(1, 0) -= tau / x.uau;
    c(1, 1) += tau * (x.ugu / x.uau + 1.0) / x.uau;
  }
  const Index d = u.size();
  Matrix hu(d, 2);
  hu.col(0) = u;
  hu.col(1) = h.matrix() * x.au;
  Eigen::Matrix2d uhu;
  uhu(0, 0) = x.ugu;
  uhu(0, 1) = x.uau;
  uhu(1, 0) = x.uau;
  uhu(1, 1) = x.au.dot(hu.col(1));
  const Eigen::Matrix2d core =
      (Eigen::Matrix2d::Identity() + c * uhu).partialPivLu().solve(c);
  return -hu * core * hu.transpose();
}

double gap_norm(const SymMatrix& g, const SymMatrix& a) { return (g.matrix() - a.matrix()).norm(); }

}  // namespace

SymMatrix broyden_update(const SymMatrix& g, const SymMatrix& a, const Vector& u, double tau,
                         double skip_tol) {
  require_same_dim(g.dim(), a.dim(), "broyden_update");
  require_same_dim(g.dim(), u.size(), "broyden_update");
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("broyden_update: tau outside [0, 1]");
  check_nonzero(u, "broyden_update");
  const Actions x = actions(g, u, a * u);
  if (broyden_degenerate(x, u, tau, gap_norm(g, a), skip_tol)) return g;
  require_positive_curvature(x.uau, "broyden_update");
  return finish(g, broyden_delta(x, tau), "broyden_update");
}

SymMatrix sr1_update(const SymMatrix& g, const SymMatrix& a, const Vector& u, double skip_tol) {
  require_same_dim(g.dim(), a.dim(), "sr1_update");
  require_same_dim(g.dim(), u.size(), "sr1_update");
  check_nonzero(u, "sr1_update");
  const Actions x = actions(g, u, a * u);
  if (sr1_degenerate(x, u, gap_norm(g, a), skip_tol)) return g;
  return finish(g, sr1_delta(x), "sr1_update");
}

SymMatrix bfgs_update(const SymMatrix& g, const SymMatrix& a, const Vector& u) {
  require_same_dim(g.dim(), a.dim(), "bfgs_update");
  require_same_dim(g.dim(), u.size(), "bfgs_update");
  check_nonzero(u, "bfgs_update");
  const Actions x = actions(g, u, a * u);
  require_positive_curvature(x.uau, "bfgs_update");
  require_positive_curvature(x.ugu, "bfgs_update");
  return finish(g, bfgs_delta(x), "bfgs_update");
}

SymMatrix dfp_update(const SymMatrix& g, const SymMatrix& a, const Vector& u) {
  require_same_dim(g.dim(), a.dim(), "dfp_update");
  require_same_dim(g.dim(), u.size(), "dfp_update");
  check_nonzero(u, "dfp_update");
  const Actions x = actions(g, u, a * u);
  require_positive_curvature(x.uau, "dfp_update");
  return finish(g, dfp_delta(x), "dfp_update");
}

SymMatrix sr1_inverse_update(const SymMatrix& h, const SymMatrix& a, const Vector& u,
                             double skip_tol) {
  require_same_dim(h.dim(), a.dim(), "sr1_inverse_update");
  require_same_dim(h.dim(), u.size(), "sr1_inverse_update");
  check_nonzero(u, "sr1_inverse_update");
  const CholFactor hf = cholesky(h);
  const SymMatrix g = SymMatrix::symmetrized(hf.solve(Matrix(Matrix::Identity(h.dim(), h.dim()))));
  const Vector au = a * u;
  const Actions x = actions(g, u, au);
  if (sr1_degenerate(x, u, gap_norm(g, a), skip_tol)) return h;
  return finish(h, sr1_inverse_delta(h, u, au), "sr1_inverse_update");
}

SymMatrix bfgs_inverse_update(const SymMatrix& h, const SymMatrix& a, const Vector& u) {
  require_same_dim(h.dim(), a.dim(), "bfgs_inverse_update");
  require_same_dim(h.dim(), u.size(), "bfgs_inverse_update");
  check_nonzero(u, "bfgs_inverse_update");
  const Vector au = a * u;
  require_positive_curvature(u.dot(au), "bfgs_inverse_update");
  return finish(h, bfgs_inverse_delta(h, u, au), "bfgs_inverse_update");
}

SymMatrix dfp_inverse_update(const SymMatrix& h, const SymMatrix& a, const Vector& u) {
  require_same_dim(h.dim(), a.dim(), "dfp_inverse_update");
  require_same_dim(h.dim(), u.size(), "dfp_inverse_update");
  check_nonzero(u, "dfp_inverse_update");
  const Vector au = a * u;
  require_positive_curvature(u.dot(au), "dfp_inverse_update");
  return finish(h, dfp_inverse_delta(h, u, au), "dfp_inverse_update");
}

namespace {

Matrix factor_update(const Matrix& l, const Vector& u, const Vector& au, const Vector& u_tilde) {
  const double ut_norm = u_tilde.norm();
  if (!(ut_norm > 0.0)) throw std::invalid_argument("bfgs_factor_update: zero direction");
  const double uau = u.dot(au);
  require_positive_curvature(uau, "bfgs_factor_update");
  const Vector v = (std::sqrt(uau) / ut_norm) * u_tilde;
  Matrix out = l - ((l * au - v) * u.transpose()) / uau;
  check_finite(out, "bfgs_factor_update");
  return out;
}

}  // namespace

Matrix bfgs_factor_update(const Matrix& l, const SymMatrix& a, const Vector& u,
                          const Vector& u_tilde) {
  require_same_dim(l.rows(), a.dim(), "bfgs_factor_update");
  require_same_dim(l.cols(), a.dim(), "bfgs_factor_update");
  require_same_dim(u.size(), a.dim(), "bfgs_factor_update");
  require_same_dim(u_tilde.size(), a.dim(), "bfgs_factor_update");
  return factor_update(l, u, a * u, u_tilde);
}

ApproxState ApproxState::from(const SymMatrix& g0, bool with_factor) {
  const CholFactor fac = cholesky(g0);
  const Index d = g0.dim();
  SymMatrix h = SymMatrix::symmetrized(fac.solve(Matrix(Matrix::Identity(d, d))));
  std::optional<Matrix> l;
  if (with_factor) l = inverse_sqrt(g0);
  return ApproxState{g0, std::move(h), std::move(l)};
}

ApproxState ApproxState::scaled_identity(Index dim, double scale, bool with_factor) {
  if (!(scale > 0.0)) throw std::invalid_argument("scaled_identity: scale must be positive");
  std::optional<Matrix> l;
  if (with_factor) l = Matrix::Identity(dim, dim) / std::sqrt(scale);
  return ApproxState{SymMatrix::identity(dim, scale), SymMatrix::identity(dim, 1.0 / scale),
                     std::move(l)};
}

ApproxState correct(const ApproxState& state, double m_const, double r) {
  if (!(m_const >= 0.0) || !(r >= 0.0)) {
    throw std::invalid_argument("correct: m_const and r must be nonnegative");
  }
  const double factor = 1.0 + m_const * r;
  if (factor == 1.0) return state;
  ApproxState out{state.g.scaled(factor), state.h.scaled(1.0 / factor), std::nullopt};
  if (state.l) out.l = *state.l / std::sqrt(factor);
  return out;
}

UpdateOutcome apply_update(ApproxState& state, const UpdateRule& rule, const Vector& u,
                           const Vector& au, double gap_scale, double skip_tol,
                           const Vector* u_tilde) {
  require_same_dim(state.dim(), u.size(), "apply_update");
  require_same_dim(state.dim(), au.size(), "apply_update");
  check_nonzero(u, "apply_update");
  if (state.l && rule.kind != UpdateKind::BFGS) {
    throw std::logic_error("apply_update: a factor can only be maintained under BFGS");
  }

  const Actions x = actions(state.g, u, au);
  switch (rule.kind) {
    case UpdateKind::SR1: {
      if (sr1_degenerate(x, u, gap_scale, skip_tol)) return UpdateOutcome::Skipped;
      state.g = finish(state.g, sr1_delta(x), "sr1_update");
      state.h = finish(state.h, sr1_inverse_delta(state.h, u, au), "sr1_inverse_update");
      return UpdateOutcome::Applied;
    }
    case UpdateKind::Broyden: {
      if (broyden_degenerate(x, u, rule.tau, gap_scale, skip_tol)) return UpdateOutcome::Skipped;
      require_positive_curvature(x.uau, "broyden_update");
      const Matrix hdelta = broyden_inverse_delta(state.h, x, u, rule.tau);
      state.g = finish(state.g, broyden_delta(x, rule.tau), "broyden_update");
      state.h = finish(state.h, hdelta, "broyden_inverse_update");
      return UpdateOutcome::Applied;
    }
    case UpdateKind::DFP: {
      require_positive_curvature(x.uau, "dfp_update");
      const Matrix hdelta = dfp_inverse_delta(state.h, u, au);
      state.g = finish(state.g, dfp_delta(x), "dfp_update");
      state.h = finish(state.h, hdelta, "dfp_inverse_update");
      return UpdateOutcome::Applied;
    }
    case UpdateKind::BFGS: {
      require_positive_curvature(x.uau, "bfgs_update");
      require_positive_curvature(x.ugu, "bfgs_update");
      if (state.l) {
        if (u_tilde == nullptr) {
          throw std::invalid_argument("apply_update: scaled BFGS needs the unscaled direction");
        }
        state.l = factor_update(*state.l, u, au, *u_tilde);
      }
      const Matrix hdelta = bfgs_inverse_delta(state.h, u, au);
      state.g = finish(state.g, bfgs_delta(x), "bfgs_update");
      state.h = finish(state.h, hdelta, "bfgs_inverse_update");
      return UpdateOutcome::Applied;
    }
  }
  return UpdateOutcome::Skipped;
}

}  // namespace qnlab
