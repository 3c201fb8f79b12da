#include "qnlab/solvers.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qnlab/measures.hpp"

namespace qnlab {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Converged:
      return "converged";
    case Termination::MaxIters:
      return "max_iters";
    case Termination::InvariantBreach:
      return "invariant_breach";
    case Termination::NotPD:
      return "not_pd";
  }
  return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool is_sr1(const UpdateRule& rule) {
  return rule.kind == UpdateKind::SR1 || (rule.kind == UpdateKind::Broyden && rule.tau == 0.0);
}

// Skip threshold scale for the degenerate-direction test. Only traces are
// needed, so it is available from a Hessian diagonal.
double gap_scale(const SymMatrix& g, double target_trace) {
  return std::abs(g.trace()) + std::abs(target_trace);
}

// a ⪯ g checked on a/scale and g/scale, so that the tolerance is relative to
// the target's magnitude rather than to ‖g − a‖.
bool dominates(const SymMatrix& a, const SymMatrix& g, double tol, double scale) {
  const double inv = 1.0 / std::max(1.0, scale);
  return psd_order_holds(a.scaled(inv), g.scaled(inv), tol);
}

// Runs body(); maps numerical failures onto a termination status.
template <typename Body>
bool guarded(Body&& body, Termination& term, std::string& diag) {
  try {
    body();
    return true;
  } catch (const NotPositiveDefinite& e) {
    term = Termination::NotPD;
    diag = e.what();
  } catch (const std::domain_error& e) {
    term = Termination::InvariantBreach;
    diag = e.what();
  }
  return false;
}

}  // namespace

MatrixRunResult approx_matrix(const SymMatrix& a, const SymMatrix& g0, const UpdateRule& rule,
                              const DirectionStrategy& dir, Index steps,
                              const SolverOptions& opts) {
  require_same_dim(a.dim(), g0.dim(), "approx_matrix");
  if (steps < 0) throw std::invalid_argument("approx_matrix: steps must be >= 0");
  if (!psd_order_holds(a, g0, opts.psd_tol)) {
    throw std::invalid_argument("approx_matrix: g0 must dominate a");
  }
  const auto start = Clock::now();
  const CholFactor a_fac = cholesky(a);
  const Vector a_diag = a.diagonal();
  const double a_trace = a.trace();
  const double a_norm = extreme_eigs(a).lambda_max;

  MatrixRunResult out;
  DirectionSource source(dir, rule);
  ApproxState state = ApproxState::from(g0, dir.uses_factor());

  auto record = [&](Index k) {
    IterationRecord rec;
    rec.k = k;
    rec.sigma = sigma_measure(a_fac, state.g);
    rec.tau = tau_measure(a, state.g);
    rec.elapsed_s = seconds_since(start);
    out.records.push_back(rec);
  };

  guarded(
      [&] {
        record(0);
        const double tau0 = *out.records.front().tau;
        for (Index k = 0;; ++k) {
          if (opts.tau_tol > 0.0 && is_sr1(rule) && *out.records.back().tau <= opts.tau_tol * tau0) {
            out.termination = Termination::Converged;
            return;
          }
          if (k == steps) {
            out.termination = Termination::MaxIters;
            return;
          }
          const Direction u = source.next(state, a_diag, [&] { return a; });
          const Vector au = a * u.u;
          const UpdateOutcome res =
              apply_update(state, rule, u.u, au, gap_scale(state.g, a_trace), opts.skip_tol,
                           u.u_tilde ? &*u.u_tilde : nullptr);
          out.records.back().skipped = res == UpdateOutcome::Skipped;
          record(k + 1);
          if (!dominates(a, state.g, opts.psd_tol, a_norm)) {
            std::ostringstream os;
            os << "G does not dominate A after step " << k + 1;
            throw std::domain_error(os.str());
          }
        }
      },
      out.termination, out.diagnostic);
  out.g_final = state.g;
  return out;
}

RunResult solve_quadratic(const QuadraticObjective& obj, const Vector& x0, const SymMatrix& g0,
                          const UpdateRule& rule, const DirectionStrategy& dir,
                          const SolverOptions& opts) {
  const Index d = obj.dim();
  require_same_dim(d, x0.size(), "solve_quadratic");
  require_same_dim(d, g0.dim(), "solve_quadratic");
  const SymMatrix& a = obj.a();
  if (!psd_order_holds(a, g0, opts.psd_tol)) {
    throw std::invalid_argument("solve_quadratic: g0 must dominate A");
  }
  const bool dense = opts.dense.value_or(d <= 256);
  const auto start = Clock::now();
  const Vector a_diag = a.diagonal();
  const double a_trace = a.trace();

  RunResult out;
  out.x = x0;
  DirectionSource source(dir, rule);
  ApproxState state = ApproxState::from(g0, dir.uses_factor());
  Vector grad = obj.gradient(out.x);

  auto record = [&](Index k) {
    IterationRecord rec;
    rec.k = k;
    rec.grad_norm = grad.norm();
    rec.lambda = lambda_measure(grad, obj.a_factor());
    if (dense) {
      rec.sigma = sigma_measure(obj.a_factor(), state.g);
      rec.tau = tau_measure(a, state.g);
      rec.eta = eta_trace_ratio(a, state.g);
    }
    rec.elapsed_s = seconds_since(start);
    out.records.push_back(rec);
  };

  guarded(
      [&] {
        record(0);
        const double lambda0 = *out.records.front().lambda;
        for (int k = 0;; ++k) {
          const IterationRecord& cur = out.records.back();
          if (*cur.lambda <= opts.stop.lambda_tol * lambda0 || *cur.grad_norm <= opts.stop.grad_tol) {
            out.termination = Termination::Converged;
            return;
          }
          if (k == opts.stop.max_iters) {
            out.termination = Termination::MaxIters;
            return;
          }
          const Vector s = -(state.h * grad);
          out.records.back().r = std::sqrt(std::max(0.0, s.dot(a * s)));
          out.x += s;

          const Direction u = source.next(state, a_diag, [&] { return a; });
          const Vector au = a * u.u;
          const UpdateOutcome res =
              apply_update(state, rule, u.u, au, gap_scale(state.g, a_trace), opts.skip_tol,
                           u.u_tilde ? &*u.u_tilde : nullptr);
          out.records.back().skipped = res == UpdateOutcome::Skipped;
          grad = obj.gradient(out.x);
          if (!grad.allFinite()) throw std::domain_error("solve_quadratic: non-finite gradient");
          record(k + 1);
        }
      },
      out.termination, out.diagnostic);
  return out;
}

RunResult solve_general(const Objective& obj, const Vector& x0, const UpdateRule& rule,
                        const DirectionStrategy& dir, double m_const, const SolverOptions& opts,
                        const std::optional<SymMatrix>& g0) {
  const Index d = obj.dim();
  require_same_dim(d, x0.size(), "solve_general");
  if (!(m_const >= 0.0)) throw std::invalid_argument("solve_general: m_const must be >= 0");
  const bool dense = opts.dense.value_or(d <= 256);
  const auto start = Clock::now();

  RunResult out;
  out.x = x0;
  DirectionSource source(dir, rule);
  ApproxState state = g0 ? ApproxState::from(*g0, dir.uses_factor())
                         : ApproxState::scaled_identity(d, obj.constants().lip, dir.uses_factor());
  Vector grad = obj.gradient(out.x);

  auto record = [&](Index k) {
    IterationRecord rec;
    rec.k = k;
    rec.grad_norm = grad.norm();
    if (dense) {
      const SymMatrix hess = obj.hessian(out.x);
      const CholFactor fac = cholesky(hess);
      rec.lambda = lambda_measure(grad, fac);
      rec.sigma = sigma_measure(fac, state.g);
      rec.tau = tau_measure(hess, state.g);
      rec.eta = eta_trace_ratio(hess, state.g);
    }
    rec.elapsed_s = seconds_since(start);
    out.records.push_back(rec);
  };

  guarded(
      [&] {
        record(0);
        const std::optional<double> lambda0 = out.records.front().lambda;
        for (int k = 0;; ++k) {
          const IterationRecord& cur = out.records.back();
          const bool lambda_done = cur.lambda && *cur.lambda <= opts.stop.lambda_tol * *lambda0;
          if (lambda_done || *cur.grad_norm <= opts.stop.grad_tol) {
            out.termination = Termination::Converged;
            return;
          }
          if (k == opts.stop.max_iters) {
            out.termination = Termination::MaxIters;
            return;
          }
          const Vector s = -(state.h * grad);
          const double r = std::sqrt(std::max(0.0, s.dot(obj.hess_vec(out.x, s))));
          out.records.back().r = r;
          out.x += s;

          state = correct(state, m_const, r);
          const Vector diag_next = obj.hess_diag(out.x);
          const Vector& x_next = out.x;
          const Direction u = source.next(state, diag_next, [&] { return obj.hessian(x_next); });
          const Vector au = obj.hess_vec(out.x, u.u);
          const UpdateOutcome res =
              apply_update(state, rule, u.u, au, gap_scale(state.g, diag_next.sum()),
                           opts.skip_tol, u.u_tilde ? &*u.u_tilde : nullptr);
          out.records.back().skipped = res == UpdateOutcome::Skipped;

          grad = obj.gradient(out.x);
          if (!grad.allFinite()) throw std::domain_error("solve_general: non-finite gradient");
          record(k + 1);
          if (dense && opts.check_sandwich &&
              !dominates(obj.hessian(out.x), state.g, opts.psd_tol, obj.constants().lip)) {
            std::ostringstream os;
            os << "G does not dominate the Hessian after step " << k + 1;
            throw std::domain_error(os.str());
          }
        }
      },
      out.termination, out.diagnostic);
  return out;
}

Vector newton_warm_start(const Objective& obj, const Vector& x0, int steps, double grad_target) {
  require_same_dim(obj.dim(), x0.size(), "newton_warm_start");
  Vector x = x0;
  for (int i = 0; i < steps; ++i) {
    const Vector g = obj.gradient(x);
    if (g.norm() <= grad_target) break;
    x -= cholesky(obj.hessian(x)).solve(g);
  }
  return x;
}

double agd_momentum(double kappa) {
  if (!(kappa >= 1.0)) throw std::invalid_argument("agd_momentum: kappa must be >= 1");
  const double q = std::sqrt(kappa);
  return (q - 1.0) / (q + 1.0);
}

AgdResult agd_baseline(const Objective& obj, const Vector& x0, int iters) {
  require_same_dim(obj.dim(), x0.size(), "agd_baseline");
  const ObjectiveConstants& c = obj.constants();
  const double beta = agd_momentum(c.kappa());
  const auto start = Clock::now();

  AgdResult out;
  Vector x = x0;
  Vector x_prev = x0;
  auto push = [&] {
    out.grad_norms.push_back(obj.gradient(x).norm());
    out.values.push_back(obj.value(x));
    out.elapsed_s.push_back(seconds_since(start));
  };
  push();
  for (int k = 0; k < iters; ++k) {
    const Vector y = x + beta * (x - x_prev);
    x_prev = x;
    x = y - obj.gradient(y) / c.lip;
    push();
  }
  out.x = x;
  return out;
}

}  // namespace qnlab
