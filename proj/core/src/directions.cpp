#include "qnlab/directions.hpp"

#include <stdexcept>

namespace qnlab {

std::string to_string(DirectionKind kind) {
  switch (kind) {
    case DirectionKind::GreedyBroyden: return "greedy_broyden";
    case DirectionKind::GreedySR1: return "greedy_sr1";
    case DirectionKind::GreedyBFGS: return "greedy_bfgs";
    case DirectionKind::RandomSphere: return "random_sphere";
    case DirectionKind::RandomGaussian: return "random_gaussian";
  }
  return "unknown";
}

std::string DirectionStrategy::name() const {
  std::string n = to_string(kind);
  if (scaled && kind != DirectionKind::GreedyBFGS) n += "_scaled";
  return n;
}

std::optional<DirectionKind> parse_direction_kind(std::string_view name) {
  for (auto k : {DirectionKind::GreedyBroyden, DirectionKind::GreedySR1, DirectionKind::GreedyBFGS,
                 DirectionKind::RandomSphere, DirectionKind::RandomGaussian}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

void validate_direction(const DirectionStrategy& dir, const UpdateRule& rule) {
  if (dir.kind == DirectionKind::GreedyBFGS) {
    if (rule.kind != UpdateKind::BFGS) {
      throw std::invalid_argument("greedy_bfgs directions require the bfgs update");
    }
    if (!dir.allow_expensive) {
      throw std::invalid_argument("greedy_bfgs costs O(d^3) per step; set allow_expensive");
    }
    return;
  }
  if (dir.scaled) {
    if (rule.kind != UpdateKind::BFGS) {
      throw std::invalid_argument("scaled directions require the bfgs update");
    }
    if (!dir.is_random()) {
      throw std::invalid_argument("scaled directions require a random direction kind");
    }
  }
}

namespace {

Index argmax_lowest(const Vector& score) {
  Index best = 0;
  for (Index i = 1; i < score.size(); ++i) {
    if (score(i) > score(best)) best = i;
  }
  return best;
}

}  // namespace

Index greedy_broyden_dir(const Vector& g_diag, const Vector& a_diag) {
  require_same_dim(g_diag.size(), a_diag.size(), "greedy_broyden_dir");
  if (g_diag.size() < 1) throw DimensionMismatch("greedy_broyden_dir: empty input");
  if (!(a_diag.minCoeff() > 0.0)) {
    throw std::invalid_argument("greedy_broyden_dir: target diagonal must be positive");
  }
  return argmax_lowest(g_diag.cwiseQuotient(a_diag));
}

Index greedy_sr1_dir(const Vector& g_diag, const Vector& a_diag) {
  require_same_dim(g_diag.size(), a_diag.size(), "greedy_sr1_dir");
  if (g_diag.size() < 1) throw DimensionMismatch("greedy_sr1_dir: empty input");
  return argmax_lowest(g_diag - a_diag);
}

Index greedy_bfgs_dir(const SymMatrix& l_inv_weighted) {
  return argmax_lowest(l_inv_weighted.diagonal());
}

SymMatrix greedy_bfgs_weight(const Matrix& l, const SymMatrix& a) {
  require_same_dim(l.rows(), a.dim(), "greedy_bfgs_weight");
  const Matrix l_inv = l.partialPivLu().inverse();
  const CholFactor af = cholesky(a);
  return SymMatrix::symmetrized(l_inv.transpose() * af.solve(l_inv));
}

DirectionSource::DirectionSource(const DirectionStrategy& strategy, const UpdateRule& rule)
    : strategy_(strategy), rng_(seed_rng(strategy.seed, 1)) {
  validate_direction(strategy, rule);
}

Direction DirectionSource::next(const ApproxState& state, const Vector& target_diag,
                                const std::function<SymMatrix()>& dense_target) {
  const Index d = state.dim();
  Direction out;
  Vector raw;
  switch (strategy_.kind) {
    case DirectionKind::GreedyBroyden:
      raw = Vector::Unit(d, greedy_broyden_dir(state.g.diagonal(), target_diag));
      break;
    case DirectionKind::GreedySR1:
      raw = Vector::Unit(d, greedy_sr1_dir(state.g.diagonal(), target_diag));
      break;
    case DirectionKind::GreedyBFGS: {
      if (!state.l) throw std::logic_error("greedy_bfgs: state carries no factor");
      raw = Vector::Unit(d, greedy_bfgs_dir(greedy_bfgs_weight(*state.l, dense_target())));
      break;
    }
    case DirectionKind::RandomSphere: {
      auto [v, next] = sample_sphere(d, rng_);
      raw = std::move(v);
      rng_ = next;
      break;
    }
    case DirectionKind::RandomGaussian: {
      auto [v, next] = sample_gaussian(d, rng_);
      raw = std::move(v);
      rng_ = next;
      break;
    }
  }
  if (strategy_.uses_factor()) {
    if (!state.l) throw std::logic_error("scaled direction: state carries no factor");
    out.u = state.l->transpose() * raw;
    out.u_tilde = std::move(raw);
  } else {
    out.u = std::move(raw);
  }
  return out;
}

}  // namespace qnlab
