#include "qnlab/envelopes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace qnlab {

namespace {

constexpr std::array<std::pair<EnvelopeKind, const char*>, 15> kNames{{
    {EnvelopeKind::None, "none"},
    {EnvelopeKind::BroydenMatrix, "broyden_matrix"},
    {EnvelopeKind::SR1Matrix, "sr1_matrix"},
    {EnvelopeKind::BFGSMatrix, "bfgs_matrix"},
    {EnvelopeKind::BroydenRatio, "broyden_ratio"},
    {EnvelopeKind::SR1Ratio, "sr1_ratio"},
    {EnvelopeKind::BFGSRatio, "bfgs_ratio"},
    {EnvelopeKind::BroydenLambda, "broyden_lambda"},
    {EnvelopeKind::SR1Lambda, "sr1_lambda"},
    {EnvelopeKind::BFGSLambda, "bfgs_lambda"},
    {EnvelopeKind::GreedyBroydenTwoPhase, "greedy_broyden_two_phase"},
    {EnvelopeKind::RandomBroydenTwoPhase, "random_broyden_two_phase"},
    {EnvelopeKind::GreedyTwoPhase, "greedy_two_phase"},
    {EnvelopeKind::RandomTwoPhase, "random_two_phase"},
    {EnvelopeKind::BroydenHighProb, "broyden_highprob"},
}};

double dd(Index d) { return static_cast<double>(d); }

void check_params(const EnvelopeParams& p) {
  if (p.d < 1) throw std::invalid_argument("envelope: d must be >= 1");
  if (!(p.kappa >= 1.0)) throw std::invalid_argument("envelope: kappa must be >= 1");
}

double linear_sr1(const EnvelopeParams& p, Index k) {
  return std::max(0.0, 1.0 - dd(k) / dd(p.d));
}

double ratio_curve(EnvelopeKind kind, const EnvelopeParams& p, Index k) {
  switch (kind) {
    case EnvelopeKind::BroydenRatio:
    case EnvelopeKind::BroydenLambda:
      return std::pow(1.0 - 1.0 / (dd(p.d) * p.kappa), dd(k)) * p.sigma0;
    case EnvelopeKind::SR1Ratio:
    case EnvelopeKind::SR1Lambda:
      return linear_sr1(p, k) * p.tau0 / p.mu;
    case EnvelopeKind::BFGSRatio:
    case EnvelopeKind::BFGSLambda:
      return std::pow(1.0 - 1.0 / dd(p.d), dd(k)) * p.sigma0;
    default:
      throw std::logic_error("ratio_curve: not a ratio envelope");
  }
}

double two_phase(double q, const EnvelopeParams& p, Index k) {
  const double linear = 1.0 - 1.0 / (2.0 * p.kappa);
  if (k <= p.k0) return std::pow(linear, dd(k)) * p.lambda0;
  const double j = dd(k - p.k0);
  return std::pow(q, j * (j - 1.0) / 2.0) * std::pow(0.5, j) * std::pow(linear, dd(p.k0)) *
         p.lambda0;
}

}  // namespace

std::optional<EnvelopeKind> parse_envelope_kind(std::string_view name) {
  for (const auto& [kind, n] : kNames)
    if (name == n) return kind;
  return std::nullopt;
}

std::string to_string(EnvelopeKind kind) {
  for (const auto& [k, n] : kNames)
    if (k == kind) return n;
  return "unknown";
}

EnvelopeMetric envelope_metric(EnvelopeKind kind) {
  switch (kind) {
    case EnvelopeKind::None:
      return EnvelopeMetric::None;
    case EnvelopeKind::BroydenMatrix:
    case EnvelopeKind::BFGSMatrix:
    case EnvelopeKind::BroydenHighProb:
      return EnvelopeMetric::Sigma;
    case EnvelopeKind::SR1Matrix:
      return EnvelopeMetric::Tau;
    case EnvelopeKind::BroydenRatio:
    case EnvelopeKind::SR1Ratio:
    case EnvelopeKind::BFGSRatio:
      return EnvelopeMetric::LambdaRatio;
    default:
      return EnvelopeMetric::Lambda;
  }
}

double envelope_value(EnvelopeKind kind, const EnvelopeParams& p, Index k) {
  check_params(p);
  if (k < 0) throw std::invalid_argument("envelope: k must be >= 0");
  const double d = dd(p.d);
  switch (kind) {
    case EnvelopeKind::None:
      return 0.0;
    case EnvelopeKind::BroydenMatrix:
      return std::pow(1.0 - 1.0 / (d * p.kappa), dd(k)) * p.sigma0;
    case EnvelopeKind::SR1Matrix:
      return linear_sr1(p, k) * p.tau0;
    case EnvelopeKind::BFGSMatrix:
      return std::pow(1.0 - 1.0 / d, dd(k)) * p.sigma0;
    case EnvelopeKind::BroydenRatio:
    case EnvelopeKind::SR1Ratio:
    case EnvelopeKind::BFGSRatio:
      return ratio_curve(kind, p, k);
    case EnvelopeKind::BroydenLambda:
    case EnvelopeKind::SR1Lambda:
    case EnvelopeKind::BFGSLambda: {
      double v = p.lambda0;
      for (Index i = 0; i < k; ++i) v *= std::min(1.0, ratio_curve(kind, p, i));
      return v;
    }
    case EnvelopeKind::GreedyBroydenTwoPhase:
      return two_phase(1.0 - 1.0 / (d * p.kappa), p, k);
    case EnvelopeKind::RandomBroydenTwoPhase:
      return two_phase(1.0 - 1.0 / (d * p.kappa + 1.0), p, k);
    case EnvelopeKind::GreedyTwoPhase:
      return two_phase(1.0 - 1.0 / d, p, k);
    case EnvelopeKind::RandomTwoPhase:
      return two_phase(1.0 - 1.0 / (d + 1.0), p, k);
    case EnvelopeKind::BroydenHighProb:
      if (!(p.delta > 0.0 && p.delta < 1.0)) {
        throw std::invalid_argument("envelope: delta must be in (0, 1)");
      }
      return 2.0 * d * d * p.kappa * p.kappa * p.sigma0 / p.delta *
             std::pow(1.0 - 1.0 / (d * p.kappa + 1.0), dd(k));
  }
  throw std::invalid_argument("envelope: unknown kind");
}

std::vector<double> bound_envelope(EnvelopeKind kind, const EnvelopeParams& p, Index steps) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(steps + 1));
  for (Index k = 0; k <= steps; ++k) out.push_back(envelope_value(kind, p, k));
  return out;
}

double start_moment(MethodFamily family, Index d, double kappa, double delta) {
  if (d < 1 || !(kappa >= 1.0)) throw std::invalid_argument("start_moment: need d >= 1, kappa >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("start_moment: delta must be in (0, 1)");
  const double n = dd(d), k = kappa;
  switch (family) {
    case MethodFamily::GreedyBFGS:
      return 2.0 * n * std::log(2.0 * n * k) + 1.0;
    case MethodFamily::GreedySR1:
      return 2.0 * n * std::log(2.0 * n * k * k) + 1.0;
    case MethodFamily::GreedyBroyden:
      return 2.0 * n * k * std::log(2.0 * n * k) + 1.0;
    case MethodFamily::RandomBFGS:
      return 2.0 * (n + 1.0) * std::log(4.0 * n * n * n * k / delta) + 1.0;
    case MethodFamily::RandomSR1:
      return 2.0 * (n + 1.0) * std::log(4.0 * n * n * n * k * k / delta) + 1.0;
    case MethodFamily::RandomBroyden:
      return 2.0 * (n * k + 1.0) * std::log(4.0 * n * n * n * k * k * k / delta) + 1.0;
  }
  throw std::invalid_argument("start_moment: unknown family");
}

Index two_phase_k0(MethodFamily family, Index d, double kappa, double delta) {
  if (d < 1 || !(kappa >= 1.0)) throw std::invalid_argument("two_phase_k0: need d >= 1, kappa >= 1");
  const double n = dd(d), k = kappa;
  double k1 = 0.0, k2 = 0.0;
  switch (family) {
    case MethodFamily::GreedyBFGS:
      k1 = 2.0 * k * std::log(3.0 * n + 2.0) + 1.0;
      k2 = n * std::log(6.0 * n * k) + 1.0;
      break;
    case MethodFamily::GreedySR1:
      k1 = 2.0 * k * std::log(3.0 * n * k + 2.0) + 1.0;
      k2 = n * std::log(6.0 * n * k * k) + 1.0;
      break;
    case MethodFamily::GreedyBroyden:
      k1 = 2.0 * k * std::log(3.0 * n + 2.0) + 1.0;
      k2 = start_moment(family, d, kappa, delta);
      break;
    case MethodFamily::RandomBFGS:
      k1 = 2.0 * k * std::log(3.0 * n + 2.0) + 1.0;
      k2 = (n + 1.0) * std::log(12.0 * n * n * n * k / delta) + 1.0;
      break;
    case MethodFamily::RandomSR1:
      k1 = 2.0 * k * std::log(3.0 * n * k + 2.0) + 1.0;
      k2 = (n + 1.0) * std::log(12.0 * n * n * n * k * k / delta) + 1.0;
      break;
    case MethodFamily::RandomBroyden:
      k1 = 2.0 * k * std::log(3.0 * n + 2.0) + 1.0;
      k2 = (n * k + 1.0) * std::log(12.0 * n * n * n * k * k * k / delta) + 1.0;
      break;
  }
  return static_cast<Index>(std::ceil(k1 + k2));
}

}  // namespace qnlab
