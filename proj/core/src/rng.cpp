#include "qnlab/rng.hpp"

#include <cmath>
#include <numbers>

namespace qnlab {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kStreamMul = 0xD1B54A32D192ED03ULL;
constexpr double kTwoPow53Inv = 1.0 / 9007199254740992.0;
}  // namespace

std::uint64_t splitmix_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RngState seed_rng(std::uint64_t seed, std::uint64_t stream) {
  return RngState{splitmix_mix(seed + stream * kStreamMul)};
}

std::pair<std::uint64_t, RngState> next_u64(RngState state) {
  state.counter += kGolden;
  return {splitmix_mix(state.counter), state};
}

std::pair<double, RngState> next_uniform(RngState state) {
  auto [x, next] = next_u64(state);
  return {static_cast<double>(x >> 11) * kTwoPow53Inv, next};
}

std::pair<double, RngState> next_normal(RngState state) {
  auto [x1, s1] = next_u64(state);
  auto [x2, s2] = next_u64(s1);
  const double u1 = static_cast<double>((x1 >> 11) + 1) * kTwoPow53Inv;
  const double u2 = static_cast<double>(x2 >> 11) * kTwoPow53Inv;
  return {std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2), s2};
}

std::pair<Vector, RngState> sample_gaussian(Index dim, RngState state) {
  if (dim < 1) throw DimensionMismatch("sample_gaussian: dim must be >= 1");
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) {
    auto [z, next] = next_normal(state);
    v(i) = z;
    state = next;
  }
  return {std::move(v), state};
}

std::pair<Vector, RngState> sample_sphere(Index dim, RngState state) {
  for (;;) {
    auto [v, next] = sample_gaussian(dim, state);
    state = next;
    const double n = v.norm();
    if (n > 0.0) return {v / n, state};
  }
}

double Rng::uniform() {
  auto [x, next] = next_uniform(state_);
  state_ = next;
  return x;
}

double Rng::normal() {
  auto [x, next] = next_normal(state_);
  state_ = next;
  return x;
}

Vector Rng::gaussian(Index dim) {
  auto [v, next] = sample_gaussian(dim, state_);
  state_ = next;
  return v;
}

Vector Rng::sphere(Index dim) {
  auto [v, next] = sample_sphere(dim, state_);
  state_ = next;
  return v;
}

}  // namespace qnlab
