#pragma once

#include <cstdint>
#include <utility>

#include "qnlab/linalg.hpp"

namespace qnlab {

/// Counter-based SplitMix64 generator with an explicit value state.
///
/// Bit-exact definition:
///   next:    counter += 0x9E3779B97F4A7C15; return mix(counter)
///   mix(z):  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///            z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///            return z ^ (z >> 31)
///   seed:    counter = mix(seed + stream * 0xD1B54A32D192ED03)
///   uniform: (next >> 11) * 2^-53                        in [0, 1)
///   normal:  u1 = ((next >> 11) + 1) * 2^-53, u2 = uniform,
///            sqrt(-2 ln u1) * cos(2π u2)    (one draw per two words)
struct RngState {
  std::uint64_t counter = 0;
  friend bool operator==(const RngState&, const RngState&) = default;
};

std::uint64_t splitmix_mix(std::uint64_t z);

/// Independent streams for the same seed are obtained by varying `stream`.
RngState seed_rng(std::uint64_t seed, std::uint64_t stream = 0);

std::pair<std::uint64_t, RngState> next_u64(RngState state);
std::pair<double, RngState> next_uniform(RngState state);
std::pair<double, RngState> next_normal(RngState state);

/// Standard normal entries.
std::pair<Vector, RngState> sample_gaussian(Index dim, RngState state);

/// Uniform on the unit sphere (normalized Gaussian; all-zero draws are redrawn).
std::pair<Vector, RngState> sample_sphere(Index dim, RngState state);

/// Mutable convenience wrapper for code that owns its stream.
class Rng {
 public:
  explicit Rng(RngState state) : state_(state) {}
  Rng(std::uint64_t seed, std::uint64_t stream) : state_(seed_rng(seed, stream)) {}

  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  Vector gaussian(Index dim);
  Vector sphere(Index dim);
  RngState state() const { return state_; }

 private:
  RngState state_;
};

}  // namespace qnlab
