#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "qnlab/linalg.hpp"
#include "qnlab/rng.hpp"
#include "qnlab/updates.hpp"

namespace qnlab {

enum class DirectionKind {
  GreedyBroyden,  // argmax_i G_ii / A_ii
  GreedySR1,      // argmax_i (G − A)_ii
  GreedyBFGS,     // argmax_i (L⁻ᵀA⁻¹L⁻¹)_ii, O(d³): needs allow_expensive
  RandomSphere,
  RandomGaussian,
};

struct DirectionStrategy {
  DirectionKind kind = DirectionKind::RandomSphere;
  std::uint64_t seed = 0;
  /// Random directions are mapped through the BFGS factor, u = Lᵀũ.
  bool scaled = false;
  bool allow_expensive = false;

  bool is_random() const {
    return kind == DirectionKind::RandomSphere || kind == DirectionKind::RandomGaussian;
  }
  bool uses_factor() const { return kind == DirectionKind::GreedyBFGS || scaled; }
  std::string name() const;
};

std::optional<DirectionKind> parse_direction_kind(std::string_view name);
std::string to_string(DirectionKind kind);

/// Throws std::invalid_argument for combinations the solvers do not support.
void validate_direction(const DirectionStrategy& dir, const UpdateRule& rule);

// Greedy selectors over the coordinate basis; ties go to the lowest index.
// Indices are zero-based.

Index greedy_broyden_dir(const Vector& g_diag, const Vector& a_diag);
Index greedy_sr1_dir(const Vector& g_diag, const Vector& a_diag);
Index greedy_bfgs_dir(const SymMatrix& l_inv_weighted);

/// L⁻ᵀA⁻¹L⁻¹ for the scaled greedy BFGS rule.
SymMatrix greedy_bfgs_weight(const Matrix& l, const SymMatrix& a);

struct Direction {
  Vector u;
  std::optional<Vector> u_tilde;  // set for scaled directions, u = Lᵀũ
};

/// Stateful direction generator for one run. Random variants draw from
/// stream 1 of the strategy seed.
class DirectionSource {
 public:
  DirectionSource(const DirectionStrategy& strategy, const UpdateRule& rule);

  bool needs_target_diag() const {
    return strategy_.kind == DirectionKind::GreedyBroyden ||
           strategy_.kind == DirectionKind::GreedySR1;
  }

  /// target_diag is read by the diagonal greedy rules; dense_target is only
  /// invoked by GreedyBFGS.
  Direction next(const ApproxState& state, const Vector& target_diag,
                 const std::function<SymMatrix()>& dense_target);

  const DirectionStrategy& strategy() const { return strategy_; }

 private:
  DirectionStrategy strategy_;
  RngState rng_;
};

}  // namespace qnlab
