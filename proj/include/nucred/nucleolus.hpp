#pragma once

#include <stdexcept>
#include <vector>

#include "nucred/characteristic_game.hpp"

namespace nucred {

// Allocation domain. pre_imputation is the efficiency hyperplane (always
// non-empty); imputation additionally enforces individual rationality
// x_i >= v({i}).
enum class AllocationDomain { pre_imputation, imputation };

struct NucleolusLevel {
  double max_excess = 0.0;            // optimal epsilon at this level
  std::vector<Coalition> fixed;       // coalitions pinned tight at this level
};

struct NucleolusSolution {
  PayoffVector allocation;
  std::vector<NucleolusLevel> levels;  // max_excess strictly decreasing
  int lp_iterations = 0;
};

struct NucleolusError : std::runtime_error {
  int level;
  explicit NucleolusError(const std::string& what, int level_reached)
      : std::runtime_error(what), level(level_reached) {}
};

/// Exact nucleolus by the sequential-LP scheme: each level minimizes the
/// worst remaining excess, then pins the coalitions that are tight at every
/// optimum (dual > kTightnessTol, with a re-solve check for tight rows whose
/// dual vanishes) and recurses until the allocation is unique.
NucleolusSolution nucleolus(const CharacteristicGame& game,
                            AllocationDomain domain = AllocationDomain::pre_imputation);

/// Brute-force oracle: grid search over the efficiency hyperplane, restricted
/// to a box guaranteed to contain the nucleolus. Returns the grid point with
/// the lexicographically smallest excess sequence; ties broken by the
/// lexicographically smallest payoff vector. n <= 4 only.
PayoffVector nucleolus_oracle(const CharacteristicGame& game, double resolution);

/// Exact Shapley value via the subset formula. n <= 12.
PayoffVector shapley(const CharacteristicGame& game);

}  // namespace nucred
