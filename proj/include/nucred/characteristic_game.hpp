#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "nucred/coalition.hpp"

namespace nucred {

// Shared numeric tolerances (double-precision LP scale).
inline constexpr double kFeasibilityTol = 1e-9;
inline constexpr double kTightnessTol = 1e-7;
inline constexpr double kComparisonTol = 1e-8;

using PayoffVector = std::vector<double>;

/// A transferable-utility cooperative game: a value for every coalition,
/// stored densely and indexed by bitmask. values[0] (the empty coalition)
/// must be zero.
struct CharacteristicGame {
  int n = 0;
  std::vector<double> values;  // size 1 << n

  CharacteristicGame() = default;
  explicit CharacteristicGame(int players)
      : n(players), values(std::size_t{1} << players, 0.0) {}

  std::size_t num_coalitions() const { return values.size(); }
  Coalition grand() const { return Coalition::grand(n); }

  double value(Coalition c) const { return values[c.members]; }
  double& value(Coalition c) { return values[c.members]; }
  double grand_value() const { return values[grand().members]; }

  // Throws std::invalid_argument on structural violations.
  void validate() const;
};

// Sorted (non-increasing) list of all 2^n coalition excesses.
struct ExcessSequence {
  std::vector<double> values;
};

enum class LexOrder { less, equal, greater };

/// e(C, x) = v(C) - sum of payoffs of C's members; 0 for the empty coalition.
double excess(const CharacteristicGame& game, Coalition c, const PayoffVector& x);

/// All 2^n excesses (empty and grand coalition included), sorted non-increasing.
ExcessSequence excess_sequence(const CharacteristicGame& game, const PayoffVector& x);

/// Lexicographic comparison with per-entry tolerance kComparisonTol.
LexOrder lex_compare(const ExcessSequence& a, const ExcessSequence& b);

bool is_efficient(const CharacteristicGame& game, const PayoffVector& x,
                  double tol = kFeasibilityTol);

/// True iff every non-empty coalition's excess is <= kComparisonTol.
/// Requires an efficient x (throws otherwise).
bool core_contains(const CharacteristicGame& game, const PayoffVector& x);

// Game-file IO. Format: {"n": int, "values": [[mask, value], ...]} with every
// mask 0..2^n-1 present exactly once. Missing or duplicate masks are an error.
CharacteristicGame load_game(const std::string& path);
CharacteristicGame parse_game(const std::string& json_text);
void save_game(const CharacteristicGame& game, const std::string& path);

}  // namespace nucred
