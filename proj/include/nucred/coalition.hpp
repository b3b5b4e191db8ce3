#pragma once

#include <bit>
#include <cstdint>
#include <vector>

namespace nucred {

inline constexpr int kMaxPlayers = 16;

// A coalition of players encoded as a bitmask over indices 0..n-1.
struct Coalition {
  std::uint32_t members = 0;

  constexpr Coalition() = default;
  constexpr explicit Coalition(std::uint32_t mask) : members(mask) {}

  static constexpr Coalition empty() { return Coalition(0); }
  static constexpr Coalition grand(int n) {
    return Coalition((n >= 32 ? 0xffffffffu : (1u << n) - 1u));
  }
  static constexpr Coalition singleton(int i) { return Coalition(1u << i); }

  constexpr bool contains(int i) const { return (members >> i) & 1u; }
  constexpr bool is_empty() const { return members == 0; }
  int size() const { return std::popcount(members); }

  std::vector<int> member_indices() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(size()));
    for (std::uint32_t m = members; m != 0; m &= m - 1)
      out.push_back(std::countr_zero(m));
    return out;
  }

  constexpr bool operator==(const Coalition&) const = default;
};

// A disjoint partition of the full agent set into coalitions.
struct CoalitionStructure {
  std::vector<Coalition> blocks;

  CoalitionStructure() = default;
  explicit CoalitionStructure(std::vector<Coalition> b) : blocks(std::move(b)) {}

  static CoalitionStructure grand(int n) { return CoalitionStructure({Coalition::grand(n)}); }
  static CoalitionStructure singletons(int n) {
    CoalitionStructure cs;
    cs.blocks.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) cs.blocks.push_back(Coalition::singleton(i));
    return cs;
  }

  bool is_partition_of(int n) const;
  // Throws std::invalid_argument if blocks are not a partition of 0..n-1.
  void validate(int n) const;
  // Block index containing agent i, or -1.
  int block_of(int i) const;
  // Blocks sorted by mask, so structural equality ignores block order.
  CoalitionStructure canonical() const;
  bool same_partition(const CoalitionStructure& other) const;

  bool operator==(const CoalitionStructure&) const = default;
};

// All set partitions of {0..n-1}; Bell(n) entries. Intended for n <= 5.
std::vector<CoalitionStructure> enumerate_partitions(int n);

}  // namespace nucred
