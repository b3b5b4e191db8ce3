#include "nucred/coalition.hpp"

#include <algorithm>
#include <stdexcept>

namespace nucred {

bool CoalitionStructure::is_partition_of(int n) const {
  std::uint32_t seen = 0;
  for (const Coalition& b : blocks) {
    if (b.is_empty()) return false;
    if (b.members & seen) return false;
    seen |= b.members;
  }
  return seen == Coalition::grand(n).members;
}

void CoalitionStructure::validate(int n) const {
  if (!is_partition_of(n))
    throw std::invalid_argument("coalition structure is not a partition of the agent set");
}

int CoalitionStructure::block_of(int i) const {
  for (std::size_t k = 0; k < blocks.size(); ++k)
    if (blocks[k].contains(i)) return static_cast<int>(k);
  return -1;
}

CoalitionStructure CoalitionStructure::canonical() const {
  CoalitionStructure out = *this;
  std::sort(out.blocks.begin(), out.blocks.end(),
            [](const Coalition& a, const Coalition& b) { return a.members < b.members; });
  return out;
}

bool CoalitionStructure::same_partition(const CoalitionStructure& other) const {
  return canonical() == other.canonical();
}

std::vector<CoalitionStructure> enumerate_partitions(int n) {
  std::vector<CoalitionStructure> out;
  if (n <= 0) return out;
  // Restricted growth strings: a[i] <= 1 + max(a[0..i-1]).
  std::vector<int> assign(static_cast<std::size_t>(n), 0);
  auto emit = [&] {
    int num_blocks = 0;
    for (int v : assign) num_blocks = std::max(num_blocks, v + 1);
    std::vector<Coalition> blocks(static_cast<std::size_t>(num_blocks));
    for (int i = 0; i < n; ++i)
      blocks[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])].members |= (1u << i);
    out.emplace_back(std::move(blocks));
  };
  auto rec = [&](auto&& self, int i, int max_used) -> void {
    if (i == n) {
      emit();
      return;
    }
    for (int v = 0; v <= max_used + 1; ++v) {
      assign[static_cast<std::size_t>(i)] = v;
      self(self, i + 1, std::max(max_used, v));
    }
  };
  rec(rec, 1, 0);  // agent 0 always in block 0
  return out;
}

}  // namespace nucred
