#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nucred/coalition.hpp"

namespace nucred {

/// Fully enumerable team MDP with a coalition-structure extractor, used for
/// operator verification. Joint actions are flattened mixed-radix indices
/// (agent 0 is the fastest-varying digit).
struct EnvModel {
  int num_states = 0;
  int num_agents = 0;
  std::vector<int> num_actions;  // per agent
  double gamma = 0.9;
  std::vector<std::uint8_t> terminal;               // per state
  std::vector<std::vector<double>> reward;          // [s][joint a]
  std::vector<std::vector<std::vector<double>>> transition;  // [s][joint a][s']
  std::vector<std::vector<CoalitionStructure>> cs;  // [s][joint a]

  int joint_action_count() const;
  int joint_index(std::span<const int> per_agent) const;
  std::vector<int> joint_decompose(int joint) const;

  /// Throws std::invalid_argument if rows do not sum to one, rewards are not
  /// finite, or any coalition structure is not a partition.
  void validate() const;

  static EnvModel load(const std::string& path);
  static EnvModel parse(const std::string& json_text);
  void save(const std::string& path) const;
};

}  // namespace nucred
