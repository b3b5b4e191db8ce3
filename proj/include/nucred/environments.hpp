#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nucred/characteristic_game.hpp"
#include "nucred/coalition.hpp"
#include "nucred/env_model.hpp"

namespace nucred {

struct StepOutcome {
  double reward = 0.0;
  bool done = false;
  CoalitionStructure cs;  // structure extracted for the executed (state, action)
};

/// Episodic multi-agent environment driven by the learner. Digests are stable
/// hashes of the (possibly coarsened) state and per-agent observations.
class Env {
 public:
  virtual ~Env() = default;
  virtual int num_agents() const = 0;
  virtual int num_actions(int agent) const = 0;
  virtual void reset(std::uint64_t seed) = 0;
  virtual StepOutcome step(const std::vector<int>& joint_action) = 0;
  virtual bool done() const = 0;
  virtual std::uint64_t state_digest() const = 0;
  virtual std::uint64_t observation_digest(int agent) const = 0;
  virtual std::vector<double> observation(int agent) const = 0;
  virtual CoalitionStructure coalition_structure(const std::vector<int>& joint_action) const = 0;
  virtual std::unique_ptr<Env> clone() const = 0;
};

// ---------------------------------------------------------------------------
// Predator-Prey gridworld
// ---------------------------------------------------------------------------

struct PredatorPreyConfig {
  int grid = 7;
  int predators = 4;
  int prey = 2;
  int step_limit = 200;
  int sensing_range = 7;  // Chebyshev visibility radius
  bool coarse_digests = true;
  bool trace = false;  // when set, step() appends line records to trace_out
};

struct PredatorPreyState {
  std::vector<int> pred_x, pred_y;
  std::vector<int> prey_x, prey_y;
  std::vector<std::uint8_t> prey_alive;
  std::vector<int> prey_vx, prey_vy;  // last prey move
  int step_count = 0;
};

/// Grid Predator-Prey: predators move {stay, N, S, E, W}; prey flee by
/// maximizing their minimum Chebyshev distance to the predators (seeded random
/// tie-breaks). A prey is captured when at least two predators end the step
/// within Chebyshev distance 1; every capture pays a team reward of 10.
class PredatorPreyEnv final : public Env {
 public:
  explicit PredatorPreyEnv(PredatorPreyConfig config);

  int num_agents() const override { return config_.predators; }
  int num_actions(int) const override { return 5; }
  void reset(std::uint64_t seed) override;
  StepOutcome step(const std::vector<int>& joint_action) override;
  bool done() const override { return done_; }
  std::uint64_t state_digest() const override;
  std::uint64_t observation_digest(int agent) const override;
  std::vector<double> observation(int agent) const override;
  CoalitionStructure coalition_structure(const std::vector<int>& joint_action) const override;
  std::unique_ptr<Env> clone() const override;

  const PredatorPreyState& state() const { return state_; }
  const std::vector<std::string>& trace() const { return trace_; }

 private:
  PredatorPreyConfig config_;
  PredatorPreyState state_;
  std::uint64_t rng_state_ = 0;
  bool done_ = true;
  std::vector<std::string> trace_;

  std::uint32_t next_random(std::uint32_t bound);
};

// ---------------------------------------------------------------------------
// Characteristic-function stage games
// ---------------------------------------------------------------------------

/// Repeated stage game: each agent picks a subtask; agents that pick the same
/// subtask form a block whose value comes from that subtask's characteristic
/// game. An explicit joint-action -> structure table may override the grouping.
struct StageGameSpec {
  std::vector<CharacteristicGame> subtask_games;  // one per subtask
  int episode_length = 10;
  // Optional explicit mapping: per joint action, one coalition mask per
  // subtask (0 = nobody works on it). Joint actions without an entry are
  // rejected.
  std::optional<std::vector<std::vector<std::uint32_t>>> mapping;

  int num_agents() const { return subtask_games.empty() ? 0 : subtask_games.front().n; }
  int num_subtasks() const { return static_cast<int>(subtask_games.size()); }
  int joint_action_count() const;
  std::vector<std::uint32_t> blocks_for(std::span<const int> joint_action) const;
  void validate() const;
};

struct StageStepResult {
  double reward = 0.0;
  CoalitionStructure cs;
};

/// Reward of one stage play: sum over realized blocks of the block's
/// characteristic value under its subtask game.
StageStepResult stage_game_step(const StageGameSpec& spec, std::span<const int> joint_action);

class StageGameEnv final : public Env {
 public:
  explicit StageGameEnv(StageGameSpec spec);

  int num_agents() const override { return spec_.num_agents(); }
  int num_actions(int) const override { return spec_.num_subtasks(); }
  void reset(std::uint64_t seed) override;
  StepOutcome step(const std::vector<int>& joint_action) override;
  bool done() const override { return done_; }
  std::uint64_t state_digest() const override;
  std::uint64_t observation_digest(int agent) const override;
  std::vector<double> observation(int agent) const override;
  CoalitionStructure coalition_structure(const std::vector<int>& joint_action) const override;
  std::unique_ptr<Env> clone() const override;

  const StageGameSpec& spec() const { return spec_; }

 private:
  StageGameSpec spec_;
  int step_count_ = 0;
  bool done_ = true;
};

/// Best single-step reward over all joint actions (exhaustive).
double stage_game_optimum(const StageGameSpec& spec);

/// EnvModel wrapping one stage spec per phase; phases advance cyclically and
/// deterministically. With a single phase this is the one-state stage MDP.
EnvModel stage_game_model(std::span<const StageGameSpec> phases, double gamma);

// ---------------------------------------------------------------------------
// Random model generator
// ---------------------------------------------------------------------------

/// Random enumerable MDP for operator tests: Dirichlet(1) transition rows,
/// rewards uniform in [0, 1], coalition structures grouped by a random
/// per-agent action-to-target table. Deterministic per seed.
EnvModel random_mdp(std::uint64_t seed, int num_states, int num_agents, int actions_per_agent);

// ---------------------------------------------------------------------------
// Config-driven construction
// ---------------------------------------------------------------------------

/// Builds an environment from a JSON config ({"type": "predator_prey", ...} or
/// {"type": "stage_game", ...}). Throws std::invalid_argument on bad configs.
std::unique_ptr<Env> make_env(const std::string& json_text);

}  // namespace nucred
