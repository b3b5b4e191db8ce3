#include "nucred/environments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "nucred/hash.hpp"

namespace nucred {
namespace {

constexpr int kMoveDx[5] = {0, 0, 0, 1, -1};  // stay, N, S, E, W
constexpr int kMoveDy[5] = {0, 1, -1, 0, 0};

int chebyshev(int x1, int y1, int x2, int y2) {
  return std::max(std::abs(x1 - x2), std::abs(y1 - y2));
}

int sign_bucket(int d) { return d > 0 ? 2 : (d < 0 ? 0 : 1); }

}  // namespace

// ---------------------------------------------------------------------------
// PredatorPreyEnv
// ---------------------------------------------------------------------------

PredatorPreyEnv::PredatorPreyEnv(PredatorPreyConfig config) : config_(config) {
  if (config_.grid < 5) throw std::invalid_argument("predator-prey grid must be at least 5x5");
  if (config_.predators < 2) throw std::invalid_argument("need at least two predators");
  if (config_.prey < 1) throw std::invalid_argument("need at least one prey");
  if (config_.predators + config_.prey > config_.grid * config_.grid)
    throw std::invalid_argument("more entities than grid cells");
}

std::uint32_t PredatorPreyEnv::next_random(std::uint32_t bound) {
  rng_state_ = mix64(rng_state_ + 0x9e3779b97f4a7c15ULL);
  return static_cast<std::uint32_t>(rng_state_ % bound);
}

void PredatorPreyEnv::reset(std::uint64_t seed) {
  rng_state_ = derive_seed(seed, 0x70726579ULL);
  const int cells = config_.grid * config_.grid;
  std::vector<int> order(static_cast<std::size_t>(cells));
  std::iota(order.begin(), order.end(), 0);
  for (int i = 0; i < config_.predators + config_.prey; ++i) {
    const int j = i + static_cast<int>(next_random(static_cast<std::uint32_t>(cells - i)));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  state_ = PredatorPreyState{};
  state_.pred_x.resize(static_cast<std::size_t>(config_.predators));
  state_.pred_y.resize(static_cast<std::size_t>(config_.predators));
  for (int p = 0; p < config_.predators; ++p) {
    state_.pred_x[static_cast<std::size_t>(p)] = order[static_cast<std::size_t>(p)] % config_.grid;
    state_.pred_y[static_cast<std::size_t>(p)] = order[static_cast<std::size_t>(p)] / config_.grid;
  }
  state_.prey_x.resize(static_cast<std::size_t>(config_.prey));
  state_.prey_y.resize(static_cast<std::size_t>(config_.prey));
  state_.prey_alive.assign(static_cast<std::size_t>(config_.prey), 1);
  state_.prey_vx.assign(static_cast<std::size_t>(config_.prey), 0);
  state_.prey_vy.assign(static_cast<std::size_t>(config_.prey), 0);
  for (int y = 0; y < config_.prey; ++y) {
    const int cell = order[static_cast<std::size_t>(config_.predators + y)];
    state_.prey_x[static_cast<std::size_t>(y)] = cell % config_.grid;
    state_.prey_y[static_cast<std::size_t>(y)] = cell / config_.grid;
  }
  state_.step_count = 0;
  done_ = false;
  if (config_.trace) {
    std::ostringstream line;
    line << "reset seed=" << seed;
    trace_.push_back(line.str());
  }
}

CoalitionStructure PredatorPreyEnv::coalition_structure(
    const std::vector<int>& joint_action) const {
  if (static_cast<int>(joint_action.size()) != config_.predators)
    throw std::invalid_argument("joint action has wrong arity");
  std::vector<int> target(static_cast<std::size_t>(config_.predators), -1);
  for (int p = 0; p < config_.predators; ++p) {
    const int a = joint_action[static_cast<std::size_t>(p)];
    if (a < 0 || a >= 5) throw std::invalid_argument("invalid predator action");
    const int px = std::clamp(state_.pred_x[static_cast<std::size_t>(p)] + kMoveDx[a], 0,
                              config_.grid - 1);
    const int py = std::clamp(state_.pred_y[static_cast<std::size_t>(p)] + kMoveDy[a], 0,
                              config_.grid - 1);
    int best_prey = -1;
    int best_dist = config_.sensing_range + 1;
    for (int y = 0; y < config_.prey; ++y) {
      if (!state_.prey_alive[static_cast<std::size_t>(y)]) continue;
      const int d = chebyshev(px, py, state_.prey_x[static_cast<std::size_t>(y)],
                              state_.prey_y[static_cast<std::size_t>(y)]);
      if (d < best_dist) {
        best_dist = d;
        best_prey = y;
      }
    }
    target[static_cast<std::size_t>(p)] = best_prey;
  }
  CoalitionStructure cs;
  for (int y = 0; y < config_.prey; ++y) {
    Coalition block;
    for (int p = 0; p < config_.predators; ++p)
      if (target[static_cast<std::size_t>(p)] == y) block.members |= (1u << p);
    if (!block.is_empty()) cs.blocks.push_back(block);
  }
  for (int p = 0; p < config_.predators; ++p)
    if (target[static_cast<std::size_t>(p)] < 0)
      cs.blocks.push_back(Coalition::singleton(p));
  return cs;
}

StepOutcome PredatorPreyEnv::step(const std::vector<int>& joint_action) {
  if (done_) throw std::logic_error("step() on a finished episode");
  StepOutcome out;
  out.cs = coalition_structure(joint_action);

  for (int p = 0; p < config_.predators; ++p) {
    const int a = joint_action[static_cast<std::size_t>(p)];
    state_.pred_x[static_cast<std::size_t>(p)] =
        std::clamp(state_.pred_x[static_cast<std::size_t>(p)] + kMoveDx[a], 0, config_.grid - 1);
    state_.pred_y[static_cast<std::size_t>(p)] =
        std::clamp(state_.pred_y[static_cast<std::size_t>(p)] + kMoveDy[a], 0, config_.grid - 1);
  }

  // Prey evade: maximize the minimum Chebyshev distance to the predators.
  for (int y = 0; y < config_.prey; ++y) {
    if (!state_.prey_alive[static_cast<std::size_t>(y)]) continue;
    int best_score = -1;
    std::vector<int> best_moves;
    for (int mv = 0; mv < 5; ++mv) {
      const int nx = std::clamp(state_.prey_x[static_cast<std::size_t>(y)] + kMoveDx[mv], 0,
                                config_.grid - 1);
      const int ny = std::clamp(state_.prey_y[static_cast<std::size_t>(y)] + kMoveDy[mv], 0,
                                config_.grid - 1);
      int min_dist = config_.grid * 2;
      for (int p = 0; p < config_.predators; ++p)
        min_dist = std::min(min_dist, chebyshev(nx, ny, state_.pred_x[static_cast<std::size_t>(p)],
                                                state_.pred_y[static_cast<std::size_t>(p)]));
      if (min_dist > best_score) {
        best_score = min_dist;
        best_moves.assign(1, mv);
      } else if (min_dist == best_score) {
        best_moves.push_back(mv);
      }
    }
    const int mv = best_moves[next_random(static_cast<std::uint32_t>(best_moves.size()))];
    const int nx = std::clamp(state_.prey_x[static_cast<std::size_t>(y)] + kMoveDx[mv], 0,
                              config_.grid - 1);
    const int ny = std::clamp(state_.prey_y[static_cast<std::size_t>(y)] + kMoveDy[mv], 0,
                              config_.grid - 1);
    state_.prey_vx[static_cast<std::size_t>(y)] = nx - state_.prey_x[static_cast<std::size_t>(y)];
    state_.prey_vy[static_cast<std::size_t>(y)] = ny - state_.prey_y[static_cast<std::size_t>(y)];
    state_.prey_x[static_cast<std::size_t>(y)] = nx;
    state_.prey_y[static_cast<std::size_t>(y)] = ny;
  }

  // Captures: two or more predators within Chebyshev distance 1.
  int captures = 0;
  for (int y = 0; y < config_.prey; ++y) {
    if (!state_.prey_alive[static_cast<std::size_t>(y)]) continue;
    int close = 0;
    for (int p = 0; p < config_.predators; ++p)
      if (chebyshev(state_.prey_x[static_cast<std::size_t>(y)],
                    state_.prey_y[static_cast<std::size_t>(y)],
                    state_.pred_x[static_cast<std::size_t>(p)],
                    state_.pred_y[static_cast<std::size_t>(p)]) <= 1)
        ++close;
    if (close >= 2) {
      state_.prey_alive[static_cast<std::size_t>(y)] = 0;
      ++captures;
    }
  }
  out.reward = 10.0 * captures;

  ++state_.step_count;
  const bool all_captured =
      std::none_of(state_.prey_alive.begin(), state_.prey_alive.end(),
                   [](std::uint8_t alive) { return alive != 0; });
  done_ = all_captured || state_.step_count >= config_.step_limit;
  out.done = done_;

  if (config_.trace) {
    std::ostringstream line;
    line << "step=" << state_.step_count << " reward=" << out.reward;
    for (int p = 0; p < config_.predators; ++p)
      line << " P" << p << "=(" << state_.pred_x[static_cast<std::size_t>(p)] << ","
           << state_.pred_y[static_cast<std::size_t>(p)] << ")";
    for (int y = 0; y < config_.prey; ++y)
      line << " Y" << y << "=(" << state_.prey_x[static_cast<std::size_t>(y)] << ","
           << state_.prey_y[static_cast<std::size_t>(y)] << ","
           << int(state_.prey_alive[static_cast<std::size_t>(y)]) << ")";
    trace_.push_back(line.str());
  }
  return out;
}

std::vector<double> PredatorPreyEnv::observation(int agent) const {
  const int sentinel = 2 * config_.grid;
  std::vector<double> obs;
  obs.push_back(state_.pred_x[static_cast<std::size_t>(agent)]);
  obs.push_back(state_.pred_y[static_cast<std::size_t>(agent)]);
  const int ax = state_.pred_x[static_cast<std::size_t>(agent)];
  const int ay = state_.pred_y[static_cast<std::size_t>(agent)];
  for (int p = 0; p < config_.predators; ++p) {
    if (p == agent) continue;
    const int dx = state_.pred_x[static_cast<std::size_t>(p)] - ax;
    const int dy = state_.pred_y[static_cast<std::size_t>(p)] - ay;
    if (std::max(std::abs(dx), std::abs(dy)) <= config_.sensing_range) {
      obs.push_back(dx);
      obs.push_back(dy);
    } else {
      obs.push_back(sentinel);
      obs.push_back(sentinel);
    }
  }
  for (int y = 0; y < config_.prey; ++y) {
    const bool alive = state_.prey_alive[static_cast<std::size_t>(y)] != 0;
    const int dx = state_.prey_x[static_cast<std::size_t>(y)] - ax;
    const int dy = state_.prey_y[static_cast<std::size_t>(y)] - ay;
    const bool visible = alive && std::max(std::abs(dx), std::abs(dy)) <= config_.sensing_range;
    obs.push_back(visible ? dx : sentinel);
    obs.push_back(visible ? dy : sentinel);
    obs.push_back(visible ? 1.0 : 0.0);
  }
  for (int y = 0; y < config_.prey; ++y) {
    const bool alive = state_.prey_alive[static_cast<std::size_t>(y)] != 0;
    obs.push_back(alive ? state_.prey_vx[static_cast<std::size_t>(y)] : 0.0);
    obs.push_back(alive ? state_.prey_vy[static_cast<std::size_t>(y)] : 0.0);
  }
  return obs;
}

std::uint64_t PredatorPreyEnv::observation_digest(int agent) const {
  const int ax = state_.pred_x[static_cast<std::size_t>(agent)];
  const int ay = state_.pred_y[static_cast<std::size_t>(agent)];
  if (!config_.coarse_digests) {
    std::uint64_t h = 0x6f627346ULL;
    for (double v : observation(agent)) h = hash_combine(h, static_cast<std::uint64_t>(
                                                                std::llround(v * 8)));
    return h;
  }
  // Coarse features: geometry relative to the nearest living visible prey and
  // the nearest fellow predator, all reduced to signs and small bands.
  int prey_idx = -1, prey_dist = config_.sensing_range + 1;
  for (int y = 0; y < config_.prey; ++y) {
    if (!state_.prey_alive[static_cast<std::size_t>(y)]) continue;
    const int d = chebyshev(ax, ay, state_.prey_x[static_cast<std::size_t>(y)],
                            state_.prey_y[static_cast<std::size_t>(y)]);
    if (d < prey_dist) {
      prey_dist = d;
      prey_idx = y;
    }
  }
  int f_sx = 3, f_sy = 3, f_band = 3, f_vx = 3, f_vy = 3, f_support = 3;
  if (prey_idx >= 0) {
    const int dx = state_.prey_x[static_cast<std::size_t>(prey_idx)] - ax;
    const int dy = state_.prey_y[static_cast<std::size_t>(prey_idx)] - ay;
    f_sx = sign_bucket(dx);
    f_sy = sign_bucket(dy);
    f_band = prey_dist <= 1 ? 0 : (prey_dist <= 2 ? 1 : (prey_dist <= 4 ? 2 : 3));
    f_vx = sign_bucket(state_.prey_vx[static_cast<std::size_t>(prey_idx)]);
    f_vy = sign_bucket(state_.prey_vy[static_cast<std::size_t>(prey_idx)]);
    int helpers = 0;
    for (int p = 0; p < config_.predators; ++p) {
      if (p == agent) continue;
      if (chebyshev(state_.pred_x[static_cast<std::size_t>(p)],
                    state_.pred_y[static_cast<std::size_t>(p)],
                    state_.prey_x[static_cast<std::size_t>(prey_idx)],
                    state_.prey_y[static_cast<std::size_t>(prey_idx)]) <= 1)
        ++helpers;
    }
    f_support = std::min(helpers, 2);
  }
  int mate_sx = 3, mate_sy = 3;
  int mate_dist = config_.grid * 2;
  for (int p = 0; p < config_.predators; ++p) {
    if (p == agent) continue;
    const int d = chebyshev(ax, ay, state_.pred_x[static_cast<std::size_t>(p)],
                            state_.pred_y[static_cast<std::size_t>(p)]);
    if (d < mate_dist) {
      mate_dist = d;
      mate_sx = sign_bucket(state_.pred_x[static_cast<std::size_t>(p)] - ax);
      mate_sy = sign_bucket(state_.pred_y[static_cast<std::size_t>(p)] - ay);
    }
  }
  std::uint64_t h = 0x636f6172ULL;
  for (int f : {f_sx, f_sy, f_band, f_vx, f_vy, f_support, mate_sx, mate_sy})
    h = hash_combine(h, static_cast<std::uint64_t>(f));
  return h;
}

std::uint64_t PredatorPreyEnv::state_digest() const {
  if (!config_.coarse_digests) {
    std::uint64_t h = 0x676c6f62ULL;
    for (int p = 0; p < config_.predators; ++p) {
      h = hash_combine(h, static_cast<std::uint64_t>(state_.pred_x[static_cast<std::size_t>(p)]));
      h = hash_combine(h, static_cast<std::uint64_t>(state_.pred_y[static_cast<std::size_t>(p)]));
    }
    for (int y = 0; y < config_.prey; ++y) {
      h = hash_combine(h, static_cast<std::uint64_t>(state_.prey_x[static_cast<std::size_t>(y)]));
      h = hash_combine(h, static_cast<std::uint64_t>(state_.prey_y[static_cast<std::size_t>(y)]));
      h = hash_combine(h, state_.prey_alive[static_cast<std::size_t>(y)]);
    }
    return h;
  }
  // Coarse: per prey, liveness and how boxed-in it is.
  std::uint64_t h = 0x73746174ULL;
  for (int y = 0; y < config_.prey; ++y) {
    const bool alive = state_.prey_alive[static_cast<std::size_t>(y)] != 0;
    int close1 = 0, close2 = 0;
    if (alive)
      for (int p = 0; p < config_.predators; ++p) {
        const int d = chebyshev(state_.prey_x[static_cast<std::size_t>(y)],
                                state_.prey_y[static_cast<std::size_t>(y)],
                                state_.pred_x[static_cast<std::size_t>(p)],
                                state_.pred_y[static_cast<std::size_t>(p)]);
        if (d <= 1) ++close1;
        if (d <= 2) ++close2;
      }
    h = hash_combine(h, alive ? 1u : 0u);
    h = hash_combine(h, static_cast<std::uint64_t>(std::min(close1, 3)));
    h = hash_combine(h, static_cast<std::uint64_t>(std::min(close2, 3)));
  }
  return h;
}

std::unique_ptr<Env> PredatorPreyEnv::clone() const {
  return std::make_unique<PredatorPreyEnv>(*this);
}

// ---------------------------------------------------------------------------
// Stage games
// ---------------------------------------------------------------------------

int StageGameSpec::joint_action_count() const {
  int total = 1;
  for (int i = 0; i < num_agents(); ++i) total *= num_subtasks();
  return total;
}

void StageGameSpec::validate() const {
  if (subtask_games.empty()) throw std::invalid_argument("stage game needs subtasks");
  const int n = subtask_games.front().n;
  for (const CharacteristicGame& g : subtask_games) {
    g.validate();
    if (g.n != n)
      throw std::invalid_argument("all subtask games must share the agent count");
  }
  if (episode_length < 1) throw std::invalid_argument("episode length must be positive");
  if (mapping) {
    if (static_cast<int>(mapping->size()) != joint_action_count())
      throw std::invalid_argument("explicit mapping must cover every joint action");
    for (const auto& blocks : *mapping) {
      if (static_cast<int>(blocks.size()) != num_subtasks())
        throw std::invalid_argument("mapping entry must list one mask per subtask");
      CoalitionStructure cs;
      for (std::uint32_t mask : blocks)
        if (mask != 0) cs.blocks.push_back(Coalition(mask));
      cs.validate(n);
    }
  }
}

std::vector<std::uint32_t> StageGameSpec::blocks_for(std::span<const int> joint_action) const {
  const int n = num_agents();
  if (static_cast<int>(joint_action.size()) != n)
    throw std::invalid_argument("joint action has wrong arity");
  if (mapping) {
    int idx = 0;
    for (int i = n - 1; i >= 0; --i) {
      const int a = joint_action[static_cast<std::size_t>(i)];
      if (a < 0 || a >= num_subtasks()) throw std::invalid_argument("subtask choice out of range");
      idx = idx * num_subtasks() + a;
    }
    return (*mapping)[static_cast<std::size_t>(idx)];
  }
  std::vector<std::uint32_t> blocks(static_cast<std::size_t>(num_subtasks()), 0);
  for (int i = 0; i < n; ++i) {
    const int g = joint_action[static_cast<std::size_t>(i)];
    if (g < 0 || g >= num_subtasks()) throw std::invalid_argument("subtask choice out of range");
    blocks[static_cast<std::size_t>(g)] |= (1u << i);
  }
  return blocks;
}

StageStepResult stage_game_step(const StageGameSpec& spec, std::span<const int> joint_action) {
  const std::vector<std::uint32_t> blocks = spec.blocks_for(joint_action);
  StageStepResult out;
  for (int g = 0; g < spec.num_subtasks(); ++g) {
    const std::uint32_t mask = blocks[static_cast<std::size_t>(g)];
    if (mask == 0) continue;
    out.reward += spec.subtask_games[static_cast<std::size_t>(g)].values[mask];
    out.cs.blocks.push_back(Coalition(mask));
  }
  return out;
}

StageGameEnv::StageGameEnv(StageGameSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

void StageGameEnv::reset(std::uint64_t) {
  step_count_ = 0;
  done_ = false;
}

StepOutcome StageGameEnv::step(const std::vector<int>& joint_action) {
  if (done_) throw std::logic_error("step() on a finished episode");
  const StageStepResult res = stage_game_step(spec_, joint_action);
  ++step_count_;
  done_ = step_count_ >= spec_.episode_length;
  return {res.reward, done_, res.cs};
}

std::uint64_t StageGameEnv::state_digest() const { return 0x73746167ULL; }

std::uint64_t StageGameEnv::observation_digest(int agent) const {
  return hash_combine(0x6f627367ULL, static_cast<std::uint64_t>(agent));
}

std::vector<double> StageGameEnv::observation(int agent) const {
  return {static_cast<double>(agent)};
}

CoalitionStructure StageGameEnv::coalition_structure(const std::vector<int>& joint_action) const {
  return stage_game_step(spec_, joint_action).cs;
}

std::unique_ptr<Env> StageGameEnv::clone() const {
  return std::make_unique<StageGameEnv>(*this);
}

double stage_game_optimum(const StageGameSpec& spec) {
  const int n = spec.num_agents();
  const int na = spec.joint_action_count();
  std::vector<int> joint(static_cast<std::size_t>(n), 0);
  double best = -std::numeric_limits<double>::infinity();
  for (int idx = 0; idx < na; ++idx) {
    int rem = idx;
    for (int i = 0; i < n; ++i) {
      joint[static_cast<std::size_t>(i)] = rem % spec.num_subtasks();
      rem /= spec.num_subtasks();
    }
    best = std::max(best, stage_game_step(spec, joint).reward);
  }
  return best;
}

EnvModel stage_game_model(std::span<const StageGameSpec> phases, double gamma) {
  if (phases.empty()) throw std::invalid_argument("need at least one phase");
  const int n = phases.front().num_agents();
  const int subtasks = phases.front().num_subtasks();
  for (const StageGameSpec& spec : phases) {
    spec.validate();
    if (spec.num_agents() != n || spec.num_subtasks() != subtasks)
      throw std::invalid_argument("phases must share agent and subtask counts");
  }
  EnvModel model;
  model.num_states = static_cast<int>(phases.size());
  model.num_agents = n;
  model.num_actions.assign(static_cast<std::size_t>(n), subtasks);
  model.gamma = gamma;
  model.terminal.assign(static_cast<std::size_t>(model.num_states), 0);
  const int na = model.joint_action_count();
  model.reward.assign(static_cast<std::size_t>(model.num_states),
                      std::vector<double>(static_cast<std::size_t>(na), 0.0));
  model.transition.assign(
      static_cast<std::size_t>(model.num_states),
      std::vector<std::vector<double>>(
          static_cast<std::size_t>(na),
          std::vector<double>(static_cast<std::size_t>(model.num_states), 0.0)));
  model.cs.assign(static_cast<std::size_t>(model.num_states),
                  std::vector<CoalitionStructure>(static_cast<std::size_t>(na)));
  for (int s = 0; s < model.num_states; ++s)
    for (int a = 0; a < na; ++a) {
      const std::vector<int> joint = model.joint_decompose(a);
      const StageStepResult res = stage_game_step(phases[static_cast<std::size_t>(s)], joint);
      model.reward[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] = res.reward;
      model.cs[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] = res.cs;
      const int s2 = (s + 1) % model.num_states;
      model.transition[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]
                      [static_cast<std::size_t>(s2)] = 1.0;
    }
  model.validate();
  return model;
}

// ---------------------------------------------------------------------------
// Random model generator
// ---------------------------------------------------------------------------

EnvModel random_mdp(std::uint64_t seed, int num_states, int num_agents,
                    int actions_per_agent) {
  if (num_states < 1 || num_states > 8) throw std::invalid_argument("num_states must be 1..8");
  if (num_agents < 1 || num_agents > 3) throw std::invalid_argument("num_agents must be 1..3");
  if (actions_per_agent < 1 || actions_per_agent > 3)
    throw std::invalid_argument("actions_per_agent must be 1..3");
  std::mt19937_64 rng(derive_seed(seed, 0x6d6470ULL));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  EnvModel model;
  model.num_states = num_states;
  model.num_agents = num_agents;
  model.num_actions.assign(static_cast<std::size_t>(num_agents), actions_per_agent);
  model.gamma = 0.9;
  model.terminal.assign(static_cast<std::size_t>(num_states), 0);
  const int na = model.joint_action_count();
  model.reward.assign(static_cast<std::size_t>(num_states),
                      std::vector<double>(static_cast<std::size_t>(na), 0.0));
  model.transition.assign(
      static_cast<std::size_t>(num_states),
      std::vector<std::vector<double>>(
          static_cast<std::size_t>(na),
          std::vector<double>(static_cast<std::size_t>(num_states), 0.0)));
  model.cs.assign(static_cast<std::size_t>(num_states),
                  std::vector<CoalitionStructure>(static_cast<std::size_t>(na)));

  // Coalition structures grouped by a random per-agent action-to-target table.
  std::vector<std::vector<int>> targets(static_cast<std::size_t>(num_agents),
                                        std::vector<int>(static_cast<std::size_t>(actions_per_agent)));
  std::uniform_int_distribution<int> target_dist(0, num_agents - 1);
  for (auto& row : targets)
    for (int& t : row) t = target_dist(rng);

  for (int s = 0; s < num_states; ++s)
    for (int a = 0; a < na; ++a) {
      model.reward[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] = uniform(rng);
      auto& row = model.transition[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
      double sum = 0.0;
      for (int s2 = 0; s2 < num_states; ++s2) {
        row[static_cast<std::size_t>(s2)] = -std::log(1.0 - uniform(rng));  // Exp(1)
        sum += row[static_cast<std::size_t>(s2)];
      }
      for (double& p : row) p /= sum;
      // Exact renormalization against accumulated rounding.
      double total = std::accumulate(row.begin(), row.end(), 0.0);
      row.back() += 1.0 - total;

      const std::vector<int> joint = model.joint_decompose(a);
      CoalitionStructure cs;
      for (int t = 0; t < num_agents; ++t) {
        Coalition block;
        for (int i = 0; i < num_agents; ++i)
          if (targets[static_cast<std::size_t>(i)][static_cast<std::size_t>(
                  joint[static_cast<std::size_t>(i)])] == t)
            block.members |= (1u << i);
        if (!block.is_empty()) cs.blocks.push_back(block);
      }
      model.cs[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] = std::move(cs);
    }
  model.validate();
  return model;
}

// ---------------------------------------------------------------------------
// Config-driven construction
// ---------------------------------------------------------------------------

std::unique_ptr<Env> make_env(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("env config is not valid JSON: ") + e.what());
  }
  const std::string type = j.at("type").get<std::string>();
  if (type == "predator_prey") {
    PredatorPreyConfig config;
    config.grid = j.value("grid", config.grid);
    config.predators = j.value("predators", config.predators);
    config.prey = j.value("prey", config.prey);
    config.step_limit = j.value("step_limit", config.step_limit);
    config.sensing_range = j.value("sensing_range", config.grid);
    config.coarse_digests = j.value("coarse_digests", config.coarse_digests);
    config.trace = j.value("trace", config.trace);
    return std::make_unique<PredatorPreyEnv>(config);
  }
  if (type == "stage_game") {
    StageGameSpec spec;
    spec.episode_length = j.value("episode_length", spec.episode_length);
    for (const auto& game_json : j.at("subtasks"))
      spec.subtask_games.push_back(parse_game(game_json.dump()));
    return std::make_unique<StageGameEnv>(std::move(spec));
  }
  throw std::invalid_argument("unknown environment type: " + type);
}

}  // namespace nucred
