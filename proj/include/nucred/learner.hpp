#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "nucred/coalition.hpp"
#include "nucred/environments.hpp"

namespace nucred {

using Digest = std::uint64_t;

inline constexpr int kActionPlaceholder = -1;

inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}
inline double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}
inline double softplus_inverse(double v) {
  return v > 30.0 ? v : std::log(std::expm1(v));
}

/// Tabular per-agent action values keyed by observation-history digests.
/// Unseen digests read as zero.
struct AgentValueTable {
  int num_actions = 0;
  std::unordered_map<Digest, std::vector<double>> table;

  double get(Digest d, int action) const;
  void add(Digest d, int action, double delta);
  double max_value(Digest d) const;
  int greedy(Digest d) const;  // lowest index wins ties
};

/// Coalition utility estimator V(state, coalition, position-encoded actions).
/// Values are softplus of a raw parameter, so they stay positive; a uniform
/// raw default gives unseen inputs the configured initial value.
struct UtilityEstimator {
  std::vector<int> num_actions;  // per agent
  double init_value = 0.1;
  double init_raw = 0.0;
  std::unordered_map<Digest, double> raw;

  static UtilityEstimator make(std::vector<int> num_actions, double init_value);
  static Digest key(Digest state, Coalition c, std::span<const int> encoded);

  double value(Digest state, Coalition c, std::span<const int> encoded) const;
  void set_value(Digest state, Coalition c, std::span<const int> encoded, double v);
  /// One gradient step of 0.5 * delta^2 toward a larger value: raw += eta *
  /// delta * sigmoid(raw).
  void ascend(Digest state, Coalition c, std::span<const int> encoded, double delta, double eta);
  /// max over the coalition's joint sub-actions; exhaustive while the
  /// sub-action space is at most 4096, coordinate ascent with 3 restarts above.
  double max_over_actions(Digest state, Coalition c) const;
};

/// Position-encoded coalition input: slot i carries agent i's action when i is
/// in the coalition, kActionPlaceholder otherwise.
std::vector<int> encode_coalition_input(Coalition c, std::span<const int> joint_action, int n);

enum class LambdaSign { literal, dual_ascent };

struct LagrangeState {
  double lambda = 0.0;
  double eta3 = 1e-3;
  LambdaSign sign = LambdaSign::literal;
};

/// literal: lambda <- max(0, lambda - eta3 * xi); dual_ascent flips the sign.
LagrangeState lambda_update(LagrangeState state, double xi_value);

struct Transition {
  Digest state = 0;
  std::vector<Digest> obs;  // per-agent history digests
  std::vector<int> action;
  double reward = 0.0;
  Digest next_state = 0;
  std::vector<Digest> next_obs;
  bool done = false;
  CoalitionStructure cs;       // extracted at (state, action)
  CoalitionStructure next_cs;  // realized at the next step; singletons if last
};

struct Episode {
  std::vector<Transition> steps;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}
  void add(Episode episode);
  std::size_t size() const { return episodes_.size(); }
  /// k episodes drawn uniformly with replacement.
  std::vector<const Episode*> sample(std::mt19937_64& rng, int k) const;

 private:
  std::size_t capacity_;
  std::deque<Episode> episodes_;
};

struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  long decay_steps = 0;  // 0 = first 20% of total steps
  double at(long step, long total_steps) const;
};

enum class TrainMode { nucleolus, vdn };

struct TrainConfig {
  double eta1 = 0.5;   // utility step size
  double eta2 = 0.1;   // Q / weight step size
  double eta3 = 0.01;  // multiplier step size
  double gamma = 0.9;
  EpsilonSchedule epsilon;
  int batch_episodes = 2;
  long target_period = 200;  // environment steps between target copies
  long total_steps = 0;
  long eval_period = 2000;
  int eval_episodes = 8;
  TrainMode mode = TrainMode::nucleolus;
  double lambda_init = 0.5;
  LambdaSign lambda_sign = LambdaSign::literal;
  std::size_t replay_capacity = 500;
  int history_window = 4;
  double utility_init = 0.1;

  void validate() const;  // throws std::invalid_argument; enforces eta1 > eta2 > eta3 > 0
  static TrainConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
};

/// Epsilon-greedy per-agent action selection; ties resolve to the lowest
/// action index.
std::vector<int> select_actions(const std::vector<AgentValueTable>& tables,
                                const std::vector<Digest>& obs, double epsilon,
                                std::mt19937_64& rng);

/// Per-agent mixing weights keyed by state digest, nonnegative, kept inside
/// the Theorem-2 bound by projection after every update.
struct WeightTable {
  int num_agents = 0;
  std::unordered_map<Digest, std::vector<double>> w;

  std::vector<double> get(Digest state) const;  // defaults to uniform 1/n
};

struct LearnerState {
  std::vector<AgentValueTable> q;
  std::vector<AgentValueTable> q_target;
  UtilityEstimator util;
  UtilityEstimator util_target;
  WeightTable weights;
  WeightTable weights_target;
  LagrangeState lagrange;

  void copy_targets();
};

/// xi(s, a): worst coalition excess, with coalition utilities read from the
/// target estimator and payoffs from the online Q tables.
double compute_xi(const LearnerState& state, const Transition& t);

/// Utility TD step: the transition structure's summed block utility moves
/// toward R + lambda * xi + gamma * (next structure's utility at the greedy
/// next action), with target copies inside the bracket.
void utility_td_update(LearnerState& state, const Transition& t, double lambda, double eta1,
                       double gamma);

struct QGradient {
  double prediction = 0.0;
  double target = 0.0;
  double residual = 0.0;
  std::vector<double> dq;  // d(0.5 residual^2)/dQ_i(tau_i, a_i)
  std::vector<double> dw;  // d/dw_i(state); zero in vdn mode
};

/// Gradient of the squared residual between sum_i w_i Q_i and the frozen
/// target; pure, for finite-difference verification.
QGradient q_gradient(const LearnerState& state, const Transition& t, double xi_value,
                     double gamma, TrainMode mode);

/// Applies the eta2 step from q_gradient, then re-projects the state's
/// weights. Returns the xi value used in the target (0 in vdn mode).
double q_lagrangian_update(LearnerState& state, const Transition& t, double eta2, double gamma,
                           TrainMode mode);

struct EvalResult {
  double mean_return = 0.0;
  double se_return = 0.0;
  double mean_length = 0.0;
  double se_length = 0.0;
};

EvalResult evaluate(const std::vector<AgentValueTable>& tables, const Env& env, int episodes,
                    std::uint64_t seed, int history_window);

struct MetricRecord {
  long step = 0;
  EvalResult eval;
  double lambda = 0.0;
  double mean_xi = 0.0;
};

struct TrainResult {
  LearnerState state;
  std::vector<MetricRecord> metrics;
  std::string fault;  // empty on clean completion
};

/// Full nucleolus / vdn training loop; deterministic per (config, seed).
TrainResult train(Env& env, const TrainConfig& config, std::uint64_t seed);

}  // namespace nucred
