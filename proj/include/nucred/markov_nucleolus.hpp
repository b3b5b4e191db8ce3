#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "nucred/characteristic_game.hpp"
#include "nucred/coalition.hpp"
#include "nucred/env_model.hpp"

namespace nucred {

enum class WeightMode { state_only, state_action };

/// Per-agent nonnegative mixing weights w_i, indexed by state or by
/// state-and-joint-action.
struct WeightModel {
  WeightMode mode = WeightMode::state_only;
  int num_agents = 0;
  int num_joint_actions = 1;
  std::vector<std::vector<double>> w;  // [s][i] or [s][a * n + i]

  static WeightModel uniform(const EnvModel& model, WeightMode mode = WeightMode::state_only);

  double at(int s, int a, int i) const {
    return mode == WeightMode::state_only
               ? w[static_cast<std::size_t>(s)][static_cast<std::size_t>(i)]
               : w[static_cast<std::size_t>(s)]
                  [static_cast<std::size_t>(a) * num_agents + static_cast<std::size_t>(i)];
  }
  /// max over actions of w_i(s, .); equals w_i(s) in state_only mode.
  double agent_max(int s, int i) const;
  double sum_max(int s) const;
  double worst_sum_max() const;
};

/// Clamp negatives to zero, then uniformly rescale so that the weights sum to
/// at most 1 / (gamma + lambda). Identity when already feasible.
std::vector<double> weight_bound_project(std::vector<double> w_raw, double gamma, double lambda);

/// Apply the bound per state (state_only) or per state over the per-agent
/// action maxima (state_action).
void project_weights(WeightModel& weights, double gamma, double lambda);

/// Per-agent shares of the joint state-action value, plus the mixing weights
/// and the Lagrange multiplier. Shares are indexed by the full joint action so
/// a synchronous operator sweep is well defined.
struct QEnsemble {
  std::vector<std::vector<std::vector<double>>> q;  // [i][s][joint a]
  WeightModel weights;
  double lambda = 0.0;

  static QEnsemble zeros(const EnvModel& model, WeightModel weights, double lambda);

  int num_agents() const { return static_cast<int>(q.size()); }
  double agent_value(int i, int s, int a) const {
    return q[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
  }
  double global_value(int s, int a) const;
  /// Greedy joint action for the summed value; lowest index breaks ties.
  int greedy_joint(int s) const;
  double greedy_value(int s) const;
};

/// Nonnegative coalition utility V(s, C, a_C); dense over the coalition's
/// sub-action space (members in ascending order, mixed radix).
struct UtilityTable {
  std::vector<int> num_actions;                          // per agent
  std::vector<std::vector<std::vector<double>>> v;       // [s][mask][sub action]

  static UtilityTable zeros(const EnvModel& model);
  static UtilityTable random(const EnvModel& model, std::uint64_t seed, double scale = 1.0);

  int sub_action_count(Coalition c) const;
  int sub_index(Coalition c, std::span<const int> joint) const;
  double value(int s, Coalition c, int sub_action) const {
    return v[static_cast<std::size_t>(s)][c.members][static_cast<std::size_t>(sub_action)];
  }
  double max_over_actions(int s, Coalition c) const;
  void validate() const;  // throws if any entry is negative or non-finite
};

/// One-step global value R(s,a) + E[max_a' sum_i Q_i(s',a')] (the
/// consistency-reduced continuation; terminal successors contribute zero).
double global_q(const QEnsemble& ens, const EnvModel& model, int s, int a);

/// max_{a_C} V(s, a_C) - sum_{i in C} Q_i(s, a); zero for the empty coalition.
double q_excess(const QEnsemble& ens, const UtilityTable& util, int s, int a, Coalition c);

ExcessSequence q_excess_sequence(const QEnsemble& ens, const UtilityTable& util, int s, int a);

/// Nucleolus of the induced static game u(C) = max_{a_C} V(s, a_C) with the
/// grand coalition pinned to `total`. Exact mode for up to 4 agents.
PayoffVector markov_nucleolus_allocation(const UtilityTable& util, double total, int s);

/// Maximum excess over non-empty coalitions. Exhaustive for n <= 10; above
/// that a fixed sample of 2 n^2 coalitions plus the grand coalition and all
/// singletons is used and `exact` reports false.
struct XiValue {
  double value = 0.0;
  bool exact = true;
};
XiValue xi_detail(const QEnsemble& ens, const UtilityTable& util, int s, int a);
double xi(const QEnsemble& ens, const UtilityTable& util, int s, int a);

/// sum_i Q_i(s, a) + lambda * xi(s, a).
double lagrangian(const QEnsemble& ens, const UtilityTable& util, int s, int a);

/// One synchronous sweep of the constrained operator: for every (s, a),
/// target = R + lambda * xi(s, a) + gamma * E[max_a' sum_i Q_i(s', a')] and
/// Q_i(s, a) <- w_i(s, a) * target. xi is zero at terminal states and uses the
/// pre-sweep ensemble throughout.
QEnsemble apply_operator(const QEnsemble& ens, const UtilityTable& util, const EnvModel& model);

/// max over (s, a) of sum_i |A_i(s,a) - B_i(s,a)|: the norm in which the
/// operator contracts with modulus (gamma + lambda) * sum_i max w_i.
double ensemble_distance(const QEnsemble& a, const QEnsemble& b);

struct FixedPointResult {
  QEnsemble ensemble;
  int iterations = 0;
  bool converged = false;
  std::vector<double> sweep_deltas;  // distance between consecutive sweeps
  std::vector<double> ratios;        // consecutive-delta contraction estimates
};

FixedPointResult fixed_point(const EnvModel& model, const UtilityTable& util,
                             WeightModel weights, double lambda, double tol = 1e-6,
                             int max_iter = 2000);

/// Markov-core membership at state s for supplied per-agent payoffs
/// x(s, i, a_i) and coalition assets v(s, C, a_C-index): true iff every
/// non-empty coalition's best achievable payoff covers its best assets.
bool markov_core_check(const EnvModel& model,
                       const std::function<double(int, int, int)>& payoff,
                       const std::function<double(int, Coalition, int)>& assets, int s,
                       double tol = kComparisonTol);

/// Centralized optimal joint Q via value iteration; the independent reference
/// for consistency checks.
std::vector<std::vector<double>> centralized_optimal_q(const EnvModel& model,
                                                       double tol = 1e-10,
                                                       int max_iter = 100000);

/// Theorem-1 style check at state s: the ensemble-greedy joint action must
/// attain the best centralized value over every coalition structure reachable
/// through the extractor (exhaustive over set partitions, n <= 5).
bool consistency_check(const QEnsemble& ens, const EnvModel& model,
                       const std::vector<std::vector<double>>& q_star, int s,
                       double tol = 1e-6);
bool consistency_check(const QEnsemble& ens, const EnvModel& model, int s, double tol = 1e-6);

}  // namespace nucred
