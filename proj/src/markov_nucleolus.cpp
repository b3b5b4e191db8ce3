#include "nucred/markov_nucleolus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "nucred/hash.hpp"
#include "nucred/nucleolus.hpp"

namespace nucred {

WeightModel WeightModel::uniform(const EnvModel& model, WeightMode mode) {
  WeightModel wm;
  wm.mode = mode;
  wm.num_agents = model.num_agents;
  wm.num_joint_actions = model.joint_action_count();
  const std::size_t width = mode == WeightMode::state_only
                                ? static_cast<std::size_t>(model.num_agents)
                                : static_cast<std::size_t>(model.num_agents) *
                                      static_cast<std::size_t>(wm.num_joint_actions);
  wm.w.assign(static_cast<std::size_t>(model.num_states),
              std::vector<double>(width, 1.0 / model.num_agents));
  return wm;
}

double WeightModel::agent_max(int s, int i) const {
  if (mode == WeightMode::state_only)
    return w[static_cast<std::size_t>(s)][static_cast<std::size_t>(i)];
  double best = 0.0;
  for (int a = 0; a < num_joint_actions; ++a) best = std::max(best, at(s, a, i));
  return best;
}

double WeightModel::sum_max(int s) const {
  double sum = 0.0;
  for (int i = 0; i < num_agents; ++i) sum += agent_max(s, i);
  return sum;
}

double WeightModel::worst_sum_max() const {
  double worst = 0.0;
  for (int s = 0; s < static_cast<int>(w.size()); ++s) worst = std::max(worst, sum_max(s));
  return worst;
}

std::vector<double> weight_bound_project(std::vector<double> w_raw, double gamma,
                                         double lambda) {
  if (gamma + lambda <= 0.0)
    throw std::invalid_argument("weight projection requires gamma + lambda > 0");
  double sum = 0.0;
  for (double& wi : w_raw) {
    if (wi < 0.0) wi = 0.0;
    sum += wi;
  }
  const double cap = 1.0 / (gamma + lambda);
  if (sum > cap * (1.0 + 1e-12)) {
    const double scale = cap / sum;
    for (double& wi : w_raw) wi *= scale;
  }
  return w_raw;
}

void project_weights(WeightModel& weights, double gamma, double lambda) {
  if (gamma + lambda <= 0.0)
    throw std::invalid_argument("weight projection requires gamma + lambda > 0");
  const double cap = 1.0 / (gamma + lambda);
  for (auto& slice : weights.w)
    for (double& wi : slice)
      if (wi < 0.0) wi = 0.0;
  for (int s = 0; s < static_cast<int>(weights.w.size()); ++s) {
    const double sum = weights.sum_max(s);
    if (sum > cap * (1.0 + 1e-12)) {
      const double scale = cap / sum;
      for (double& wi : weights.w[static_cast<std::size_t>(s)]) wi *= scale;
    }
  }
}

QEnsemble QEnsemble::zeros(const EnvModel& model, WeightModel weights, double lambda) {
  QEnsemble ens;
  ens.q.assign(static_cast<std::size_t>(model.num_agents),
               std::vector<std::vector<double>>(
                   static_cast<std::size_t>(model.num_states),
                   std::vector<double>(static_cast<std::size_t>(model.joint_action_count()), 0.0)));
  ens.weights = std::move(weights);
  ens.lambda = lambda;
  return ens;
}

double QEnsemble::global_value(int s, int a) const {
  double sum = 0.0;
  for (const auto& qi : q)
    sum += qi[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
  return sum;
}

int QEnsemble::greedy_joint(int s) const {
  const int na = static_cast<int>(q.front()[static_cast<std::size_t>(s)].size());
  int best = 0;
  double best_v = global_value(s, 0);
  for (int a = 1; a < na; ++a) {
    const double v = global_value(s, a);
    if (v > best_v + 1e-12) {
      best_v = v;
      best = a;
    }
  }
  return best;
}

double QEnsemble::greedy_value(int s) const { return global_value(s, greedy_joint(s)); }

UtilityTable UtilityTable::zeros(const EnvModel& model) {
  UtilityTable util;
  util.num_actions = model.num_actions;
  const std::size_t masks = std::size_t{1} << model.num_agents;
  util.v.resize(static_cast<std::size_t>(model.num_states));
  for (auto& per_state : util.v) {
    per_state.resize(masks);
    for (std::uint32_t mask = 0; mask < masks; ++mask)
      per_state[mask].assign(
          static_cast<std::size_t>(util.sub_action_count(Coalition(mask))), 0.0);
  }
  return util;
}

UtilityTable UtilityTable::random(const EnvModel& model, std::uint64_t seed, double scale) {
  UtilityTable util = zeros(model);
  std::mt19937_64 rng(derive_seed(seed, 0x7574696cULL));
  std::uniform_real_distribution<double> dist(0.0, scale);
  for (auto& per_state : util.v)
    for (std::size_t mask = 1; mask < per_state.size(); ++mask)
      for (double& val : per_state[mask]) val = dist(rng);
  return util;
}

int UtilityTable::sub_action_count(Coalition c) const {
  int total = 1;
  for (int i : c.member_indices()) total *= num_actions[static_cast<std::size_t>(i)];
  return total;
}

int UtilityTable::sub_index(Coalition c, std::span<const int> joint) const {
  const std::vector<int> members = c.member_indices();
  int idx = 0;
  for (auto it = members.rbegin(); it != members.rend(); ++it)
    idx = idx * num_actions[static_cast<std::size_t>(*it)] +
          joint[static_cast<std::size_t>(*it)];
  return idx;
}

double UtilityTable::max_over_actions(int s, Coalition c) const {
  const auto& vals = v[static_cast<std::size_t>(s)][c.members];
  double best = 0.0;
  for (double val : vals) best = std::max(best, val);
  return best;
}

void UtilityTable::validate() const {
  for (const auto& per_state : v)
    for (const auto& per_mask : per_state)
      for (double val : per_mask)
        if (!(val >= 0.0) || !std::isfinite(val))
          throw std::invalid_argument("coalition utility must be finite and nonnegative");
}

double global_q(const QEnsemble& ens, const EnvModel& model, int s, int a) {
  if (s < 0 || s >= model.num_states || a < 0 || a >= model.joint_action_count())
    throw std::invalid_argument("state or joint action index out of range");
  double cont = 0.0;
  const auto& row = model.transition[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
  for (int s2 = 0; s2 < model.num_states; ++s2) {
    const double p = row[static_cast<std::size_t>(s2)];
    if (p == 0.0 || model.terminal[static_cast<std::size_t>(s2)]) continue;
    cont += p * ens.greedy_value(s2);
  }
  return model.reward[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] + cont;
}

double q_excess(const QEnsemble& ens, const UtilityTable& util, int s, int a, Coalition c) {
  if (c.is_empty()) return 0.0;
  double paid = 0.0;
  for (int i : c.member_indices()) paid += ens.agent_value(i, s, a);
  return util.max_over_actions(s, c) - paid;
}

ExcessSequence q_excess_sequence(const QEnsemble& ens, const UtilityTable& util, int s,
                                 int a) {
  const int n = ens.num_agents();
  ExcessSequence seq;
  seq.values.reserve(std::size_t{1} << n);
  for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << n); ++mask)
    seq.values.push_back(q_excess(ens, util, s, a, Coalition(mask)));
  std::sort(seq.values.begin(), seq.values.end(), std::greater<double>());
  return seq;
}

PayoffVector markov_nucleolus_allocation(const UtilityTable& util, double total, int s) {
  const int n = static_cast<int>(util.num_actions.size());
  if (total < 0.0) throw std::invalid_argument("total to allocate must be nonnegative");
  if (n > 4) throw std::invalid_argument("exact allocation supports at most 4 agents");
  CharacteristicGame induced(n);
  for (std::uint32_t mask = 1; mask + 1 < induced.num_coalitions(); ++mask)
    induced.values[mask] = util.max_over_actions(s, Coalition(mask));
  induced.values[induced.grand().members] = total;
  return nucleolus(induced).allocation;
}

XiValue xi_detail(const QEnsemble& ens, const UtilityTable& util, int s, int a) {
  const int n = ens.num_agents();
  XiValue out;
  out.value = -std::numeric_limits<double>::infinity();
  if (n <= 10) {
    for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << n); ++mask)
      out.value = std::max(out.value, q_excess(ens, util, s, a, Coalition(mask)));
    return out;
  }
  out.exact = false;
  const std::uint32_t full = Coalition::grand(n).members;
  out.value = q_excess(ens, util, s, a, Coalition(full));
  for (int i = 0; i < n; ++i)
    out.value = std::max(out.value, q_excess(ens, util, s, a, Coalition::singleton(i)));
  std::mt19937_64 rng(derive_seed(0x9d5cf3a1ULL, static_cast<std::uint64_t>(s),
                                  static_cast<std::uint64_t>(a)));
  std::uniform_int_distribution<std::uint32_t> dist(1, full);
  for (int k = 0; k < 2 * n * n; ++k)
    out.value = std::max(out.value, q_excess(ens, util, s, a, Coalition(dist(rng))));
  return out;
}

double xi(const QEnsemble& ens, const UtilityTable& util, int s, int a) {
  return xi_detail(ens, util, s, a).value;
}

double lagrangian(const QEnsemble& ens, const UtilityTable& util, int s, int a) {
  if (ens.lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  return ens.global_value(s, a) + ens.lambda * xi(ens, util, s, a);
}

QEnsemble apply_operator(const QEnsemble& ens, const UtilityTable& util,
                         const EnvModel& model) {
  const double cap = 1.0 / (model.gamma + ens.lambda);
  if (ens.weights.worst_sum_max() > cap + 1e-9)
    throw std::invalid_argument("operator requires projected weights");

  QEnsemble next = ens;
  const int na = model.joint_action_count();
  // Greedy continuation values from the frozen pre-sweep ensemble.
  std::vector<double> cont(static_cast<std::size_t>(model.num_states), 0.0);
  for (int s = 0; s < model.num_states; ++s)
    cont[static_cast<std::size_t>(s)] =
        model.terminal[static_cast<std::size_t>(s)] ? 0.0 : ens.greedy_value(s);

  for (int s = 0; s < model.num_states; ++s) {
    const bool term = model.terminal[static_cast<std::size_t>(s)] != 0;
    for (int a = 0; a < na; ++a) {
      double expected = 0.0;
      const auto& row =
          model.transition[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
      for (int s2 = 0; s2 < model.num_states; ++s2)
        expected += row[static_cast<std::size_t>(s2)] * cont[static_cast<std::size_t>(s2)];
      const double constraint = term ? 0.0 : xi(ens, util, s, a);
      const double target =
          model.reward[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] +
          model.gamma * expected + ens.lambda * constraint;
      for (int i = 0; i < model.num_agents; ++i)
        next.q[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)]
              [static_cast<std::size_t>(a)] = ens.weights.at(s, a, i) * target;
    }
  }
  return next;
}

double ensemble_distance(const QEnsemble& a, const QEnsemble& b) {
  double worst = 0.0;
  const int n = a.num_agents();
  for (std::size_t s = 0; s < a.q.front().size(); ++s)
    for (std::size_t ja = 0; ja < a.q.front()[s].size(); ++ja) {
      double sum = 0.0;
      for (int i = 0; i < n; ++i)
        sum += std::abs(a.q[static_cast<std::size_t>(i)][s][ja] -
                        b.q[static_cast<std::size_t>(i)][s][ja]);
      worst = std::max(worst, sum);
    }
  return worst;
}

FixedPointResult fixed_point(const EnvModel& model, const UtilityTable& util,
                             WeightModel weights, double lambda, double tol, int max_iter) {
  project_weights(weights, model.gamma, lambda);
  FixedPointResult result;
  QEnsemble current = QEnsemble::zeros(model, std::move(weights), lambda);
  double prev_delta = -1.0;
  for (int it = 0; it < max_iter; ++it) {
    QEnsemble next = apply_operator(current, util, model);
    const double delta = ensemble_distance(next, current);
    result.sweep_deltas.push_back(delta);
    if (prev_delta > 1e-14) result.ratios.push_back(delta / prev_delta);
    prev_delta = delta;
    current = std::move(next);
    result.iterations = it + 1;
    if (delta < tol) {
      result.converged = true;
      break;
    }
  }
  result.ensemble = std::move(current);
  return result;
}

bool markov_core_check(const EnvModel& model,
                       const std::function<double(int, int, int)>& payoff,
                       const std::function<double(int, Coalition, int)>& assets, int s,
                       double tol) {
  const int n = model.num_agents;
  for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << n); ++mask) {
    const Coalition c(mask);
    const std::vector<int> members = c.member_indices();
    int count = 1;
    for (int i : members) count *= model.num_actions[static_cast<std::size_t>(i)];
    double best_payoff = -std::numeric_limits<double>::infinity();
    double best_assets = -std::numeric_limits<double>::infinity();
    for (int sub = 0; sub < count; ++sub) {
      int rem = sub;
      double total = 0.0;
      for (int i : members) {
        const int ai = rem % model.num_actions[static_cast<std::size_t>(i)];
        rem /= model.num_actions[static_cast<std::size_t>(i)];
        total += payoff(s, i, ai);
      }
      best_payoff = std::max(best_payoff, total);
      best_assets = std::max(best_assets, assets(s, c, sub));
    }
    if (best_payoff < best_assets - tol) return false;
  }
  return true;
}

std::vector<std::vector<double>> centralized_optimal_q(const EnvModel& model, double tol,
                                                       int max_iter) {
  const int na = model.joint_action_count();
  std::vector<std::vector<double>> q(static_cast<std::size_t>(model.num_states),
                                     std::vector<double>(static_cast<std::size_t>(na), 0.0));
  std::vector<double> vmax(static_cast<std::size_t>(model.num_states), 0.0);
  for (int it = 0; it < max_iter; ++it) {
    double delta = 0.0;
    for (int s = 0; s < model.num_states; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < na; ++a)
        best = std::max(best, q[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]);
      vmax[static_cast<std::size_t>(s)] =
          model.terminal[static_cast<std::size_t>(s)] ? 0.0 : best;
    }
    for (int s = 0; s < model.num_states; ++s)
      for (int a = 0; a < na; ++a) {
        double cont = 0.0;
        const auto& row =
            model.transition[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
        for (int s2 = 0; s2 < model.num_states; ++s2)
          cont += row[static_cast<std::size_t>(s2)] * vmax[static_cast<std::size_t>(s2)];
        const double target =
            model.reward[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] +
            model.gamma * cont;
        delta = std::max(delta,
                         std::abs(target - q[static_cast<std::size_t>(s)]
                                               [static_cast<std::size_t>(a)]));
        q[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] = target;
      }
    if (delta < tol) break;
  }
  return q;
}

bool consistency_check(const QEnsemble& ens, const EnvModel& model,
                       const std::vector<std::vector<double>>& q_star, int s, double tol) {
  const int n = model.num_agents;
  if (n > 5) throw std::invalid_argument("exhaustive partition check supports n <= 5");
  const int na = model.joint_action_count();
  const int a_star = ens.greedy_joint(s);

  // Best centralized value achievable within each coalition structure, taken
  // over the joint actions the extractor maps to it.
  const std::vector<CoalitionStructure> partitions = enumerate_partitions(n);
  double best_over_partitions = -std::numeric_limits<double>::infinity();
  for (const CoalitionStructure& partition : partitions) {
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < na; ++a)
      if (model.cs[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)].same_partition(partition))
        best = std::max(best, q_star[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]);
    best_over_partitions = std::max(best_over_partitions, best);
  }
  return q_star[static_cast<std::size_t>(s)][static_cast<std::size_t>(a_star)] >=
         best_over_partitions - tol;
}

bool consistency_check(const QEnsemble& ens, const EnvModel& model, int s, double tol) {
  return consistency_check(ens, model, centralized_optimal_q(model), s, tol);
}

}  // namespace nucred
