#include "nucred/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "nucred/hash.hpp"
#include "nucred/markov_nucleolus.hpp"

namespace nucred {

namespace {

constexpr int kExhaustiveSubActionCap = 4096;

// Rolling observation-history digests, one per agent.
class HistoryDigests {
 public:
  HistoryDigests(int num_agents, int window)
      : window_(std::max(1, window)),
        raw_(static_cast<std::size_t>(num_agents)) {}

  void push(int agent, Digest obs) {
    auto& q = raw_[static_cast<std::size_t>(agent)];
    q.push_back(obs);
    if (static_cast<int>(q.size()) > window_) q.pop_front();
  }
  Digest digest(int agent) const {
    Digest h = hash_combine(0x68697374ULL, static_cast<std::uint64_t>(agent));
    for (Digest d : raw_[static_cast<std::size_t>(agent)]) h = hash_combine(h, d);
    return h;
  }
  std::vector<Digest> window(int agent) const {
    return {raw_[static_cast<std::size_t>(agent)].begin(),
            raw_[static_cast<std::size_t>(agent)].end()};
  }
  void reset() {
    for (auto& q : raw_) q.clear();
  }

 private:
  int window_;
  std::vector<std::deque<Digest>> raw_;
};

std::vector<Digest> current_digests(const HistoryDigests& hist, int n) {
  std::vector<Digest> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = hist.digest(i);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

double AgentValueTable::get(Digest d, int action) const {
  const auto it = table.find(d);
  return it == table.end() ? 0.0 : it->second[static_cast<std::size_t>(action)];
}

void AgentValueTable::add(Digest d, int action, double delta) {
  auto it = table.find(d);
  if (it == table.end())
    it = table.emplace(d, std::vector<double>(static_cast<std::size_t>(num_actions), 0.0)).first;
  it->second[static_cast<std::size_t>(action)] += delta;
}

double AgentValueTable::max_value(Digest d) const {
  const auto it = table.find(d);
  if (it == table.end()) return 0.0;
  double best = it->second[0];
  for (double v : it->second) best = std::max(best, v);
  return best;
}

int AgentValueTable::greedy(Digest d) const {
  const auto it = table.find(d);
  if (it == table.end()) return 0;
  int best = 0;
  for (int a = 1; a < num_actions; ++a)
    if (it->second[static_cast<std::size_t>(a)] > it->second[static_cast<std::size_t>(best)])
      best = a;
  return best;
}

UtilityEstimator UtilityEstimator::make(std::vector<int> num_actions, double init_value) {
  if (init_value <= 0.0)
    throw std::invalid_argument("utility initial value must be positive");
  UtilityEstimator est;
  est.num_actions = std::move(num_actions);
  est.init_value = init_value;
  est.init_raw = softplus_inverse(init_value);
  return est;
}

Digest UtilityEstimator::key(Digest state, Coalition c, std::span<const int> encoded) {
  Digest h = hash_combine(0x7574696cULL, state);
  h = hash_combine(h, c.members);
  for (int a : encoded) h = hash_combine(h, static_cast<std::uint64_t>(a + 2));
  return h;
}

double UtilityEstimator::value(Digest state, Coalition c, std::span<const int> encoded) const {
  const auto it = raw.find(key(state, c, encoded));
  return softplus(it == raw.end() ? init_raw : it->second);
}

void UtilityEstimator::set_value(Digest state, Coalition c, std::span<const int> encoded,
                                 double v) {
  if (v <= 0.0) throw std::invalid_argument("utility values must be positive");
  raw[key(state, c, encoded)] = softplus_inverse(v);
}

void UtilityEstimator::ascend(Digest state, Coalition c, std::span<const int> encoded,
                              double delta, double eta) {
  const Digest k = key(state, c, encoded);
  auto it = raw.find(k);
  if (it == raw.end()) it = raw.emplace(k, init_raw).first;
  it->second += eta * delta * sigmoid(it->second);
}

double UtilityEstimator::max_over_actions(Digest state, Coalition c) const {
  const std::vector<int> members = c.member_indices();
  const int n = static_cast<int>(num_actions.size());
  std::vector<int> encoded(static_cast<std::size_t>(n), kActionPlaceholder);
  long space = 1;
  for (int i : members) space *= num_actions[static_cast<std::size_t>(i)];

  if (space <= kExhaustiveSubActionCap) {
    double best = -std::numeric_limits<double>::infinity();
    for (long idx = 0; idx < space; ++idx) {
      long rem = idx;
      for (int i : members) {
        encoded[static_cast<std::size_t>(i)] =
            static_cast<int>(rem % num_actions[static_cast<std::size_t>(i)]);
        rem /= num_actions[static_cast<std::size_t>(i)];
      }
      best = std::max(best, value(state, c, encoded));
    }
    return best;
  }

  // Coordinate ascent with deterministic restarts.
  double best = -std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < 3; ++restart) {
    for (int i : members)
      encoded[static_cast<std::size_t>(i)] = static_cast<int>(
          mix64(state ^ c.members ^ static_cast<std::uint64_t>(restart * 131 + i)) %
          static_cast<std::uint64_t>(num_actions[static_cast<std::size_t>(i)]));
    double current = value(state, c, encoded);
    bool improved = true;
    while (improved) {
      improved = false;
      for (int i : members) {
        const int keep = encoded[static_cast<std::size_t>(i)];
        int best_a = keep;
        for (int a = 0; a < num_actions[static_cast<std::size_t>(i)]; ++a) {
          encoded[static_cast<std::size_t>(i)] = a;
          const double v = value(state, c, encoded);
          if (v > current + 1e-12) {
            current = v;
            best_a = a;
            improved = true;
          }
        }
        encoded[static_cast<std::size_t>(i)] = best_a;
      }
    }
    best = std::max(best, current);
  }
  return best;
}

std::vector<int> encode_coalition_input(Coalition c, std::span<const int> joint_action, int n) {
  if (static_cast<int>(joint_action.size()) != n)
    throw std::invalid_argument("joint action has wrong arity");
  std::vector<int> encoded(static_cast<std::size_t>(n), kActionPlaceholder);
  for (int i = 0; i < n; ++i)
    if (c.contains(i)) encoded[static_cast<std::size_t>(i)] = joint_action[static_cast<std::size_t>(i)];
  return encoded;
}

LagrangeState lambda_update(LagrangeState state, double xi_value) {
  const double direction = state.sign == LambdaSign::literal ? -1.0 : 1.0;
  state.lambda = std::max(0.0, state.lambda + direction * state.eta3 * xi_value);
  return state;
}

// ---------------------------------------------------------------------------
// Replay and config
// ---------------------------------------------------------------------------

void ReplayBuffer::add(Episode episode) {
  episodes_.push_back(std::move(episode));
  while (episodes_.size() > capacity_) episodes_.pop_front();
}

std::vector<const Episode*> ReplayBuffer::sample(std::mt19937_64& rng, int k) const {
  if (episodes_.empty()) throw std::logic_error("cannot sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> dist(0, episodes_.size() - 1);
  std::vector<const Episode*> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) out.push_back(&episodes_[dist(rng)]);
  return out;
}

double EpsilonSchedule::at(long step, long total_steps) const {
  const long window = decay_steps > 0 ? decay_steps : std::max(1L, total_steps / 5);
  const double frac = std::min(1.0, static_cast<double>(step) / static_cast<double>(window));
  return start + (end - start) * frac;
}

void TrainConfig::validate() const {
  if (!(eta1 > eta2 && eta2 > eta3 && eta3 > 0.0))
    throw std::invalid_argument("learning rates must satisfy eta1 > eta2 > eta3 > 0");
  if (gamma <= 0.0 || gamma >= 1.0) throw std::invalid_argument("gamma must lie in (0, 1)");
  if (epsilon.start < 0.0 || epsilon.start > 1.0 || epsilon.end < 0.0 || epsilon.end > 1.0)
    throw std::invalid_argument("epsilon bounds must lie in [0, 1]");
  if (batch_episodes < 1) throw std::invalid_argument("batch_episodes must be positive");
  if (target_period < 1) throw std::invalid_argument("target_period must be positive");
  if (total_steps < 0) throw std::invalid_argument("total_steps must be nonnegative");
  if (eval_period < 1) throw std::invalid_argument("eval_period must be positive");
  if (eval_episodes < 1) throw std::invalid_argument("eval_episodes must be positive");
  if (lambda_init < 0.0) throw std::invalid_argument("lambda_init must be nonnegative");
  if (replay_capacity < 1) throw std::invalid_argument("replay_capacity must be positive");
  if (history_window < 1) throw std::invalid_argument("history_window must be positive");
  if (utility_init <= 0.0) throw std::invalid_argument("utility_init must be positive");
}

TrainConfig TrainConfig::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("train config is not valid JSON: ") + e.what());
  }
  TrainConfig c;
  c.eta1 = j.value("eta1", c.eta1);
  c.eta2 = j.value("eta2", c.eta2);
  c.eta3 = j.value("eta3", c.eta3);
  c.gamma = j.value("gamma", c.gamma);
  c.epsilon.start = j.value("epsilon_start", c.epsilon.start);
  c.epsilon.end = j.value("epsilon_end", c.epsilon.end);
  c.epsilon.decay_steps = j.value("epsilon_decay_steps", c.epsilon.decay_steps);
  c.batch_episodes = j.value("batch_episodes", c.batch_episodes);
  c.target_period = j.value("target_period", c.target_period);
  c.total_steps = j.value("total_steps", c.total_steps);
  c.eval_period = j.value("eval_period", c.eval_period);
  c.eval_episodes = j.value("eval_episodes", c.eval_episodes);
  c.lambda_init = j.value("lambda_init", c.lambda_init);
  c.replay_capacity = j.value("replay_capacity", c.replay_capacity);
  c.history_window = j.value("history_window", c.history_window);
  c.utility_init = j.value("utility_init", c.utility_init);
  if (j.contains("mode")) {
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "nucleolus")
      c.mode = TrainMode::nucleolus;
    else if (mode == "vdn")
      c.mode = TrainMode::vdn;
    else
      throw std::invalid_argument("mode must be 'nucleolus' or 'vdn'");
  }
  if (j.contains("lambda_sign")) {
    const std::string sign = j.at("lambda_sign").get<std::string>();
    if (sign == "literal")
      c.lambda_sign = LambdaSign::literal;
    else if (sign == "dual_ascent")
      c.lambda_sign = LambdaSign::dual_ascent;
    else
      throw std::invalid_argument("lambda_sign must be 'literal' or 'dual_ascent'");
  }
  c.validate();
  return c;
}

std::string TrainConfig::to_json_text() const {
  nlohmann::json j;
  j["eta1"] = eta1;
  j["eta2"] = eta2;
  j["eta3"] = eta3;
  j["gamma"] = gamma;
  j["epsilon_start"] = epsilon.start;
  j["epsilon_end"] = epsilon.end;
  j["epsilon_decay_steps"] = epsilon.decay_steps;
  j["batch_episodes"] = batch_episodes;
  j["target_period"] = target_period;
  j["total_steps"] = total_steps;
  j["eval_period"] = eval_period;
  j["eval_episodes"] = eval_episodes;
  j["mode"] = mode == TrainMode::nucleolus ? "nucleolus" : "vdn";
  j["lambda_init"] = lambda_init;
  j["lambda_sign"] = lambda_sign == LambdaSign::literal ? "literal" : "dual_ascent";
  j["replay_capacity"] = replay_capacity;
  j["history_window"] = history_window;
  j["utility_init"] = utility_init;
  return j.dump();
}

// ---------------------------------------------------------------------------
// Updates
// ---------------------------------------------------------------------------

std::vector<int> select_actions(const std::vector<AgentValueTable>& tables,
                                const std::vector<Digest>& obs, double epsilon,
                                std::mt19937_64& rng) {
  if (tables.size() != obs.size())
    throw std::invalid_argument("one observation digest per agent required");
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<int> joint(tables.size(), 0);
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (tables[i].num_actions < 1) throw std::invalid_argument("agent has an empty action set");
    if (coin(rng) < epsilon) {
      std::uniform_int_distribution<int> pick(0, tables[i].num_actions - 1);
      joint[i] = pick(rng);
    } else {
      joint[i] = tables[i].greedy(obs[i]);
    }
  }
  return joint;
}

std::vector<double> WeightTable::get(Digest state) const {
  const auto it = w.find(state);
  if (it != w.end()) return it->second;
  return std::vector<double>(static_cast<std::size_t>(num_agents), 1.0 / num_agents);
}

void LearnerState::copy_targets() {
  q_target = q;
  util_target = util;
  weights_target = weights;
}

double compute_xi(const LearnerState& state, const Transition& t) {
  const int n = static_cast<int>(state.q.size());
  double worst = -std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << n); ++mask) {
    const Coalition c(mask);
    double paid = 0.0;
    for (int i : c.member_indices())
      paid += state.q[static_cast<std::size_t>(i)].get(t.obs[static_cast<std::size_t>(i)],
                                                       t.action[static_cast<std::size_t>(i)]);
    worst = std::max(worst, state.util_target.max_over_actions(t.state, c) - paid);
  }
  return worst;
}

namespace {

void utility_td_update_with_xi(LearnerState& state, const Transition& t, double lambda,
                               double eta1, double gamma, double xi_value) {
  const int n = static_cast<int>(state.q.size());
  double predicted = 0.0;
  for (const Coalition& c : t.cs.blocks) {
    const std::vector<int> encoded = encode_coalition_input(c, t.action, n);
    predicted += state.util.value(t.state, c, encoded);
  }
  double continuation = 0.0;
  if (!t.done) {
    // Next action from the greedy Q policy; the target utility is read at
    // that action rather than maximized over its own sparse table, which
    // would ratchet upward.
    std::vector<int> next_action(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i)
      next_action[static_cast<std::size_t>(i)] =
          state.q_target[static_cast<std::size_t>(i)].greedy(
              t.next_obs[static_cast<std::size_t>(i)]);
    for (const Coalition& c : t.next_cs.blocks) {
      const std::vector<int> encoded = encode_coalition_input(c, next_action, n);
      continuation += state.util_target.value(t.next_state, c, encoded);
    }
  }
  const double target = t.reward + lambda * xi_value + gamma * continuation;
  const double delta = target - predicted;
  for (const Coalition& c : t.cs.blocks) {
    const std::vector<int> encoded = encode_coalition_input(c, t.action, n);
    state.util.ascend(t.state, c, encoded, delta, eta1);
  }
}

}  // namespace

void utility_td_update(LearnerState& state, const Transition& t, double lambda, double eta1,
                       double gamma) {
  const double xi_value = lambda != 0.0 ? compute_xi(state, t) : 0.0;
  utility_td_update_with_xi(state, t, lambda, eta1, gamma, xi_value);
}

QGradient q_gradient(const LearnerState& state, const Transition& t, double xi_value,
                     double gamma, TrainMode mode) {
  const int n = static_cast<int>(state.q.size());
  const bool vdn = mode == TrainMode::vdn;
  const std::vector<double> w =
      vdn ? std::vector<double>(static_cast<std::size_t>(n), 1.0) : state.weights.get(t.state);
  const std::vector<double> w_next =
      vdn ? std::vector<double>(static_cast<std::size_t>(n), 1.0)
          : state.weights_target.get(t.next_state);
  const double lambda = vdn ? 0.0 : state.lagrange.lambda;

  QGradient g;
  g.dq.assign(static_cast<std::size_t>(n), 0.0);
  g.dw.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i)
    g.prediction += w[static_cast<std::size_t>(i)] *
                    state.q[static_cast<std::size_t>(i)].get(
                        t.obs[static_cast<std::size_t>(i)], t.action[static_cast<std::size_t>(i)]);
  double continuation = 0.0;
  if (!t.done)
    for (int i = 0; i < n; ++i)
      continuation += w_next[static_cast<std::size_t>(i)] *
                      state.q_target[static_cast<std::size_t>(i)].max_value(
                          t.next_obs[static_cast<std::size_t>(i)]);
  g.target = t.reward + lambda * xi_value + gamma * continuation;
  g.residual = g.prediction - g.target;
  for (int i = 0; i < n; ++i) {
    g.dq[static_cast<std::size_t>(i)] = g.residual * w[static_cast<std::size_t>(i)];
    if (!vdn)
      g.dw[static_cast<std::size_t>(i)] =
          g.residual * state.q[static_cast<std::size_t>(i)].get(
                           t.obs[static_cast<std::size_t>(i)],
                           t.action[static_cast<std::size_t>(i)]);
  }
  return g;
}

namespace {

double q_update_with_xi(LearnerState& state, const Transition& t, double eta2, double gamma,
                        TrainMode mode, double xi_value) {
  const int n = static_cast<int>(state.q.size());
  const QGradient g = q_gradient(state, t, xi_value, gamma, mode);
  for (int i = 0; i < n; ++i)
    state.q[static_cast<std::size_t>(i)].add(t.obs[static_cast<std::size_t>(i)],
                                             t.action[static_cast<std::size_t>(i)],
                                             -eta2 * g.dq[static_cast<std::size_t>(i)]);
  if (mode == TrainMode::nucleolus) {
    std::vector<double> w = state.weights.get(t.state);
    for (int i = 0; i < n; ++i)
      w[static_cast<std::size_t>(i)] -= eta2 * g.dw[static_cast<std::size_t>(i)];
    state.weights.w[t.state] = weight_bound_project(std::move(w), gamma, state.lagrange.lambda);
  }
  return xi_value;
}

}  // namespace

double q_lagrangian_update(LearnerState& state, const Transition& t, double eta2, double gamma,
                           TrainMode mode) {
  const double xi_value = mode == TrainMode::nucleolus ? compute_xi(state, t) : 0.0;
  return q_update_with_xi(state, t, eta2, gamma, mode, xi_value);
}

// ---------------------------------------------------------------------------
// Evaluation and training
// ---------------------------------------------------------------------------

EvalResult evaluate(const std::vector<AgentValueTable>& tables, const Env& env, int episodes,
                    std::uint64_t seed, int history_window) {
  if (episodes < 1) throw std::invalid_argument("need at least one evaluation episode");
  const int n = env.num_agents();
  std::vector<double> returns, lengths;
  returns.reserve(static_cast<std::size_t>(episodes));
  lengths.reserve(static_cast<std::size_t>(episodes));
  for (int e = 0; e < episodes; ++e) {
    std::unique_ptr<Env> rollout = env.clone();
    rollout->reset(derive_seed(seed, 0x6576616cULL, static_cast<std::uint64_t>(e)));
    HistoryDigests hist(n, history_window);
    for (int i = 0; i < n; ++i) hist.push(i, rollout->observation_digest(i));
    double ret = 0.0;
    long len = 0;
    while (!rollout->done()) {
      std::vector<int> joint(static_cast<std::size_t>(n), 0);
      for (int i = 0; i < n; ++i)
        joint[static_cast<std::size_t>(i)] = tables[static_cast<std::size_t>(i)].greedy(hist.digest(i));
      const StepOutcome out = rollout->step(joint);
      ret += out.reward;
      ++len;
      for (int i = 0; i < n; ++i) hist.push(i, rollout->observation_digest(i));
    }
    returns.push_back(ret);
    lengths.push_back(static_cast<double>(len));
  }
  auto mean_se = [](const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    const double se =
        xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1) /
                                  static_cast<double>(xs.size()))
                      : 0.0;
    return std::pair<double, double>(mean, se);
  };
  EvalResult result;
  std::tie(result.mean_return, result.se_return) = mean_se(returns);
  std::tie(result.mean_length, result.se_length) = mean_se(lengths);
  return result;
}

TrainResult train(Env& env, const TrainConfig& config, std::uint64_t seed) {
  config.validate();
  const int n = env.num_agents();

  TrainResult result;
  LearnerState& state = result.state;
  state.q.resize(static_cast<std::size_t>(n));
  std::vector<int> action_counts(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    state.q[static_cast<std::size_t>(i)].num_actions = env.num_actions(i);
    action_counts[static_cast<std::size_t>(i)] = env.num_actions(i);
  }
  state.util = UtilityEstimator::make(action_counts, config.utility_init);
  state.weights.num_agents = n;
  state.lagrange = {config.mode == TrainMode::vdn ? 0.0 : config.lambda_init, config.eta3,
                    config.lambda_sign};
  state.copy_targets();
  if (config.total_steps == 0) return result;

  std::mt19937_64 rng(derive_seed(seed, 0x747261696eULL));
  ReplayBuffer buffer(config.replay_capacity);
#ifndef NDEBUG
  // Observation-history digests must be collision free within a run.
  std::unordered_map<Digest, std::vector<Digest>> digest_guard;
#endif
  long global_step = 0;
  long episode_index = 0;
  double xi_sum = 0.0;
  long xi_count = 0;
  long last_eval_step = -1;

  auto record_eval = [&](long step_label) {
    MetricRecord record;
    record.step = step_label;
    record.eval = evaluate(state.q, env, config.eval_episodes,
                           derive_seed(seed, 0x7265636fULL, static_cast<std::uint64_t>(step_label)),
                           config.history_window);
    record.lambda = state.lagrange.lambda;
    record.mean_xi = xi_count > 0 ? xi_sum / static_cast<double>(xi_count) : 0.0;
    result.metrics.push_back(record);
    xi_sum = 0.0;
    xi_count = 0;
    last_eval_step = step_label;
  };

  try {
    while (global_step < config.total_steps) {
      // Roll out one episode with the behavior policy.
      env.reset(derive_seed(seed, 0x657069ULL, static_cast<std::uint64_t>(episode_index++)));
      HistoryDigests hist(n, config.history_window);
      for (int i = 0; i < n; ++i) hist.push(i, env.observation_digest(i));
      Episode episode;
      while (!env.done()) {
        Transition t;
        t.state = env.state_digest();
        t.obs = current_digests(hist, n);
#ifndef NDEBUG
        for (int i = 0; i < n; ++i) {
          const auto [it, fresh] = digest_guard.try_emplace(
              t.obs[static_cast<std::size_t>(i)], hist.window(i));
          if (!fresh && it->second != hist.window(i))
            throw std::logic_error("observation digest collision detected");
        }
#endif
        const double eps = config.epsilon.at(global_step, config.total_steps);
        t.action = select_actions(state.q, t.obs, eps, rng);
        const StepOutcome out = env.step(t.action);
        t.reward = out.reward;
        t.done = out.done;
        t.cs = out.cs;
        t.next_state = env.state_digest();
        for (int i = 0; i < n; ++i) hist.push(i, env.observation_digest(i));
        t.next_obs = current_digests(hist, n);
        episode.steps.push_back(std::move(t));
        ++global_step;
        if (global_step % config.target_period == 0) state.copy_targets();
        if (global_step % config.eval_period == 0) record_eval(global_step);
      }
      for (std::size_t k = 0; k + 1 < episode.steps.size(); ++k)
        episode.steps[k].next_cs = episode.steps[k + 1].cs;
      if (!episode.steps.empty())
        episode.steps.back().next_cs = CoalitionStructure::singletons(n);
      buffer.add(std::move(episode));

      // Learn from a sampled batch of episodes.
      const std::vector<const Episode*> batch = buffer.sample(rng, config.batch_episodes);
      for (const Episode* ep : batch) {
        double episode_xi = 0.0;
        long episode_count = 0;
        for (const Transition& t : ep->steps) {
          double xi_value = 0.0;
          if (config.mode == TrainMode::nucleolus) {
            xi_value = compute_xi(state, t);
            utility_td_update_with_xi(state, t, state.lagrange.lambda, config.eta1,
                                      config.gamma, xi_value);
          }
          q_update_with_xi(state, t, config.eta2, config.gamma, config.mode, xi_value);
          if (config.mode == TrainMode::nucleolus) {
            episode_xi += xi_value;
            ++episode_count;
            xi_sum += xi_value;
            ++xi_count;
          }
        }
        if (config.mode == TrainMode::nucleolus && episode_count > 0)
          state.lagrange = lambda_update(state.lagrange,
                                         episode_xi / static_cast<double>(episode_count));
      }
    }
    // Episodes run to completion, so the loop can overshoot total_steps by a
    // seed-dependent amount; the trailing record is pinned to the configured
    // endpoint so eval grids match across seeds.
    if (last_eval_step < config.total_steps) record_eval(config.total_steps);
  } catch (const std::exception& e) {
    result.fault = e.what();
  }
  return result;
}

}  // namespace nucred
