// Acceptance suite: one criterion per section, one pass/fail line each.
// Exit code is the number of failed criteria. An optional argv filter runs a
// subset, e.g. `acceptance 1 5 7` (criterion 10 pulls in 8 and 9).
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nucred/environments.hpp"
#include "nucred/hash.hpp"
#include "nucred/learner.hpp"
#include "nucred/markov_nucleolus.hpp"
#include "nucred/nucleolus.hpp"
#include "nucred/runner.hpp"

using namespace nucred;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

CharacteristicGame majority_game() {
  CharacteristicGame game(3);
  for (std::uint32_t mask = 1; mask < 8; ++mask)
    game.values[mask] = std::popcount(mask) >= 2 ? 1.0 : 0.0;
  return game;
}

CharacteristicGame additive_game(int n) {
  CharacteristicGame game(n);
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask)
    game.values[mask] = std::popcount(mask);
  return game;
}

CharacteristicGame random_game(std::mt19937_64& rng, int n) {
  CharacteristicGame game(n);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) game.values[mask] = dist(rng);
  return game;
}

PayoffVector random_efficient(std::mt19937_64& rng, const CharacteristicGame& game,
                              double scale) {
  std::normal_distribution<double> noise(0.0, scale);
  PayoffVector x(static_cast<std::size_t>(game.n), game.grand_value() / game.n);
  double drift = 0.0;
  for (double& xi : x) {
    const double z = noise(rng);
    xi += z;
    drift += z;
  }
  for (double& xi : x) xi -= drift / game.n;
  return x;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  auto ranks = [n](const std::vector<double>& xs) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return xs[i] < xs[j]; });
    std::vector<double> rk(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
      for (std::size_t t = i; t <= j; ++t)
        rk[order[t]] = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      i = j + 1;
    }
    return rk;
  };
  const std::vector<double> ra = ranks(a), rb = ranks(b);
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  const double den = std::sqrt(da * db);
  return den > 0 ? num / den : 0.0;
}

// ---------------------------------------------------------------------------
// Criterion 1: nucleolus exactness on the three fixed games.
Outcome criterion1() {
  Outcome out;
  std::ostringstream msg;
  bool ok = true;

  const PayoffVector maj = nucleolus(majority_game()).allocation;
  for (double x : maj) ok = ok && std::abs(x - 1.0 / 3) <= 1e-8;

  const PayoffVector add = nucleolus(additive_game(4)).allocation;
  for (double x : add) ok = ok && std::abs(x - 1.0) <= 1e-8;

  CharacteristicGame duo(2);
  duo.values[0b01] = 2.0;
  duo.values[0b10] = 4.0;
  duo.values[0b11] = 10.0;
  const PayoffVector pair = nucleolus(duo).allocation;
  ok = ok && std::abs(pair[0] - 4.0) <= 1e-8 && std::abs(pair[1] - 6.0) <= 1e-8;

  msg << "majority=(" << maj[0] << "," << maj[1] << "," << maj[2] << ") "
      << "two-player=(" << pair[0] << "," << pair[1] << ")";
  out.pass = ok;
  out.detail = msg.str();
  return out;
}

// Criterion 2: lexicographic minimality against 1,000 perturbations per game.
Outcome criterion2() {
  Outcome out;
  std::mt19937_64 rng(20240202);
  int violations = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const CharacteristicGame game = random_game(rng, 4);
    const ExcessSequence best = excess_sequence(game, nucleolus(game).allocation);
    for (int k = 0; k < 1000; ++k) {
      const PayoffVector y = random_efficient(rng, game, k % 2 ? 0.05 : 1.0);
      if (lex_compare(best, excess_sequence(game, y)) == LexOrder::greater) ++violations;
    }
  }
  out.pass = violations == 0;
  out.detail = "violations=" + std::to_string(violations) + "/50000";
  return out;
}

// Criterion 3: grid-oracle agreement at resolution 1/200 on 3-player games.
Outcome criterion3() {
  Outcome out;
  std::mt19937_64 rng(20240303);
  const double resolution = 1.0 / 200;
  double worst = 0.0;
  int failures = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const CharacteristicGame game = random_game(rng, 3);
    const PayoffVector exact = nucleolus(game).allocation;
    const PayoffVector grid = nucleolus_oracle(game, resolution);
    for (int i = 0; i < 3; ++i) {
      const double diff = std::abs(exact[static_cast<std::size_t>(i)] -
                                   grid[static_cast<std::size_t>(i)]);
      worst = std::max(worst, diff);
      if (diff > resolution + 1e-9) ++failures;
    }
  }
  std::ostringstream msg;
  msg << "worst coordinate gap " << worst << " vs resolution " << resolution;
  out.pass = failures == 0;
  out.detail = msg.str();
  return out;
}

// Criterion 4: on supermodular games the nucleolus sits in the core.
Outcome criterion4() {
  Outcome out;
  std::mt19937_64 rng(20240404);
  std::uniform_real_distribution<double> wdist(0.1, 1.0);
  int in_core = 0;
  const int trials = 50;
  for (int trial = 0; trial < trials; ++trial) {
    const int n = 3 + trial % 2;
    std::vector<double> weight(static_cast<std::size_t>(n));
    for (double& w : weight) w = wdist(rng);
    CharacteristicGame game(n);
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
      double sum = 0.0;
      for (int i = 0; i < n; ++i)
        if ((mask >> i) & 1u) sum += weight[static_cast<std::size_t>(i)];
      game.values[mask] = sum * sum;
    }
    if (core_contains(game, nucleolus(game).allocation)) ++in_core;
  }
  out.pass = in_core == trials;
  out.detail = std::to_string(in_core) + "/" + std::to_string(trials) + " in core";
  return out;
}

// Criterion 5: operator contraction bound and fixed-point convergence.
Outcome criterion5() {
  Outcome out;
  std::mt19937_64 rng(20240505);
  const double lambda = 0.05;
  double worst_margin = -1e300;
  int ratio_violations = 0;
  int non_converged = 0;
  int worst_iterations = 0;
  for (int trial = 0; trial < 50; ++trial) {
    EnvModel model = random_mdp(7000 + static_cast<std::uint64_t>(trial),
                                2 + trial % 5, 1 + trial % 3, 2 + trial % 2);
    model.gamma = 0.9;
    const UtilityTable util =
        UtilityTable::random(model, 9000 + static_cast<std::uint64_t>(trial));
    WeightModel weights = WeightModel::uniform(model);
    std::uniform_real_distribution<double> wdist(0.05, 1.0);
    for (auto& slice : weights.w)
      for (double& wi : slice) wi = wdist(rng);
    project_weights(weights, model.gamma, lambda);
    const double bound = (model.gamma + lambda) * weights.worst_sum_max();

    std::uniform_real_distribution<double> qdist(-2.0, 2.0);
    auto random_ens = [&] {
      QEnsemble ens = QEnsemble::zeros(model, weights, lambda);
      for (auto& per_agent : ens.q)
        for (auto& per_state : per_agent)
          for (double& v : per_state) v = qdist(rng);
      return ens;
    };
    for (int pair = 0; pair < 100; ++pair) {
      const QEnsemble a = random_ens();
      const QEnsemble b = random_ens();
      const double before = ensemble_distance(a, b);
      if (before < 1e-12) continue;
      const double after = ensemble_distance(apply_operator(a, util, model),
                                             apply_operator(b, util, model));
      const double ratio = after / before;
      worst_margin = std::max(worst_margin, ratio - bound);
      if (ratio > bound + 1e-9) ++ratio_violations;
    }
    const FixedPointResult fp = fixed_point(model, util, weights, lambda, 1e-6, 2000);
    if (!fp.converged) ++non_converged;
    worst_iterations = std::max(worst_iterations, fp.iterations);
  }
  std::ostringstream msg;
  msg << "ratio violations " << ratio_violations << "/5000, worst ratio-bound margin "
      << worst_margin << ", non-converged " << non_converged << "/50, max sweeps "
      << worst_iterations;
  out.pass = ratio_violations == 0 && non_converged == 0;
  out.detail = msg.str();
  return out;
}

// Criterion 6: greedy actions of converged ensembles land on the best
// coalition structure (exhaustive partition enumeration).
Outcome criterion6() {
  Outcome out;
  std::mt19937_64 rng(20240606);
  std::uniform_real_distribution<double> vdist(0.0, 2.0);
  int states_checked = 0;
  int states_passed = 0;
  int suite = 0;
  for (int n = 2; n <= 4; ++n) {
    for (int variant = 0; variant < 6; ++variant) {
      const int phases = 1 + variant % 2;
      std::vector<StageGameSpec> specs;
      for (int ph = 0; ph < phases; ++ph) {
        StageGameSpec spec;
        spec.episode_length = 5;
        for (int g = 0; g < 2; ++g) {
          CharacteristicGame game(n);
          for (std::uint32_t mask = 1; mask < (1u << n); ++mask)
            game.values[mask] = vdist(rng);
          spec.subtask_games.push_back(std::move(game));
        }
        specs.push_back(std::move(spec));
      }
      const EnvModel model = stage_game_model(specs, 0.9);
      const FixedPointResult fp = fixed_point(model, UtilityTable::zeros(model),
                                              WeightModel::uniform(model), 0.0, 1e-9, 5000);
      if (!fp.converged) continue;
      ++suite;
      const auto q_star = centralized_optimal_q(model);
      for (int s = 0; s < model.num_states; ++s) {
        ++states_checked;
        if (consistency_check(fp.ensemble, model, q_star, s)) ++states_passed;
      }
    }
  }
  std::ostringstream msg;
  msg << states_passed << "/" << states_checked << " states consistent across " << suite
      << " converged models";
  out.pass = states_checked > 0 && states_passed == states_checked;
  out.detail = msg.str();
  return out;
}

// Criterion 7: analytic q-update gradients match central finite differences.
Outcome criterion7() {
  Outcome out;
  std::mt19937_64 rng(20240707);
  int checked = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    const int actions = 2 + static_cast<int>(rng() % 2);
    Transition t;
    t.state = mix64(rng());
    t.next_state = mix64(rng());
    std::uniform_int_distribution<int> act(0, actions - 1);
    std::uniform_real_distribution<double> rew(-1.0, 2.0);
    for (int i = 0; i < n; ++i) {
      t.obs.push_back(mix64(rng()));
      t.next_obs.push_back(mix64(rng()));
      t.action.push_back(act(rng));
    }
    t.reward = rew(rng);
    t.done = rng() % 4 == 0;
    t.cs = CoalitionStructure::grand(n);
    t.next_cs = CoalitionStructure::singletons(n);

    LearnerState state;
    state.q.resize(static_cast<std::size_t>(n));
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    for (int i = 0; i < n; ++i) {
      state.q[static_cast<std::size_t>(i)].num_actions = actions;
      for (int a = 0; a < actions; ++a) {
        state.q[static_cast<std::size_t>(i)].add(t.obs[static_cast<std::size_t>(i)], a,
                                                 val(rng));
        state.q[static_cast<std::size_t>(i)].add(t.next_obs[static_cast<std::size_t>(i)], a,
                                                 val(rng));
      }
    }
    state.util = UtilityEstimator::make(
        std::vector<int>(static_cast<std::size_t>(n), actions), 0.1);
    state.weights.num_agents = n;
    std::vector<double> w(static_cast<std::size_t>(n));
    std::uniform_real_distribution<double> wdist(0.05, 0.5);
    for (double& wi : w) wi = wdist(rng);
    state.weights.w[t.state] = weight_bound_project(std::move(w), 0.9, 0.2);
    state.lagrange = {0.2, 1e-3, LambdaSign::literal};
    state.copy_targets();

    const TrainMode mode = trial % 3 == 0 ? TrainMode::vdn : TrainMode::nucleolus;
    const double xi_value = compute_xi(state, t);
    const QGradient g = q_gradient(state, t, xi_value, 0.9, mode);
    auto objective = [&](LearnerState& s) {
      const QGradient probe = q_gradient(s, t, xi_value, 0.9, mode);
      return 0.5 * probe.residual * probe.residual;
    };
    const double h = 1e-6;
    for (int i = 0; i < n; ++i) {
      LearnerState plus = state, minus = state;
      plus.q[static_cast<std::size_t>(i)].add(t.obs[static_cast<std::size_t>(i)],
                                              t.action[static_cast<std::size_t>(i)], h);
      minus.q[static_cast<std::size_t>(i)].add(t.obs[static_cast<std::size_t>(i)],
                                               t.action[static_cast<std::size_t>(i)], -h);
      const double fd = (objective(plus) - objective(minus)) / (2 * h);
      const double rel =
          std::abs(fd - g.dq[static_cast<std::size_t>(i)]) /
          std::max({1.0, std::abs(fd), std::abs(g.dq[static_cast<std::size_t>(i)])});
      worst = std::max(worst, rel);
      if (mode == TrainMode::nucleolus) {
        LearnerState wplus = state, wminus = state;
        std::vector<double> wp = state.weights.get(t.state), wm = wp;
        wp[static_cast<std::size_t>(i)] += h;
        wm[static_cast<std::size_t>(i)] -= h;
        wplus.weights.w[t.state] = wp;
        wminus.weights.w[t.state] = wm;
        const double fdw = (objective(wplus) - objective(wminus)) / (2 * h);
        const double relw =
            std::abs(fdw - g.dw[static_cast<std::size_t>(i)]) /
            std::max({1.0, std::abs(fdw), std::abs(g.dw[static_cast<std::size_t>(i)])});
        worst = std::max(worst, relw);
      }
      ++checked;
    }
  }
  std::ostringstream msg;
  msg << "worst relative gradient error " << worst << " over " << checked << " coordinates";
  out.pass = worst <= 1e-5;
  out.detail = msg.str();
  return out;
}

// Shared experiment configs for criteria 8-10.

nlohmann::json pp_env_json() {
  return {{"type", "predator_prey"}, {"grid", 7},         {"predators", 4},
          {"prey", 2},               {"step_limit", 200}, {"sensing_range", 7},
          {"coarse_digests", true}};
}

nlohmann::json pp_train_json() {
  return {{"eta1", 0.5},
          {"eta2", 0.2},
          {"eta3", 1e-4},
          {"gamma", 0.95},
          {"epsilon_start", 1.0},
          {"epsilon_end", 0.02},
          {"epsilon_decay_steps", 60000},
          {"batch_episodes", 3},
          {"target_period", 200},
          {"total_steps", 200000},
          {"eval_period", 10000},
          {"eval_episodes", 32},
          {"mode", "nucleolus"},
          {"lambda_init", 0.1},
          {"lambda_sign", "literal"},
          {"history_window", 1},
          {"utility_init", 1.0},
          {"replay_capacity", 500}};
}

nlohmann::json stage_env_json() {
  auto size_values = [](int n) {
    nlohmann::json vals = nlohmann::json::array();
    const double by_size[5] = {0.0, 0.5, 5.0, 5.5, 8.0};
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask)
      vals.push_back({mask, by_size[std::popcount(mask)]});
    return nlohmann::json{{"n", n}, {"values", vals}};
  };
  return {{"type", "stage_game"},
          {"episode_length", 10},
          {"subtasks", nlohmann::json::array({size_values(4), size_values(4)})}};
}

nlohmann::json stage_train_json() {
  return {{"eta1", 0.5},
          {"eta2", 0.1},
          {"eta3", 1e-5},
          {"gamma", 0.9},
          {"epsilon_start", 1.0},
          {"epsilon_end", 0.05},
          {"batch_episodes", 2},
          {"target_period", 100},
          {"total_steps", 50000},
          {"eval_period", 2500},
          {"eval_episodes", 8},
          {"mode", "nucleolus"},
          {"lambda_init", 0.1},
          {"lambda_sign", "literal"},
          {"history_window", 1},
          {"utility_init", 1.0},
          {"replay_capacity", 500}};
}

std::vector<MetricRecord> load_metrics(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing metrics file: " + path.string());
  std::vector<MetricRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    const nlohmann::json j = nlohmann::json::parse(line);
    MetricRecord r;
    r.step = j.at("step").get<long>();
    r.eval.mean_return = j.at("mean_return").get<double>();
    r.eval.mean_length = j.at("mean_length").get<double>();
    r.lambda = j.at("lambda").get<double>();
    r.mean_xi = j.at("mean_xi").is_number() ? j.at("mean_xi").get<double>() : 0.0;
    out.push_back(r);
  }
  return out;
}

const std::vector<std::uint64_t> kSeeds{1, 2, 3, 4, 5};

// Criterion 8: scaled Predator-Prey learning beats half the random baseline
// and trends upward.
Outcome criterion8(const fs::path& art) {
  Outcome out;
  ExperimentSpec spec;
  spec.env_config = pp_env_json().dump();
  spec.train = TrainConfig::from_json_text(pp_train_json().dump());
  spec.seeds = kSeeds;
  spec.modes = {TrainMode::nucleolus};
  spec.out_dir = (art / "pp").string();
  const MetricsSummary summary = run_experiment(spec);
  if (!summary.all_runs_ok) {
    out.detail = "a training run failed";
    return out;
  }

  // Random-policy baseline on the same environment.
  std::unique_ptr<Env> env = make_env(spec.env_config);
  std::mt19937_64 rng(991);
  std::uniform_int_distribution<int> act(0, 4);
  double baseline_len = 0.0;
  const int baseline_eps = 200;
  for (int e = 0; e < baseline_eps; ++e) {
    env->reset(derive_seed(991, 7, static_cast<std::uint64_t>(e)));
    int len = 0;
    while (!env->done()) {
      std::vector<int> joint(4);
      for (int& a : joint) a = act(rng);
      env->step(joint);
      ++len;
    }
    baseline_len += len;
  }
  baseline_len /= baseline_eps;

  double final_len_mean = 0.0;
  std::vector<double> steps, mean_returns;
  std::vector<std::vector<MetricRecord>> runs;
  for (std::uint64_t seed : kSeeds)
    runs.push_back(load_metrics(art / "pp" / ("nucleolus_seed" + std::to_string(seed)) /
                                "metrics.jsonl"));
  for (const auto& run : runs) final_len_mean += run.back().eval.mean_length;
  final_len_mean /= static_cast<double>(runs.size());
  for (std::size_t p = 0; p < runs.front().size(); ++p) {
    steps.push_back(static_cast<double>(runs.front()[p].step));
    double mean = 0.0;
    for (const auto& run : runs) mean += run[p].eval.mean_return;
    mean_returns.push_back(mean / static_cast<double>(runs.size()));
  }
  const double rho = spearman(steps, mean_returns);

  std::ostringstream msg;
  msg << "final greedy length " << final_len_mean << " vs bar " << 0.5 * baseline_len
      << " (random " << baseline_len << "); spearman(return, step) " << rho
      << "; paper context: ~25 turns at 8v4 scale";
  out.pass = final_len_mean <= 0.5 * baseline_len && rho > 0.5;
  out.detail = msg.str();
  return out;
}

// Criterion 9: two-block stage game; nucleolus mode reaches 95% of the
// exhaustive optimum; vdn recorded alongside.
Outcome criterion9(const fs::path& art) {
  Outcome out;
  ExperimentSpec spec;
  spec.env_config = stage_env_json().dump();
  spec.train = TrainConfig::from_json_text(stage_train_json().dump());
  spec.seeds = kSeeds;
  spec.modes = {TrainMode::nucleolus, TrainMode::vdn};
  spec.out_dir = (art / "stage").string();
  const MetricsSummary summary = run_experiment(spec);
  if (!summary.all_runs_ok) {
    out.detail = "a training run failed";
    return out;
  }

  // Exhaustive optimum of one stage times the episode length.
  StageGameSpec stage;
  stage.episode_length = 10;
  for (int g = 0; g < 2; ++g) {
    CharacteristicGame game(4);
    const double by_size[5] = {0.0, 0.5, 5.0, 5.5, 8.0};
    for (std::uint32_t mask = 1; mask < 16; ++mask)
      game.values[mask] = by_size[std::popcount(mask)];
    stage.subtask_games.push_back(std::move(game));
  }
  const double optimum = stage_game_optimum(stage) * stage.episode_length;

  int nucleolus_hits = 0, vdn_hits = 0;
  for (std::uint64_t seed : kSeeds) {
    for (const char* mode : {"nucleolus", "vdn"}) {
      const auto run =
          load_metrics(art / "stage" / (std::string(mode) + "_seed" + std::to_string(seed)) /
                       "metrics.jsonl");
      double best = 0.0;
      for (const MetricRecord& r : run) best = std::max(best, r.eval.mean_return);
      if (best >= 0.95 * optimum)
        (std::string(mode) == "nucleolus" ? nucleolus_hits : vdn_hits)++;
    }
  }
  std::ostringstream msg;
  msg << "optimum " << optimum << " (two-block partition); nucleolus >=95%: "
      << nucleolus_hits << "/5 seeds; vdn recorded: " << vdn_hits << "/5";
  out.pass = nucleolus_hits >= 4;
  out.detail = msg.str();
  return out;
}

// Criterion 10: multiplier hygiene, read back from the metrics files written
// by criteria 8 and 9.
Outcome criterion10(const fs::path& art) {
  Outcome out;
  bool lambda_ok = true;
  long records = 0;
  for (std::uint64_t seed : kSeeds) {
    for (const fs::path run : {art / "pp" / ("nucleolus_seed" + std::to_string(seed)),
                               art / "stage" / ("nucleolus_seed" + std::to_string(seed)),
                               art / "stage" / ("vdn_seed" + std::to_string(seed))}) {
      for (const MetricRecord& r : load_metrics(run / "metrics.jsonl")) {
        lambda_ok = lambda_ok && r.lambda >= 0.0;
        ++records;
      }
    }
  }

  auto window_means = [](const std::vector<MetricRecord>& run) {
    const std::size_t k = std::max<std::size_t>(1, run.size() / 10);
    double first = 0.0, last = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      first += run[i].mean_xi;
      last += run[run.size() - 1 - i].mean_xi;
    }
    return std::pair<double, double>(first / static_cast<double>(k),
                                     last / static_cast<double>(k));
  };
  int stage_trend = 0, pp_trend = 0;
  for (std::uint64_t seed : kSeeds) {
    const auto stage_run = load_metrics(art / "stage" /
                                        ("nucleolus_seed" + std::to_string(seed)) /
                                        "metrics.jsonl");
    const auto [sf, sl] = window_means(stage_run);
    if (sl <= sf) ++stage_trend;
    const auto pp_run =
        load_metrics(art / "pp" / ("nucleolus_seed" + std::to_string(seed)) / "metrics.jsonl");
    const auto [pf, pl] = window_means(pp_run);
    if (pl <= pf) ++pp_trend;
  }
  std::ostringstream msg;
  msg << "lambda >= 0 in " << records << " records; stage xi trend down " << stage_trend
      << "/5 seeds (pp context: " << pp_trend << "/5)";
  out.pass = lambda_ok && stage_trend >= 4;
  out.detail = msg.str();
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> filter;
  for (int i = 1; i < argc; ++i) filter.insert(std::atoi(argv[i]));
  auto enabled = [&](int id) { return filter.empty() || filter.count(id) > 0; };

  const fs::path art = fs::current_path() / "acceptance_out";
  fs::create_directories(art);

  const std::vector<std::pair<int, std::string>> names = {
      {1, "nucleolus exactness on fixed games"},
      {2, "lexicographic minimality vs 1000 perturbations x 50 games"},
      {3, "grid-oracle agreement at resolution 1/200"},
      {4, "core membership on supermodular games"},
      {5, "operator contraction bound and fixed-point convergence"},
      {6, "greedy coalition-structure consistency on the stage suite"},
      {7, "q-update gradients vs central finite differences"},
      {8, "predator-prey learning vs random baseline"},
      {9, "stage-game optimum: nucleolus mode vs recorded vdn"},
      {10, "multiplier hygiene from metrics.jsonl"},
  };

  int failures = 0;
  std::cout.precision(6);
  for (const auto& [id, name] : names) {
    const bool need = enabled(id) || (id == 8 && enabled(10)) || (id == 9 && enabled(10));
    if (!need) continue;
    const double t0 = now_seconds();
    Outcome result;
    try {
      switch (id) {
        case 1: result = criterion1(); break;
        case 2: result = criterion2(); break;
        case 3: result = criterion3(); break;
        case 4: result = criterion4(); break;
        case 5: result = criterion5(); break;
        case 6: result = criterion6(); break;
        case 7: result = criterion7(); break;
        case 8: result = criterion8(art); break;
        case 9: result = criterion9(art); break;
        case 10: result = criterion10(art); break;
      }
    } catch (const std::exception& e) {
      result.pass = false;
      result.detail = std::string("exception: ") + e.what();
    }
    const double dt = now_seconds() - t0;
    std::cout << (result.pass ? "[PASS]" : "[FAIL]") << " criterion " << id << ": " << name
              << " | " << result.detail << " | " << dt << " s" << std::endl;
    if (!result.pass) ++failures;
  }
  std::cout << (failures == 0
                    ? "ACCEPTANCE: all criteria passed"
                    : "ACCEPTANCE: " + std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures;
}
