// Command-line front end. Exit codes: 0 success, 1 run failure, 2 config error.
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>

#include "nucred/hash.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include "nucred/environments.hpp"
#include "nucred/learner.hpp"
#include "nucred/markov_nucleolus.hpp"
#include "nucred/nucleolus.hpp"
#include "nucred/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunFailure = 1;
constexpr int kExitConfigError = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int cmd_solve_game(const std::string& path, bool imputation) {
  const nucred::CharacteristicGame game = nucred::load_game(path);
  const nucred::AllocationDomain domain = imputation
                                              ? nucred::AllocationDomain::imputation
                                              : nucred::AllocationDomain::pre_imputation;
  const nucred::NucleolusSolution sol = nucred::nucleolus(game, domain);
  std::cout.precision(10);
  std::cout << "allocation:";
  for (double x : sol.allocation) std::cout << " " << x;
  std::cout << "\n";
  const nucred::ExcessSequence seq = nucred::excess_sequence(game, sol.allocation);
  std::cout << "excess sequence:";
  for (double e : seq.values) std::cout << " " << e;
  std::cout << "\nin core: " << (nucred::core_contains(game, sol.allocation) ? "yes" : "no")
            << "\n";
  for (std::size_t k = 0; k < sol.levels.size(); ++k) {
    std::cout << "level " << (k + 1) << ": max excess " << sol.levels[k].max_excess
              << ", tight coalitions:";
    for (const nucred::Coalition& c : sol.levels[k].fixed) {
      std::cout << " {";
      const std::vector<int> members = c.member_indices();
      for (std::size_t i = 0; i < members.size(); ++i)
        std::cout << (i ? "," : "") << members[i];
      std::cout << "}";
    }
    std::cout << "\n";
  }
  std::cout << "lp iterations: " << sol.lp_iterations << "\n";
  return kExitOk;
}

int cmd_verify_operator(const std::string& model_path, double gamma_override,
                        double lambda, int pairs, std::uint64_t seed) {
  nucred::EnvModel model = nucred::EnvModel::load(model_path);
  if (gamma_override > 0.0) model.gamma = gamma_override;
  const nucred::UtilityTable util = nucred::UtilityTable::random(model, seed);

  std::mt19937_64 rng(nucred::derive_seed(seed, 0x76657269ULL));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  nucred::WeightModel weights = nucred::WeightModel::uniform(model);
  for (auto& slice : weights.w)
    for (double& wi : slice) wi = unit(rng);
  nucred::project_weights(weights, model.gamma, lambda);
  const double bound = (model.gamma + lambda) * weights.worst_sum_max();

  // Pairwise contraction ratios of the operator.
  double worst_ratio = 0.0;
  for (int k = 0; k < pairs; ++k) {
    nucred::QEnsemble a = nucred::QEnsemble::zeros(model, weights, lambda);
    nucred::QEnsemble b = a;
    for (int i = 0; i < model.num_agents; ++i)
      for (int s = 0; s < model.num_states; ++s)
        for (int ja = 0; ja < model.joint_action_count(); ++ja) {
          a.q[i][s][ja] = 2.0 * unit(rng) - 1.0;
          b.q[i][s][ja] = 2.0 * unit(rng) - 1.0;
        }
    const double before = nucred::ensemble_distance(a, b);
    if (before < 1e-12) continue;
    const double after = nucred::ensemble_distance(nucred::apply_operator(a, util, model),
                                                   nucred::apply_operator(b, util, model));
    worst_ratio = std::max(worst_ratio, after / before);
  }

  const nucred::FixedPointResult fp = nucred::fixed_point(model, util, weights, lambda);
  std::cout.precision(10);
  std::cout << "contraction bound (gamma+lambda)*sum max w: " << bound << "\n";
  std::cout << "worst measured pair ratio over " << pairs << " pairs: " << worst_ratio << "\n";
  std::cout << "fixed point: " << (fp.converged ? "converged" : "did not converge") << " in "
            << fp.iterations << " sweeps\n";
  if (!fp.ratios.empty()) {
    double worst_sweep = 0.0;
    for (double r : fp.ratios) worst_sweep = std::max(worst_sweep, r);
    std::cout << "worst sweep-to-sweep ratio: " << worst_sweep << "\n";
  }
  bool consistent = true;
  if (model.num_agents <= 5) {
    const auto q_star = nucred::centralized_optimal_q(model);
    for (int s = 0; s < model.num_states; ++s)
      consistent = consistent && nucred::consistency_check(fp.ensemble, model, q_star, s);
    std::cout << "greedy coalition structures optimal at every state: "
              << (consistent ? "yes" : "no") << "\n";
  }
  const bool ok = fp.converged && worst_ratio <= bound + 1e-9;
  return ok ? kExitOk : kExitRunFailure;
}

int cmd_train(const std::string& config_path, const std::string& env_path, std::uint64_t seed,
              const std::string& out_dir, const std::string& mode_override) {
  nucred::TrainConfig config = nucred::TrainConfig::from_json_text(read_file(config_path));
  if (!mode_override.empty()) {
    if (mode_override == "nucleolus")
      config.mode = nucred::TrainMode::nucleolus;
    else if (mode_override == "vdn")
      config.mode = nucred::TrainMode::vdn;
    else
      throw std::invalid_argument("mode must be 'nucleolus' or 'vdn'");
  }
  const std::string env_config = read_file(env_path);
  std::unique_ptr<nucred::Env> env = nucred::make_env(env_config);

  const nucred::TrainResult result = nucred::train(*env, config, seed);

  std::filesystem::create_directories(out_dir);
  nucred::write_metrics_jsonl(out_dir + "/metrics.jsonl", result.metrics, config, env_config,
                              seed, result.fault);
  // Checkpoint of the learned tables (written even after a fault).
  nlohmann::json tables = nlohmann::json::array();
  for (const nucred::AgentValueTable& t : result.state.q) {
    nlohmann::json agent = nlohmann::json::object();
    for (const auto& [digest, row] : t.table) agent[std::to_string(digest)] = row;
    tables.push_back(std::move(agent));
  }
  std::ofstream ckpt(out_dir + "/final_tables.json");
  ckpt << tables.dump() << "\n";

  if (const auto* pp = dynamic_cast<const nucred::PredatorPreyEnv*>(env.get());
      pp != nullptr && !pp->trace().empty()) {
    std::ofstream trace(out_dir + "/trace.log");
    for (const std::string& line : pp->trace()) trace << line << "\n";
  }

  if (!result.fault.empty()) {
    std::cerr << "training aborted: " << result.fault << " (checkpoint written)\n";
    return kExitRunFailure;
  }
  if (!result.metrics.empty()) {
    const nucred::MetricRecord& last = result.metrics.back();
    std::cout << "final eval: step " << last.step << " mean return " << last.eval.mean_return
              << " mean length " << last.eval.mean_length << " lambda " << last.lambda << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nucleolus-based credit assignment toolkit"};
  app.require_subcommand(1);

  auto* solve = app.add_subcommand("solve-game", "Solve a characteristic-function game file");
  std::string game_path;
  bool imputation = false;
  solve->add_option("file", game_path, "game JSON file")->required();
  solve->add_flag("--imputation", imputation,
                  "restrict to individually rational allocations");

  auto* compare = app.add_subcommand("compare-allocations",
                                     "Nucleolus vs Shapley vs equal split for a game file");
  std::string compare_path, compare_csv;
  compare->add_option("file", compare_path, "game JSON file")->required();
  compare->add_option("--csv", compare_csv, "also write a CSV table");

  auto* verify = app.add_subcommand("verify-operator",
                                    "Contraction, fixed-point and consistency checks on a model");
  std::string model_path;
  double gamma_override = 0.0, lambda = 0.05;
  int pairs = 100;
  std::uint64_t verify_seed = 1;
  verify->add_option("file", model_path, "model JSON file")->required();
  verify->add_option("--gamma", gamma_override, "override the model's discount factor");
  verify->add_option("--lambda", lambda, "Lagrange multiplier")->check(CLI::NonNegativeNumber);
  verify->add_option("--pairs", pairs, "random ensemble pairs for the ratio test");
  verify->add_option("--seed", verify_seed, "seed for utilities, weights and pairs");

  auto* train_cmd = app.add_subcommand("train", "Train on an environment");
  std::string train_config, train_env, train_out = "out", train_mode;
  std::uint64_t train_seed = 1;
  train_cmd->add_option("--config", train_config, "train config JSON file")->required();
  train_cmd->add_option("--env", train_env, "environment config JSON file")->required();
  train_cmd->add_option("--seed", train_seed, "training seed");
  train_cmd->add_option("--out", train_out, "output directory");
  train_cmd->add_option("--mode", train_mode, "override mode: nucleolus or vdn");

  auto* experiment = app.add_subcommand("run-experiment",
                                        "Seed-fanned multi-mode experiment with aggregation");
  std::string spec_path;
  experiment->add_option("spec", spec_path, "experiment spec JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (*solve) return cmd_solve_game(game_path, imputation);
    if (*compare) {
      nucred::compare_allocations(compare_path, compare_csv);
      return kExitOk;
    }
    if (*verify)
      return cmd_verify_operator(model_path, gamma_override, lambda, pairs, verify_seed);
    if (*train_cmd) return cmd_train(train_config, train_env, train_seed, train_out, train_mode);
    if (*experiment) {
      const nucred::MetricsSummary summary = nucred::run_experiment(
          nucred::ExperimentSpec::load(spec_path));
      return summary.all_runs_ok ? kExitOk : kExitRunFailure;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRunFailure;
  }
  return kExitConfigError;
}
