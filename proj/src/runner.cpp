#include "nucred/runner.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "nucred/build_info.hpp"
#include "nucred/nucleolus.hpp"

namespace nucred {

const char* build_id() { return kBuildId; }

void ExperimentSpec::validate() const {
  train.validate();
  if (seeds.empty()) throw std::invalid_argument("experiment needs at least one seed");
  if (modes.empty()) throw std::invalid_argument("experiment needs at least one mode");
  if (out_dir.empty()) throw std::invalid_argument("experiment needs an output directory");
  make_env(env_config);  // env config must be constructible
}

ExperimentSpec ExperimentSpec::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("experiment spec is not valid JSON: ") + e.what());
  }
  ExperimentSpec spec;
  spec.env_config = j.at("env").dump();
  spec.train = TrainConfig::from_json_text(j.at("train").dump());
  spec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  spec.out_dir = j.at("out_dir").get<std::string>();
  if (j.contains("modes")) {
    for (const auto& m : j.at("modes")) {
      const std::string name = m.get<std::string>();
      if (name == "nucleolus")
        spec.modes.push_back(TrainMode::nucleolus);
      else if (name == "vdn")
        spec.modes.push_back(TrainMode::vdn);
      else
        throw std::invalid_argument("unknown mode in experiment spec: " + name);
    }
  } else {
    spec.modes.push_back(spec.train.mode);
  }
  spec.validate();
  return spec;
}

ExperimentSpec ExperimentSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open experiment spec: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

void write_metrics_jsonl(const std::string& path, const std::vector<MetricRecord>& metrics,
                         const TrainConfig& config, const std::string& env_config,
                         std::uint64_t seed, const std::string& fault) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write metrics file: " + path);
  const nlohmann::json config_json = nlohmann::json::parse(config.to_json_text());
  const nlohmann::json env_json = nlohmann::json::parse(env_config);
  for (const MetricRecord& r : metrics) {
    nlohmann::json line;
    line["step"] = r.step;
    line["mean_return"] = r.eval.mean_return;
    line["se_return"] = r.eval.se_return;
    line["mean_length"] = r.eval.mean_length;
    line["se_length"] = r.eval.se_length;
    line["lambda"] = r.lambda;
    line["mean_xi"] = r.mean_xi;
    line["seed"] = seed;
    line["build"] = build_id();
    line["config"] = config_json;
    line["env"] = env_json;
    if (!fault.empty()) line["fault"] = fault;
    out << line.dump() << "\n";
  }
}

namespace {

std::string mode_name(TrainMode mode) {
  return mode == TrainMode::nucleolus ? "nucleolus" : "vdn";
}

struct Quartiles {
  double mean, median, q25, q75;
};

Quartiles quartiles(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(xs.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, xs.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return xs[lo] * (1.0 - frac) + xs[hi] * frac;
  };
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  return {mean, quantile(0.5), quantile(0.25), quantile(0.75)};
}

}  // namespace

MetricsSummary run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  namespace fs = std::filesystem;
  fs::create_directories(spec.out_dir);

  struct Job {
    TrainMode mode;
    std::uint64_t seed;
    TrainResult result;
  };
  std::vector<Job> jobs;
  for (TrainMode mode : spec.modes)
    for (std::uint64_t seed : spec.seeds) jobs.push_back({mode, seed, {}});

  // Independent (mode, seed) runs; results merged back in declaration order.
  std::vector<std::future<TrainResult>> futures;
  futures.reserve(jobs.size());
  for (const Job& job : jobs) {
    TrainConfig config = spec.train;
    config.mode = job.mode;
    futures.push_back(std::async(std::launch::async, [config, env_config = spec.env_config,
                                                      seed = job.seed] {
      std::unique_ptr<Env> env = make_env(env_config);
      return train(*env, config, seed);
    }));
  }
  MetricsSummary summary;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    jobs[k].result = futures[k].get();
    if (!jobs[k].result.fault.empty()) {
      summary.all_runs_ok = false;
      std::cerr << "run failed (mode=" << mode_name(jobs[k].mode) << " seed=" << jobs[k].seed
                << "): " << jobs[k].result.fault << "\n";
    }
    TrainConfig config = spec.train;
    config.mode = jobs[k].mode;
    const fs::path run_dir = fs::path(spec.out_dir) /
                             (mode_name(jobs[k].mode) + "_seed" + std::to_string(jobs[k].seed));
    fs::create_directories(run_dir);
    write_metrics_jsonl((run_dir / "metrics.jsonl").string(), jobs[k].result.metrics, config,
                        spec.env_config, jobs[k].seed, jobs[k].result.fault);
  }

  // Aggregate across seeds on the shared eval-step grid.
  for (TrainMode mode : spec.modes) {
    std::vector<const std::vector<MetricRecord>*> runs;
    for (const Job& job : jobs)
      if (job.mode == mode && job.result.fault.empty()) runs.push_back(&job.result.metrics);
    if (runs.empty()) continue;
    const std::size_t points = runs.front()->size();
    for (const auto* run : runs)
      if (run->size() != points)
        throw std::runtime_error("eval grids differ across seeds; cannot aggregate");
    for (std::size_t p = 0; p < points; ++p) {
      const long step = (*runs.front())[p].step;
      for (const auto* run : runs)
        if ((*run)[p].step != step)
          throw std::runtime_error("eval grids differ across seeds; cannot aggregate");
      auto collect = [&](auto getter) {
        std::vector<double> out;
        out.reserve(runs.size());
        for (const auto* run : runs) out.push_back(getter((*run)[p]));
        return out;
      };
      const std::vector<std::pair<const char*, std::vector<double>>> cols = {
          {"return", collect([](const MetricRecord& r) { return r.eval.mean_return; })},
          {"length", collect([](const MetricRecord& r) { return r.eval.mean_length; })},
          {"lambda", collect([](const MetricRecord& r) { return r.lambda; })},
          {"mean_xi", collect([](const MetricRecord& r) { return r.mean_xi; })}};
      for (const auto& [name, values] : cols) {
        const Quartiles q = quartiles(values);
        summary.rows.push_back({step, mode_name(mode), name, q.mean, q.median, q.q25, q.q75,
                                static_cast<int>(values.size())});
      }
    }
  }

  std::ofstream csv(fs::path(spec.out_dir) / "summary.csv");
  if (!csv) throw std::runtime_error("cannot write summary.csv");
  csv << "step,mode,metric,mean,median,q25,q75,n_seeds\n";
  csv.precision(12);
  for (const SummaryRow& row : summary.rows)
    csv << row.step << "," << row.mode << "," << row.metric << "," << row.mean << ","
        << row.median << "," << row.q25 << "," << row.q75 << "," << row.n_seeds << "\n";
  return summary;
}

std::vector<AllocationRow> compare_allocations(const std::string& game_path,
                                               const std::string& csv_path) {
  const CharacteristicGame game = load_game(game_path);
  std::vector<AllocationRow> rows;
  const PayoffVector nuc = nucleolus(game).allocation;
  const PayoffVector shap = shapley(game);
  const PayoffVector equal(static_cast<std::size_t>(game.n), game.grand_value() / game.n);
  for (const auto& [name, alloc] :
       std::vector<std::pair<std::string, PayoffVector>>{
           {"nucleolus", nuc}, {"shapley", shap}, {"equal_split", equal}}) {
    AllocationRow row;
    row.method = name;
    row.allocation = alloc;
    const ExcessSequence seq = excess_sequence(game, alloc);
    const std::size_t head = std::min<std::size_t>(seq.values.size(), 8);
    row.excess_head.assign(seq.values.begin(), seq.values.begin() + head);
    row.in_core = core_contains(game, alloc);
    rows.push_back(std::move(row));
  }

  std::ostringstream table;
  table.precision(6);
  for (const AllocationRow& row : rows) {
    table << row.method << ": allocation = [";
    for (std::size_t i = 0; i < row.allocation.size(); ++i)
      table << (i ? ", " : "") << row.allocation[i];
    table << "], worst excesses = [";
    for (std::size_t i = 0; i < row.excess_head.size(); ++i)
      table << (i ? ", " : "") << row.excess_head[i];
    table << "], in_core = " << (row.in_core ? "yes" : "no") << "\n";
  }
  std::cout << table.str();

  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot write csv: " + csv_path);
    csv << "method,player,payoff,in_core\n";
    csv.precision(12);
    for (const AllocationRow& row : rows)
      for (std::size_t i = 0; i < row.allocation.size(); ++i)
        csv << row.method << "," << i << "," << row.allocation[i] << ","
            << (row.in_core ? 1 : 0) << "\n";
  }
  return rows;
}

}  // namespace nucred
