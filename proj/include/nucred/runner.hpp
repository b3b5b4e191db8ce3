#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nucred/learner.hpp"

namespace nucred {

/// Build identifier baked in at configure time (short git hash when available).
const char* build_id();

struct ExperimentSpec {
  std::string env_config;  // JSON text for make_env
  TrainConfig train;
  std::vector<std::uint64_t> seeds;
  std::vector<TrainMode> modes;
  std::string out_dir;

  void validate() const;
  static ExperimentSpec from_json_text(const std::string& text);
  static ExperimentSpec load(const std::string& path);
};

struct SummaryRow {
  long step = 0;
  std::string mode;
  std::string metric;
  double mean = 0.0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  int n_seeds = 0;
};

struct MetricsSummary {
  std::vector<SummaryRow> rows;
  bool all_runs_ok = true;
};

/// Trains every (mode, seed) pair (in parallel), writes one metrics.jsonl per
/// run plus a combined summary.csv, and returns the cross-seed aggregation.
/// Failed runs are flagged in the return value and on stderr.
MetricsSummary run_experiment(const ExperimentSpec& spec);

/// Writes one JSONL record per metric entry; every record carries the build
/// id and the full resolved config for auditability.
void write_metrics_jsonl(const std::string& path, const std::vector<MetricRecord>& metrics,
                         const TrainConfig& config, const std::string& env_config,
                         std::uint64_t seed, const std::string& fault);

struct AllocationRow {
  std::string method;
  PayoffVector allocation;
  std::vector<double> excess_head;  // leading entries of the excess sequence
  bool in_core = false;
};

/// Nucleolus / Shapley / equal-split comparison for a game file; printed to
/// stdout and optionally written as CSV.
std::vector<AllocationRow> compare_allocations(const std::string& game_path,
                                               const std::string& csv_path = "");

}  // namespace nucred
