#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flowes/driver.hpp"

namespace flowes {

struct ExperimentConfig {
  std::string objective = "sphere";
  int dimension = 2;
  std::string algorithm = "xnes";  // xnes | pges | gnn-xnes
  DriverConfig driver;
  double pges_learning_rate = 0.01;
  int flow_layers = 3;
  int flow_hidden = 16;
  std::vector<std::uint64_t> seeds;
  std::string out_dir;  // empty keeps results in memory only
};

struct SummaryRow {
  std::string objective;
  int dimension = 0;
  std::string algorithm;
  double mean_best_f = 0.0;
  double std_error = 0.0;
  int seeds_count = 0;
  std::uint64_t evaluations = 0;
};

struct SeedRun {
  std::uint64_t seed = 0;
  RunRecord record;
};

struct ExperimentResult {
  std::vector<SeedRun> runs;  // in seed-list order
  SummaryRow summary;
};

/// Per-seed ingredients, shared by every algorithm so a seed names one
/// problem instance: the translated objective, and the initial latent
/// distribution with mean uniform in [-2,2]^d and identity covariance.
ObjectiveSpec experiment_objective(const std::string& name, int dimension, std::uint64_t seed);
LatentParams initial_latent(int dimension, std::uint64_t seed);

/// Near-identity coupling stack for the flow algorithms. The final layer of
/// each shift net starts at zero, so the initial transport is exactly the
/// identity and the first generation matches the flowless baselines.
FlowParams initial_flow(int dimension, int layers, int hidden, std::uint64_t seed);

/// Runs every seed (in parallel), writes one record file per seed plus an
/// aggregate table when out_dir is set, and returns everything.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// A record file read back: meta line plus trajectory rows.
struct StoredRun {
  std::string objective;
  int dimension = 0;
  std::string algorithm;
  std::uint64_t seed = 0;
  std::vector<GenerationRecord> rows;
};

std::string run_file_name(const ExperimentConfig& cfg, std::uint64_t seed);
void write_run_file(const std::string& path, const StoredRun& run);
StoredRun read_run_file(const std::string& path);

/// All record files (*.jsonl) under dir, sorted by file name.
std::vector<StoredRun> read_run_dir(const std::string& dir);

/// Group statistics per (objective, dimension, algorithm): mean and standard
/// error of the final best value, seed count, evaluations used. Tab-separated
/// with a header, deterministically ordered.
std::vector<SummaryRow> summarize_runs(const std::vector<StoredRun>& runs);
std::string summary_table(const std::vector<SummaryRow>& rows);

/// Best-so-far quartile curves per group on the union evaluation grid.
/// Columns: objective, dim, algorithm, evaluations, q25, median, q75.
std::string curves_table(const std::vector<StoredRun>& runs);

/// Median best-so-far value for one group at a given evaluation count
/// (nearest grid point at or below). Convenience for comparisons.
double median_best_at(const std::vector<StoredRun>& runs, const std::string& algorithm,
                      std::uint64_t evaluations);

}  // namespace flowes
