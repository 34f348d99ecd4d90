#include "flowes/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "flowes/rng.hpp"
#include "flowes/serialize.hpp"

namespace flowes {
namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Linear-interpolation quantile of an already sorted vector.
double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) {
    throw std::invalid_argument("quantile: empty sample");
  }
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// Best-so-far value of one run at an evaluation count (last row at or below).
double best_at(const std::vector<GenerationRecord>& rows, std::uint64_t evaluations) {
  double value = std::numeric_limits<double>::quiet_NaN();
  for (const auto& row : rows) {
    if (row.evaluations > evaluations) {
      break;
    }
    value = row.best_f;
  }
  return value;
}

using GroupKey = std::tuple<std::string, int, std::string>;

std::map<GroupKey, std::vector<const StoredRun*>> group_runs(const std::vector<StoredRun>& runs) {
  std::map<GroupKey, std::vector<const StoredRun*>> groups;
  for (const auto& run : runs) {
    groups[{run.objective, run.dimension, run.algorithm}].push_back(&run);
  }
  return groups;
}

SeedRun execute_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  const ObjectiveSpec objective = experiment_objective(cfg.objective, cfg.dimension, seed);
  LatentParams latent = initial_latent(cfg.dimension, seed);

  SeedRun out;
  out.seed = seed;
  if (cfg.algorithm == "xnes") {
    const XnesOptimizer opt = XnesOptimizer::with_defaults(cfg.dimension);
    out.record = run_latent_baseline(objective, std::move(latent), opt, cfg.driver, seed);
  } else if (cfg.algorithm == "pges") {
    const PgesOptimizer opt(cfg.pges_learning_rate);
    out.record = run_latent_baseline(objective, std::move(latent), opt, cfg.driver, seed);
  } else if (cfg.algorithm == "gnn-xnes") {
    const XnesOptimizer opt = XnesOptimizer::with_defaults(cfg.dimension);
    FlowParams flow = initial_flow(cfg.dimension, cfg.flow_layers, cfg.flow_hidden, seed);
    out.record = run(objective, std::move(latent), std::move(flow), opt, cfg.driver, seed);
  } else {
    throw std::invalid_argument("run_experiment: unknown algorithm '" + cfg.algorithm + "'");
  }
  return out;
}

}  // namespace

ObjectiveSpec experiment_objective(const std::string& name, int dimension, std::uint64_t seed) {
  auto rng = make_stream(seed, Stream::objective_setup);
  return make_objective(name, dimension, rng);
}

LatentParams initial_latent(int dimension, std::uint64_t seed) {
  LatentParams latent = make_latent(dimension);
  auto rng = make_stream(seed, Stream::latent_init);
  for (int i = 0; i < dimension; ++i) {
    latent.mean[i] = uniform(rng, -2.0, 2.0);
  }
  return latent;
}

FlowParams initial_flow(int dimension, int layers, int hidden, std::uint64_t seed) {
  auto rng = make_stream(seed, Stream::flow_init);
  return make_nice_flow(dimension, layers, hidden, rng, 0.0);
}

std::string run_file_name(const ExperimentConfig& cfg, std::uint64_t seed) {
  return cfg.algorithm + "_" + cfg.objective + "_d" + std::to_string(cfg.dimension) + "_seed" +
         std::to_string(seed) + ".jsonl";
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.seeds.empty()) {
    throw std::invalid_argument("run_experiment: seed list is empty");
  }
  if (cfg.dimension < 2) {
    throw std::invalid_argument("run_experiment: dimension must be at least 2");
  }
  if (cfg.algorithm != "xnes" && cfg.algorithm != "pges" && cfg.algorithm != "gnn-xnes") {
    throw std::invalid_argument("run_experiment: unknown algorithm '" + cfg.algorithm + "'");
  }
  {
    // Fail fast on a bad objective name or config before spawning jobs.
    auto probe = make_stream(cfg.seeds.front(), Stream::objective_setup);
    make_objective(cfg.objective, cfg.dimension, probe);
    resolve_config(cfg.driver, cfg.dimension);
  }

  std::vector<std::future<SeedRun>> jobs;
  jobs.reserve(cfg.seeds.size());
  for (const std::uint64_t seed : cfg.seeds) {
    jobs.push_back(std::async(std::launch::async, execute_seed, std::cref(cfg), seed));
  }

  ExperimentResult result;
  result.runs.reserve(cfg.seeds.size());
  for (auto& job : jobs) {
    result.runs.push_back(job.get());
  }

  std::vector<StoredRun> stored;
  stored.reserve(result.runs.size());
  for (const auto& run : result.runs) {
    StoredRun s;
    s.objective = cfg.objective;
    s.dimension = cfg.dimension;
    s.algorithm = cfg.algorithm;
    s.seed = run.seed;
    s.rows = run.record.rows;
    stored.push_back(std::move(s));
  }
  const std::vector<SummaryRow> summary = summarize_runs(stored);
  result.summary = summary.front();

  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    for (const auto& s : stored) {
      const std::filesystem::path path =
          std::filesystem::path(cfg.out_dir) / run_file_name(cfg, s.seed);
      write_run_file(path.string(), s);
    }
    const std::filesystem::path agg =
        std::filesystem::path(cfg.out_dir) / (cfg.algorithm + "_" + cfg.objective + "_d" +
                                              std::to_string(cfg.dimension) + "_summary.tsv");
    std::ofstream out(agg, std::ios::binary);
    if (!out) {
      throw std::runtime_error("run_experiment: cannot open " + agg.string());
    }
    out << summary_table(summary);
  }
  return result;
}

void write_run_file(const std::string& path, const StoredRun& run) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("write_run_file: cannot open " + path);
  }
  nlohmann::ordered_json meta;
  meta["objective"] = run.objective;
  meta["dim"] = run.dimension;
  meta["algorithm"] = run.algorithm;
  meta["seed"] = run.seed;
  out << meta.dump() << "\n";
  for (const auto& row : run.rows) {
    out << row_to_json(row).dump() << "\n";
  }
}

StoredRun read_run_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("read_run_file: cannot open " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("read_run_file: empty file " + path);
  }
  StoredRun run;
  const auto meta = nlohmann::ordered_json::parse(line);
  run.objective = meta.at("objective").get<std::string>();
  run.dimension = meta.at("dim").get<int>();
  run.algorithm = meta.at("algorithm").get<std::string>();
  run.seed = meta.at("seed").get<std::uint64_t>();
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    run.rows.push_back(row_from_json(nlohmann::ordered_json::parse(line)));
  }
  return run;
}

std::vector<StoredRun> read_run_dir(const std::string& dir) {
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  std::vector<StoredRun> runs;
  runs.reserve(paths.size());
  for (const auto& path : paths) {
    runs.push_back(read_run_file(path.string()));
  }
  return runs;
}

std::vector<SummaryRow> summarize_runs(const std::vector<StoredRun>& runs) {
  if (runs.empty()) {
    throw std::invalid_argument("summarize_runs: no runs");
  }
  std::vector<SummaryRow> rows;
  for (const auto& [key, members] : group_runs(runs)) {
    SummaryRow row;
    row.objective = std::get<0>(key);
    row.dimension = std::get<1>(key);
    row.algorithm = std::get<2>(key);
    row.seeds_count = static_cast<int>(members.size());
    double sum = 0.0;
    std::vector<double> finals;
    for (const StoredRun* run : members) {
      if (run->rows.empty()) {
        throw std::runtime_error("summarize_runs: run without trajectory rows");
      }
      const double final_best = run->rows.back().best_f;
      finals.push_back(final_best);
      sum += final_best;
      row.evaluations = std::max(row.evaluations, run->rows.back().evaluations);
    }
    row.mean_best_f = sum / static_cast<double>(finals.size());
    if (finals.size() > 1) {
      double ss = 0.0;
      for (const double v : finals) {
        ss += (v - row.mean_best_f) * (v - row.mean_best_f);
      }
      const double variance = ss / static_cast<double>(finals.size() - 1);
      row.std_error = std::sqrt(variance / static_cast<double>(finals.size()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string summary_table(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "objective\tdim\talgorithm\tmean_best_f\tstd_error\tseeds\tevaluations\n";
  for (const auto& row : rows) {
    out << row.objective << "\t" << row.dimension << "\t" << row.algorithm << "\t"
        << fmt(row.mean_best_f) << "\t" << fmt(row.std_error) << "\t" << row.seeds_count << "\t"
        << row.evaluations << "\n";
  }
  return out.str();
}

std::string curves_table(const std::vector<StoredRun>& runs) {
  std::ostringstream out;
  out << "objective\tdim\talgorithm\tevaluations\tq25\tmedian\tq75\n";
  for (const auto& [key, members] : group_runs(runs)) {
    std::vector<std::uint64_t> grid;
    std::uint64_t start = 0;
    for (const StoredRun* run : members) {
      if (run->rows.empty()) {
        throw std::runtime_error("curves_table: run without trajectory rows");
      }
      start = std::max(start, run->rows.front().evaluations);
      for (const auto& row : run->rows) {
        grid.push_back(row.evaluations);
      }
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    for (const std::uint64_t e : grid) {
      if (e < start) {
        continue;
      }
      std::vector<double> values;
      values.reserve(members.size());
      for (const StoredRun* run : members) {
        values.push_back(best_at(run->rows, e));
      }
      std::sort(values.begin(), values.end());
      out << std::get<0>(key) << "\t" << std::get<1>(key) << "\t" << std::get<2>(key) << "\t" << e
          << "\t" << fmt(quantile_sorted(values, 0.25)) << "\t"
          << fmt(quantile_sorted(values, 0.5)) << "\t" << fmt(quantile_sorted(values, 0.75))
          << "\n";
    }
  }
  return out.str();
}

double median_best_at(const std::vector<StoredRun>& runs, const std::string& algorithm,
                      std::uint64_t evaluations) {
  std::vector<double> values;
  for (const auto& run : runs) {
    if (run.algorithm != algorithm) {
      continue;
    }
    const double v = best_at(run.rows, evaluations);
    if (!std::isnan(v)) {
      values.push_back(v);
    }
  }
  if (values.empty()) {
    throw std::invalid_argument("median_best_at: no runs for algorithm " + algorithm);
  }
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, 0.5);
}

}  // namespace flowes
