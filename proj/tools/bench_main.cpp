#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "flowes/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct RunArgs {
  flowes::ExperimentConfig cfg;
  std::vector<std::uint64_t> seeds;
  std::uint64_t budget = 10000;
  bool raw_fitness = false;
};

int do_run(RunArgs& args) {
  args.cfg.driver.max_evaluations = args.budget;
  args.cfg.driver.shaped_fitness = !args.raw_fitness;
  if (args.seeds.empty()) {
    args.seeds.resize(10);
    std::iota(args.seeds.begin(), args.seeds.end(), std::uint64_t{1});
  }
  args.cfg.seeds = args.seeds;
  const flowes::ExperimentResult result = flowes::run_experiment(args.cfg);
  std::cout << flowes::summary_table({result.summary});
  return kExitOk;
}

int do_summarize(const std::string& in_dir, std::string out_path) {
  const std::vector<flowes::StoredRun> runs = flowes::read_run_dir(in_dir);
  if (runs.empty()) {
    std::cerr << "summarize: no record files under " << in_dir << "\n";
    return kExitRuntime;
  }
  const std::string table = flowes::summary_table(flowes::summarize_runs(runs));
  if (out_path.empty()) {
    out_path = (std::filesystem::path(in_dir) / "summary.tsv").string();
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "summarize: cannot open " << out_path << "\n";
    return kExitRuntime;
  }
  out << table;
  std::cout << table;
  return kExitOk;
}

int do_curves(const std::string& in_dir, std::string out_path) {
  const std::vector<flowes::StoredRun> runs = flowes::read_run_dir(in_dir);
  if (runs.empty()) {
    std::cerr << "curves: no record files under " << in_dir << "\n";
    return kExitRuntime;
  }
  const std::string table = flowes::curves_table(runs);
  if (out_path.empty()) {
    out_path = (std::filesystem::path(in_dir) / "curves.tsv").string();
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "curves: cannot open " << out_path << "\n";
    return kExitRuntime;
  }
  out << table;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flow-based evolutionary search benchmark harness"};
  app.require_subcommand(1);
  app.set_config("--config")->description("Config file; command-line flags win on conflict");

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "Run one algorithm over a seed list");
  run->add_option("--objective", run_args.cfg.objective, "Objective name")
      ->default_val("sphere");
  run->add_option("--dim", run_args.cfg.dimension, "Problem dimension")->default_val(2);
  run->add_option("--algo", run_args.cfg.algorithm, "xnes | pges | gnn-xnes")
      ->default_val("xnes");
  run->add_option("--seeds", run_args.seeds, "Comma-separated seed list (default 1..10)")
      ->delimiter(',');
  run->add_option("--budget", run_args.budget, "Objective evaluation budget per seed")
      ->default_val(10000);
  run->add_option("--pop", run_args.cfg.driver.population_size,
                  "Population size (0 picks 10*dim)");
  run->add_option("--kl-radius", run_args.cfg.driver.kl_radius, "Trust-region radius");
  run->add_option("--kl-samples", run_args.cfg.driver.kl_sample_size,
                  "Samples for the KL estimate (0 picks 10*pop)");
  run->add_option("--inner-steps", run_args.cfg.driver.inner_steps,
                  "Flow gradient steps per generation");
  run->add_option("--inner-step-size", run_args.cfg.driver.inner_step_size,
                  "Flow gradient step size");
  run->add_option("--lambda0", run_args.cfg.driver.lambda0, "Initial penalty coefficient");
  run->add_option("--max-gens", run_args.cfg.driver.max_generations,
                  "Generation cap (0 leaves the evaluation budget in charge)");
  run->add_option("--stall-tol", run_args.cfg.driver.stall_tolerance,
                  "Stop when best-so-far improves less than this over the stall window (0 "
                  "disables stalling)");
  run->add_option("--stall-gens", run_args.cfg.driver.stall_generations,
                  "Generations in the stall window");
  run->add_flag("--raw-fitness", run_args.raw_fitness,
                "Weight the surrogate loss by raw objective values instead of rank utilities");
  run->add_option("--pges-lr", run_args.cfg.pges_learning_rate, "PGES learning rate");
  run->add_option("--flow-layers", run_args.cfg.flow_layers, "Coupling layers in the flow");
  run->add_option("--flow-hidden", run_args.cfg.flow_hidden, "Hidden units per shift net");
  run->add_option("--out", run_args.cfg.out_dir, "Output directory for records and summary")
      ->required();

  std::string in_dir;
  std::string out_path;
  CLI::App* summarize = app.add_subcommand("summarize", "Aggregate record files into a table");
  summarize->add_option("--in", in_dir, "Directory holding .jsonl record files")->required();
  summarize->add_option("--out", out_path, "Output table path (default <in>/summary.tsv)");

  CLI::App* curves = app.add_subcommand("curves", "Quartile convergence curves from records");
  curves->add_option("--in", in_dir, "Directory holding .jsonl record files")->required();
  curves->add_option("--out", out_path, "Output table path (default <in>/curves.tsv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (run->parsed()) {
      return do_run(run_args);
    }
    if (summarize->parsed()) {
      return do_summarize(in_dir, out_path);
    }
    return do_curves(in_dir, out_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
