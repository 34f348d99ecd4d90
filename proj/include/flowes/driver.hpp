#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "flowes/latent_es.hpp"
#include "flowes/nice.hpp"
#include "flowes/objectives.hpp"

namespace flowes {

struct DriverConfig {
  int population_size = 0;  // 0 resolves to 10 * d
  double kl_radius = 0.01;
  int kl_sample_size = 0;  // 0 resolves to 10 * population size
  double lambda0 = 1.0;
  int inner_steps = 20;
  double inner_step_size = 1e-3;
  std::uint64_t max_evaluations = 0;  // 0 means unbounded (generations cap must be set)
  int max_generations = 0;            // 0 means unbounded (evaluation cap must be set)
  double stall_tolerance = 1e-12;
  int stall_generations = 50;
  // Shaped mode ranks the population and feeds the negated utility weights to
  // the importance-weighted loss; raw mode feeds f as is.
  bool shaped_fitness = true;
};

/// Fills the size defaults for dimension d and validates the result.
DriverConfig resolve_config(DriverConfig cfg, int dimension);

struct GenerationState {
  LatentParams latent;
  FlowParams flow;
  double lambda = 1.0;
  int generation = 0;
  Eigen::VectorXd best_x;
  double best_f = std::numeric_limits<double>::infinity();
};

/// One logged row per generation. Evaluations is the cumulative count for
/// this run; lambda and kl are the post-update values.
struct GenerationRecord {
  int generation = 0;
  std::uint64_t evaluations = 0;
  double best_f = 0.0;
  double mean_f = 0.0;
  double lambda = 0.0;
  double kl = 0.0;
  double entropy = 0.0;
};

struct RunRecord {
  std::vector<GenerationRecord> rows;
  GenerationState final_state;
};

/// Density ratio pi_new(x) / pi_old(x), computed in log space.
double importance_weight(const Eigen::VectorXd& x, const LatentParams& latent_new,
                         const FlowParams& flow_new, const LatentParams& latent_old,
                         const FlowParams& flow_old);

/// Monte-Carlo KL estimate between two flows sharing one latent distribution:
/// (1/M) sum log(pi_{latent,flow_p}(x_i) / pi_{latent,flow_q}(x_i)) over rows
/// of samples, which must be drawn from (latent, flow_p). Unclamped, so noise
/// can push it slightly negative; equal flow parameters give exactly 0.
double mc_kl(const LatentParams& latent, const FlowParams& flow_p, const FlowParams& flow_q,
             const Eigen::MatrixXd& samples);

/// KL-penalty update. kl is measured at the returned parameters on the same
/// sample set the inner loop used.
struct EtaStepResult {
  FlowParams flow;
  double kl = 0.0;
};

/// An evaluated population in objective space: the points the flow produced
/// and their (finite) objective values.
struct EvaluatedPopulation {
  Eigen::MatrixXd x;  // n x d
  Eigen::VectorXd f;  // n
};

/// Value and packed-parameter gradient of the inner objective at flow: the
/// importance-weighted fitness surrogate plus lambda times the KL estimate,
/// both taken against (latent_new, flow_old). finite is false when the
/// evaluation overflowed.
struct SurrogateEval {
  double loss = 0.0;
  Eigen::VectorXd grad;
  bool finite = false;
};

SurrogateEval penalized_surrogate(const EvaluatedPopulation& pop, const LatentParams& latent_new,
                                  const FlowParams& flow_old, const FlowParams& flow,
                                  const Eigen::MatrixXd& kl_samples, double lambda,
                                  bool shaped_fitness);

/// Minimizes the importance-weighted surrogate plus lambda times the KL
/// estimate over the flow parameters, holding latent_new fixed. Runs
/// cfg.inner_steps adaptive-moment gradient steps from flow_old; kl_samples
/// must be drawn from (latent_new, flow_old) and stay fixed for the whole
/// inner loop. A non-finite loss or gradient aborts the loop and the last
/// finite iterate is returned. Never evaluates the objective.
EtaStepResult eta_step(const EvaluatedPopulation& pop, const LatentParams& latent_new,
                       const FlowParams& flow_old, const Eigen::MatrixXd& kl_samples,
                       double lambda, const DriverConfig& cfg);

/// Convenience overload that draws cfg.kl_sample_size samples from
/// (latent_new, flow_old) with rng.
EtaStepResult eta_step(const EvaluatedPopulation& pop, const LatentParams& latent_new,
                       const FlowParams& flow_old, double lambda, const DriverConfig& cfg,
                       std::mt19937_64& rng);

/// Penalty schedule: KL above 2*eps scales lambda by 1.5, below eps/2 divides
/// by 1.5, otherwise unchanged.
double adapt_lambda(double lambda, double kl_measured, double eps);

/// Full optimization loop from the given initial state. Per generation:
/// sample N points through the flow, evaluate, update the latent distribution
/// with the optimizer, then (when inner steps are configured) update the flow
/// against fresh KL samples and adapt lambda. Exactly N objective evaluations
/// per generation. The seed fixes the sampling streams, so equal inputs give
/// equal records. With inner_steps = 0 the flow, lambda and KL logging stay
/// frozen, which reduces the loop to the plain latent-space algorithm.
RunRecord run(const ObjectiveSpec& objective, LatentParams latent, FlowParams flow,
              const LatentOptimizer& optimizer, const DriverConfig& cfg, std::uint64_t seed);

/// The flowless baseline loop: identical bookkeeping with an identity
/// transport, so records are comparable row for row with run().
RunRecord run_latent_baseline(const ObjectiveSpec& objective, LatentParams latent,
                              const LatentOptimizer& optimizer, const DriverConfig& cfg,
                              std::uint64_t seed);

}  // namespace flowes
