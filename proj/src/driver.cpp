#include "flowes/driver.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "flowes/rng.hpp"

namespace flowes {
namespace {

struct AdamState {
  Eigen::ArrayXd m;
  Eigen::ArrayXd v;
  int t = 0;

  explicit AdamState(Eigen::Index n) : m(Eigen::ArrayXd::Zero(n)), v(Eigen::ArrayXd::Zero(n)) {}

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr) {
    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kEps = 1e-8;
    ++t;
    m = kBeta1 * m + (1.0 - kBeta1) * grad.array();
    v = kBeta2 * v + (1.0 - kBeta2) * grad.array().square();
    const Eigen::ArrayXd m_hat = m / (1.0 - std::pow(kBeta1, t));
    const Eigen::ArrayXd v_hat = v / (1.0 - std::pow(kBeta2, t));
    params.array() -= lr * m_hat / (v_hat.sqrt() + kEps);
  }
};

void check_flow_shape(const FlowParams& flow, int dimension) {
  if (flow.dimension != dimension) {
    throw std::invalid_argument("driver: flow dimension does not match latent dimension");
  }
  for (const auto& layer : flow.layers) {
    if (layer.dimension() != dimension) {
      throw std::invalid_argument("driver: coupling layer dimension mismatch");
    }
  }
}

// Loss and gradient of the penalized surrogate at the current flow. Returns
// false when anything came out non-finite.
bool penalized_loss(const EvaluatedPopulation& pop, const Eigen::VectorXd& shaped_f,
                    const Eigen::VectorXd& l_old_pop, const Eigen::VectorXd& l_old_kl,
                    const LatentParams& latent_new, const FlowParams& flow,
                    const Eigen::MatrixXd& kl_samples, double lambda, double* loss_out,
                    Eigen::VectorXd* grad_out) {
  const Eigen::Index n = pop.x.rows();
  const Eigen::Index m = kl_samples.rows();
  double loss = 0.0;
  grad_out->setZero();
  for (Eigen::Index i = 0; i < n; ++i) {
    const LogDensityGrad g = grad_log_density_eta(latent_new, flow, pop.x.row(i).transpose());
    const double weight = std::exp(g.value - l_old_pop[i]);
    const double coeff = shaped_f[i] * weight / static_cast<double>(n);
    loss += coeff;
    *grad_out += coeff * gradient_pack(flow, g.d_flow);
  }
  double kl = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    const LogDensityGrad g = grad_log_density_eta(latent_new, flow, kl_samples.row(j).transpose());
    kl += (l_old_kl[j] - g.value) / static_cast<double>(m);
    *grad_out -= (lambda / static_cast<double>(m)) * gradient_pack(flow, g.d_flow);
  }
  loss += lambda * kl;
  *loss_out = loss;
  return std::isfinite(loss) && grad_out->allFinite();
}

}  // namespace

DriverConfig resolve_config(DriverConfig cfg, int dimension) {
  if (dimension < 1) {
    throw std::invalid_argument("resolve_config: dimension must be positive");
  }
  if (cfg.population_size == 0) {
    cfg.population_size = 10 * dimension;
  }
  if (cfg.kl_sample_size == 0) {
    cfg.kl_sample_size = 10 * cfg.population_size;
  }
  if (cfg.population_size < 2) {
    throw std::invalid_argument("resolve_config: population size must be at least 2");
  }
  if (cfg.kl_sample_size < 2) {
    throw std::invalid_argument("resolve_config: KL sample size must be at least 2");
  }
  if (!(cfg.kl_radius > 0.0)) {
    throw std::invalid_argument("resolve_config: KL radius must be positive");
  }
  if (!(cfg.lambda0 > 0.0)) {
    throw std::invalid_argument("resolve_config: initial lambda must be positive");
  }
  if (cfg.inner_steps < 0) {
    throw std::invalid_argument("resolve_config: inner step count cannot be negative");
  }
  if (cfg.inner_steps > 0 && !(cfg.inner_step_size > 0.0)) {
    throw std::invalid_argument("resolve_config: inner step size must be positive");
  }
  if (cfg.max_evaluations == 0 && cfg.max_generations == 0) {
    throw std::invalid_argument("resolve_config: set an evaluation or generation budget");
  }
  if (cfg.stall_generations < 1) {
    throw std::invalid_argument("resolve_config: stall window must be at least 1");
  }
  if (cfg.stall_tolerance < 0.0) {
    throw std::invalid_argument("resolve_config: stall tolerance cannot be negative");
  }
  return cfg;
}

double importance_weight(const Eigen::VectorXd& x, const LatentParams& latent_new,
                         const FlowParams& flow_new, const LatentParams& latent_old,
                         const FlowParams& flow_old) {
  return std::exp(log_density(latent_new, flow_new, x) - log_density(latent_old, flow_old, x));
}

double mc_kl(const LatentParams& latent, const FlowParams& flow_p, const FlowParams& flow_q,
             const Eigen::MatrixXd& samples) {
  const Eigen::Index m = samples.rows();
  if (m < 1) {
    throw std::invalid_argument("mc_kl: need at least one sample");
  }
  double total = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    const Eigen::VectorXd x = samples.row(j).transpose();
    total += log_density(latent, flow_p, x) - log_density(latent, flow_q, x);
  }
  return total / static_cast<double>(m);
}

SurrogateEval penalized_surrogate(const EvaluatedPopulation& pop, const LatentParams& latent_new,
                                  const FlowParams& flow_old, const FlowParams& flow,
                                  const Eigen::MatrixXd& kl_samples, double lambda,
                                  bool shaped_fitness) {
  const int d = latent_new.dimension();
  check_flow_shape(flow_old, d);
  check_flow_shape(flow, d);
  if (pop.x.rows() != pop.f.size() || pop.x.rows() < 1) {
    throw std::invalid_argument("penalized_surrogate: malformed population");
  }
  if (pop.x.cols() != d || kl_samples.cols() != d || kl_samples.rows() < 1) {
    throw std::invalid_argument("penalized_surrogate: sample dimension mismatch");
  }
  if (!pop.f.allFinite()) {
    throw std::invalid_argument("penalized_surrogate: objective values must be finite");
  }

  const Eigen::VectorXd shaped_f =
      shaped_fitness ? Eigen::VectorXd(-make_utilities(pop.f)) : pop.f;
  Eigen::VectorXd l_old_pop(pop.x.rows());
  for (Eigen::Index i = 0; i < pop.x.rows(); ++i) {
    l_old_pop[i] = log_density(latent_new, flow_old, pop.x.row(i).transpose());
  }
  Eigen::VectorXd l_old_kl(kl_samples.rows());
  for (Eigen::Index j = 0; j < kl_samples.rows(); ++j) {
    l_old_kl[j] = log_density(latent_new, flow_old, kl_samples.row(j).transpose());
  }

  SurrogateEval out;
  out.grad.resize(static_cast<Eigen::Index>(flow.parameter_count()));
  out.finite = penalized_loss(pop, shaped_f, l_old_pop, l_old_kl, latent_new, flow, kl_samples,
                              lambda, &out.loss, &out.grad);
  return out;
}

EtaStepResult eta_step(const EvaluatedPopulation& pop, const LatentParams& latent_new,
                       const FlowParams& flow_old, const Eigen::MatrixXd& kl_samples,
                       double lambda, const DriverConfig& cfg) {
  const int d = latent_new.dimension();
  check_flow_shape(flow_old, d);
  if (pop.x.rows() != pop.f.size() || pop.x.rows() < 1) {
    throw std::invalid_argument("eta_step: malformed population");
  }
  if (pop.x.cols() != d || kl_samples.cols() != d) {
    throw std::invalid_argument("eta_step: sample dimension mismatch");
  }
  if (!pop.f.allFinite()) {
    throw std::invalid_argument("eta_step: objective values must be finite");
  }
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("eta_step: lambda must be positive");
  }
  if (cfg.inner_steps == 0) {
    return EtaStepResult{flow_old, 0.0};
  }
  if (kl_samples.rows() < 1) {
    throw std::invalid_argument("eta_step: need KL samples");
  }

  const Eigen::VectorXd shaped_f =
      cfg.shaped_fitness ? Eigen::VectorXd(-make_utilities(pop.f)) : pop.f;

  const Eigen::Index n = pop.x.rows();
  const Eigen::Index m = kl_samples.rows();
  Eigen::VectorXd l_old_pop(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    l_old_pop[i] = log_density(latent_new, flow_old, pop.x.row(i).transpose());
  }
  Eigen::VectorXd l_old_kl(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    l_old_kl[j] = log_density(latent_new, flow_old, kl_samples.row(j).transpose());
  }

  Eigen::VectorXd params = flow_pack(flow_old);
  Eigen::VectorXd good = params;
  AdamState adam(params.size());
  FlowParams flow = flow_old;
  double loss = 0.0;
  Eigen::VectorXd grad(params.size());
  for (int it = 0; it < cfg.inner_steps; ++it) {
    flow_unpack(params, flow);
    if (!penalized_loss(pop, shaped_f, l_old_pop, l_old_kl, latent_new, flow, kl_samples,
                        lambda, &loss, &grad)) {
      params = good;
      break;
    }
    good = params;
    adam.step(params, grad, cfg.inner_step_size);
  }
  flow_unpack(params, flow);
  double kl = mc_kl(latent_new, flow_old, flow, kl_samples);

  // The inner optimizer is scale invariant, so the penalty steers direction
  // but cannot bound how far the iterates travel. Enforce the radius the
  // lambda schedule tolerates by pulling the step back toward its start until
  // the measured divergence is inside it.
  const Eigen::VectorXd start = flow_pack(flow_old);
  Eigen::VectorXd delta = params - start;
  int halvings = 0;
  while (!(kl <= 2.0 * cfg.kl_radius) && halvings < 50) {
    delta *= 0.5;
    flow_unpack(start + delta, flow);
    kl = mc_kl(latent_new, flow_old, flow, kl_samples);
    ++halvings;
  }
  if (!(kl <= 2.0 * cfg.kl_radius)) {
    flow = flow_old;
    kl = 0.0;
  }

  EtaStepResult result;
  result.kl = kl;
  result.flow = std::move(flow);
  return result;
}

EtaStepResult eta_step(const EvaluatedPopulation& pop, const LatentParams& latent_new,
                       const FlowParams& flow_old, double lambda, const DriverConfig& cfg,
                       std::mt19937_64& rng) {
  const int m = cfg.kl_sample_size > 0 ? cfg.kl_sample_size
                                       : 10 * static_cast<int>(pop.x.rows());
  const Eigen::MatrixXd kl_x = sample(latent_new, flow_old, m, rng).x;
  return eta_step(pop, latent_new, flow_old, kl_x, lambda, cfg);
}

double adapt_lambda(double lambda, double kl_measured, double eps) {
  if (kl_measured > 2.0 * eps) {
    return 1.5 * lambda;
  }
  if (kl_measured < 0.5 * eps) {
    return lambda / 1.5;
  }
  return lambda;
}

RunRecord run(const ObjectiveSpec& objective, LatentParams latent, FlowParams flow,
              const LatentOptimizer& optimizer, const DriverConfig& cfg_in, std::uint64_t seed) {
  check_latent(latent);
  const int d = latent.dimension();
  if (objective.dimension != d) {
    throw std::invalid_argument("run: objective dimension does not match latent dimension");
  }
  check_flow_shape(flow, d);
  const DriverConfig cfg = resolve_config(cfg_in, d);
  const int n = cfg.population_size;

  auto pop_rng = make_stream(seed, Stream::population);
  auto kl_rng = make_stream(seed, Stream::kl);

  RunRecord rec;
  GenerationState st;
  st.latent = std::move(latent);
  st.flow = std::move(flow);
  st.lambda = cfg.lambda0;

  std::uint64_t evals = 0;
  while (true) {
    if (cfg.max_generations > 0 && st.generation >= cfg.max_generations) {
      break;
    }
    if (cfg.max_evaluations > 0 && evals + static_cast<std::uint64_t>(n) > cfg.max_evaluations) {
      break;
    }

    const SampleBatch batch = sample(st.latent, st.flow, n, pop_rng);
    Eigen::VectorXd f(n);
    for (int i = 0; i < n; ++i) {
      double value = evaluate(objective, batch.x.row(i).transpose());
      // Worst finite rank for blown-up evaluations keeps the rank machinery
      // and the population invariant total.
      if (!std::isfinite(value)) {
        value = std::numeric_limits<double>::max();
      }
      f[i] = value;
      ++evals;
      if (value < st.best_f) {
        st.best_f = value;
        st.best_x = batch.x.row(i).transpose();
      }
    }

    LatentParams latent_next;
    try {
      latent_next = optimizer.update(st.latent, EvaluatedLatentPopulation{batch.z, f});
    } catch (const DivergenceError&) {
      // The search distribution collapsed; keep the trajectory so far.
      break;
    }

    double kl = 0.0;
    if (cfg.inner_steps > 0) {
      const Eigen::MatrixXd kl_x = sample(latent_next, st.flow, cfg.kl_sample_size, kl_rng).x;
      EtaStepResult eta =
          eta_step(EvaluatedPopulation{batch.x, f}, latent_next, st.flow, kl_x, st.lambda, cfg);
      st.flow = std::move(eta.flow);
      kl = eta.kl;
      // Floor at the smallest normal double so lambda stays positive even on
      // very long runs of consecutive shrinks.
      st.lambda = std::max(adapt_lambda(st.lambda, kl, cfg.kl_radius),
                           std::numeric_limits<double>::min());
    }
    st.latent = std::move(latent_next);
    st.generation += 1;

    GenerationRecord row;
    row.generation = st.generation;
    row.evaluations = evals;
    row.best_f = st.best_f;
    // A population of sanitized worst-rank values can overflow the sum; keep
    // the logged row finite so records stay readable.
    const double mean_f = f.mean();
    row.mean_f = std::isfinite(mean_f) ? mean_f : std::numeric_limits<double>::max();
    row.lambda = st.lambda;
    row.kl = kl;
    row.entropy = latent_entropy(st.latent);
    rec.rows.push_back(row);

    const int g = st.generation;
    if (g > cfg.stall_generations) {
      const double before = rec.rows[static_cast<size_t>(g - 1 - cfg.stall_generations)].best_f;
      if (before - st.best_f < cfg.stall_tolerance) {
        break;
      }
    }
  }
  rec.final_state = std::move(st);
  return rec;
}

RunRecord run_latent_baseline(const ObjectiveSpec& objective, LatentParams latent,
                              const LatentOptimizer& optimizer, const DriverConfig& cfg,
                              std::uint64_t seed) {
  FlowParams identity;
  identity.dimension = latent.dimension();
  DriverConfig frozen = cfg;
  frozen.inner_steps = 0;
  return run(objective, std::move(latent), std::move(identity), optimizer, frozen, seed);
}

}  // namespace flowes
