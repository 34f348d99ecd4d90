#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "flowes/nice.hpp"

namespace flowes {

/// Latent samples with their objective values, one generation's worth.
struct EvaluatedLatentPopulation {
  Eigen::MatrixXd z;  // n x d
  Eigen::VectorXd f;  // n
};

/// Thrown when an update would leave the search distribution degenerate
/// (non-finite parameters or a collapsed covariance factor).
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct XnesRates {
  double eta_mean;
  double eta_sigma;
};

/// Published defaults: eta_mean = 1, eta_sigma = (9 + 3 ln d) / (5 d sqrt(d)).
XnesRates default_xnes_rates(int dimension);

/// Rank-based utility weights for minimization: u_i = max(0, log(n/2 + 1) -
/// log(rank_i)), normalized to sum 1, shifted by -1/n so the total is 0.
/// Depends on the ranks of f only; ties resolve by sample index.
Eigen::VectorXd make_utilities(const Eigen::VectorXd& f);

/// Natural-gradient step in the exponential parametrization. Standardizes the
/// samples with the current factor, forms the mean and covariance gradient
/// directions from the utilities, applies the multiplicative covariance
/// update and re-factors so cov_factor stays lower triangular.
LatentParams xnes_update(const LatentParams& latent, const EvaluatedLatentPopulation& pop,
                         const XnesRates& rates);

/// Same step with caller-supplied utility weights (one per sample).
LatentParams xnes_update_with_utilities(const LatentParams& latent, const Eigen::MatrixXd& z,
                                        const Eigen::VectorXd& utilities,
                                        const XnesRates& rates);

/// One stochastic-gradient step on the expected objective via the
/// score-function estimator, with a mean-fitness baseline.
LatentParams pges_update(const LatentParams& latent, const EvaluatedLatentPopulation& pop,
                         double learning_rate);

/// Interface for algorithms that update the latent distribution from one
/// evaluated population (the pluggable inner optimizer of the driver).
class LatentOptimizer {
 public:
  virtual ~LatentOptimizer() = default;
  virtual LatentParams update(const LatentParams& latent,
                              const EvaluatedLatentPopulation& pop) const = 0;
};

class XnesOptimizer final : public LatentOptimizer {
 public:
  explicit XnesOptimizer(XnesRates rates) : rates_(rates) {}
  static XnesOptimizer with_defaults(int dimension) {
    return XnesOptimizer(default_xnes_rates(dimension));
  }
  LatentParams update(const LatentParams& latent,
                      const EvaluatedLatentPopulation& pop) const override {
    return xnes_update(latent, pop, rates_);
  }

 private:
  XnesRates rates_;
};

class PgesOptimizer final : public LatentOptimizer {
 public:
  explicit PgesOptimizer(double learning_rate) : learning_rate_(learning_rate) {}
  LatentParams update(const LatentParams& latent,
                      const EvaluatedLatentPopulation& pop) const override {
    return pges_update(latent, pop, learning_rate_);
  }

 private:
  double learning_rate_;
};

}  // namespace flowes
