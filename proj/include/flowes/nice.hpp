#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "flowes/mlp.hpp"

namespace flowes {

/// One additive coupling step. mask[i] == 1 marks a pass-through coordinate
/// (the half fed to the shift network), mask[i] == 0 a shifted coordinate.
/// t_net maps the pass-through coordinates to a shift for the others.
struct CouplingLayer {
  std::vector<std::uint8_t> mask;
  MLPParams t_net;

  int dimension() const { return static_cast<int>(mask.size()); }
  int pass_count() const;
  int shift_count() const;
};

/// A stack of coupling layers forming a volume-preserving bijection. The
/// default stack is three layers with alternating even/odd masks, which is
/// enough for every output coordinate to depend on every input coordinate.
struct FlowParams {
  std::vector<CouplingLayer> layers;
  int dimension = 0;

  std::size_t parameter_count() const;
};

/// Gaussian over the latent space, parametrized by its mean and a
/// lower-triangular covariance factor with positive diagonal (Sigma = A A^T).
struct LatentParams {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov_factor;

  int dimension() const { return static_cast<int>(mean.size()); }
};

/// Gradient with respect to every coupling-layer network, mirroring the
/// structure of FlowParams.
struct FlowGradient {
  std::vector<MLPGradient> layers;
};

/// Standard latent: zero mean, identity factor.
LatentParams make_latent(int dimension);

/// Validates LatentParams invariants (finite, lower-triangular, positive
/// diagonal); throws std::invalid_argument otherwise.
void check_latent(const LatentParams& latent);

/// Builds the coupling stack. Layer k passes through coordinates of parity
/// k mod 2 (even indices first). Each shift network has one hidden layer of
/// `hidden` tanh units. With final_scale = 0 the flow starts as an exact
/// identity. Requires dimension >= 2.
FlowParams make_nice_flow(int dimension, int n_layers, int hidden,
                          std::mt19937_64& rng, double final_scale);

Eigen::VectorXd coupling_forward(const CouplingLayer& layer, const Eigen::VectorXd& u);
Eigen::VectorXd coupling_inverse(const CouplingLayer& layer, const Eigen::VectorXd& v);

/// g_eta: latent noise to search space.
Eigen::VectorXd flow_forward(const FlowParams& flow, const Eigen::VectorXd& z);
/// h_eta = g_eta^{-1}.
Eigen::VectorXd flow_inverse(const FlowParams& flow, const Eigen::VectorXd& x);

/// log pi(x) = log nu(h(x)). The coupling stack is volume preserving, so
/// there is no Jacobian correction term.
double log_density(const LatentParams& latent, const FlowParams& flow,
                   const Eigen::VectorXd& x);

/// Latent Gaussian log-density (the zero-flow special case).
double latent_log_density(const LatentParams& latent, const Eigen::VectorXd& z);

/// Differential entropy 0.5 log det(2 pi e Sigma). Volume preservation makes
/// this the entropy of the pushed-forward distribution as well.
double latent_entropy(const LatentParams& latent);

/// Draws n latent samples z = mean + A xi, xi ~ N(0, I), row per sample.
Eigen::MatrixXd sample_latent(const LatentParams& latent, int n, std::mt19937_64& rng);

struct SampleBatch {
  Eigen::MatrixXd z;  // n x d latent draws
  Eigen::MatrixXd x;  // n x d mapped samples, row-wise flow_forward(z)
};

SampleBatch sample(const LatentParams& latent, const FlowParams& flow, int n,
                   std::mt19937_64& rng);

/// Reverse-mode gradient of log_density(latent, flow, x) with respect to all
/// coupling-layer parameters, with the inverse image and the log-density
/// value as by-products.
struct LogDensityGrad {
  double value = 0.0;
  Eigen::VectorXd z;
  FlowGradient d_flow;
};

LogDensityGrad grad_log_density_eta(const LatentParams& latent, const FlowParams& flow,
                                    const Eigen::VectorXd& x);

/// Flat parameter vector in a fixed order (layer by layer, weights row-major,
/// then biases). flow_unpack is the exact inverse.
Eigen::VectorXd flow_pack(const FlowParams& flow);
void flow_unpack(const Eigen::VectorXd& packed, FlowParams& flow);
Eigen::VectorXd gradient_pack(const FlowParams& flow, const FlowGradient& grad);

}  // namespace flowes
