#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

namespace flowes {

/// Dense feed-forward network with tanh hidden units and an affine output
/// layer. weights[l] has shape (layer_sizes[l+1], layer_sizes[l]).
struct MLPParams {
  std::vector<int> layer_sizes;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  std::size_t parameter_count() const;
};

/// Reverse-mode gradients of an upstream-weighted output: d_input is the
/// gradient with respect to the network input, d_weights/d_biases mirror
/// MLPParams shapes exactly.
struct MLPGradient {
  Eigen::VectorXd d_input;
  std::vector<Eigen::MatrixXd> d_weights;
  std::vector<Eigen::VectorXd> d_biases;
};

/// Zero-initialized network with the given layer sizes.
MLPParams make_mlp(const std::vector<int>& layer_sizes);

/// Uniform init in [-s, s] with s = 1/sqrt(fan_in); biases zero. The last
/// layer's weights are multiplied by final_scale; with final_scale = 0 the
/// network output is exactly zero regardless of input, which makes a coupling
/// layer built on it an exact identity.
void randomize_mlp(MLPParams& params, std::mt19937_64& rng, double final_scale);

Eigen::VectorXd mlp_forward(const MLPParams& params, const Eigen::VectorXd& input);

/// Gradients of dot(upstream, mlp_forward(params, input)) with respect to the
/// input and every weight/bias.
MLPGradient mlp_backward(const MLPParams& params, const Eigen::VectorXd& input,
                         const Eigen::VectorXd& upstream);

MLPGradient zero_gradient(const MLPParams& params);

}  // namespace flowes
