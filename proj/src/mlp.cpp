#include "flowes/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "flowes/rng.hpp"

namespace flowes {

namespace {

void check_shapes(const MLPParams& params) {
  const std::size_t n_layers = params.layer_sizes.size();
  if (n_layers < 2) throw std::invalid_argument("mlp: need at least input and output layer");
  for (int s : params.layer_sizes)
    if (s <= 0) throw std::invalid_argument("mlp: layer sizes must be positive");
  if (params.weights.size() != n_layers - 1 || params.biases.size() != n_layers - 1)
    throw std::invalid_argument("mlp: weight/bias count does not chain with layer_sizes");
  for (std::size_t l = 0; l + 1 < n_layers; ++l) {
    if (params.weights[l].rows() != params.layer_sizes[l + 1] ||
        params.weights[l].cols() != params.layer_sizes[l] ||
        params.biases[l].size() != params.layer_sizes[l + 1])
      throw std::invalid_argument("mlp: weight matrix shape mismatch");
  }
}

}  // namespace

std::size_t MLPParams::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l)
    n += static_cast<std::size_t>(weights[l].size()) + static_cast<std::size_t>(biases[l].size());
  return n;
}

MLPParams make_mlp(const std::vector<int>& layer_sizes) {
  MLPParams params;
  params.layer_sizes = layer_sizes;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    params.weights.emplace_back(Eigen::MatrixXd::Zero(layer_sizes[l + 1], layer_sizes[l]));
    params.biases.emplace_back(Eigen::VectorXd::Zero(layer_sizes[l + 1]));
  }
  check_shapes(params);
  return params;
}

void randomize_mlp(MLPParams& params, std::mt19937_64& rng, double final_scale) {
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    const double s = 1.0 / std::sqrt(static_cast<double>(params.layer_sizes[l]));
    const double scale = (l + 1 == params.weights.size()) ? final_scale : 1.0;
    for (Eigen::Index i = 0; i < params.weights[l].rows(); ++i)
      for (Eigen::Index j = 0; j < params.weights[l].cols(); ++j)
        params.weights[l](i, j) = scale * uniform(rng, -s, s);
    params.biases[l].setZero();
  }
}

Eigen::VectorXd mlp_forward(const MLPParams& params, const Eigen::VectorXd& input) {
  check_shapes(params);
  if (input.size() != params.input_dim())
    throw std::invalid_argument("mlp_forward: input length does not match first layer");
  Eigen::VectorXd h = input;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    h = params.weights[l] * h + params.biases[l];
    if (l + 1 < params.weights.size()) h = h.array().tanh().matrix();
  }
  return h;
}

MLPGradient mlp_backward(const MLPParams& params, const Eigen::VectorXd& input,
                         const Eigen::VectorXd& upstream) {
  check_shapes(params);
  if (input.size() != params.input_dim())
    throw std::invalid_argument("mlp_backward: input length does not match first layer");
  if (upstream.size() != params.output_dim())
    throw std::invalid_argument("mlp_backward: upstream length does not match output layer");

  const std::size_t n = params.weights.size();
  // activations[l] is the input to layer l; preact[l] kept only where tanh applies.
  std::vector<Eigen::VectorXd> activations(n + 1);
  activations[0] = input;
  for (std::size_t l = 0; l < n; ++l) {
    Eigen::VectorXd z = params.weights[l] * activations[l] + params.biases[l];
    activations[l + 1] = (l + 1 < n) ? z.array().tanh().matrix() : z;
  }

  MLPGradient grad = zero_gradient(params);
  Eigen::VectorXd delta = upstream;
  for (std::size_t l = n; l-- > 0;) {
    if (l + 1 < n) {
      // d tanh(z) = 1 - tanh(z)^2, and activations[l+1] already holds tanh(z)
      delta = delta.cwiseProduct(
          (1.0 - activations[l + 1].array().square()).matrix());
    }
    grad.d_weights[l] = delta * activations[l].transpose();
    grad.d_biases[l] = delta;
    delta = params.weights[l].transpose() * delta;
  }
  grad.d_input = delta;
  return grad;
}

MLPGradient zero_gradient(const MLPParams& params) {
  MLPGradient grad;
  grad.d_input = Eigen::VectorXd::Zero(params.input_dim());
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    grad.d_weights.emplace_back(
        Eigen::MatrixXd::Zero(params.weights[l].rows(), params.weights[l].cols()));
    grad.d_biases.emplace_back(Eigen::VectorXd::Zero(params.biases[l].size()));
  }
  return grad;
}

}  // namespace flowes
