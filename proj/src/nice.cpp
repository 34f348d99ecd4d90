#include "flowes/nice.hpp"

#include <cmath>
#include <stdexcept>

#include "flowes/rng.hpp"

namespace flowes {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void check_layer(const CouplingLayer& layer) {
  const int d = layer.dimension();
  if (d < 2) throw std::invalid_argument("coupling layer: dimension must be >= 2");
  const int ones = layer.pass_count();
  if (ones == 0 || ones == d)
    throw std::invalid_argument("coupling layer: mask must keep and shift at least one coordinate");
  if (layer.t_net.input_dim() != ones || layer.t_net.output_dim() != d - ones)
    throw std::invalid_argument("coupling layer: t_net shape does not match mask");
}

Eigen::VectorXd gather_pass(const CouplingLayer& layer, const Eigen::VectorXd& v) {
  Eigen::VectorXd out(layer.pass_count());
  int k = 0;
  for (int i = 0; i < layer.dimension(); ++i)
    if (layer.mask[i]) out[k++] = v[i];
  return out;
}

}  // namespace

int CouplingLayer::pass_count() const {
  int n = 0;
  for (auto m : mask) n += (m != 0);
  return n;
}

int CouplingLayer::shift_count() const { return dimension() - pass_count(); }

std::size_t FlowParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.t_net.parameter_count();
  return n;
}

LatentParams make_latent(int dimension) {
  if (dimension < 1) throw std::invalid_argument("latent: dimension must be positive");
  LatentParams latent;
  latent.mean = Eigen::VectorXd::Zero(dimension);
  latent.cov_factor = Eigen::MatrixXd::Identity(dimension, dimension);
  return latent;
}

void check_latent(const LatentParams& latent) {
  const int d = latent.dimension();
  if (latent.cov_factor.rows() != d || latent.cov_factor.cols() != d)
    throw std::invalid_argument("latent: cov_factor must be d x d");
  if (!latent.mean.allFinite() || !latent.cov_factor.allFinite())
    throw std::invalid_argument("latent: parameters must be finite");
  for (int i = 0; i < d; ++i) {
    if (latent.cov_factor(i, i) <= 0.0)
      throw std::invalid_argument("latent: cov_factor diagonal must be strictly positive");
    for (int j = i + 1; j < d; ++j)
      if (latent.cov_factor(i, j) != 0.0)
        throw std::invalid_argument("latent: cov_factor must be lower triangular");
  }
}

FlowParams make_nice_flow(int dimension, int n_layers, int hidden,
                          std::mt19937_64& rng, double final_scale) {
  if (dimension < 2)
    throw std::invalid_argument("nice flow: dimension must be >= 2 (coupling needs a split)");
  if (n_layers < 1) throw std::invalid_argument("nice flow: need at least one layer");
  FlowParams flow;
  flow.dimension = dimension;
  for (int k = 0; k < n_layers; ++k) {
    CouplingLayer layer;
    layer.mask.resize(dimension);
    for (int i = 0; i < dimension; ++i)
      layer.mask[i] = static_cast<std::uint8_t>((i % 2) == (k % 2));
    const int in = layer.pass_count();
    const int out = dimension - in;
    layer.t_net = make_mlp({in, hidden, out});
    randomize_mlp(layer.t_net, rng, final_scale);
    check_layer(layer);
    flow.layers.push_back(std::move(layer));
  }
  return flow;
}

Eigen::VectorXd coupling_forward(const CouplingLayer& layer, const Eigen::VectorXd& u) {
  check_layer(layer);
  if (u.size() != layer.dimension())
    throw std::invalid_argument("coupling_forward: input length does not match mask");
  const Eigen::VectorXd shift = mlp_forward(layer.t_net, gather_pass(layer, u));
  Eigen::VectorXd v = u;
  int k = 0;
  for (int i = 0; i < layer.dimension(); ++i)
    if (!layer.mask[i]) v[i] += shift[k++];
  return v;
}

Eigen::VectorXd coupling_inverse(const CouplingLayer& layer, const Eigen::VectorXd& v) {
  check_layer(layer);
  if (v.size() != layer.dimension())
    throw std::invalid_argument("coupling_inverse: input length does not match mask");
  const Eigen::VectorXd shift = mlp_forward(layer.t_net, gather_pass(layer, v));
  Eigen::VectorXd u = v;
  int k = 0;
  for (int i = 0; i < layer.dimension(); ++i)
    if (!layer.mask[i]) u[i] -= shift[k++];
  return u;
}

Eigen::VectorXd flow_forward(const FlowParams& flow, const Eigen::VectorXd& z) {
  Eigen::VectorXd v = z;
  for (const auto& layer : flow.layers) v = coupling_forward(layer, v);
  return v;
}

Eigen::VectorXd flow_inverse(const FlowParams& flow, const Eigen::VectorXd& x) {
  Eigen::VectorXd v = x;
  for (auto it = flow.layers.rbegin(); it != flow.layers.rend(); ++it)
    v = coupling_inverse(*it, v);
  return v;
}

double latent_log_density(const LatentParams& latent, const Eigen::VectorXd& z) {
  check_latent(latent);
  const int d = latent.dimension();
  if (z.size() != d) throw std::invalid_argument("latent_log_density: dimension mismatch");
  const Eigen::VectorXd s =
      latent.cov_factor.triangularView<Eigen::Lower>().solve(z - latent.mean);
  double log_det = 0.0;
  for (int i = 0; i < d; ++i) log_det += std::log(latent.cov_factor(i, i));
  return -0.5 * d * kLog2Pi - log_det - 0.5 * s.squaredNorm();
}

double log_density(const LatentParams& latent, const FlowParams& flow,
                   const Eigen::VectorXd& x) {
  return latent_log_density(latent, flow_inverse(flow, x));
}

double latent_entropy(const LatentParams& latent) {
  check_latent(latent);
  const int d = latent.dimension();
  double log_det = 0.0;
  for (int i = 0; i < d; ++i) log_det += std::log(latent.cov_factor(i, i));
  return 0.5 * d * (kLog2Pi + 1.0) + log_det;
}

Eigen::MatrixXd sample_latent(const LatentParams& latent, int n, std::mt19937_64& rng) {
  check_latent(latent);
  const int d = latent.dimension();
  Eigen::MatrixXd z(n, d);
  Eigen::VectorXd xi(d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) xi[j] = gaussian(rng);
    z.row(i) = (latent.mean + latent.cov_factor * xi).transpose();
  }
  return z;
}

SampleBatch sample(const LatentParams& latent, const FlowParams& flow, int n,
                   std::mt19937_64& rng) {
  SampleBatch batch;
  batch.z = sample_latent(latent, n, rng);
  batch.x.resizeLike(batch.z);
  for (int i = 0; i < n; ++i)
    batch.x.row(i) = flow_forward(flow, batch.z.row(i).transpose()).transpose();
  return batch;
}

LogDensityGrad grad_log_density_eta(const LatentParams& latent, const FlowParams& flow,
                                    const Eigen::VectorXd& x) {
  const int n_layers = static_cast<int>(flow.layers.size());
  // Inverse pass, keeping every intermediate: stages[n_layers] = x,
  // stages[k] = inverse of layer k applied to stages[k+1].
  std::vector<Eigen::VectorXd> stages(n_layers + 1);
  stages[n_layers] = x;
  for (int k = n_layers - 1; k >= 0; --k)
    stages[k] = coupling_inverse(flow.layers[k], stages[k + 1]);

  LogDensityGrad result;
  result.z = stages[0];
  result.value = latent_log_density(latent, result.z);

  // d log nu / dz = -Sigma^{-1}(z - mean), via two triangular solves.
  const auto lower = latent.cov_factor.triangularView<Eigen::Lower>();
  const Eigen::VectorXd s = lower.solve(result.z - latent.mean);
  Eigen::VectorXd cotangent = -lower.transpose().solve(s);

  // Walk the inversion chain back from z toward x. Step k computed
  // stages[k][shift] = stages[k+1][shift] - t_k(stages[k+1][pass]).
  result.d_flow.layers.resize(n_layers);
  for (int k = 0; k < n_layers; ++k) {
    const CouplingLayer& layer = flow.layers[k];
    const int d = layer.dimension();
    Eigen::VectorXd upstream(layer.shift_count());
    int m = 0;
    for (int i = 0; i < d; ++i)
      if (!layer.mask[i]) upstream[m++] = -cotangent[i];
    MLPGradient bundle =
        mlp_backward(layer.t_net, gather_pass(layer, stages[k + 1]), upstream);
    Eigen::VectorXd next(d);
    int p = 0;
    for (int i = 0; i < d; ++i)
      next[i] = layer.mask[i] ? cotangent[i] + bundle.d_input[p++] : cotangent[i];
    cotangent = std::move(next);
    result.d_flow.layers[k] = std::move(bundle);
  }
  return result;
}

Eigen::VectorXd flow_pack(const FlowParams& flow) {
  Eigen::VectorXd packed(flow.parameter_count());
  Eigen::Index at = 0;
  for (const auto& layer : flow.layers) {
    for (std::size_t l = 0; l < layer.t_net.weights.size(); ++l) {
      const auto& w = layer.t_net.weights[l];
      for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index j = 0; j < w.cols(); ++j) packed[at++] = w(i, j);
      const auto& b = layer.t_net.biases[l];
      for (Eigen::Index i = 0; i < b.size(); ++i) packed[at++] = b[i];
    }
  }
  return packed;
}

void flow_unpack(const Eigen::VectorXd& packed, FlowParams& flow) {
  if (static_cast<std::size_t>(packed.size()) != flow.parameter_count())
    throw std::invalid_argument("flow_unpack: length does not match flow shape");
  Eigen::Index at = 0;
  for (auto& layer : flow.layers) {
    for (std::size_t l = 0; l < layer.t_net.weights.size(); ++l) {
      auto& w = layer.t_net.weights[l];
      for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = packed[at++];
      auto& b = layer.t_net.biases[l];
      for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = packed[at++];
    }
  }
}

Eigen::VectorXd gradient_pack(const FlowParams& flow, const FlowGradient& grad) {
  Eigen::VectorXd packed(flow.parameter_count());
  Eigen::Index at = 0;
  for (std::size_t k = 0; k < flow.layers.size(); ++k) {
    const MLPGradient& g = grad.layers[k];
    for (std::size_t l = 0; l < g.d_weights.size(); ++l) {
      const auto& w = g.d_weights[l];
      for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index j = 0; j < w.cols(); ++j) packed[at++] = w(i, j);
      const auto& b = g.d_biases[l];
      for (Eigen::Index i = 0; i < b.size(); ++i) packed[at++] = b[i];
    }
  }
  return packed;
}

}  // namespace flowes
