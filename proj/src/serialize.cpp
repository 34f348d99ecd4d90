#include "flowes/serialize.hpp"

#include <fstream>
#include <stdexcept>

namespace flowes {
namespace {

nlohmann::ordered_json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    arr.push_back(v[i]);
  }
  return arr;
}

nlohmann::ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    rows.push_back(vector_to_json(m.row(i).transpose()));
  }
  return rows;
}

Eigen::VectorXd vector_from_json(const nlohmann::ordered_json& j) {
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::ordered_json& j) {
  if (j.empty()) {
    return Eigen::MatrixXd(0, 0);
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[static_cast<size_t>(i)].size()) != cols) {
      throw std::invalid_argument("serialize: ragged matrix rows");
    }
    m.row(i) = vector_from_json(j[static_cast<size_t>(i)]).transpose();
  }
  return m;
}

}  // namespace

nlohmann::ordered_json latent_to_json(const LatentParams& latent) {
  nlohmann::ordered_json j;
  j["mean"] = vector_to_json(latent.mean);
  j["cov_factor"] = matrix_to_json(latent.cov_factor);
  return j;
}

LatentParams latent_from_json(const nlohmann::ordered_json& j) {
  LatentParams latent;
  latent.mean = vector_from_json(j.at("mean"));
  latent.cov_factor = matrix_from_json(j.at("cov_factor"));
  check_latent(latent);
  return latent;
}

nlohmann::ordered_json flow_to_json(const FlowParams& flow) {
  nlohmann::ordered_json j;
  j["dimension"] = flow.dimension;
  nlohmann::ordered_json layers = nlohmann::ordered_json::array();
  for (const auto& layer : flow.layers) {
    nlohmann::ordered_json lj;
    nlohmann::ordered_json mask = nlohmann::ordered_json::array();
    for (const auto bit : layer.mask) {
      mask.push_back(static_cast<int>(bit));
    }
    lj["mask"] = mask;
    nlohmann::ordered_json net;
    net["layer_sizes"] = layer.t_net.layer_sizes;
    nlohmann::ordered_json weights = nlohmann::ordered_json::array();
    for (const auto& w : layer.t_net.weights) {
      weights.push_back(matrix_to_json(w));
    }
    net["weights"] = weights;
    nlohmann::ordered_json biases = nlohmann::ordered_json::array();
    for (const auto& b : layer.t_net.biases) {
      biases.push_back(vector_to_json(b));
    }
    net["biases"] = biases;
    lj["t_net"] = net;
    layers.push_back(lj);
  }
  j["layers"] = layers;
  return j;
}

FlowParams flow_from_json(const nlohmann::ordered_json& j) {
  FlowParams flow;
  flow.dimension = j.at("dimension").get<int>();
  for (const auto& lj : j.at("layers")) {
    CouplingLayer layer;
    for (const auto& bit : lj.at("mask")) {
      layer.mask.push_back(static_cast<std::uint8_t>(bit.get<int>() != 0 ? 1 : 0));
    }
    const auto& net = lj.at("t_net");
    layer.t_net.layer_sizes = net.at("layer_sizes").get<std::vector<int>>();
    for (const auto& w : net.at("weights")) {
      layer.t_net.weights.push_back(matrix_from_json(w));
    }
    for (const auto& b : net.at("biases")) {
      layer.t_net.biases.push_back(vector_from_json(b));
    }
    flow.layers.push_back(std::move(layer));
  }
  return flow;
}

void save_params(const LatentParams& latent, const FlowParams& flow, const std::string& path) {
  nlohmann::ordered_json j;
  j["latent"] = latent_to_json(latent);
  j["flow"] = flow_to_json(flow);
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("save_params: cannot open " + path);
  }
  out << j.dump(2) << "\n";
}

std::pair<LatentParams, FlowParams> load_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("load_params: cannot open " + path);
  }
  nlohmann::ordered_json j;
  in >> j;
  return {latent_from_json(j.at("latent")), flow_from_json(j.at("flow"))};
}

nlohmann::ordered_json row_to_json(const GenerationRecord& row) {
  nlohmann::ordered_json j;
  j["generation"] = row.generation;
  j["evaluations"] = row.evaluations;
  j["best_f"] = row.best_f;
  j["mean_f"] = row.mean_f;
  j["lambda"] = row.lambda;
  j["kl"] = row.kl;
  j["entropy"] = row.entropy;
  return j;
}

GenerationRecord row_from_json(const nlohmann::ordered_json& j) {
  GenerationRecord row;
  row.generation = j.at("generation").get<int>();
  row.evaluations = j.at("evaluations").get<std::uint64_t>();
  row.best_f = j.at("best_f").get<double>();
  row.mean_f = j.at("mean_f").get<double>();
  row.lambda = j.at("lambda").get<double>();
  row.kl = j.at("kl").get<double>();
  row.entropy = j.at("entropy").get<double>();
  return row;
}

}  // namespace flowes
