#include "flowes/latent_es.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace flowes {
namespace {

void check_population(const LatentParams& latent, const Eigen::MatrixXd& z, Eigen::Index n_values) {
  check_latent(latent);
  if (z.cols() != latent.mean.size()) {
    throw std::invalid_argument("latent_es: sample dimension does not match distribution");
  }
  if (z.rows() != n_values) {
    throw std::invalid_argument("latent_es: sample and value counts differ");
  }
  if (!z.allFinite()) {
    throw std::invalid_argument("latent_es: non-finite latent samples");
  }
}

// Solve A s = v for lower-triangular A.
Eigen::VectorXd standardize(const Eigen::MatrixXd& a, const Eigen::VectorXd& v) {
  return a.triangularView<Eigen::Lower>().solve(v);
}

}  // namespace

XnesRates default_xnes_rates(int dimension) {
  if (dimension < 1) {
    throw std::invalid_argument("default_xnes_rates: dimension must be positive");
  }
  const double d = static_cast<double>(dimension);
  return XnesRates{1.0, (9.0 + 3.0 * std::log(d)) / (5.0 * d * std::sqrt(d))};
}

Eigen::VectorXd make_utilities(const Eigen::VectorXd& f) {
  const Eigen::Index n = f.size();
  if (n < 1) {
    throw std::invalid_argument("make_utilities: empty population");
  }
  if (!f.allFinite()) {
    throw std::invalid_argument("make_utilities: non-finite objective values");
  }
  // order[k] holds the index of the rank-(k+1) sample; stable sort keeps
  // equal values in index order.
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&f](Eigen::Index a, Eigen::Index b) { return f[a] < f[b]; });

  Eigen::VectorXd u(n);
  const double log_half = std::log(static_cast<double>(n) / 2.0 + 1.0);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double raw = log_half - std::log(static_cast<double>(k) + 1.0);
    u[order[static_cast<size_t>(k)]] = std::max(0.0, raw);
  }
  const double total = u.sum();
  if (total > 0.0) {
    u /= total;
  }
  u.array() -= 1.0 / static_cast<double>(n);
  return u;
}

LatentParams xnes_update_with_utilities(const LatentParams& latent, const Eigen::MatrixXd& z,
                                        const Eigen::VectorXd& utilities,
                                        const XnesRates& rates) {
  check_population(latent, z, utilities.size());
  if (rates.eta_mean == 0.0 && rates.eta_sigma == 0.0) {
    return latent;
  }
  const Eigen::Index n = z.rows();
  const Eigen::Index d = z.cols();

  Eigen::VectorXd g_mean = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd g_m = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd s = standardize(latent.cov_factor, z.row(i).transpose() - latent.mean);
    g_mean += utilities[i] * s;
    g_m += utilities[i] * (s * s.transpose() - Eigen::MatrixXd::Identity(d, d));
  }

  LatentParams next;
  next.mean = latent.mean + rates.eta_mean * latent.cov_factor * g_mean;
  const Eigen::MatrixXd expm = (0.5 * rates.eta_sigma * g_m).exp();
  const Eigen::MatrixXd a = latent.cov_factor * expm;

  // The multiplicative update leaves triangular form; re-factor the implied
  // covariance to restore it.
  if (!next.mean.allFinite() || !a.allFinite()) {
    throw DivergenceError("xnes_update: non-finite parameters after step");
  }
  const Eigen::MatrixXd sigma = a * a.transpose();
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw DivergenceError("xnes_update: covariance lost positive definiteness");
  }
  next.cov_factor = llt.matrixL();
  if (!next.cov_factor.allFinite() || (next.cov_factor.diagonal().array() <= 0.0).any()) {
    throw DivergenceError("xnes_update: degenerate covariance factor");
  }
  return next;
}

LatentParams xnes_update(const LatentParams& latent, const EvaluatedLatentPopulation& pop,
                         const XnesRates& rates) {
  if (pop.f.size() < 2) {
    throw std::invalid_argument("xnes_update: population must hold at least 2 samples");
  }
  return xnes_update_with_utilities(latent, pop.z, make_utilities(pop.f), rates);
}

LatentParams pges_update(const LatentParams& latent, const EvaluatedLatentPopulation& pop,
                         double learning_rate) {
  check_population(latent, pop.z, pop.f.size());
  if (pop.f.size() < 2) {
    throw std::invalid_argument("pges_update: population must hold at least 2 samples");
  }
  if (!pop.f.allFinite()) {
    throw std::invalid_argument("pges_update: non-finite objective values");
  }
  if (learning_rate == 0.0) {
    return latent;
  }
  const Eigen::Index n = pop.z.rows();
  const Eigen::Index d = pop.z.cols();
  const double baseline = pop.f.mean();

  // Score-function gradient of the expected objective. With s = A^{-1}(z - m):
  //   d log density / d mean = A^{-T} s
  //   d log density / d A    = tril(A^{-T} (s s^T - I))
  Eigen::VectorXd grad_mean = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd grad_a = Eigen::MatrixXd::Zero(d, d);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd s = standardize(latent.cov_factor, pop.z.row(i).transpose() - latent.mean);
    const double advantage = pop.f[i] - baseline;
    grad_mean += advantage *
                 latent.cov_factor.transpose().triangularView<Eigen::Upper>().solve(s);
    const Eigen::MatrixXd score_a = latent.cov_factor.transpose()
                                        .triangularView<Eigen::Upper>()
                                        .solve(s * s.transpose() - eye);
    grad_a += advantage * score_a;
  }
  grad_mean /= static_cast<double>(n);
  grad_a /= static_cast<double>(n);

  LatentParams next;
  next.mean = latent.mean - learning_rate * grad_mean;
  next.cov_factor = latent.cov_factor;
  next.cov_factor.triangularView<Eigen::Lower>() -= learning_rate * grad_a;
  if (!next.mean.allFinite() || !next.cov_factor.allFinite()) {
    throw DivergenceError("pges_update: non-finite parameters after step");
  }
  if ((next.cov_factor.diagonal().array() <= 0.0).any()) {
    throw DivergenceError("pges_update: covariance factor lost positive diagonal");
  }
  return next;
}

}  // namespace flowes
