#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace flowes {

enum class ObjectiveKind {
  sphere,
  rosenbrock,
  cigar,
  bent_cigar,
  rastrigin,
  griewank,
  beale,
  styblinski,
};

/// A benchmark landscape instance: the named function composed with a random
/// translation (and, for bent_cigar, a random rotation and asymmetry
/// coefficient), plus an evaluation counter. Movable, not copyable.
struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::sphere;
  int dimension = 0;
  Eigen::VectorXd translation;
  std::optional<Eigen::MatrixXd> rotation;
  double beta = 0.0;
  mutable std::atomic<std::uint64_t> evaluations{0};

  ObjectiveSpec() = default;
  ObjectiveSpec(ObjectiveSpec&& other) noexcept
      : kind(other.kind),
        dimension(other.dimension),
        translation(std::move(other.translation)),
        rotation(std::move(other.rotation)),
        beta(other.beta),
        evaluations(other.evaluations.load()) {}
  ObjectiveSpec& operator=(ObjectiveSpec&& other) noexcept {
    kind = other.kind;
    dimension = other.dimension;
    translation = std::move(other.translation);
    rotation = std::move(other.rotation);
    beta = other.beta;
    evaluations.store(other.evaluations.load());
    return *this;
  }
  ObjectiveSpec(const ObjectiveSpec&) = delete;
  ObjectiveSpec& operator=(const ObjectiveSpec&) = delete;
};

/// Evaluates f(x - translation) and bumps the counter. Thread safe; the
/// counter is the only mutation.
double evaluate(const ObjectiveSpec& spec, const Eigen::VectorXd& x);

/// Coordinate-wise asymmetry operator: positive coordinates are raised to
/// 1 + beta * ((i-1)/(d-1)) * sqrt(x_i) (indices 1-based), the rest pass
/// through.
Eigen::VectorXd t_asy(const Eigen::VectorXd& x, double beta);

/// Haar-distributed rotation: QR of a Gaussian matrix with the sign
/// convention fixed, then reflected if needed so det = +1.
Eigen::MatrixXd random_rotation(int dimension, std::mt19937_64& rng);

/// Names accepted by make_objective, in registry order.
const std::vector<std::string>& objective_names();

std::string objective_name(ObjectiveKind kind);

/// Asymmetry coefficient used for bent_cigar: 0.5 below d=10, 2 from there up.
double default_beta(int dimension);

/// Builds a randomly translated instance; bent_cigar also draws a rotation.
/// Draw order (translation first, then rotation) is part of the seeding
/// contract so equal seeds produce equal instances.
ObjectiveSpec make_objective(const std::string& name, int dimension, std::mt19937_64& rng);

}  // namespace flowes
