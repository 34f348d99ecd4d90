#include "flowes/objectives.hpp"

#include <cmath>
#include <stdexcept>

#include "flowes/rng.hpp"

namespace flowes {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double sphere(const Eigen::VectorXd& y) { return y.squaredNorm(); }

double rosenbrock(const Eigen::VectorXd& y) {
  double total = 0.0;
  for (Eigen::Index i = 0; i + 1 < y.size(); ++i) {
    const double a = 1.0 - y[i];
    const double b = y[i + 1] - y[i] * y[i];
    total += a * a + 100.0 * b * b;
  }
  return total;
}

double cigar(const Eigen::VectorXd& y) {
  return y[0] * y[0] + 1e4 * y.tail(y.size() - 1).squaredNorm();
}

double rastrigin(const Eigen::VectorXd& y) {
  double total = 10.0 * static_cast<double>(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    total += y[i] * y[i] - 10.0 * std::cos(kTwoPi * y[i]);
  }
  return total;
}

double griewank(const Eigen::VectorXd& y) {
  double product = 1.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    product *= std::cos(y[i] / std::sqrt(static_cast<double>(i + 1)));
  }
  return y.squaredNorm() / 4000.0 - product + 1.0;
}

double beale(const Eigen::VectorXd& y) {
  const double x1 = y[0];
  const double x2 = y[1];
  const double a = 1.5 - x1 + x1 * x2;
  const double b = 2.25 - x1 + x1 * x2 * x2;
  const double c = 2.625 - x1 + x1 * x2 * x2 * x2;
  double total = a * a + b * b + c * c;
  for (Eigen::Index i = 2; i < y.size(); ++i) {
    total += y[i] * y[i];
  }
  return total;
}

double styblinski(const Eigen::VectorXd& y) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double sq = y[i] * y[i];
    total += sq * sq - 16.0 * sq + 5.0 * y[i];
  }
  return 0.5 * total;
}

double bent_cigar(const ObjectiveSpec& spec, const Eigen::VectorXd& y) {
  const Eigen::MatrixXd& r = *spec.rotation;
  return cigar(r * t_asy(r * y, spec.beta));
}

}  // namespace

double evaluate(const ObjectiveSpec& spec, const Eigen::VectorXd& x) {
  if (x.size() != spec.dimension) {
    throw std::invalid_argument("evaluate: point dimension does not match objective");
  }
  if (!x.allFinite()) {
    throw std::invalid_argument("evaluate: non-finite point");
  }
  spec.evaluations.fetch_add(1, std::memory_order_relaxed);
  const Eigen::VectorXd y = x - spec.translation;
  switch (spec.kind) {
    case ObjectiveKind::sphere:
      return sphere(y);
    case ObjectiveKind::rosenbrock:
      return rosenbrock(y);
    case ObjectiveKind::cigar:
      return cigar(y);
    case ObjectiveKind::bent_cigar:
      return bent_cigar(spec, y);
    case ObjectiveKind::rastrigin:
      return rastrigin(y);
    case ObjectiveKind::griewank:
      return griewank(y);
    case ObjectiveKind::beale:
      return beale(y);
    case ObjectiveKind::styblinski:
      return styblinski(y);
  }
  throw std::logic_error("evaluate: unknown objective kind");
}

Eigen::VectorXd t_asy(const Eigen::VectorXd& x, double beta) {
  const Eigen::Index d = x.size();
  Eigen::VectorXd out = x;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (out[i] > 0.0) {
      const double frac = d > 1 ? static_cast<double>(i) / static_cast<double>(d - 1) : 0.0;
      out[i] = std::pow(out[i], 1.0 + beta * frac * std::sqrt(out[i]));
    }
  }
  return out;
}

Eigen::MatrixXd random_rotation(int dimension, std::mt19937_64& rng) {
  if (dimension < 1) {
    throw std::invalid_argument("random_rotation: dimension must be positive");
  }
  if (dimension == 1) {
    return Eigen::MatrixXd::Ones(1, 1);
  }
  Eigen::MatrixXd g(dimension, dimension);
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      g(i, j) = gaussian(rng);
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  // Fix the QR sign ambiguity so the distribution is Haar, then reflect the
  // last column if needed to land in the rotation group.
  const Eigen::VectorXd diag = qr.matrixQR().diagonal();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (diag[j] < 0.0) {
      q.col(j) = -q.col(j);
    }
  }
  if (q.determinant() < 0.0) {
    q.col(q.cols() - 1) = -q.col(q.cols() - 1);
  }
  return q;
}

const std::vector<std::string>& objective_names() {
  static const std::vector<std::string> names = {
      "sphere",    "rosenbrock", "cigar", "bent_cigar",
      "rastrigin", "griewank",   "beale", "styblinski",
  };
  return names;
}

std::string objective_name(ObjectiveKind kind) {
  return objective_names()[static_cast<size_t>(kind)];
}

double default_beta(int dimension) { return dimension < 10 ? 0.5 : 2.0; }

ObjectiveSpec make_objective(const std::string& name, int dimension, std::mt19937_64& rng) {
  ObjectiveKind kind;
  if (name == "sphere") {
    kind = ObjectiveKind::sphere;
  } else if (name == "rosenbrock") {
    kind = ObjectiveKind::rosenbrock;
  } else if (name == "cigar") {
    kind = ObjectiveKind::cigar;
  } else if (name == "bent_cigar") {
    kind = ObjectiveKind::bent_cigar;
  } else if (name == "rastrigin") {
    kind = ObjectiveKind::rastrigin;
  } else if (name == "griewank") {
    kind = ObjectiveKind::griewank;
  } else if (name == "beale") {
    kind = ObjectiveKind::beale;
  } else if (name == "styblinski") {
    kind = ObjectiveKind::styblinski;
  } else {
    throw std::invalid_argument("make_objective: unknown objective '" + name + "'");
  }
  const int min_dim =
      (kind == ObjectiveKind::rosenbrock || kind == ObjectiveKind::beale ||
       kind == ObjectiveKind::bent_cigar || kind == ObjectiveKind::cigar)
          ? 2
          : 1;
  if (dimension < min_dim) {
    throw std::invalid_argument("make_objective: dimension too small for " + name);
  }

  ObjectiveSpec spec;
  spec.kind = kind;
  spec.dimension = dimension;
  spec.translation.resize(dimension);
  for (int i = 0; i < dimension; ++i) {
    spec.translation[i] = uniform(rng, -2.0, 2.0);
  }
  if (kind == ObjectiveKind::bent_cigar) {
    spec.rotation = random_rotation(dimension, rng);
    spec.beta = default_beta(dimension);
  }
  return spec;
}

}  // namespace flowes
