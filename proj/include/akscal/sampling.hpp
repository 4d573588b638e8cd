#pragma once

// Seeded generators for property checks: random symmetric tensors, random
// anti-invariant tensors and random compatible triples.

#include "akscal/tensor_core.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace akscal::sampling {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline Eigen::MatrixXd randomMatrix(Rng& rng, Eigen::Index n, double scale = 1.0) {
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = uniform(rng, -scale, scale);
  return m;
}

inline tensor::SymTensor randomSymmetric(Rng& rng, Eigen::Index n, double scale = 1.0) {
  return tensor::SymTensor(tensor::symmetrized<double>(randomMatrix(rng, n, scale)));
}

/// Random J-anti-invariant symmetric tensor with max-abs entry <= maxNorm.
inline tensor::SymTensor randomAntiInvariant(Rng& rng, const tensor::AcsMatrix& j, double maxNorm = 1.0) {
  Eigen::MatrixXd a = tensor::antiInvariantPart<double>(randomSymmetric(rng, j.dim()).matrix(), j.matrix());
  const double m = tensor::maxAbs<double>(a);
  if (m > 0.0) a *= uniform(rng, 0.1, 1.0) * maxNorm / m;
  return tensor::SymTensor(tensor::symmetrized<double>(a));
}

struct CompatibleTriple {
  tensor::MetricMatrix g;
  tensor::SymplecticMatrix omega;
  tensor::AcsMatrix j;
};

/// g = P^T (I . e^h) P and omega = P^T omega0 P for a random anti-invariant h
/// and a random well-conditioned P; J follows as Omega^{-1} g.
inline CompatibleTriple randomCompatibleTriple(Rng& rng, Eigen::Index n) {
  const auto omega0 = tensor::SymplecticMatrix::standard(n);
  const auto j0 = tensor::AcsMatrix::standard(n);
  const auto g0 = tensor::expMetric(tensor::MetricMatrix::identity(n), randomAntiInvariant(rng, j0, 0.8));
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n) + randomMatrix(rng, n, 0.3);
  Eigen::MatrixXd g = tensor::symmetrized<double>(p.transpose() * g0.matrix() * p);
  Eigen::MatrixXd w = p.transpose() * omega0.matrix() * p;
  Eigen::MatrixXd skew = (w - w.transpose()) / 2.0;
  for (Eigen::Index i = 0; i < n; ++i) skew(i, i) = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = i + 1; k < n; ++k) skew(k, i) = -skew(i, k);
  tensor::MetricMatrix gm(g);
  tensor::SymplecticMatrix om(skew);
  auto j = tensor::compatibleAcs(gm, om);
  if (!j) throw Error("sampling", "triple", "generated triple failed compatibility");
  return {gm, om, *j};
}

}  // namespace akscal::sampling
