#pragma once

// Bottom of the spectrum of the normal operator M = A^T W A of adjointDS.
// Dense eigenvalue solve up to 4096 unknowns, then shift-invert subspace
// iteration for eigenvectors; above that, the same iteration with
// preconditioned conjugate-gradient inner solves.

#include "akscal/error.hpp"
#include "akscal/operator_lab.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace akscal::oplab {

inline constexpr std::size_t kDenseLimit = 4096;
inline constexpr double kNullTol = 1e-8;
inline constexpr double kResidualTol = 1e-8;

struct SpectralReport {
  std::string variant;
  int n = 0;
  std::size_t unknowns = 0;
  std::string method;  // "dense" or "iterative"
  std::vector<double> eigenvalues;  // ascending
  std::vector<double> residuals;    // ||M v - lambda v|| / ||v||
  Eigen::MatrixXd eigenvectors;     // columns, unit norm
  int nullity = 0;                  // eigenvalues <= kNullTol among those computed
  double constantOverlap = 0.0;     // norm of the projection of the unit constant onto the null space
  double constantDeviation = 0.0;   // || v0 - c || for the null vector closest to constants
  int iterations = 0;
  double seconds = 0.0;

  double lambdaMin() const { return eigenvalues.front(); }
  double maxResidual() const { return *std::max_element(residuals.begin(), residuals.end()); }
};

namespace detail {

/// Orthonormal basis of span(V) by Householder QR.
inline Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& v) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
  return qr.householderQ() * Eigen::MatrixXd::Identity(v.rows(), v.cols());
}

/// Subspace iteration with (M - sigma I)^{-1} and Rayleigh-Ritz; returns
/// ascending Ritz pairs once the first `want` residuals drop below tol.
template <class Solve>
void subspaceIteration(const Eigen::SparseMatrix<double>& m, Solve&& solve, int want, int block, std::uint64_t seed,
                       SpectralReport& out, int maxIter = 200) {
  const Eigen::Index n = m.rows();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd v(n, block);
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = gauss(rng);
  v = orthonormalize(v);
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= maxIter; ++it) {
    Eigen::MatrixXd w(n, block);
    for (int c = 0; c < block; ++c) w.col(c) = solve(v.col(c));
    w = orthonormalize(w);
    const Eigen::MatrixXd mw = m * w;
    Eigen::MatrixXd h = w.transpose() * mw;
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    v = w * es.eigenvectors();
    const Eigen::MatrixXd mv = mw * es.eigenvectors();
    out.eigenvalues.assign(want, 0.0);
    out.residuals.assign(want, 0.0);
    double worst = 0.0;
    for (int c = 0; c < want; ++c) {
      out.eigenvalues[c] = es.eigenvalues()(c);
      out.residuals[c] = (mv.col(c) - es.eigenvalues()(c) * v.col(c)).norm();
      worst = std::max(worst, out.residuals[c]);
    }
    out.iterations = it;
    // Stop well below tolerance, or once below it and stagnating at round-off.
    if (worst < kResidualTol * 1e-3 || (worst < kResidualTol && worst > 0.5 * previous)) break;
    previous = worst;
  }
  out.eigenvectors = v.leftCols(want);
}

}  // namespace detail

/// The `want` smallest eigenpairs of M for the given variant.
inline SpectralReport kernelGap(const Variant& v, int want = 6, std::uint64_t seed = 0x5eed) {
  if (want < 1) throw Error("operator-lab", "spectrum", "need at least one eigenvalue");
  const auto start = std::chrono::steady_clock::now();
  const Eigen::SparseMatrix<double> m = normalOperator(v);
  const Eigen::Index n = m.rows();
  if (want > n) throw Error("operator-lab", "spectrum", "more eigenvalues requested than unknowns");
  SpectralReport out;
  out.variant = v.name;
  out.n = v.grid.count(0);
  out.unknowns = static_cast<std::size_t>(n);
  const Eigen::SparseMatrix<double> eye = [&] {
    Eigen::SparseMatrix<double> i(n, n);
    i.setIdentity();
    return i;
  }();

  if (static_cast<std::size_t>(n) <= kDenseLimit) {
    out.method = "dense";
    const Eigen::MatrixXd dense(m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& lam = es.eigenvalues();
    const double scale = std::max(1.0, std::abs(lam(n - 1)));
    // Clusters of (numerically) equal eigenvalues; the last one is completed
    // so that no eigenspace is split.
    Eigen::MatrixXd basis(n, 0);
    Eigen::Index c0 = 0;
    while (c0 < want) {
      Eigen::Index c1 = c0 + 1;
      while (c1 < n && lam(c1) - lam(c1 - 1) <= 1e-9 * scale) ++c1;
      const int mult = static_cast<int>(c1 - c0);
      const double sigma = lam(c0) - 1e-7 * scale;
      Eigen::MatrixXd shifted = dense;
      shifted.diagonal().array() -= sigma;
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(shifted);
      if (ldlt.info() != Eigen::Success) throw Error("operator-lab", "spectrum", "shifted factorization failed");
      SpectralReport part;
      detail::subspaceIteration(m, [&](const Eigen::VectorXd& b) -> Eigen::VectorXd { return ldlt.solve(b); }, mult,
                                mult, seed + static_cast<std::uint64_t>(c0), part, 50);
      out.iterations += part.iterations;
      Eigen::MatrixXd grown(n, basis.cols() + mult);
      grown << basis, part.eigenvectors;
      basis = grown;
      c0 = c1;
    }
    // Rayleigh-Ritz on the union of cluster bases.
    basis = detail::orthonormalize(basis);
    Eigen::MatrixXd h = basis.transpose() * (m * basis);
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rr(h);
    const Eigen::MatrixXd vecs = basis * rr.eigenvectors();
    const Eigen::MatrixXd mv = m * vecs;
    const int got = static_cast<int>(vecs.cols());
    out.eigenvectors = vecs;
    out.eigenvalues.resize(got);
    out.residuals.resize(got);
    for (int c = 0; c < got; ++c) {
      out.eigenvalues[c] = rr.eigenvalues()(c);
      out.residuals[c] = (mv.col(c) - rr.eigenvalues()(c) * vecs.col(c)).norm();
      // Dense eigenvalues are authoritative; Ritz values must agree with them.
      if (std::abs(lam(c) - out.eigenvalues[c]) > 1e-9 * scale)
        throw Error("operator-lab", "spectrum", "Ritz values disagree with the dense spectrum");
    }
  } else {
    out.method = "iterative";
    const double sigma = -1e-3;
    const Eigen::SparseMatrix<double> shifted = m - sigma * eye;
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::IncompleteCholesky<double>>
        cg(shifted);
    cg.setTolerance(1e-13);
    cg.setMaxIterations(20000);
    detail::subspaceIteration(
        m,
        [&](const Eigen::VectorXd& b) -> Eigen::VectorXd {
          Eigen::VectorXd x = cg.solve(b);
          if (cg.info() != Eigen::Success && cg.error() > 1e-8)
            throw Error("operator-lab", "spectrum", "conjugate gradient did not converge");
          return x;
        },
        want, static_cast<int>(std::min<Eigen::Index>(n, want + 4)), seed, out);
  }

  // Null space and its relation to constants.
  for (double lam : out.eigenvalues)
    if (lam <= kNullTol) ++out.nullity;
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  if (out.nullity > 0) {
    const Eigen::MatrixXd null = out.eigenvectors.leftCols(out.nullity);
    const Eigen::VectorXd coeff = null.transpose() * c;
    out.constantOverlap = coeff.norm();
    if (out.constantOverlap > 0.0) {
      Eigen::VectorXd v0 = null * coeff / out.constantOverlap;
      out.constantDeviation = (v0 - c).norm();
    }
  } else {
    out.constantOverlap = std::abs(out.eigenvectors.col(0).dot(c));
    out.constantDeviation = std::min((out.eigenvectors.col(0) - c).norm(), (out.eigenvectors.col(0) + c).norm());
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

/// Rayleigh quotient ||A psi||_W^2 / ||psi||^2 in unit-free node sums.
inline double rayleighQuotient(const Variant& v, const Field& psi) {
  const Eigen::SparseMatrix<double> m = normalOperator(v);
  return psi.dot(m * psi) / psi.squaredNorm();
}

struct GapComparison {
  SpectralReport flat;
  std::vector<SpectralReport> kt;  // one per grid size
  double flatFloor = 0.0;           // |flat lambda_min| + solver tolerance
  double worstMargin = 0.0;         // min over grids of kt lambda_min / flatFloor
  double variation = 0.0;           // max relative change of kt lambda_min between successive grids
  bool nonDecreasing = true;
};

/// Kodaira-Thurston minimum eigenvalue across grids against the flat torus floor.
inline GapComparison compareGaps(const std::vector<int>& ktSizes, int flatSize, double d = 1.0) {
  GapComparison g;
  g.flat = kernelGap(flatTorus(flatSize, flatSize));
  g.flatFloor = std::abs(g.flat.lambdaMin()) + kNullTol;
  g.worstMargin = std::numeric_limits<double>::infinity();
  for (int n : ktSizes) {
    g.kt.push_back(kernelGap(ktVariant(Grid::twisted(n, n, d)), 1));
    g.worstMargin = std::min(g.worstMargin, g.kt.back().lambdaMin() / g.flatFloor);
  }
  for (std::size_t i = 1; i < g.kt.size(); ++i) {
    const double a = g.kt[i - 1].lambdaMin(), b = g.kt[i].lambdaMin();
    g.variation = std::max(g.variation, std::abs(b - a) / std::abs(a));
    if (b < a) g.nonDecreasing = false;
  }
  return g;
}

}  // namespace akscal::oplab
