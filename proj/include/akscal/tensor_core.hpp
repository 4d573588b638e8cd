#pragma once

// Pointwise linear algebra of compatible triples (g, omega, J) in
// orthonormal-frame components. Frame conventions used throughout:
//   * J acts on column vectors, J e_j = sum_i J(i,j) e_i;
//   * A(JX, JY) has matrix J^T A J;
//   * omega(X, Y) = X^T Omega Y and g(X, Y) = omega(X, J Y), so J = Omega^{-1} g.

#include "akscal/error.hpp"
#include "akscal/rational.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace akscal::tensor {

inline constexpr double kCompatibilityTol = 1e-10;
inline constexpr double kAcsTol = 1e-12;

template <class S>
double maxAbs(const Mat<S>& m) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) best = std::max(best, std::abs(toDouble(m(i, j))));
  return best;
}

/// Exact comparison for Rational, max-abs tolerance for floating point.
template <class S>
bool nearlyZero(const Mat<S>& m, double tol) {
  if constexpr (is_exact_v<S>) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        if (m(i, j) != S(0)) return false;
    return true;
  } else {
    return maxAbs(m) <= tol;
  }
}

template <class S>
bool exactlySymmetric(const Mat<S>& m) {
  if (m.rows() != m.cols()) return false;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j)
      if (m(i, j) != m(j, i)) return false;
  return true;
}

template <class S>
bool exactlySkew(const Mat<S>& m) {
  if (m.rows() != m.cols()) return false;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (m(i, i) != S(0)) return false;
    for (Eigen::Index j = i + 1; j < m.cols(); ++j)
      if (m(i, j) != -m(j, i)) return false;
  }
  return true;
}

template <class S>
Mat<S> symmetrized(const Mat<S>& m) {
  Mat<S> out = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      S v = (m(i, j) + m(j, i)) / S(2);
      out(i, j) = v;
      out(j, i) = v;
    }
  return out;
}

/// Gauss-Jordan inverse; exact for Rational. Returns nullopt when singular.
template <class S>
std::optional<Mat<S>> inverse(const Mat<S>& m) {
  const Eigen::Index n = m.rows();
  if constexpr (!is_exact_v<S>) {
    Eigen::FullPivLU<Mat<S>> lu(m);
    if (!lu.isInvertible()) return std::nullopt;
    return Mat<S>(lu.inverse());
  } else {
    Mat<S> a = m;
    Mat<S> inv = Mat<S>::Identity(n, n);
    for (Eigen::Index col = 0; col < n; ++col) {
      Eigen::Index pivot = col;
      while (pivot < n && a(pivot, col) == S(0)) ++pivot;
      if (pivot == n) return std::nullopt;
      a.row(col).swap(a.row(pivot));
      inv.row(col).swap(inv.row(pivot));
      S p = a(col, col);
      a.row(col) /= p;
      inv.row(col) /= p;
      for (Eigen::Index r = 0; r < n; ++r) {
        if (r == col || a(r, col) == S(0)) continue;
        S f = a(r, col);
        a.row(r) -= f * a.row(col);
        inv.row(r) -= f * inv.row(col);
      }
    }
    return inv;
  }
}

// ---------------------------------------------------------------------------
// Strong types. Validation happens at construction.

class SymTensor {
 public:
  explicit SymTensor(Eigen::MatrixXd m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() % 2 != 0)
      throw Error("tensor-core", "dimension", "symmetric tensor must be 2n x 2n");
    if (!exactlySymmetric(m_)) throw Error("tensor-core", "symmetry", "tensor is not exactly symmetric");
  }
  static SymTensor zero(Eigen::Index dim) { return SymTensor(Eigen::MatrixXd::Zero(dim, dim)); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  Eigen::MatrixXd m_;
};

class MetricMatrix {
 public:
  explicit MetricMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() % 2 != 0)
      throw Error("tensor-core", "dimension", "metric must be 2n x 2n");
    if (!exactlySymmetric(m_)) throw Error("tensor-core", "symmetry", "metric is not exactly symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
      throw Error("tensor-core", "positivity", "metric is not positive definite");
  }
  static MetricMatrix identity(Eigen::Index dim) { return MetricMatrix(Eigen::MatrixXd::Identity(dim, dim)); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  Eigen::MatrixXd m_;
};

class SymplecticMatrix {
 public:
  explicit SymplecticMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() % 2 != 0)
      throw Error("tensor-core", "dimension", "symplectic form must be 2n x 2n");
    if (!exactlySkew(m_)) throw Error("tensor-core", "skew", "form is not exactly skew-symmetric");
    nondegenerate_ = Eigen::FullPivLU<Eigen::MatrixXd>(m_).isInvertible();
  }
  /// omega(e_{2i-1}, e_{2i}) = 1.
  static SymplecticMatrix standard(Eigen::Index dim) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index p = 0; p + 1 < dim; p += 2) {
      m(p, p + 1) = 1.0;
      m(p + 1, p) = -1.0;
    }
    return SymplecticMatrix(m);
  }
  const Eigen::MatrixXd& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }
  bool nondegenerate() const { return nondegenerate_; }

 private:
  Eigen::MatrixXd m_;
  bool nondegenerate_ = false;
};

class AcsMatrix {
 public:
  explicit AcsMatrix(Eigen::MatrixXd m, double tol = kCompatibilityTol) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() % 2 != 0)
      throw Error("tensor-core", "dimension", "almost-complex structure must be 2n x 2n");
    Eigen::MatrixXd sq = m_ * m_ + Eigen::MatrixXd::Identity(m_.rows(), m_.cols());
    if (maxAbs<double>(sq) > tol) throw Error("tensor-core", "acs", "J^2 != -I");
  }
  /// J e_{2i-1} = e_{2i}; compatible with SymplecticMatrix::standard and g = I.
  static AcsMatrix standard(Eigen::Index dim) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index p = 0; p + 1 < dim; p += 2) {
      m(p + 1, p) = 1.0;
      m(p, p + 1) = -1.0;
    }
    return AcsMatrix(m);
  }
  const Eigen::MatrixXd& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  Eigen::MatrixXd m_;
};

// ---------------------------------------------------------------------------
// J-(anti-)invariant splitting.

namespace detail {
template <class S>
void requireAcs(const Mat<S>& a, const Mat<S>& j) {
  if (a.rows() != j.rows() || a.cols() != j.cols() || a.rows() != a.cols())
    throw Error("tensor-core", "dimension", "tensor and J dimensions differ");
  Mat<S> sq = j * j + Mat<S>::Identity(j.rows(), j.cols());
  if (!nearlyZero(sq, kAcsTol)) throw Error("tensor-core", "acs", "J^2 != -I beyond 1e-12");
}

template <class S>
Mat<S> project(const Mat<S>& a, const Mat<S>& j, int sign) {
  requireAcs(a, j);
  Mat<S> rotated = j.transpose() * a * j;
  Mat<S> out = (a + S(sign) * rotated) / S(2);
  return symmetrized(out);
}
}  // namespace detail

/// A^- = (A - A(J.,J.)) / 2.
template <class S>
Mat<S> antiInvariantPart(const Mat<S>& a, const Mat<S>& j) {
  return detail::project(a, j, -1);
}

/// A^+ = (A + A(J.,J.)) / 2.
template <class S>
Mat<S> invariantPart(const Mat<S>& a, const Mat<S>& j) {
  return detail::project(a, j, +1);
}

inline SymTensor antiInvariantPart(const SymTensor& a, const AcsMatrix& j) {
  return SymTensor(antiInvariantPart<double>(a.matrix(), j.matrix()));
}
inline SymTensor invariantPart(const SymTensor& a, const AcsMatrix& j) {
  return SymTensor(invariantPart<double>(a.matrix(), j.matrix()));
}

// ---------------------------------------------------------------------------
// Compatibility.

template <class S>
struct CompatibilityResult {
  std::optional<Mat<S>> j;
  std::string failure;
  double squareDefect = 0.0;    // max |J^2 + I|
  double isometryDefect = 0.0;  // max |J^T g J - g| / max(1, max |g|)
  explicit operator bool() const { return j.has_value(); }
};

/// Derives J = Omega^{-1} g and checks J^2 = -I and J^T g J = g. Tolerance is
/// ignored (exact comparison) for Rational input.
template <class S>
CompatibilityResult<S> checkCompatibility(const Mat<S>& g, const Mat<S>& omega, double tol = kCompatibilityTol) {
  CompatibilityResult<S> out;
  if (g.rows() != omega.rows() || g.cols() != omega.cols() || g.rows() != g.cols())
    throw Error("tensor-core", "dimension", "metric and form dimensions differ");
  auto omegaInv = inverse(omega);
  if (!omegaInv) {
    out.failure = "omega is degenerate";
    return out;
  }
  Mat<S> j = *omegaInv * g;
  Mat<S> sq = j * j + Mat<S>::Identity(j.rows(), j.cols());
  Mat<S> iso = j.transpose() * g * j - g;
  out.squareDefect = maxAbs(sq);
  out.isometryDefect = maxAbs(iso) / std::max(1.0, maxAbs(g));
  const bool squareOk = is_exact_v<S> ? nearlyZero(sq, 0.0) : out.squareDefect <= tol;
  const bool isoOk = is_exact_v<S> ? nearlyZero(iso, 0.0) : out.isometryDefect <= tol;
  if (!squareOk) {
    out.failure = "derived J fails J^2 = -I (defect " + std::to_string(out.squareDefect) + ")";
  } else if (!isoOk) {
    out.failure = "derived J is not a g-isometry (defect " + std::to_string(out.isometryDefect) + ")";
  } else {
    out.j = std::move(j);
  }
  return out;
}

inline std::optional<AcsMatrix> compatibleAcs(const MetricMatrix& g, const SymplecticMatrix& omega,
                                              std::string* failure = nullptr) {
  if (!omega.nondegenerate()) {
    if (failure) *failure = "omega is degenerate";
    return std::nullopt;
  }
  auto res = checkCompatibility<double>(g.matrix(), omega.matrix());
  if (!res) {
    if (failure) *failure = res.failure;
    return std::nullopt;
  }
  return AcsMatrix(*res.j);
}

// ---------------------------------------------------------------------------
// Exponential parametrization g . e^h = g exp(g^{-1} h), evaluated through the
// symmetric matrix g^{-1/2} h g^{-1/2}.

namespace detail {
struct SpdRoots {
  Eigen::MatrixXd half;
  Eigen::MatrixXd invHalf;
};

inline SpdRoots spdRoots(const Eigen::MatrixXd& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  const Eigen::VectorXd s = es.eigenvalues().cwiseSqrt();
  const Eigen::MatrixXd& v = es.eigenvectors();
  return {v * s.asDiagonal() * v.transpose(), v * s.cwiseInverse().asDiagonal() * v.transpose()};
}

template <class F>
Eigen::MatrixXd symmetricFunction(const Eigen::MatrixXd& s, F&& f) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized<double>(s));
  Eigen::VectorXd d = es.eigenvalues();
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = f(d(i));
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}
}  // namespace detail

inline MetricMatrix expMetric(const MetricMatrix& g, const SymTensor& h) {
  if (g.dim() != h.dim()) throw Error("tensor-core", "dimension", "metric and tensor dimensions differ");
  if (h.matrix().isZero(0.0)) return g;
  const auto roots = detail::spdRoots(g.matrix());
  const Eigen::MatrixXd s = roots.invHalf * h.matrix() * roots.invHalf;
  const Eigen::MatrixXd e = detail::symmetricFunction(s, [](double x) { return std::exp(x); });
  return MetricMatrix(symmetrized<double>(roots.half * e * roots.half));
}

/// The unique J-anti-invariant h with expMetric(g, h) = gTilde, where both
/// metrics must be compatible with omega.
inline SymTensor logRecover(const MetricMatrix& g, const MetricMatrix& gTilde, const SymplecticMatrix& omega) {
  if (g.dim() != gTilde.dim() || g.dim() != omega.dim())
    throw Error("tensor-core", "dimension", "metric and form dimensions differ");
  std::string why;
  auto j = compatibleAcs(g, omega, &why);
  if (!j) throw Error("tensor-core", "compatibility", "base metric not omega-compatible: " + why);
  if (!compatibleAcs(gTilde, omega, &why))
    throw Error("tensor-core", "compatibility", "target metric not omega-compatible: " + why);

  const auto roots = detail::spdRoots(g.matrix());
  const Eigen::MatrixXd s = symmetrized<double>(roots.invHalf * gTilde.matrix() * roots.invHalf);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw Error("tensor-core", "log", "g^{-1} gTilde has a non-positive eigenvalue");
  const Eigen::MatrixXd l = detail::symmetricFunction(s, [](double x) { return std::log(x); });
  Eigen::MatrixXd h = symmetrized<double>(roots.half * l * roots.half);

  const Eigen::MatrixXd defect = h + j->matrix().transpose() * h * j->matrix();
  if (maxAbs<double>(defect) > kCompatibilityTol * std::max(1.0, maxAbs<double>(h)))
    throw Error("tensor-core", "anti-invariance", "recovered h is not J-anti-invariant");
  return SymTensor(std::move(h));
}

// ---------------------------------------------------------------------------
// Cutoff blend.

/// C-infinity step: 0 for r <= r1, 1 for r >= r2, built from exp(-1/x).
struct CutoffProfile {
  double r1 = 1.0 / 3.0;
  double r2 = 2.0 / 3.0;

  static double flat(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

  double operator()(double r) const {
    if (r <= r1) return 0.0;
    if (r >= r2) return 1.0;
    const double s = (r - r1) / (r2 - r1);
    const double a = flat(s);
    return a / (a + flat(1.0 - s));
  }
};

/// Pointwise gInner . e^{eta(r) h} with h = logRecover(gInner, gOuter).
inline std::vector<MetricMatrix> cutoffBlend(std::span<const MetricMatrix> gOuter,
                                             std::span<const MetricMatrix> gInner, const CutoffProfile& eta,
                                             std::span<const double> r, const SymplecticMatrix& omega) {
  if (gOuter.size() != gInner.size() || gOuter.size() != r.size())
    throw Error("tensor-core", "dimension", "cutoff fields have different sample counts");
  std::vector<MetricMatrix> out;
  out.reserve(r.size());
  for (std::size_t p = 0; p < r.size(); ++p) {
    const double weight = eta(r[p]);
    if (weight == 0.0) {
      out.push_back(gInner[p]);
      continue;
    }
    SymTensor h = logRecover(gInner[p], gOuter[p], omega);
    out.push_back(expMetric(gInner[p], SymTensor(weight * h.matrix())));
  }
  return out;
}

}  // namespace akscal::tensor
