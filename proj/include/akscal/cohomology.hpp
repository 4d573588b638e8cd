#pragma once

// Intersection-lattice arithmetic on H^2 of a 4-manifold X or of X x Sigma,
// the bound functional
//   Z(class) = 4 pi c1.[w]^{n-1}/(n-1)! / ([w]^n/n!)^{(n-1)/n},
// its maximization over a cone component, and the closed-form certificate
// available for blown-up-plane-type lattices times a genus-2 curve.

#include "akscal/error.hpp"
#include "akscal/rational.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace akscal::cohomology {

using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

struct CohomologyModel {
  std::string name;
  int n = 2;  // complex half-dimension: 2 for X, 3 for X x Sigma
  IntMatrix q;
  IntVector c1Base;
  std::optional<std::int64_t> fiberChern;  // c1(Sigma) = fiberChern * c; required when n == 3
  std::int64_t euler = 0;
  std::int64_t signature = 0;

  int rank() const { return static_cast<int>(q.rows()); }
  Eigen::MatrixXd qd() const { return q.cast<double>(); }
  Eigen::VectorXd c1d() const { return c1Base.cast<double>(); }
};

/// Throws unless Q is square, symmetric and nondegenerate, c1 has the right
/// rank and n in {2, 3} with a fiber Chern number exactly when n == 3.
inline void validate(const CohomologyModel& m) {
  if (m.q.rows() == 0 || m.q.rows() != m.q.cols())
    throw Error("cohomology-zbound", "rank", "intersection form must be a nonempty square matrix");
  if (m.q != m.q.transpose()) throw Error("cohomology-zbound", "symmetry", "intersection form is not symmetric");
  if (std::abs(m.qd().fullPivLu().determinant()) < 0.5)
    throw Error("cohomology-zbound", "nondegenerate", "intersection form is degenerate");
  if (m.c1Base.size() != m.q.rows()) throw Error("cohomology-zbound", "rank", "c1 has the wrong rank");
  if (m.n != 2 && m.n != 3) throw Error("cohomology-zbound", "dimension", "half-dimension must be 2 or 3");
  if ((m.n == 3) != m.fiberChern.has_value())
    throw Error("cohomology-zbound", "dimension", "fiberChern is required exactly for product models");
}

/// Class alpha + l c: base coefficients over the lattice basis and, for
/// product models, the fiber coefficient l.
struct SymplecticClass {
  Eigen::VectorXd base;
  std::optional<double> fiber;

  Eigen::VectorXd flat() const {
    Eigen::VectorXd v(base.size() + (fiber ? 1 : 0));
    v.head(base.size()) = base;
    if (fiber) v(base.size()) = *fiber;
    return v;
  }
  SymplecticClass scaled(double c) const {
    return {c * base, fiber ? std::optional<double>(c * *fiber) : std::nullopt};
  }
};

namespace detail {
inline void requireRank(const CohomologyModel& m, const SymplecticClass& cls) {
  if (cls.base.size() != m.rank()) throw Error("cohomology-zbound", "rank", "class rank does not match model");
  if ((m.n == 3) != cls.fiber.has_value())
    throw Error("cohomology-zbound", "rank", "fiber coefficient present iff the model is a product");
}
inline double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}
}  // namespace detail

/// [w]^n on the fundamental class.
inline double topPower(const CohomologyModel& m, const SymplecticClass& cls) {
  detail::requireRank(m, cls);
  const double a = cls.base.dot(m.qd() * cls.base);
  return m.n == 2 ? a : 3.0 * a * *cls.fiber;
}

/// c1 . [w]^{n-1} on the fundamental class.
inline double chernPairing(const CohomologyModel& m, const SymplecticClass& cls) {
  detail::requireRank(m, cls);
  const Eigen::VectorXd qa = m.qd() * cls.base;
  const double b = m.c1d().dot(qa);
  if (m.n == 2) return b;
  return static_cast<double>(*m.fiberChern) * cls.base.dot(qa) + 2.0 * *cls.fiber * b;
}

inline bool inCone(const CohomologyModel& m, const SymplecticClass& cls, double eps = 0.0) {
  return topPower(m, cls) > eps * std::pow(cls.flat().norm(), m.n);
}

inline double evalZBound(const CohomologyModel& m, const SymplecticClass& cls) {
  const double t = topPower(m, cls);
  if (!(t > 0.0)) throw Error("cohomology-zbound", "cone", "class has non-positive top power");
  const int n = m.n;
  const double p = chernPairing(m, cls);
  return 4.0 * std::numbers::pi * p / detail::factorial(n - 1) /
         std::pow(t / detail::factorial(n), static_cast<double>(n - 1) / n);
}

/// Gradient with respect to flat() coordinates.
inline Eigen::VectorXd zBoundGradient(const CohomologyModel& m, const SymplecticClass& cls) {
  const double t = topPower(m, cls);
  if (!(t > 0.0)) throw Error("cohomology-zbound", "cone", "class has non-positive top power");
  const int n = m.n;
  const Eigen::VectorXd qa = m.qd() * cls.base;
  const double a = cls.base.dot(qa);
  const double b = m.c1d().dot(qa);
  const Eigen::VectorXd qc = m.qd() * m.c1d();
  Eigen::VectorXd dT(cls.flat().size()), dP(cls.flat().size());
  const Eigen::Index r = cls.base.size();
  if (n == 2) {
    dT = 2.0 * qa;
    dP = qc;
  } else {
    const double l = *cls.fiber;
    const double f = static_cast<double>(*m.fiberChern);
    dT.head(r) = 6.0 * l * qa;
    dT(r) = 3.0 * a;
    dP.head(r) = 2.0 * f * qa + 2.0 * l * qc;
    dP(r) = 2.0 * b;
  }
  const double p = chernPairing(m, cls);
  const double e = static_cast<double>(n - 1) / n;
  const double k = 4.0 * std::numbers::pi / detail::factorial(n - 1) * std::pow(detail::factorial(n), e);
  return k * (dP * std::pow(t, -e) - e * p * std::pow(t, -e - 1.0) * dT);
}

/// P^n / T^{n-1}, a rational function of the class whose n-th root is Z up to a
/// positive constant; exactly scale invariant for rational classes.
inline Rational zBoundPowerRatio(const CohomologyModel& m, const std::vector<Rational>& base,
                                 std::optional<Rational> fiber) {
  if (static_cast<int>(base.size()) != m.rank() || (m.n == 3) != fiber.has_value())
    throw Error("cohomology-zbound", "rank", "class rank does not match model");
  Rational a = 0, b = 0;
  for (int i = 0; i < m.rank(); ++i)
    for (int j = 0; j < m.rank(); ++j) {
      a += base[i] * Rational(m.q(i, j)) * base[j];
      b += Rational(m.c1Base(i)) * Rational(m.q(i, j)) * base[j];
    }
  const Rational t = m.n == 2 ? a : Rational(3) * a * *fiber;
  const Rational p = m.n == 2 ? b : Rational(*m.fiberChern) * a + Rational(2) * *fiber * b;
  if (t <= Rational(0)) throw Error("cohomology-zbound", "cone", "class has non-positive top power");
  Rational num = 1, den = 1;
  for (int i = 0; i < m.n; ++i) num *= p;
  for (int i = 0; i < m.n - 1; ++i) den *= t;
  return num / den;
}

// ---------------------------------------------------------------------------
// Almost-complex test on 4-manifolds.

inline bool acCheck(const CohomologyModel& m) {
  if (m.n != 2) throw Error("cohomology-zbound", "dimension", "acCheck applies to 4-manifold models only");
  const IntVector qc = m.q * m.c1Base;
  return m.c1Base.dot(qc) == 2 * m.euler + 3 * m.signature;
}

/// All integer vectors c with |c_i| <= bound and c.Q.c = 2 chi + 3 tau.
inline std::vector<IntVector> acSolutions(const CohomologyModel& m, std::int64_t bound) {
  if (m.n != 2) throw Error("cohomology-zbound", "dimension", "acSolutions applies to 4-manifold models only");
  const double count = std::pow(2.0 * static_cast<double>(bound) + 1.0, m.rank());
  if (bound < 0 || count > 2e7) throw Error("cohomology-zbound", "search", "candidate search space too large");
  const std::int64_t target = 2 * m.euler + 3 * m.signature;
  std::vector<IntVector> out;
  IntVector c = IntVector::Constant(m.rank(), -bound);
  while (true) {
    if (c.dot(m.q * c) == target) out.push_back(c);
    int i = 0;
    while (i < m.rank() && c(i) == bound) c(i++) = -bound;
    if (i == m.rank()) break;
    ++c(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Closed-form pieces of the certificate.

struct HMax {
  double xStar;
  double value;
};

/// h(x) = 2/3^{2/3} (a/x^2 + x/b) for a, b < 0 and x > 0.
inline double hFunction(double a, double b, double x) {
  return 2.0 / std::cbrt(9.0) * (a / (x * x) + x / b);
}

inline HMax hFunctionMax(double a, double b) {
  if (!(a < 0.0) || !(b < 0.0)) throw Error("cohomology-zbound", "sign", "hFunctionMax needs a < 0 and b < 0");
  return {std::cbrt(2.0 * a * b), std::cbrt(6.0 * a / (b * b))};
}

/// (3 - sqrt(k y))^2 / (1 - y), the lower bound for B^2/A in terms of
/// y = sum n_i^2 / n_0^2 when k exceptional classes are present.
inline double yRatio(double y, int k = 8) {
  const double s = 3.0 - std::sqrt(k * y);
  return s * s / (1.0 - y);
}

struct YMin {
  double yStar;
  double value;
};

inline YMin yRatioMin(int k = 8) {
  if (k < 0 || k > 8) throw Error("cohomology-zbound", "rank", "y-ratio bound needs 0 <= k <= 8");
  return {k / 9.0, 9.0 - k};
}

/// Chain of inequalities evaluated at one class: Z <= -12 pi (B^2/A)^{1/3}
/// <= -12 pi (9-k)^{1/3}. Holds for Q = diag(1, -1 x k), c1 = (3, -1 x k),
/// fiberChern = -2 and classes with l > 0, A > 0, n0 < 0.
struct ZCertificate {
  int k = 0;
  double a = 0.0;  // n0^2 - sum n_i^2
  double b = 0.0;  // 3 n0 + sum n_i
  double y = 0.0;  // sum n_i^2 / n0^2
  double l = 0.0;
  double z = 0.0;                  // evalZBound at the class
  double hBound = 0.0;             // 2 pi 6^{2/3} * max_x h = -12 pi (B^2/A)^{1/3}
  double ratioLower = 0.0;         // yRatio(y, k) <= B^2/A
  double analyticBound = 0.0;      // -12 pi (9-k)^{1/3}
  double signBound = 0.0;          // (3 - sqrt(k)) n0, an upper bound for B
  bool chainHolds = false;
};

/// Number of exceptional classes when the model has the certified shape.
inline std::optional<int> certifiedShape(const CohomologyModel& m) {
  const int r = m.rank();
  if (m.n != 3 || !m.fiberChern || *m.fiberChern != -2 || r < 1 || r > 9) return std::nullopt;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      const std::int64_t want = i != j ? 0 : (i == 0 ? 1 : -1);
      if (m.q(i, j) != want) return std::nullopt;
    }
  if (m.c1Base(0) != 3) return std::nullopt;
  for (int i = 1; i < r; ++i)
    if (m.c1Base(i) != -1) return std::nullopt;
  return r - 1;
}

inline std::optional<double> analyticBound(const CohomologyModel& m) {
  const auto k = certifiedShape(m);
  if (!k) return std::nullopt;
  return -12.0 * std::numbers::pi * std::cbrt(9.0 - *k);
}

inline std::optional<ZCertificate> certificate(const CohomologyModel& m, const SymplecticClass& cls) {
  const auto k = certifiedShape(m);
  if (!k) return std::nullopt;
  detail::requireRank(m, cls);
  const double n0 = cls.base(0);
  const Eigen::VectorXd rest = cls.base.tail(*k);
  ZCertificate c;
  c.k = *k;
  c.a = n0 * n0 - rest.squaredNorm();
  c.b = 3.0 * n0 + rest.sum();
  c.l = *cls.fiber;
  if (!(c.l > 0.0) || !(c.a > 0.0) || !(n0 < 0.0)) return std::nullopt;
  c.y = rest.squaredNorm() / (n0 * n0);
  c.z = evalZBound(m, cls);
  c.hBound = -12.0 * std::numbers::pi * std::cbrt(c.b * c.b / c.a);
  c.ratioLower = yRatio(c.y, *k);
  c.analyticBound = *analyticBound(m);
  c.signBound = (3.0 - std::sqrt(static_cast<double>(*k))) * n0;
  const double slack = 1e-9 * std::max(1.0, std::abs(c.z));
  c.chainHolds = c.b <= c.signBound + slack && c.z <= c.hBound + slack &&
                 c.ratioLower <= c.b * c.b / c.a * (1.0 + 1e-12) && c.hBound <= c.analyticBound + slack;
  return c;
}

// ---------------------------------------------------------------------------
// Optimizer.

struct TracePoint {
  SymplecticClass cls;
  double value;
  double gradNorm;
};

struct ZBoundResult {
  double value = 0.0;
  SymplecticClass argmax;
  std::optional<ZCertificate> certificate;
  bool unbounded = false;
  bool converged = false;
  int iterations = 0;
  double gradNorm = 0.0;
  std::string warning;
  std::vector<TracePoint> trace;
};

struct OptimizeOptions {
  int budget = 2000;
  double gradTol = 1e-8;
  double barrierEps = 1e-9;
  double unboundedThreshold = 1e6;
  int rayExponent = 60;
};

namespace detail {

/// l -> 2 sign(l) for product models, Q-norm 1 for 4-manifold models.
inline SymplecticClass normalize(const CohomologyModel& m, const SymplecticClass& cls) {
  if (m.n == 3) return cls.scaled(2.0 / std::abs(*cls.fiber));
  const double a = cls.base.dot(m.qd() * cls.base);
  return cls.scaled(1.0 / std::sqrt(a));
}

/// True when base + t dir keeps a positive Q-form for all t in [0, 1], so a
/// step cannot jump between cone components.
inline bool segmentInCone(const CohomologyModel& m, const Eigen::VectorXd& base, const Eigen::VectorXd& dir,
                          double eps) {
  const Eigen::MatrixXd q = m.qd();
  const double c0 = base.dot(q * base), c1 = dir.dot(q * base), c2 = dir.dot(q * dir);
  auto at = [&](double t) { return c0 + 2.0 * t * c1 + t * t * c2; };
  auto floorAt = [&](double t) { return eps * (base + t * dir).squaredNorm(); };
  if (!(at(0.0) > floorAt(0.0)) || !(at(1.0) > floorAt(1.0))) return false;
  if (c2 > 0.0) {
    const double t = -c1 / c2;
    if (t > 0.0 && t < 1.0 && !(at(t) > floorAt(t))) return false;
  }
  return true;
}

/// Free coordinates: the base block (the fiber is pinned by normalization).
inline Eigen::VectorXd freeGradient(const CohomologyModel& m, const SymplecticClass& cls) {
  Eigen::VectorXd g = zBoundGradient(m, cls).head(cls.base.size());
  if (m.n == 2) {
    // Tangent to the level set base.Q.base = 1.
    const Eigen::VectorXd qa = m.qd() * cls.base;
    g -= (g.dot(qa) / qa.squaredNorm()) * qa;
  }
  return g;
}

/// Scales each coordinate block by 2^k and reports the largest value found;
/// +inf once it crosses the threshold.
inline std::optional<SymplecticClass> rayTest(const CohomologyModel& m, const SymplecticClass& cls,
                                              const OptimizeOptions& opt) {
  const int blocks = m.n == 3 ? 2 : 1;
  for (int blk = 0; blk < blocks; ++blk)
    for (int e = -opt.rayExponent; e <= opt.rayExponent; ++e) {
      SymplecticClass c = cls;
      const double s = std::ldexp(1.0, e);
      if (blk == 0) c.base *= s;
      else *c.fiber *= s;
      if (!inCone(m, c, opt.barrierEps)) continue;
      if (evalZBound(m, c) > opt.unboundedThreshold) return c;
    }
  return std::nullopt;
}

}  // namespace detail

/// Quasi-Newton (BFGS) preconditioned gradient ascent with Armijo
/// backtracking on the normalized slice of the cone component containing the
/// seed. Steps leaving the cone barrier are rejected.
inline ZBoundResult optimizeZBound(const CohomologyModel& m, const SymplecticClass& seed,
                                   const OptimizeOptions& opt = {}) {
  validate(m);
  detail::requireRank(m, seed);
  if (!inCone(m, seed)) throw Error("cohomology-zbound", "cone", "seed has non-positive top power");

  ZBoundResult res;
  if (auto ray = detail::rayTest(m, seed, opt)) {
    res.unbounded = true;
    res.value = std::numeric_limits<double>::infinity();
    res.argmax = *ray;
    res.converged = true;
    return res;
  }

  SymplecticClass x = detail::normalize(m, seed);
  double fx = evalZBound(m, x);
  Eigen::VectorXd g = detail::freeGradient(m, x);
  const Eigen::Index dim = g.size();
  // Inverse Hessian estimate of -Z; starts as a step of 1e-2 relative to |g|.
  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(dim, dim) * (1e-2 / std::max(1.0, g.norm()));
  res.trace.push_back({x, fx, g.norm()});

  int it = 0;
  for (; it < opt.budget && g.norm() >= opt.gradTol; ++it) {
    Eigen::VectorXd dir = hinv * g;
    if (!(dir.dot(g) > 0.0)) {
      hinv = Eigen::MatrixXd::Identity(dim, dim) * (1e-2 / std::max(1.0, g.norm()));
      dir = hinv * g;
    }
    bool accepted = false;
    SymplecticClass trial;
    double ft = 0.0;
    double step = 1.0;
    for (int half = 0; half < 80; ++half, step /= 2.0) {
      trial = x;
      trial.base += step * dir;
      if (!detail::segmentInCone(m, x.base, step * dir, opt.barrierEps)) continue;
      if (!inCone(m, trial, opt.barrierEps)) continue;
      trial = detail::normalize(m, trial);
      ft = evalZBound(m, trial);
      if (ft >= fx + 1e-4 * step * dir.dot(g)) {
        accepted = true;
        break;
      }
      // Below round-off in Z the sufficient-increase test is meaningless;
      // fall back to requiring a smaller gradient.
      if (std::abs(ft - fx) <= 1e-13 * std::max(1.0, std::abs(fx)) &&
          detail::freeGradient(m, trial).norm() < g.norm()) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const Eigen::VectorXd gNew = detail::freeGradient(m, trial);
    const Eigen::VectorXd s = trial.base - x.base;
    const Eigen::VectorXd y = g - gNew;  // gradient change of -Z
    const double sy = s.dot(y);
    if (sy > 1e-14 * s.norm() * y.norm()) {
      if (it == 0) hinv = Eigen::MatrixXd::Identity(dim, dim) * (sy / y.squaredNorm());
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(dim, dim);
      hinv = (id - rho * s * y.transpose()) * hinv * (id - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    x = trial;
    fx = ft;
    g = gNew;
    res.trace.push_back({x, fx, g.norm()});
  }

  res.iterations = it;
  res.gradNorm = g.norm();
  res.converged = res.gradNorm < opt.gradTol;
  if (!res.converged)
    res.warning = it >= opt.budget ? "budget exhausted before gradient tolerance" : "line search stalled";

  if (auto ray = detail::rayTest(m, x, opt)) {
    res.unbounded = true;
    res.value = std::numeric_limits<double>::infinity();
    res.argmax = *ray;
    return res;
  }
  res.value = fx;
  res.argmax = x;
  res.certificate = certificate(m, x);
  if (auto bound = analyticBound(m); bound && res.value > *bound + 1e-9)
    throw Error("cohomology-zbound", "soundness", "optimizer value exceeds the analytic bound");
  return res;
}

/// Angle between two classes viewed as vectors in flat() coordinates.
inline double angleBetween(const SymplecticClass& u, const SymplecticClass& v) {
  const Eigen::VectorXd a = u.flat(), b = v.flat();
  const double c = std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0);
  return std::acos(c);
}

// ---------------------------------------------------------------------------
// Catalog of models.

namespace catalog {

inline CohomologyModel cp2() {
  CohomologyModel m;
  m.name = "cp2";
  m.q = IntMatrix::Constant(1, 1, 1);
  m.c1Base = IntVector::Constant(1, 3);
  m.euler = 3;
  m.signature = 1;
  return m;
}

/// CP^2 with reversed orientation; the listed c1 is a placeholder candidate.
inline CohomologyModel cp2Reversed() {
  CohomologyModel m = cp2();
  m.name = "cp2-reversed";
  m.q(0, 0) = -1;
  m.signature = -1;
  return m;
}

/// Blow-up of the plane at k points times a genus-2 curve: Q = diag(1, -1 x k),
/// c1 = (3, -1 x k), c1(Sigma) = -2 c.
inline CohomologyModel blownUpPlaneTimesCurve(int k, const std::string& name) {
  CohomologyModel m;
  m.name = name;
  m.n = 3;
  m.q = IntMatrix::Zero(k + 1, k + 1);
  m.c1Base = IntVector::Constant(k + 1, -1);
  m.q(0, 0) = 1;
  for (int i = 1; i <= k; ++i) m.q(i, i) = -1;
  m.c1Base(0) = 3;
  m.fiberChern = -2;
  m.euler = 3 + k;
  m.signature = 1 - k;
  return m;
}

inline CohomologyModel torus4() {
  CohomologyModel m;
  m.name = "torus4";
  m.q = IntMatrix::Zero(6, 6);
  for (int p = 0; p < 6; p += 2) m.q(p, p + 1) = m.q(p + 1, p) = 1;
  m.c1Base = IntVector::Zero(6);
  return m;
}

/// Seed (-3, 1 x k; 1): the class of the product of negative Kaehler-Einstein forms.
inline SymplecticClass negativeSeed(int k) {
  Eigen::VectorXd b = Eigen::VectorXd::Ones(k + 1);
  b(0) = -3.0;
  return {b, 1.0};
}

/// Seed (3, -1 x k; 1): the class of the product of a positive Kaehler-Einstein form and a curve.
inline SymplecticClass positiveSeed(int k) { return {-negativeSeed(k).base, 1.0}; }

}  // namespace catalog

}  // namespace akscal::cohomology
