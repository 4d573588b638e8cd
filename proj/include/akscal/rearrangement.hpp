#pragma once

// Constructive L^p approximation of a target f1 by f o Phi_1 on the circle
// R / 2 pi Z, where Phi_t is an isotopy of diffeomorphisms from the identity:
// arcs of small f1-oscillation, level sets V_i of f near f1(b_i), a thin
// transition zone Omega around arc endpoints, and the two-stage isotopy
// Phi_t = phi_t o psi_t (compress arc bulk into U_i, carry U_i onto V_i).

#include "akscal/error.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace akscal::rearrange {

inline constexpr double kLength = 2.0 * std::numbers::pi;
inline constexpr double kMinDerivative = 1e-6;

using Function = std::function<double(double)>;

/// Periodic piecewise-linear interpolant of uniform samples on [0, 2 pi).
inline Function fromSamples(std::vector<double> samples) {
  if (samples.size() < 2) throw Error("rearrangement", "samples", "need at least two samples");
  for (double v : samples)
    if (!std::isfinite(v)) throw Error("rearrangement", "samples", "non-finite sample");
  return [s = std::move(samples)](double x) {
    const double n = static_cast<double>(s.size());
    double u = x / kLength * n;
    u -= n * std::floor(u / n);
    const auto i = static_cast<std::size_t>(u) % s.size();
    const double frac = u - std::floor(u);
    return (1.0 - frac) * s[i] + frac * s[(i + 1) % s.size()];
  };
}

inline std::vector<double> sample(const Function& f, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = f(kLength * i / n);
  return out;
}

struct SampledRange {
  double inf = 0.0, sup = 0.0, maxAbs = 0.0;
};

inline SampledRange range(const std::vector<double>& s) {
  const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  return {*lo, *hi, std::max(std::abs(*lo), std::abs(*hi))};
}

/// inf f - tol <= f1 <= sup f + tol on the samples.
inline bool feasibility(const Function& f, const Function& f1, int samples = 1 << 14, double tol = 1e-9) {
  const auto rf = range(sample(f, samples));
  for (double v : sample(f1, samples))
    if (v < rf.inf - tol || v > rf.sup + tol) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Smoothing bump: rho(y) = C exp(-1 / (1 - (y/w)^2)) on (-w, w).

namespace detail {

inline double rawBump(double v) { return std::abs(v) < 1.0 ? std::exp(-1.0 / (1.0 - v * v)) : 0.0; }

inline double bumpMass() {
  static const double mass =
      boost::math::quadrature::gauss<double, 30>::integrate([](double v) { return rawBump(v); }, -1.0, 1.0);
  return mass;
}

/// Cumulative mass of the unit bump on [-1, v].
inline double bumpCdf(double v) {
  if (v <= -1.0) return 0.0;
  if (v >= 1.0) return 1.0;
  return boost::math::quadrature::gauss<double, 30>::integrate([](double s) { return rawBump(s); }, -1.0, v) / bumpMass();
}

/// R1(v) = int_{-1}^{v} (v - s) rho1(s) ds.
inline double bumpRamp(double v) {
  if (v <= -1.0) return 0.0;
  if (v >= 1.0) return v;
  const double m1 =
      boost::math::quadrature::gauss<double, 30>::integrate([](double s) { return s * rawBump(s); }, -1.0, v) / bumpMass();
  return v * bumpCdf(v) - m1;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Piecewise diffeomorphisms.

/// One node-monotone stage: a piecewise-linear degree-one circle map moving
/// `before` to `after` (both lifted, strictly increasing, span < 2 pi),
/// convolved with the bump of half-width `halfWidth`.
struct Stage {
  std::vector<double> before;
  std::vector<double> after;
  double halfWidth = 0.0;
};

class PiecewiseDiffeo {
 public:
  PiecewiseDiffeo() = default;
  explicit PiecewiseDiffeo(std::vector<Stage> stages, double t = 1.0) : stages_(std::move(stages)), t_(t) {
    if (!(t >= 0.0 && t <= 1.0)) throw Error("rearrangement", "isotopy", "t must lie in [0, 1]");
    for (auto& s : stages_) validateStage(s);
  }

  /// The identity (no stages).
  static PiecewiseDiffeo identity() { return PiecewiseDiffeo(); }

  double t() const { return t_; }
  const std::vector<Stage>& stages() const { return stages_; }
  PiecewiseDiffeo at(double t) const { return PiecewiseDiffeo(stages_, t); }

  /// Lift: Phi(x + 2 pi) = Phi(x) + 2 pi; stages applied in order.
  double operator()(double x) const {
    if (t_ == 0.0) return x;
    for (const auto& s : stages_) x = evalStage(s, x).first;
    return x;
  }

  double derivative(double x) const {
    if (t_ == 0.0) return 1.0;
    double d = 1.0;
    for (const auto& s : stages_) {
      const auto [y, dy] = evalStage(s, x);
      d *= dy;
      x = y;
    }
    return d;
  }

  double minDerivative(int samples = 10000) const {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) m = std::min(m, derivative(kLength * (i + 0.5) / samples));
    for (const auto& s : stages_)
      for (double node : s.before) m = std::min(m, derivative(node));
    return m;
  }

  /// Inverse of the lift by bisection.
  double inverse(double y) const {
    double lo = y - kLength, hi = y + kLength;
    while ((*this)(lo) > y) lo -= kLength;
    while ((*this)(hi) < y) hi += kLength;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + std::abs(y)); ++it) {
      const double mid = 0.5 * (lo + hi);
      ((*this)(mid) < y ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  /// Domain points where some stage kinks or enters/leaves a smoothing zone,
  /// pulled back through the preceding stages; sorted in [0, 2 pi).
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    for (std::size_t k = 0; k < stages_.size(); ++k) {
      const PiecewiseDiffeo prefix(std::vector<Stage>(stages_.begin(), stages_.begin() + static_cast<long>(k)), t_);
      const double hw = t_ > 0.0 ? stages_[k].halfWidth : 0.0;
      for (double b : stages_[k].before)
        for (double y : {b - hw, b, b + hw}) {
          const double x = k == 0 ? y : prefix.inverse(y);
          out.push_back(x - kLength * std::floor(x / kLength));
          if (hw == 0.0) break;
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(), [](double a, double b) { return b - a < 1e-13; }), out.end());
    return out;
  }

 private:
  static void validateStage(Stage& s) {
    const std::size_t n = s.before.size();
    if (n < 2 || s.after.size() != n) throw Error("rearrangement", "nodes", "stage needs matching node lists of size >= 2");
    for (std::size_t i = 0; i + 1 < n; ++i)
      if (!(s.before[i + 1] > s.before[i]) || !(s.after[i + 1] > s.after[i]))
        throw Error("rearrangement", "nodes", "node lists must be strictly increasing");
    if (!(s.before.back() < s.before.front() + kLength) || !(s.after.back() < s.after.front() + kLength))
      throw Error("rearrangement", "nodes", "node lists must span less than one turn");
    double minPiece = s.before.front() + kLength - s.before.back();
    for (std::size_t i = 0; i + 1 < n; ++i) minPiece = std::min(minPiece, s.before[i + 1] - s.before[i]);
    if (s.halfWidth < 0.0 || s.halfWidth > minPiece / 8.0 * (1.0 + 1e-12))
      throw Error("rearrangement", "smoothing", "bump support must not exceed a quarter of the smallest piece");
  }

  /// Value and derivative of a stage at parameter t_.
  std::pair<double, double> evalStage(const Stage& s, double x) const {
    const std::size_t n = s.before.size();
    const double x0 = s.before.front();
    const double turns = std::floor((x - x0) / kLength);
    const double xr = std::max(x0, x - turns * kLength);  // in [x0, x0 + L)
    auto image = [&](std::size_t i) { return s.before[i] + t_ * (s.after[i] - s.before[i]); };
    // Node k (k may equal n, the first node one turn later).
    auto nodeX = [&](std::size_t k) { return k == n ? x0 + kLength : s.before[k]; };
    auto nodeY = [&](std::size_t k) { return k == n ? image(0) + kLength : image(k); };
    const auto it = std::upper_bound(s.before.begin(), s.before.end(), xr);
    const std::size_t k = static_cast<std::size_t>(it - s.before.begin()) - 1;  // piece [node k, node k+1]
    auto slope = [&](std::size_t piece) {
      const std::size_t a = piece % n;
      const double dx = nodeX(a + 1) - nodeX(a);
      return (nodeY(a + 1) - nodeY(a)) / dx;
    };
    const double sk = slope(k);
    double y = nodeY(k) + sk * (xr - nodeX(k));
    double dy = sk;
    if (s.halfWidth > 0.0 && t_ > 0.0) {
      // At most one kink lies within the bump support.
      const double dl = xr - nodeX(k), dr = nodeX(k + 1) - xr;
      if (dl < s.halfWidth) {
        const double sl = slope(k + n - 1);
        const double v = dl / s.halfWidth;
        // Left-piece line plus the smoothed ramp of the slope jump.
        y = nodeY(k) + sl * dl + (sk - sl) * s.halfWidth * detail::bumpRamp(v);
        dy = sl + (sk - sl) * detail::bumpCdf(v);
      } else if (dr < s.halfWidth) {
        const double sr = slope(k + 1);
        const double v = -dr / s.halfWidth;
        y = nodeY(k + 1) - sk * dr + (sr - sk) * s.halfWidth * detail::bumpRamp(v);
        dy = sk + (sr - sk) * detail::bumpCdf(v);
      }
    }
    return {y + turns * kLength, dy};
  }

  std::vector<Stage> stages_;
  double t_ = 1.0;
};

// ---------------------------------------------------------------------------
// Plans.

struct Arc {
  double a = 0.0, b = 0.0;        // Delta_i = [a, b)
  double center = 0.0;            // b_i
  double target = 0.0;            // f1(b_i)
  double uLo = 0.0, uHi = 0.0;    // U_i around b_i
  double vLo = 0.0, vHi = 0.0;    // V_i (lifted, increasing with i)
};

struct PlanOptions {
  int arcCap = 4096;
  int samples = 1 << 15;  // per turn, for oscillation and level-set scans
  int minArcs = 8;        // arcs are at most 2 pi / minArcs long
};

struct RearrangementPlan {
  double epsilon = 0.0, p = 2.0;
  double delta = 0.0;  // 2 delta = epsilon / (2 vol)^{1/p}
  std::vector<Arc> arcs;
  double omegaHalfWidth = 0.0;  // Omega = union of [a_i - w, a_i + w]
  double maxF = 0.0, maxF1 = 0.0;
  bool identity = false;  // f1 = f on samples: Phi = id

  double omegaLength() const { return 2.0 * omegaHalfWidth * static_cast<double>(arcs.size()); }
  /// (max|f| + max|f1|)^p |Omega|, required below epsilon^p / 2.
  double budget() const { return std::pow(maxF + maxF1, p) * omegaLength(); }
};

inline RearrangementPlan buildPlan(const Function& f, const Function& f1, double epsilon, double p,
                                   const PlanOptions& opt = {}) {
  if (!(epsilon > 0.0)) throw Error("rearrangement", "epsilon", "epsilon must be positive");
  if (!(p > 1.0)) throw Error("rearrangement", "exponent", "p must exceed 1");
  if (!feasibility(f, f1, opt.samples))
    throw Error("rearrangement", "infeasible", "target leaves [inf f, sup f]; no rearrangement approximates it");
  const int n = opt.samples;
  const double h = kLength / n;
  const auto fs = sample(f, n), f1s = sample(f1, n);
  RearrangementPlan plan;
  plan.epsilon = epsilon;
  plan.p = p;
  plan.delta = epsilon / (2.0 * std::pow(2.0 * kLength, 1.0 / p));
  plan.maxF = range(fs).maxAbs;
  plan.maxF1 = range(f1s).maxAbs;
  double diff = 0.0;
  for (int i = 0; i < n; ++i) diff = std::max(diff, std::abs(fs[i] - f1s[i]));
  plan.identity = diff == 0.0;

  // Arcs: greedy on the sample grid. An arc [start, end] includes both end
  // samples; 0.9 delta leaves room for variation between samples.
  const int maxLen = std::max(1, n / opt.minArcs);
  std::vector<std::pair<int, int>> cuts;
  for (int start = 0; start < n;) {
    double lo = std::min(f1s[start], f1s[(start + 1) % n]), hi = std::max(f1s[start], f1s[(start + 1) % n]);
    int end = start + 1;
    while (end < n && end - start < maxLen) {
      const double v = f1s[static_cast<std::size_t>((end + 1) % n)];
      if (std::max(hi, v) - std::min(lo, v) >= 0.9 * plan.delta) break;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      ++end;
    }
    cuts.emplace_back(start, end);
    start = end;
  }
  if (static_cast<int>(cuts.size()) > opt.arcCap)
    throw Error("rearrangement", "arc-cap",
                "need " + std::to_string(cuts.size()) + " arcs, cap is " + std::to_string(opt.arcCap));
  for (const auto& [s, e] : cuts) {
    Arc arc;
    arc.a = s * h;
    arc.b = e * h;
    arc.center = 0.5 * (arc.a + arc.b);
    arc.target = f1(arc.center);
    plan.arcs.push_back(arc);
  }
  const double shortest = [&] {
    double m = kLength;
    for (const auto& a : plan.arcs) m = std::min(m, a.b - a.a);
    return m;
  }();
  if (plan.identity) {
    for (auto& a : plan.arcs) {
      a.uLo = a.vLo = a.a;
      a.uHi = a.vHi = a.b;
    }
    return plan;
  }

  // Omega: endpoint neighbourhoods with (max|f| + max|f1|)^p |Omega| = eps^p / 4.
  const double k = static_cast<double>(plan.arcs.size());
  const double big = plan.maxF + plan.maxF1;
  plan.omegaHalfWidth = std::min(std::pow(epsilon, p) / (4.0 * std::pow(big, p) * 2.0 * k), shortest / 8.0);
  for (auto& a : plan.arcs) {
    const double bulkLo = a.a + plan.omegaHalfWidth, bulkHi = a.b - plan.omegaHalfWidth;
    const double r = 0.25 * (bulkHi - bulkLo);
    a.uLo = a.center - r;
    a.uHi = a.center + r;
  }

  // V_i: cursor sweep in cyclic order over level sets |f - f1(b_i)| < delta.
  // Orientation-preserving circle maps keep cyclic order, so all V_i must fit
  // in one turn; each V_i spans at most two sample steps so that many arcs
  // with nearby targets share one level-set component. The sweep is retried
  // from several anchors for V_0, run midpoints first.
  auto fAt = [&](long j) { return fs[static_cast<std::size_t>(((j % n) + n) % n)]; };
  auto near = [&](long j, double c, double tol) { return std::abs(fAt(j) - c) < tol * plan.delta; };
  auto sweep = [&](long anchor) {
    const long limit = anchor + n;
    long cursor = anchor;
    for (auto& a : plan.arcs) {
      const double c = a.target;
      long j = cursor;
      while (j < limit && !near(j, c, 0.5)) ++j;
      if (j >= limit) return false;
      long e = j;
      while (e < j + 2 && e + 1 < limit && near(e + 1, c, 0.75)) ++e;
      if (e == j) {
        a.vLo = j * h - 0.25 * h;
        a.vHi = j * h + 0.25 * h;
      } else {
        a.vLo = j * h;
        a.vHi = e * h;
      }
      cursor = e + 1;
    }
    return true;
  };
  std::vector<long> anchors, rest;
  const double c0 = plan.arcs.front().target;
  for (long j = 0; j < n; ++j) {
    if (!near(j, c0, 0.5) || near(j - 1, c0, 0.5)) continue;
    long e = j;
    while (e + 1 < j + n && near(e + 1, c0, 0.5)) ++e;
    anchors.push_back((j + e) / 2);
    for (long q = j; q <= e; q += std::max(1L, (e - j) / 16)) rest.push_back(q);
  }
  if (anchors.empty() && near(0, c0, 0.5)) anchors.push_back(0);  // level set is the whole circle
  anchors.insert(anchors.end(), rest.begin(), rest.end());
  if (!std::any_of(anchors.begin(), anchors.end(), sweep))
    throw Error("rearrangement", "ordering",
                "level sets of f cannot be visited in the cyclic order of the arcs within one turn");
  // Shrink each V_i by a margin so consecutive V's are strictly separated.
  for (auto& a : plan.arcs) {
    const double m = 0.1 * (a.vHi - a.vLo);
    a.vLo += m;
    a.vHi -= m;
  }
  if (!(plan.arcs.back().vHi < plan.arcs.front().vLo + kLength))
    throw Error("rearrangement", "ordering", "level sets overlap after one turn");
  if (!(plan.budget() < 0.5 * std::pow(epsilon, p))) throw Error("rearrangement", "budget", "Omega budget violated");
  return plan;
}

namespace detail {

inline double smoothingFor(const Stage& s, double fraction) {
  double m = s.before.front() + kLength - s.before.back();
  for (std::size_t i = 0; i + 1 < s.before.size(); ++i) m = std::min(m, s.before[i + 1] - s.before[i]);
  return fraction * m;
}

}  // namespace detail

/// Phi_t = phi_t o psi_t: psi compresses the bulk of each arc into U_i and
/// fixes arc endpoints; phi carries each U_i onto V_i.
inline PiecewiseDiffeo realizeDiffeo(const RearrangementPlan& plan) {
  if (plan.identity || plan.arcs.empty()) return PiecewiseDiffeo::identity();
  Stage psi, phi;
  const double w = plan.omegaHalfWidth;
  for (const auto& a : plan.arcs) {
    psi.before.insert(psi.before.end(), {a.a, a.a + w, a.b - w});
    psi.after.insert(psi.after.end(), {a.a, a.uLo, a.uHi});
    phi.before.insert(phi.before.end(), {a.uLo, a.uHi});
  }
  // Lift of V closest to U for the first arc; later V's follow increasing.
  const double shift = kLength * std::round((plan.arcs.front().uLo - plan.arcs.front().vLo) / kLength);
  for (const auto& a : plan.arcs) phi.after.insert(phi.after.end(), {a.vLo + shift, a.vHi + shift});
  for (double fraction : {1.0 / 8.0, 1.0 / 16.0}) {
    psi.halfWidth = detail::smoothingFor(psi, fraction);
    phi.halfWidth = detail::smoothingFor(phi, fraction);
    PiecewiseDiffeo d({psi, phi});
    if (d.minDerivative() >= kMinDerivative) return d;
  }
  throw Error("rearrangement", "derivative", "smoothing collapses the derivative below 1e-6");
}

/// (int |f o Phi - f1|^p)^{1/p} by composite Simpson, at least 16 points per
/// piece and more where Phi stretches.
inline double rearrangeError(const Function& f, const Function& f1, const PiecewiseDiffeo& phi, double p) {
  if (!(p >= 1.0)) throw Error("rearrangement", "exponent", "p must be at least 1");
  std::vector<double> cuts = phi.breakpoints();
  if (cuts.empty()) cuts = {0.0};
  cuts.push_back(cuts.front() + kLength);
  double total = 0.0;
  auto g = [&](double x) { return std::pow(std::abs(f(phi(x)) - f1(x)), p); };
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    const double stretch = std::abs(phi(b) - phi(a)) / kLength;
    const long m = 2 * std::max(8L, static_cast<long>(std::ceil(256.0 * stretch)) + 8L);
    const double h = (b - a) / static_cast<double>(m);
    double s = g(a) + g(b);
    for (long j = 1; j < m; ++j) s += (j % 2 ? 4.0 : 2.0) * g(a + j * h);
    total += s * h / 3.0;
  }
  return std::pow(total, 1.0 / p);
}

}  // namespace akscal::rearrange
