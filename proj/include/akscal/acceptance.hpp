#pragma once

// The ten acceptance checks, shared by the acceptance binary and the CLI's
// paper-suite command. Each check recomputes its quantities and compares them
// with literal reference values or with an independent oracle.

#include "akscal/cohomology.hpp"
#include "akscal/fields.hpp"
#include "akscal/lie_geometry.hpp"
#include "akscal/operator_lab.hpp"
#include "akscal/rearrangement.hpp"
#include "akscal/sampling.hpp"
#include "akscal/spectral.hpp"
#include "akscal/tensor_core.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace akscal::acceptance {

struct Outcome {
  int id = 0;
  std::string name;
  std::string anchor;  // the result the check certifies
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double limit = 0.0;  // runtime budget in seconds
};

struct Criterion {
  int id;
  std::string name;
  std::string anchor;
  double limit;
  std::function<bool(std::ostream&, std::uint64_t)> run;
};

namespace detail {

constexpr double kPi = std::numbers::pi;

/// Random integer isometry of diag(1, -1 x 8) fixing c1 = (3, -1 x 8),
/// composed from swaps of exceptional classes and reflections in (-2)-classes.
inline cohomology::IntMatrix randomBarlowIsometry(std::mt19937_64& rng, const cohomology::IntMatrix& q) {
  using cohomology::IntMatrix;
  using cohomology::IntVector;
  IntMatrix p = IntMatrix::Identity(9, 9);
  std::uniform_int_distribution<int> pick(1, 8), kind(0, 2);
  for (int step = 0; step < 6; ++step) {
    IntMatrix r = IntMatrix::Identity(9, 9);
    const int i = pick(rng);
    int j = pick(rng);
    if (j == i) j = i % 8 + 1;
    IntVector v = IntVector::Zero(9);
    switch (kind(rng)) {
      case 0:
        r(i, i) = r(j, j) = 0;
        r(i, j) = r(j, i) = 1;
        break;
      case 1:
        v(i) = 1;
        v(j) = -1;
        r += v * (q * v).transpose();
        break;
      default:
        v(0) = 1;
        v(1) = v(2) = v(3) = -1;
        r += v * (q * v).transpose();
        break;
    }
    p = r * p;
  }
  return p;
}

/// Maximum of f on [lo, hi] by nested grids: 4001 points, then repeated
/// 401-point grids on the bracket around the best node.
inline double gridMax(const std::function<double(double)>& f, double lo, double hi) {
  double best = -std::numeric_limits<double>::infinity(), arg = lo;
  int points = 4000;
  for (int level = 0; level < 12 && hi - lo > 1e-13 * (1.0 + std::abs(arg)); ++level) {
    const double step = (hi - lo) / points;
    for (int i = 0; i <= points; ++i) {
      const double x = lo + i * step;
      const double v = f(x);
      if (v > best) {
        best = v;
        arg = x;
      }
    }
    lo = std::max(lo, arg - 2.0 * step);
    hi = arg + 2.0 * step;
    points = 400;
  }
  return best;
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline bool curvatureTables(std::ostream& log, std::uint64_t) {
  using R = Rational;
  const auto cd = lie::curvature(lie::catalog::kodairaThurston<R>());
  const R half(1, 2), quarter(1, 4);
  bool ok = true;
  auto expect = [&](bool c, const std::string& what) {
    if (!c) log << "mismatch: " << what << "; ";
    ok = ok && c;
  };
  // Nonzero Levi-Civita coefficients nabla_{e_a} e_b = sum_k gamma(a,b,k) e_k.
  const std::vector<std::tuple<int, int, int, R>> gamma = {{0, 1, 2, half},  {1, 0, 2, -half}, {0, 2, 1, -half},
                                                           {2, 0, 1, -half}, {1, 2, 0, half},  {2, 1, 0, half}};
  int nonzero = 0;
  for (R v : cd.gamma.data()) nonzero += v != R(0);
  expect(nonzero == 6, "gamma support");
  for (const auto& [a, b, k, v] : gamma)
    expect(cd.gamma(a, b, k) == v, "gamma(" + std::to_string(a + 1) + std::to_string(b + 1) + std::to_string(k + 1) + ")");
  expect(cd.sectional(0, 1) == R(-3, 4), "K12");
  expect(cd.sectional(0, 2) == quarter && cd.sectional(1, 2) == quarter, "K13, K23");
  for (int i = 0; i < 3; ++i) expect(cd.sectional(i, 3) == R(0), "K" + std::to_string(i + 1) + "4");
  Mat<R> ric = Mat<R>::Zero(4, 4);
  ric(0, 0) = ric(1, 1) = -half;
  ric(2, 2) = half;
  expect(cd.ricci == ric, "Ricci");
  expect(cd.scalar == -half, "scalar");
  Mat<R> rm = Mat<R>::Zero(4, 4);
  rm(0, 0) = -quarter;
  rm(1, 1) = -half;
  rm(2, 2) = half;
  rm(3, 3) = quarter;
  expect(cd.ricciAnti == rm, "r^-");
  log << "K12=" << toString(cd.sectional(0, 1)) << " K13=" << toString(cd.sectional(0, 2))
      << " K23=" << toString(cd.sectional(1, 2)) << " s=" << toString(cd.scalar) << " r^-=diag("
      << toString(cd.ricciAnti(0, 0)) << "," << toString(cd.ricciAnti(1, 1)) << "," << toString(cd.ricciAnti(2, 2))
      << "," << toString(cd.ricciAnti(3, 3)) << ")";
  return ok;
}

inline bool starScalarIdentity(std::ostream& log, std::uint64_t) {
  using R = Rational;
  const auto kt = lie::curvature(lie::catalog::kodairaThurston<R>());
  const auto flat = lie::curvature(lie::catalog::abelianTorus<R>(4));
  const auto ik = lie::starScalarIdentity(kt), iflat = lie::starScalarIdentity(flat);
  log << "KT |nablaJ|^2 vector=" << toString(kt.normNablaJSq) << " form=" << toString(kt.normNablaOmegaSq)
      << " s*-s=" << toString(ik.lhs) << "; flat vector=" << toString(flat.normNablaJSq)
      << " form=" << toString(flat.normNablaOmegaSq);
  return ik.holds() && iflat.holds() && kt.normNablaJSq == R(2) && kt.normNablaOmegaSq == R(2) &&
         flat.normNablaJSq == R(0) && flat.normNablaOmegaSq == R(0);
}

inline bool zBoundValues(std::ostream& log, std::uint64_t) {
  using namespace cohomology;
  const double pi = acceptance::detail::kPi;
  const double cp2 = evalZBound(catalog::cp2(), {Eigen::VectorXd::Constant(1, 1.0), std::nullopt});
  const auto barlow = catalog::blownUpPlaneTimesCurve(8, "barlow-x-sigma2");
  const auto res = optimizeZBound(barlow, catalog::negativeSeed(8));
  const SymplecticClass target{catalog::negativeSeed(8).base, 2.0};
  const double angle = angleBetween(res.argmax, target);
  const auto r8 = optimizeZBound(catalog::blownUpPlaneTimesCurve(8, "r8-x-sigma2"), catalog::positiveSeed(8));
  log << "Z(CP2)-12sqrt2pi=" << cp2 - 12.0 * std::sqrt(2.0) * pi << " Z(Barlow)+12pi=" << res.value + 12.0 * pi
      << " angle=" << angle << " positive-pairing=" << r8.value;
  return std::abs(cp2 - 12.0 * std::sqrt(2.0) * pi) <= 1e-9 && !res.unbounded &&
         std::abs(res.value + 12.0 * pi) <= 1e-6 && angle <= 1e-4 && r8.unbounded && std::isinf(r8.value) &&
         r8.value > 0.0;
}

inline bool analyticCertificates(std::ostream& log, std::uint64_t seed) {
  using namespace cohomology;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double a = -u(rng), b = -u(rng);
    const auto m = hFunctionMax(a, b);
    // The bracket [0, 4 |ab|^{1/3}] contains the maximiser (2ab)^{1/3}.
    const double scale = 4.0 * std::cbrt(std::abs(a * b));
    const double grid = acceptance::detail::gridMax([&](double x) { return hFunction(a, b, x); }, 1e-6 * scale, scale);
    worst = std::max(worst, std::abs(grid - m.value));
  }
  const auto y = yRatioMin();
  double sweep = std::numeric_limits<double>::infinity();
  const int samples = 1000000;
  for (int i = 0; i < samples; ++i) sweep = std::min(sweep, yRatio((1.0 - 1e-6) * i / (samples - 1)));
  log << "max |hMax - grid|=" << worst << " yRatioMin=(" << y.yStar << "," << y.value << ") sweep min=" << sweep;
  return worst <= 1e-9 && y.yStar == 8.0 / 9.0 && y.value == 1.0 && sweep >= 1.0 - 1e-6;
}

inline bool collapsingFamily(std::ostream& log, std::uint64_t) {
  bool ok = true;
  double previous = -std::numeric_limits<double>::infinity();
  for (double d : {1.0, 0.1, 0.01}) {
    const double z = lie::zRatio(lie::catalog::kodairaThurston<Rational>(d));
    log << "d=" << d << " z=" << z << " ";
    ok = ok && std::abs(z + 0.5 * std::sqrt(d)) <= 1e-15 && z < 0.0 && z > previous;
    previous = z;
  }
  return ok;
}

inline bool symbolSweeps(std::ostream& log, std::uint64_t) {
  const auto flat = oplab::flatSymbolSweep(8);
  const auto kt = oplab::ktSymbolSweep(32);
  log << "flat N=8: " << flat.waves << " waves, max|ratio-1|=" << flat.maxDeviation << " bound 5h^2=" << flat.bound
      << "; KT N=32 slope=" << kt.slope;
  return flat.maxDeviation <= flat.bound && kt.slope <= -0.8;
}

inline bool kernelCertification(std::ostream& log, std::uint64_t) {
  const auto flat = oplab::kernelGap(oplab::flatTorus(6, 6));
  const auto g = oplab::compareGaps({6, 8}, 6);
  const double l6 = g.kt[0].lambdaMin(), l8 = g.kt[1].lambdaMin();
  log << "flat lambda_min=" << flat.lambdaMin() << " constant overlap=" << flat.constantOverlap
      << " deviation=" << flat.constantDeviation << "; KT lambda_min N=6 " << l6 << ", N=8 " << l8
      << "; margin=" << g.worstMargin << " variation=" << g.variation
      << " residual=" << std::max({flat.maxResidual(), g.kt[0].maxResidual(), g.kt[1].maxResidual()});
  return flat.lambdaMin() <= oplab::kNullTol && flat.constantDeviation < 1e-6 && g.worstMargin >= 1e3 &&
         g.variation < 0.5 && flat.maxResidual() < oplab::kResidualTol && g.kt[0].maxResidual() < oplab::kResidualTol &&
         g.kt[1].maxResidual() < oplab::kResidualTol;
}

inline bool hessianFidelity(std::ostream& log, std::uint64_t seed) {
  using namespace oplab;
  std::mt19937_64 rng(seed);
  double worst = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 2; ++trial) {
    const Theta th = Theta::random(rng);
    std::vector<double> diffs;
    for (int n : {24, 48}) {
      const Variant v = ktVariant(Grid::twisted(n, n / 2, 1.0));
      const Field f = v.grid.sample(th);
      const auto a = ktHessian(v, f), b = definitionalHessian(v, f);
      double m = 0.0;
      for (int s = 0; s < 10; ++s) m += pairing(v.grid, a.entries[s] - b.entries[s], a.entries[s] - b.entries[s]);
      diffs.push_back(std::sqrt(m));
    }
    const double order = std::log2(diffs[0] / diffs[1]);
    log << "trial " << trial << " order=" << order << " ";
    worst = std::min(worst, order);
  }
  return worst >= 1.9;
}

inline bool rearrangement(std::ostream& log, std::uint64_t) {
  using namespace rearrange;
  const Function f = [](double x) { return std::sin(x); };
  const Function zero = [](double) { return 0.0; };
  bool ok = true;
  for (double eps : {0.2, 0.1, 0.05}) {
    const auto phi = realizeDiffeo(buildPlan(f, zero, eps, 2.0));
    const double err = rearrangeError(f, zero, phi, 2.0);
    double md = std::numeric_limits<double>::infinity();
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) md = std::min(md, phi.at(t).minDerivative(10000));
    log << "eps=" << eps << " err=" << err << " minD=" << md << "; ";
    ok = ok && err < eps && md > 0.0;
  }
  const Function two = [](double) { return 2.0; };
  bool rejected = !feasibility(f, two);
  try {
    buildPlan(f, two, 0.1, 2.0);
    rejected = false;
  } catch (const Error& e) {
    rejected = rejected && e.check() == "infeasible";
  }
  log << "infeasible rejected=" << (rejected ? "yes" : "no");
  return ok && rejected;
}

inline bool propertySuites(std::ostream& log, std::uint64_t seed) {
  using namespace tensor;
  // Tensor core: splitting and exponential round trip.
  sampling::Rng rng(seed);
  int tensorFail = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Index n = 2 * (1 + trial % 3);
    const auto triple = sampling::randomCompatibleTriple(rng, n);
    const auto a = sampling::randomSymmetric(rng, n);
    const auto plus = invariantPart(a, triple.j), minus = antiInvariantPart(a, triple.j);
    const auto h = sampling::randomAntiInvariant(rng, triple.j, 1.0);
    const auto back = logRecover(triple.g, expMetric(triple.g, h), triple.omega);
    const bool ok = maxAbs<double>(plus.matrix() + minus.matrix() - a.matrix()) < 1e-12 &&
                    maxAbs<double>(invariantPart(plus, triple.j).matrix() - plus.matrix()) < 1e-12 &&
                    maxAbs<double>(antiInvariantPart(minus, triple.j).matrix() - minus.matrix()) < 1e-12 &&
                    maxAbs<double>(antiInvariantPart(plus, triple.j).matrix()) < 1e-12 &&
                    maxAbs<double>(back.matrix() - h.matrix()) < 1e-10;
    tensorFail += !ok;
  }

  // Adjoint pairing <D psi, h> = <psi, D* h> up to C h^2 with C = 1.
  int pairingFail = 0;
  double worstPairing = 0.0;
  {
    using namespace oplab;
    std::mt19937_64 prng(seed + 1);
    std::normal_distribution<double> g;
    const Variant v = ktVariant(Grid::twisted(6, 5, 1.5));
    const auto n = static_cast<Eigen::Index>(v.grid.size());
    const double step = v.grid.spacing(0);
    for (int trial = 0; trial < 50; ++trial) {
      Field psi(n);
      for (auto& x : psi) x = g(prng);
      AntiInvariantField t;
      for (auto& c : t) {
        c.resize(n);
        for (auto& x : c) x = g(prng);
      }
      const double lhs = pairing(v.grid, forwardDS(v, t), psi);
      const double rhs = pairing(v, t, adjointDS(v, psi));
      double tn = 0.0;
      for (const auto& c : t) tn += pairing(v.grid, c, c);
      const double rel = std::abs(lhs - rhs) / std::sqrt(tn * pairing(v.grid, psi, psi));
      worstPairing = std::max(worstPairing, rel);
      pairingFail += rel > step * step;
    }
  }

  // evalZBound: invariance under lattice isometries and under scaling.
  using namespace cohomology;
  const auto m = catalog::blownUpPlaneTimesCurve(8, "barlow-x-sigma2");
  std::mt19937_64 zrng(seed + 2);
  std::uniform_real_distribution<double> u(-0.4, 0.4), c(0.05, 20.0);
  int isoCases = 0, isoFail = 0, scaleCases = 0, scaleFail = 0;
  while (isoCases < 100) {
    const IntMatrix p = acceptance::detail::randomBarlowIsometry(zrng, m.q);
    SymplecticClass cls = catalog::negativeSeed(8);
    for (int i = 0; i < 9; ++i) cls.base(i) += u(zrng);
    *cls.fiber = 1.0 + std::abs(u(zrng));
    if (!inCone(m, cls)) continue;
    ++isoCases;
    const bool isometry = IntMatrix(p.transpose() * m.q * p) == m.q && IntVector(p * m.c1Base) == m.c1Base;
    const SymplecticClass pc{p.cast<double>() * cls.base, cls.fiber};
    isoFail += !isometry || std::abs(evalZBound(m, pc) - evalZBound(m, cls)) > 1e-10;
  }
  while (scaleCases < 100) {
    SymplecticClass cls = catalog::negativeSeed(8);
    for (int i = 0; i < 9; ++i) cls.base(i) += u(zrng);
    *cls.fiber = 1.0 + std::abs(u(zrng));
    if (!inCone(m, cls)) continue;
    ++scaleCases;
    const double z = evalZBound(m, cls);
    scaleFail += std::abs(evalZBound(m, cls.scaled(c(zrng))) - z) > 1e-12 * std::max(1.0, std::abs(z));
  }
  log << "tensor 500 cases, failures " << tensorFail << "; pairing 50 pairs, worst rel " << worstPairing
      << ", failures " << pairingFail << "; isometry 100, failures " << isoFail << "; scale 100, failures "
      << scaleFail;
  return tensorFail == 0 && pairingFail == 0 && isoFail == 0 && scaleFail == 0;
}

// ---------------------------------------------------------------------------

inline const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {1, "curvature-tables", "Kodaira-Thurston curvature tables and r^- (exact)", 1.0, curvatureTables},
      {2, "star-scalar", "s* - s = |nabla J|^2 / 2, two |nabla J|^2 routes", 1.0, starScalarIdentity},
      {3, "zbound-values", "Z-bound for CP2, Barlow x Sigma2 optimum, unbounded product", 10.0, zBoundValues},
      {4, "analytic-certificates", "h-function maximum and y-ratio minimum", 5.0, analyticCertificates},
      {5, "collapsing-family", "Z ratio of KT_d is -sqrt(d)/2, tending to 0", 1.0, collapsingFamily},
      {6, "symbol-check", "principal symbol of the double divergence of the adjoint", 30.0, symbolSweeps},
      {7, "kernel-certification", "trivial kernel of the adjoint on Kodaira-Thurston", 300.0, kernelCertification},
      {8, "hessian-fidelity", "Hessian formulas on Kodaira-Thurston vs definition", 30.0, hessianFidelity},
      {9, "rearrangement", "L^p closure of rearrangements of f (circle)", 10.0, rearrangement},
      {10, "property-suites", "tensor splitting, adjoint pairing, Z-bound invariances", 60.0, propertySuites},
  };
  return list;
}

inline Outcome run(const Criterion& c, std::uint64_t seed) {
  Outcome o{c.id, c.name, c.anchor, false, "", 0.0, c.limit};
  std::ostringstream log;
  const auto start = std::chrono::steady_clock::now();
  try {
    o.pass = c.run(log, seed);
  } catch (const std::exception& e) {
    log << "exception: " << e.what();
    o.pass = false;
  }
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (o.seconds > o.limit) {
    log << "; runtime " << o.seconds << " s exceeds " << o.limit << " s";
    o.pass = false;
  }
  o.detail = log.str();
  return o;
}

inline std::string summaryLine(const Outcome& o) {
  std::ostringstream s;
  s << (o.pass ? "PASS" : "FAIL") << " [" << o.id << "] " << o.name << " (" << std::fixed;
  s.precision(2);
  s << o.seconds << " s): " << o.detail;
  return s.str();
}

}  // namespace akscal::acceptance
