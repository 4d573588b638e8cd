#include "akscal/expr.hpp"
#include "akscal/rearrangement.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace akscal;
using namespace akscal::rearrange;

namespace {

const Function kSin = [](double x) { return std::sin(x); };
const Function kZero = [](double) { return 0.0; };

std::string errorOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

/// Uniform midpoint sum of |f o Phi - f1|^p on 2^18 cells.
double bruteError(const Function& f, const Function& f1, const PiecewiseDiffeo& phi, double p) {
  const int n = 1 << 18;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = kLength * (i + 0.5) / n;
    s += std::pow(std::abs(f(phi(x)) - f1(x)), p);
  }
  return std::pow(s * kLength / n, 1.0 / p);
}

double wrap(double x) { return x - kLength * std::floor(x / kLength); }

/// Random degree-one diffeomorphism: random increasing nodes mapped to random
/// increasing images, smoothed at the maximal admissible width.
PiecewiseDiffeo randomDiffeo(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, kLength);
  std::uniform_int_distribution<int> count(2, 12);
  const int k = count(rng);
  Stage s;
  for (int i = 0; i < k; ++i) {
    s.before.push_back(u(rng));
    s.after.push_back(u(rng));
  }
  std::sort(s.before.begin(), s.before.end());
  std::sort(s.after.begin(), s.after.end());
  const double offset = u(rng);
  for (double& a : s.after) a += offset;
  double minPiece = s.before.front() + kLength - s.before.back();
  for (int i = 0; i + 1 < k; ++i) minPiece = std::min(minPiece, s.before[i + 1] - s.before[i]);
  s.halfWidth = minPiece / 8.0;
  return PiecewiseDiffeo({s});
}

}  // namespace

TEST(Rearrangement, FeasibilityExamples) {
  EXPECT_TRUE(feasibility(kSin, kZero));
  EXPECT_FALSE(feasibility(kSin, [](double) { return 2.0; }));
  EXPECT_TRUE(feasibility(kSin, kSin));
  EXPECT_TRUE(feasibility(kSin, [](double) { return 1.0; }));
  EXPECT_FALSE(feasibility(kSin, [](double x) { return x < 1.0 ? -1.01 : 0.0; }));
}

TEST(Rearrangement, InfeasibleTargetRejectedByPlan) {
  EXPECT_NE(errorOf([] { buildPlan(kSin, [](double) { return 2.0; }, 0.1, 2.0); }).find("rearrangement/infeasible"),
            std::string::npos);
  EXPECT_NE(errorOf([] { buildPlan(kSin, kZero, 0.0, 2.0); }).find("epsilon"), std::string::npos);
  EXPECT_NE(errorOf([] { buildPlan(kSin, kZero, 0.1, 1.0); }).find("exponent"), std::string::npos);
}

TEST(Rearrangement, SinToZeroWithinTolerance) {
  for (double eps : {0.2, 0.1, 0.05}) {
    const auto plan = buildPlan(kSin, kZero, eps, 2.0);
    const auto phi = realizeDiffeo(plan);
    const double err = rearrangeError(kSin, kZero, phi, 2.0);
    EXPECT_LT(err, eps) << "eps " << eps;
    EXPECT_NEAR(err, bruteError(kSin, kZero, phi, 2.0), 1e-3 * eps) << "eps " << eps;
    for (double t : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) EXPECT_GT(phi.at(t).minDerivative(10000), 0.0);
  }
}

TEST(Rearrangement, ErrorShrinksWithTolerance) {
  for (const Function& f1 : {kZero, Function([](double x) { return 0.5 * std::sin(x + 1.0); })}) {
    const double coarse = rearrangeError(kSin, f1, realizeDiffeo(buildPlan(kSin, f1, 0.1, 2.0)), 2.0);
    const double fine = rearrangeError(kSin, f1, realizeDiffeo(buildPlan(kSin, f1, 0.05, 2.0)), 2.0);
    EXPECT_LE(fine, coarse);
  }
}

TEST(Rearrangement, BatteryAchievesTolerance) {
  struct Case {
    Function f, f1;
    double p;
  };
  const std::vector<Case> battery = {
      {kSin, kZero, 2.0},
      {kSin, [](double x) { return std::cos(x); }, 2.0},
      {kSin, [](double x) { return 0.5 * std::sin(x + 1.0); }, 2.0},
      {kSin, [](double) { return 0.3; }, 3.0},
      {[](double x) { return std::cos(x) + 0.2 * std::sin(2.0 * x); }, [](double x) { return 0.5 * std::cos(x); }, 1.5},
  };
  for (std::size_t i = 0; i < battery.size(); ++i)
    for (double eps : {0.2, 0.1}) {
      const auto& c = battery[i];
      const auto phi = realizeDiffeo(buildPlan(c.f, c.f1, eps, c.p));
      EXPECT_LT(rearrangeError(c.f, c.f1, phi, c.p), eps) << "case " << i << " eps " << eps;
      EXPECT_GT(phi.minDerivative(), 0.0);
    }
}

TEST(Rearrangement, PlanInvariants) {
  const double eps = 0.1, p = 2.0;
  const auto plan = buildPlan(kSin, kZero, eps, p);
  EXPECT_NEAR(2.0 * plan.delta, eps / std::pow(2.0 * kLength, 1.0 / p), 1e-15);
  EXPECT_LT(plan.budget(), 0.5 * std::pow(eps, p));
  EXPECT_DOUBLE_EQ(plan.budget(), std::pow(plan.maxF + plan.maxF1, p) * plan.omegaLength());
  ASSERT_FALSE(plan.arcs.empty());
  for (std::size_t i = 0; i < plan.arcs.size(); ++i) {
    const auto& a = plan.arcs[i];
    EXPECT_LT(a.uLo, a.uHi);
    EXPECT_GT(a.uLo, a.a + plan.omegaHalfWidth);
    EXPECT_LT(a.uHi, a.b - plan.omegaHalfWidth);
    EXPECT_LT(a.vLo, a.vHi);
    if (i + 1 < plan.arcs.size()) {
      EXPECT_LT(a.vHi, plan.arcs[i + 1].vLo);
    }
    // Scan V_i: every point is within delta of the target.
    for (int k = 0; k <= 100; ++k) {
      const double y = a.vLo + (a.vHi - a.vLo) * k / 100.0;
      EXPECT_LT(std::abs(std::sin(y) - a.target), plan.delta);
    }
    // Clustered near a zero of sin.
    const double y = wrap(0.5 * (a.vLo + a.vHi));
    const double toZero = std::min({y, std::abs(y - std::numbers::pi), kLength - y});
    EXPECT_LT(toZero, 2.0 * plan.delta);
  }
  EXPECT_LT(plan.arcs.back().vHi, plan.arcs.front().vLo + kLength);
}

TEST(Rearrangement, ArcsHaveSmallOscillation) {
  const Function f1 = [](double x) { return 0.8 * std::sin(x + 2.0) + 0.1 * std::sin(x); };
  const auto plan = buildPlan(kSin, f1, 0.1, 2.0);
  for (const auto& a : plan.arcs) {
    double lo = f1(a.a), hi = lo;
    for (int k = 0; k <= 64; ++k) {
      const double v = f1(a.a + (a.b - a.a) * k / 64.0 * (1.0 - 1e-9));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    EXPECT_LT(hi - lo, plan.delta * (1.0 + 1e-6));
  }
}

TEST(Rearrangement, HalvingEpsilonHalvesDelta) {
  const Function f1 = [](double x) { return 0.5 * std::sin(x + 1.0); };
  for (double eps : {0.2, 0.1}) {
    const auto coarse = buildPlan(kSin, f1, eps, 2.0);
    const auto fine = buildPlan(kSin, f1, 0.5 * eps, 2.0);
    EXPECT_NEAR(fine.delta, 0.5 * coarse.delta, 1e-15);
    EXPECT_LE(fine.arcs.size(), 2 * coarse.arcs.size() + 1);
  }
}

TEST(Rearrangement, BulkLandsInTargetArcs) {
  const auto plan = buildPlan(kSin, kZero, 0.1, 2.0);
  const auto phi = realizeDiffeo(plan);
  for (const auto& a : plan.arcs) {
    const double y = wrap(phi(a.center));
    const double lo = wrap(a.vLo);
    const double rel = wrap(y - lo);
    EXPECT_LE(rel, a.vHi - a.vLo + 1e-12);
    for (int k = -4; k <= 4; ++k) {
      const double x = a.center + k * (a.uHi - a.uLo) / 16.0;
      EXPECT_LT(std::abs(std::sin(phi(x)) - a.target), plan.delta);
    }
  }
}

TEST(Rearrangement, IdentityPlan) {
  const auto plan = buildPlan(kSin, kSin, 0.1, 2.0);
  EXPECT_TRUE(plan.identity);
  for (const auto& a : plan.arcs) {
    EXPECT_EQ(a.vLo, a.a);
    EXPECT_EQ(a.vHi, a.b);
  }
  const auto phi = realizeDiffeo(plan);
  for (double t : {0.0, 0.5, 1.0})
    for (double x : {0.0, 0.3, 2.0, 6.0}) {
      EXPECT_EQ(phi.at(t)(x), x);
      EXPECT_EQ(phi.at(t).derivative(x), 1.0);
    }
  EXPECT_EQ(rearrangeError(kSin, kSin, phi, 2.0), 0.0);
}

TEST(Rearrangement, StartOfIsotopyIsIdentity) {
  const auto phi = realizeDiffeo(buildPlan(kSin, kZero, 0.1, 2.0)).at(0.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = kLength * i / 1000.0 - 1.0;
    EXPECT_EQ(phi(x), x);
  }
}

TEST(Rearrangement, TwoArcCompressionIsMonotone) {
  const double L = kLength;
  Stage s;
  s.before = {0.0, 0.1 * L, 0.4 * L, 0.5 * L, 0.6 * L, 0.9 * L};
  s.after = {0.0, 0.2 * L, 0.3 * L, 0.5 * L, 0.7 * L, 0.8 * L};
  s.halfWidth = 0.1 * L / 8.0;
  const PiecewiseDiffeo phi({s});
  for (double t : {0.25, 0.5, 1.0}) {
    const auto pt = phi.at(t);
    double md = std::numeric_limits<double>::infinity(), prev = pt(0.0);
    for (int i = 1; i <= 10000; ++i) {
      const double x = L * i / 10000.0;
      md = std::min(md, pt.derivative(x));
      const double y = pt(x);
      EXPECT_GT(y, prev);
      prev = y;
    }
    EXPECT_GT(md, 0.0);
    EXPECT_NEAR(pt(L) - pt(0.0), L, 1e-12);
  }
  // Nodes away from the smoothing zones move linearly in t.
  EXPECT_NEAR(phi.at(0.5)(0.25 * L), 0.25 * L, 1e-12);
}

TEST(Rearrangement, SmoothedDerivativeMatchesFiniteDifference) {
  Stage s;
  s.before = {0.0, 1.0, 3.0};
  s.after = {0.5, 1.0, 4.5};
  s.halfWidth = 1.0 / 8.0;
  const PiecewiseDiffeo phi({s});
  for (double x : {0.95, 1.0, 1.05, 2.9, 3.02, 6.2, 0.01}) {
    const double h = 1e-6;
    EXPECT_NEAR(phi.derivative(x), (phi(x + h) - phi(x - h)) / (2.0 * h), 1e-6) << x;
  }
}

TEST(Rearrangement, InverseComposition) {
  const auto phi = realizeDiffeo(buildPlan(kSin, Function([](double x) { return 0.5 * std::sin(x + 1.0); }), 0.1, 2.0));
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double x = kLength * i / 2000.0;
    worst = std::max({worst, std::abs(phi.inverse(phi(x)) - x), std::abs(phi(phi.inverse(x)) - x)});
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Rearrangement, InfeasibleLowerBoundHoldsForRandomDiffeos) {
  const double eta = 0.3, m = 1.5;
  const Function f1 = [&](double x) { return wrap(x) < m ? 1.0 + eta : 0.0; };
  std::mt19937_64 rng(7);
  for (const double p : {2.0, 1.5}) {
    const double bound = eta * std::pow(m, 1.0 / p);
    for (int k = 0; k < 100; ++k) {
      const auto phi = randomDiffeo(rng);
      ASSERT_GT(phi.minDerivative(), 0.0);
      EXPECT_GE(bruteError(kSin, f1, phi, p), bound * (1.0 - 1e-4));
    }
    EXPECT_GE(bruteError(kSin, f1, PiecewiseDiffeo::identity(), p), bound);
  }
}

TEST(Rearrangement, ArcCapReportsRequiredCount) {
  PlanOptions opt;
  opt.arcCap = 16;
  const std::string msg =
      errorOf([&] { buildPlan(kSin, Function([](double x) { return std::sin(x + 1.0); }), 0.05, 2.0, opt); });
  EXPECT_NE(msg.find("rearrangement/arc-cap"), std::string::npos);
  EXPECT_NE(msg.find("cap is 16"), std::string::npos);
  EXPECT_NE(msg.find("need "), std::string::npos);
}

TEST(Rearrangement, CyclicOrderObstruction) {
  // sin(3x) needs three turns of sin's level sets; no degree-one map fits.
  EXPECT_NE(errorOf([] { buildPlan(kSin, Function([](double x) { return std::sin(3.0 * x); }), 0.1, 2.0); })
                .find("rearrangement/ordering"),
            std::string::npos);
}

TEST(Rearrangement, NodeValidation) {
  EXPECT_THROW(PiecewiseDiffeo({Stage{{0.0, 1.0}, {0.0}, 0.0}}), Error);
  EXPECT_THROW(PiecewiseDiffeo({Stage{{1.0, 0.5}, {0.0, 1.0}, 0.0}}), Error);
  EXPECT_THROW(PiecewiseDiffeo({Stage{{0.0, 7.0}, {0.0, 1.0}, 0.0}}), Error);
  EXPECT_THROW(PiecewiseDiffeo({Stage{{0.0, 1.0}, {0.0, 1.0}, 0.5}}), Error);
  EXPECT_THROW(PiecewiseDiffeo({}, 1.5), Error);
}

TEST(Rearrangement, SampledInputs) {
  const auto f = fromSamples(sample(kSin, 4096));
  EXPECT_NEAR(f(1.0), std::sin(1.0), 1e-6);
  EXPECT_NEAR(f(1.0 + kLength), std::sin(1.0), 1e-6);
  const auto phi = realizeDiffeo(buildPlan(f, kZero, 0.1, 2.0));
  EXPECT_LT(rearrangeError(f, kZero, phi, 2.0), 0.1);
}

TEST(Expr, ParsesArithmeticAndFunctions) {
  EXPECT_NEAR(expr::parse("2*sin(x)^2 - -1 + pi/e")(1.0),
              2.0 * std::pow(std::sin(1.0), 2) + 1.0 + std::numbers::pi / std::numbers::e, 1e-15);
  EXPECT_DOUBLE_EQ(expr::parse("-2^2")(0.0), -4.0);
  EXPECT_DOUBLE_EQ(expr::parse("2^3^2")(0.0), 512.0);
  EXPECT_DOUBLE_EQ(expr::parse("0.5*cos(x+1)")(2.0), 0.5 * std::cos(3.0));
  EXPECT_DOUBLE_EQ(expr::parse("sqrt(abs(x)) + exp(log(3)) - tanh(0)")(-4.0), 5.0);
  EXPECT_DOUBLE_EQ(expr::parse("1e-1 * x")(10.0), 1.0);
  for (const char* bad : {"", "sin(", "2 +", "foo(x)", "y", "(1", "1)", "3 4"})
    EXPECT_NE(errorOf([&] { expr::parse(bad); }).find("cli/expression"), std::string::npos) << bad;
}
