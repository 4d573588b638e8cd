#include "akscal/lie_geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace akscal;
using namespace akscal::lie;

namespace {

using R = Rational;
const R half(1, 2);
const R quarter(1, 4);

/// Rewrites a spec in the frame f_a = sum_i U(i,a) e_i for an orthogonal U
/// commuting with J, so g, J and omega keep their components.
LieFrameSpec<double> rotated(const LieFrameSpec<double>& base, const Eigen::MatrixXd& u) {
  const int d = base.dim;
  LieFrameSpec<double> out(base.name + "-rotated", d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) {
        double v = 0.0;
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) v += u(i, a) * u(j, b) * base.c(i, j, k) * u(k, c);
        out.c(a, b, c) = v;
      }
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b)
      for (int c = 0; c < d; ++c) {
        const double v = a == b ? 0.0 : out.c(a, b, c);
        out.c(a, b, c) = v;
        out.c(b, a, c) = -v;
      }
  out.j = u.transpose() * base.j * u;
  out.latticeVolumes = base.latticeVolumes;
  return out;
}

/// Cayley transform of a random skew matrix commuting with J: orthogonal and J-linear.
Eigen::MatrixXd randomUnitary(std::mt19937_64& rng, const Eigen::MatrixXd& j) {
  const Eigen::Index d = j.rows();
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd x(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) x(a, b) = u(rng);
  x = (x - x.transpose()).eval() / 2.0;
  x = (x - j * x * j).eval() / 2.0;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  return (id - x).inverse() * (id + x);
}

LieFrameSpec<double> toDouble(const LieFrameSpec<R>& s) {
  LieFrameSpec<double> out(s.name, s.dim);
  for (int i = 0; i < s.dim; ++i)
    for (int j = 0; j < s.dim; ++j) {
      out.j(i, j) = akscal::toDouble(s.j(i, j));
      for (int k = 0; k < s.dim; ++k) out.c(i, j, k) = akscal::toDouble(s.c(i, j, k));
    }
  out.latticeVolumes = s.latticeVolumes;
  return out;
}

}  // namespace

TEST(LieGeometry, KtLeviCivitaExact) {
  const auto g = leviCivita(catalog::kodairaThurston<R>());
  EXPECT_EQ(g(0, 1, 2), half);   // nabla_{e1} e2 = e3 / 2
  EXPECT_EQ(g(1, 0, 2), -half);  // nabla_{e2} e1 = -e3 / 2
  EXPECT_EQ(g(0, 2, 1), -half);  // nabla_{e1} e3 = -e2 / 2
  EXPECT_EQ(g(2, 0, 1), -half);
  EXPECT_EQ(g(1, 2, 0), half);   // nabla_{e2} e3 = e1 / 2
  EXPECT_EQ(g(2, 1, 0), half);
  int nonzero = 0;
  for (R v : g.data()) nonzero += v != R(0);
  EXPECT_EQ(nonzero, 6);
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k) {
      EXPECT_EQ(g(3, j, k), R(0));
      EXPECT_EQ(g(j, 3, k), R(0));
      EXPECT_EQ(g(j, k, 3), R(0));
    }
}

TEST(LieGeometry, AbelianIsFlat) {
  const auto spec = catalog::abelianTorus<R>(6);
  for (R v : leviCivita(spec).data()) EXPECT_EQ(v, R(0));
  const auto cd = curvature(spec);
  for (R v : cd.riemann.data()) EXPECT_EQ(v, R(0));
  for (R v : cd.nablaJ.data()) EXPECT_EQ(v, R(0));
  EXPECT_EQ(cd.scalar, R(0));
  EXPECT_EQ(cd.starScalar, R(0));
  EXPECT_EQ(cd.normNablaJSq, R(0));
  EXPECT_EQ(cd.normNablaOmegaSq, R(0));
}

TEST(LieGeometry, ProductWithFlatFactorKeepsGamma) {
  const auto kt = leviCivita(catalog::kodairaThurston<R>());
  const auto prod = catalog::withFlatFactor(catalog::kodairaThurston<R>(), 2);
  const auto g = leviCivita(prod);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      for (int k = 0; k < 6; ++k)
        EXPECT_EQ(g(i, j, k), (i < 4 && j < 4 && k < 4) ? kt(i, j, k) : R(0));
}

TEST(LieGeometry, KtCurvatureTablesExact) {
  const auto cd = curvature(catalog::kodairaThurston<R>());
  EXPECT_EQ(cd.sectional(0, 1), R(-3, 4));
  EXPECT_EQ(cd.sectional(0, 2), quarter);
  EXPECT_EQ(cd.sectional(1, 2), quarter);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(cd.sectional(i, 3), R(0));
  Mat<R> ric = Mat<R>::Zero(4, 4);
  ric(0, 0) = -half;
  ric(1, 1) = -half;
  ric(2, 2) = half;
  EXPECT_EQ(cd.ricci, ric);
  EXPECT_EQ(cd.scalar, -half);
  Mat<R> rm = Mat<R>::Zero(4, 4);
  rm(0, 0) = -quarter;
  rm(1, 1) = -half;
  rm(2, 2) = half;
  rm(3, 3) = quarter;
  EXPECT_EQ(cd.ricciAnti, rm);
}

TEST(LieGeometry, KtConnectionAndCurvatureForms) {
  const auto cd = curvature(catalog::kodairaThurston<R>());
  // omega_12 = e^3 / 2, omega_13 = e^2 / 2, omega_23 = -e^1 / 2
  EXPECT_EQ(cd.connectionForms(0, 1, 2), half);
  EXPECT_EQ(cd.connectionForms(0, 2, 1), half);
  EXPECT_EQ(cd.connectionForms(1, 2, 0), -half);
  // Omega_12 = -3/4 e^1 ^ e^2, Omega_13 = 1/4 e^1 ^ e^3, Omega_23 = 1/4 e^2 ^ e^3
  EXPECT_EQ(cd.curvatureForms(0, 1, 0, 1), R(-3, 4));
  EXPECT_EQ(cd.curvatureForms(0, 2, 0, 2), quarter);
  EXPECT_EQ(cd.curvatureForms(1, 2, 1, 2), quarter);
  EXPECT_EQ(cd.curvatureForms(1, 0, 0, 1), R(3, 4));
  EXPECT_EQ(cd.curvatureForms(0, 1, 1, 2), R(0));
}

TEST(LieGeometry, KtStarScalarIdentity) {
  const auto cd = curvature(catalog::kodairaThurston<R>());
  // Oracle: sum of squares of nabla_{e_i}(J e_j) - J nabla_{e_i} e_j, by hand.
  EXPECT_EQ(cd.normNablaJSq, R(2));
  EXPECT_EQ(cd.normNablaOmegaSq, R(2));
  EXPECT_EQ(cd.starScalar, half);
  EXPECT_EQ(cd.hermitianScalar, R(0));
  const auto id = starScalarIdentity(cd);
  EXPECT_TRUE(id.holds());
  EXPECT_EQ(id.lhs, R(1));
}

TEST(LieGeometry, ZRatioCollapsingFamily) {
  for (double d : {1.0, 0.1, 0.01}) EXPECT_NEAR(zRatio(catalog::kodairaThurston<R>(d)), -0.5 * std::sqrt(d), 1e-15);
  EXPECT_EQ(zRatio(catalog::kodairaThurston<R>(1.0)), -0.5);
  EXPECT_EQ(zRatio(catalog::abelianTorus<R>(4, 7.0)), 0.0);
  auto bare = catalog::kodairaThurston<R>();
  bare.latticeVolumes.clear();
  EXPECT_THROW(zRatio(bare), Error);
}

TEST(LieGeometry, BlairReports) {
  const auto flat = LeftInvariantGeometry<R>(catalog::abelianTorus<R>(4));
  EXPECT_TRUE(flat.blair(0.0).match);
  const auto kt = LeftInvariantGeometry<R>(catalog::kodairaThurston<R>());
  const auto ok = kt.blair(0.0);
  EXPECT_TRUE(ok.match);
  EXPECT_EQ(ok.lhs, 0.0);
  EXPECT_TRUE(ok.rhsExternal);
  const auto bad = kt.blair(1.0);
  EXPECT_FALSE(bad.match);
  EXPECT_EQ(bad.discrepancy, -1.0);
}

TEST(LieGeometry, ValidationRejectsBrokenSpecs) {
  auto notJacobi = LieFrameSpec<R>("bad", 4);
  notJacobi.j = catalog::abelianTorus<R>(4).j;
  notJacobi.addBracket(0, 1, 2, 1);
  notJacobi.addBracket(0, 2, 0, 1);
  notJacobi.addBracket(1, 2, 3, 1);
  EXPECT_THROW(validate(notJacobi), Error);

  // [e1,e2] = e3 with the standard block J: omega = e12 + e34 is not closed.
  auto notClosed = catalog::abelianTorus<R>(4);
  notClosed.addBracket(0, 1, 2, 1);
  try {
    validate(notClosed);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.check(), "closedness");
  }

  auto notAcs = catalog::kodairaThurston<R>();
  notAcs.j(0, 3) = 2;
  EXPECT_THROW(validate(notAcs), Error);

  auto asym = catalog::kodairaThurston<R>();
  asym.c(0, 1, 3) = 1;
  EXPECT_THROW(validate(asym), Error);
}

TEST(LieGeometryProperty, IdentitiesExactOnCatalog) {
  std::vector<LieFrameSpec<R>> specs = {catalog::kodairaThurston<R>(), catalog::abelianTorus<R>(4),
                                        catalog::withFlatFactor(catalog::kodairaThurston<R>(), 4)};
  auto scaled = catalog::kodairaThurston<R>();
  scaled.c(0, 1, 2) = R(5, 3);
  scaled.c(1, 0, 2) = R(-5, 3);
  specs.push_back(scaled);
  for (const auto& spec : specs) {
    const auto cd = curvature(spec);
    const int d = spec.dim;
    R sumK = 0, trace = 0;
    for (int i = 0; i < d; ++i) {
      trace += cd.ricci(i, i);
      for (int j = i + 1; j < d; ++j) sumK += cd.sectional(i, j);
      for (int j = 0; j < d; ++j) {
        EXPECT_EQ(cd.sectional(i, j), cd.sectional(j, i));
        for (int k = 0; k < d; ++k) {
          EXPECT_EQ(cd.gamma(i, j, k), -cd.gamma(i, k, j));
          EXPECT_EQ(cd.gamma(i, j, k) - cd.gamma(j, i, k), spec.c(i, j, k));
          for (int l = 0; l < d; ++l)
            EXPECT_EQ(cd.riemann(i, j, k, l) + cd.riemann(j, k, i, l) + cd.riemann(k, i, j, l), R(0));
        }
      }
    }
    EXPECT_EQ(R(2) * sumK, cd.scalar);
    EXPECT_EQ(trace, cd.scalar);
    EXPECT_TRUE(starScalarIdentity(cd).holds()) << spec.name;
  }
  const auto prod = curvature(catalog::withFlatFactor(catalog::kodairaThurston<R>(), 4));
  EXPECT_EQ(prod.scalar, -half);
  EXPECT_EQ(prod.normNablaJSq, R(2));
  EXPECT_EQ(prod.ricci.topLeftCorner(4, 4), curvature(catalog::kodairaThurston<R>()).ricci);
}

TEST(LieGeometryProperty, StarScalarIdentityInRotatedFrames) {
  std::mt19937_64 rng(99);
  const std::vector<LieFrameSpec<double>> bases = {
      toDouble(catalog::kodairaThurston<R>()), toDouble(catalog::withFlatFactor(catalog::kodairaThurston<R>(), 2))};
  for (int trial = 0; trial < 40; ++trial) {
    const auto& base = bases[trial % bases.size()];
    const auto spec = rotated(base, randomUnitary(rng, base.j));
    const auto cd = curvature(spec);
    EXPECT_NEAR(cd.scalar, -0.5, 1e-12);
    EXPECT_NEAR(cd.normNablaJSq, 2.0, 1e-12);
    EXPECT_TRUE(starScalarIdentity(cd).holds(1e-12)) << "trial " << trial;
  }
}
