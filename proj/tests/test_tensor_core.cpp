#include "akscal/sampling.hpp"
#include "akscal/tensor_core.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace akscal;
using namespace akscal::tensor;

namespace {

Eigen::MatrixXd ktJ() {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(4, 4);
  j(0, 3) = 1.0;
  j(3, 0) = -1.0;
  j(2, 1) = 1.0;
  j(1, 2) = -1.0;
  return j;
}

Mat<Rational> ktJExact() {
  Mat<Rational> j = Mat<Rational>::Zero(4, 4);
  j(0, 3) = 1;
  j(3, 0) = -1;
  j(2, 1) = 1;
  j(1, 2) = -1;
  return j;
}

Eigen::MatrixXd ktOmega() {
  // omega(e4, e1) = 1, omega(e2, e3) = 1
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 4);
  w(3, 0) = 1.0;
  w(0, 3) = -1.0;
  w(1, 2) = 1.0;
  w(2, 1) = -1.0;
  return w;
}

}  // namespace

TEST(TensorCore, AntiInvariantPartOfCompatibleMetricIsZero) {
  const auto g = MetricMatrix::identity(4);
  const auto j = AcsMatrix::standard(4);
  EXPECT_TRUE(antiInvariantPart(SymTensor(g.matrix()), j).matrix().isZero(0.0));
  EXPECT_EQ(invariantPart(SymTensor(g.matrix()), j).matrix(), g.matrix());
}

TEST(TensorCore, KtRicciAntiInvariantPartExact) {
  Mat<Rational> ric = Mat<Rational>::Zero(4, 4);
  ric(0, 0) = Rational(-1, 2);
  ric(1, 1) = Rational(-1, 2);
  ric(2, 2) = Rational(1, 2);
  const Mat<Rational> minus = antiInvariantPart<Rational>(ric, ktJExact());
  Mat<Rational> expected = Mat<Rational>::Zero(4, 4);
  expected(0, 0) = Rational(-1, 4);
  expected(1, 1) = Rational(-1, 2);
  expected(2, 2) = Rational(1, 2);
  expected(3, 3) = Rational(1, 4);
  EXPECT_EQ(minus, expected);
}

TEST(TensorCore, InvariantPartOfKtAntiInvariantRicciIsZero) {
  Mat<Rational> a = Mat<Rational>::Zero(4, 4);
  a(0, 0) = Rational(-1, 4);
  a(1, 1) = Rational(-1, 2);
  a(2, 2) = Rational(1, 2);
  a(3, 3) = Rational(1, 4);
  // Oracle: 1/2 (A + J^T A J) entrywise.
  const Mat<Rational> j = ktJExact();
  Mat<Rational> oracle = Mat<Rational>::Zero(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      Rational rot = 0;
      for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q) rot += j(p, r) * a(p, q) * j(q, c);
      oracle(r, c) = (a(r, c) + rot) / Rational(2);
    }
  EXPECT_EQ(oracle, Mat<Rational>::Zero(4, 4));
  EXPECT_EQ(invariantPart<Rational>(a, j), oracle);
}

TEST(TensorCore, SplittingRejectsBadInput) {
  Eigen::MatrixXd notAcs = Eigen::MatrixXd::Identity(4, 4);
  EXPECT_THROW(antiInvariantPart<double>(Eigen::MatrixXd::Identity(4, 4), notAcs), Error);
  EXPECT_THROW(antiInvariantPart<double>(Eigen::MatrixXd::Identity(2, 2), ktJ()), Error);
  Eigen::MatrixXd nearly = ktJ();
  nearly(0, 3) += 1e-9;
  EXPECT_THROW(antiInvariantPart<double>(Eigen::MatrixXd::Identity(4, 4), nearly), Error);
}

TEST(TensorCore, StrongTypesValidate) {
  Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(4, 4);
  asym(0, 1) = 0.5;
  EXPECT_THROW(SymTensor{asym}, Error);
  EXPECT_THROW(MetricMatrix{-Eigen::MatrixXd::Identity(4, 4)}, Error);
  EXPECT_THROW(SymplecticMatrix{Eigen::MatrixXd::Identity(4, 4)}, Error);
  EXPECT_FALSE(SymplecticMatrix{Eigen::MatrixXd::Zero(4, 4)}.nondegenerate());
  EXPECT_THROW(AcsMatrix{Eigen::MatrixXd::Identity(4, 4)}, Error);
  EXPECT_THROW(MetricMatrix{Eigen::MatrixXd::Identity(3, 3)}, Error);
}

TEST(TensorCore, ExpMetricIdentityAndDiagonalOracle) {
  const auto g = MetricMatrix::identity(4);
  EXPECT_EQ(expMetric(g, SymTensor::zero(4)).matrix(), g.matrix());

  const double a = 0.7, b = -0.3;
  Eigen::MatrixXd h = Eigen::Vector4d(a, -a, b, -b).asDiagonal();
  const auto out = expMetric(g, SymTensor(h));
  const Eigen::MatrixXd oracle = Eigen::Vector4d(std::exp(a), std::exp(-a), std::exp(b), std::exp(-b)).asDiagonal();
  EXPECT_LT(maxAbs<double>(out.matrix() - oracle), 1e-14);
  EXPECT_TRUE(compatibleAcs(out, SymplecticMatrix::standard(4)).has_value());
}

TEST(TensorCore, CheckCompatibilityCases) {
  auto flat = checkCompatibility<double>(Eigen::MatrixXd::Identity(4, 4), SymplecticMatrix::standard(4).matrix());
  ASSERT_TRUE(flat);
  EXPECT_EQ(*flat.j, AcsMatrix::standard(4).matrix());

  auto kt = checkCompatibility<double>(Eigen::MatrixXd::Identity(4, 4), ktOmega());
  ASSERT_TRUE(kt);
  EXPECT_EQ(*kt.j, ktJ());
  // J e4 = e1 and J e2 = e3
  EXPECT_EQ((*kt.j).col(3), Eigen::Vector4d(1, 0, 0, 0));
  EXPECT_EQ((*kt.j).col(1), Eigen::Vector4d(0, 0, 1, 0));

  Eigen::MatrixXd g = Eigen::Vector4d(2, 1, 1, 1).asDiagonal();
  auto bad = checkCompatibility<double>(g, SymplecticMatrix::standard(4).matrix());
  EXPECT_FALSE(bad);
  EXPECT_GT(bad.squareDefect, 0.5);
  EXPECT_NE(bad.failure.find("J^2"), std::string::npos);

  auto degenerate = checkCompatibility<double>(Eigen::MatrixXd::Identity(4, 4), Eigen::MatrixXd::Zero(4, 4));
  EXPECT_FALSE(degenerate);
}

TEST(TensorCore, CheckCompatibilityExactMode) {
  Mat<Rational> omega = Mat<Rational>::Zero(4, 4);
  omega(3, 0) = 1;
  omega(0, 3) = -1;
  omega(1, 2) = 1;
  omega(2, 1) = -1;
  auto res = checkCompatibility<Rational>(Mat<Rational>::Identity(4, 4), omega);
  ASSERT_TRUE(res);
  EXPECT_EQ(*res.j, ktJExact());
}

TEST(TensorCore, LogRecoverCases) {
  const auto g = MetricMatrix::identity(4);
  const auto omega = SymplecticMatrix::standard(4);
  EXPECT_LT(maxAbs<double>(logRecover(g, g, omega).matrix()), 1e-15);

  Eigen::MatrixXd h0 = Eigen::MatrixXd::Zero(4, 4);
  h0(0, 0) = 0.4;
  h0(1, 1) = -0.4;
  h0(0, 1) = h0(1, 0) = 0.25;
  h0(2, 3) = h0(3, 2) = -0.1;
  const auto j = AcsMatrix::standard(4);
  ASSERT_TRUE(antiInvariantPart(SymTensor(h0), j).matrix().isApprox(h0, 1e-15));
  const auto back = logRecover(g, expMetric(g, SymTensor(h0)), omega);
  EXPECT_LT(maxAbs<double>(back.matrix() - h0), 1e-10);

  EXPECT_THROW(logRecover(g, MetricMatrix(2.0 * g.matrix()), omega), Error);
}

TEST(TensorCore, CutoffProfileShape) {
  CutoffProfile eta;
  EXPECT_EQ(eta(0.0), 0.0);
  EXPECT_EQ(eta(eta.r1), 0.0);
  EXPECT_EQ(eta(eta.r2), 1.0);
  EXPECT_EQ(eta(1.0), 1.0);
  EXPECT_NEAR(eta(0.5), 0.5, 1e-15);
  double prev = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double v = eta(i / 1000.0);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(TensorCore, CutoffBlendRegions) {
  sampling::Rng rng(11);
  const auto omega = SymplecticMatrix::standard(4);
  const auto j = AcsMatrix::standard(4);
  const auto gInner = MetricMatrix::identity(4);
  std::vector<MetricMatrix> outer, inner;
  std::vector<double> r = {0.1, 0.5, 0.9};
  for (std::size_t p = 0; p < r.size(); ++p) {
    outer.push_back(expMetric(gInner, sampling::randomAntiInvariant(rng, j, 0.9)));
    inner.push_back(gInner);
  }
  const auto blended = cutoffBlend(outer, inner, CutoffProfile{}, r, omega);
  EXPECT_EQ(blended[0].matrix(), inner[0].matrix());
  EXPECT_LT(maxAbs<double>(blended[2].matrix() - outer[2].matrix()), 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(blended[1].matrix());
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  EXPECT_TRUE(compatibleAcs(blended[1], omega).has_value());

  std::vector<double> shortR = {0.1};
  EXPECT_THROW(cutoffBlend(outer, inner, CutoffProfile{}, shortR, omega), Error);
}

TEST(TensorCoreProperty, RandomCasesProjectionAndRoundTrip) {
  sampling::Rng rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Index n = 2 * (1 + trial % 3);
    const auto triple = sampling::randomCompatibleTriple(rng, n);
    const auto a = sampling::randomSymmetric(rng, n);
    const auto plus = invariantPart(a, triple.j);
    const auto minus = antiInvariantPart(a, triple.j);
    ASSERT_LT(maxAbs<double>(plus.matrix() + minus.matrix() - a.matrix()), 1e-12);
    ASSERT_LT(maxAbs<double>(invariantPart(plus, triple.j).matrix() - plus.matrix()), 1e-12);
    ASSERT_LT(maxAbs<double>(antiInvariantPart(minus, triple.j).matrix() - minus.matrix()), 1e-12);
    ASSERT_LT(maxAbs<double>(antiInvariantPart(plus, triple.j).matrix()), 1e-12);
    ASSERT_LT(maxAbs<double>(invariantPart(minus, triple.j).matrix()), 1e-12);

    const auto h = sampling::randomAntiInvariant(rng, triple.j, 1.0);
    const auto gt = expMetric(triple.g, h);
    ASSERT_TRUE(compatibleAcs(gt, triple.omega).has_value()) << "trial " << trial;
    const auto back = logRecover(triple.g, gt, triple.omega);
    ASSERT_LT(maxAbs<double>(back.matrix() - h.matrix()), 1e-10) << "trial " << trial;
  }
}

TEST(TensorCoreProperty, ExactAntiInvariance) {
  sampling::Rng rng(5);
  std::uniform_int_distribution<int> coin(-9, 9);
  for (int trial = 0; trial < 50; ++trial) {
    Mat<Rational> a(4, 4);
    for (int r = 0; r < 4; ++r)
      for (int c = r; c < 4; ++c) a(r, c) = a(c, r) = Rational(coin(rng), 1 + std::abs(coin(rng)));
    const Mat<Rational> j = ktJExact();
    const Mat<Rational> minus = antiInvariantPart<Rational>(a, j);
    EXPECT_EQ(Mat<Rational>(j.transpose() * minus * j), Mat<Rational>(-minus));
  }
}
