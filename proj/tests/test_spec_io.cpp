#include "akscal/spec_io.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace akscal;

namespace {
const std::string kData = AKSCAL_DATA_DIR;

std::string errorOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}
}  // namespace

TEST(SpecIo, KtSpecMatchesCatalog) {
  const auto spec = io::loadSpec<Rational>(kData + "/kt.spec");
  const auto ref = lie::catalog::kodairaThurston<Rational>();
  EXPECT_EQ(spec.name, "kodaira-thurston");
  EXPECT_EQ(spec.c, ref.c);
  EXPECT_EQ(spec.j, ref.j);
  EXPECT_EQ(spec.latticeVolumes, ref.latticeVolumes);
  EXPECT_EQ(lie::curvature(spec).scalar, Rational(-1, 2));
}

TEST(SpecIo, ShippedSpecsLoad) {
  EXPECT_EQ(io::loadSpec<Rational>(kData + "/torus4.spec").j, lie::catalog::abelianTorus<Rational>(4).j);
  const auto prod = io::loadSpec<Rational>(kData + "/kt_r2.spec");
  EXPECT_EQ(prod.j, lie::catalog::withFlatFactor(lie::catalog::kodairaThurston<Rational>(), 2).j);
  EXPECT_EQ(lie::curvature(prod).scalar, Rational(-1, 2));
  const auto dbl = io::loadSpec<double>(kData + "/kt.spec");
  EXPECT_EQ(lie::curvature(dbl).scalar, -0.5);
}

TEST(SpecIo, SpecParseErrorsCarryLineNumbers) {
  EXPECT_NE(errorOf([] { io::parseSpec<Rational>(""); }).find("empty"), std::string::npos);
  EXPECT_NE(errorOf([] { io::parseSpec<Rational>("dim 4\nfoo 1\n"); }).find(":2:"), std::string::npos);
  EXPECT_NE(errorOf([] { io::parseSpec<Rational>("c 1 2 3 1\n"); }).find("before 'dim'"), std::string::npos);
  EXPECT_NE(errorOf([] { io::parseSpec<Rational>("dim 4\nc 1 5 3 1\n"); }).find("out of range"), std::string::npos);
  EXPECT_NE(errorOf([] { io::parseSpec<Rational>("dim 4\nJ 0 0 0 1\n"); }).find("J rows"), std::string::npos);
  EXPECT_NE(errorOf([] { io::parseSpec<Rational>("dim 4\nc 1 2 3 1e-3\n"); }).find("bad value"), std::string::npos);
  EXPECT_NE(errorOf([] { io::parseSpec<Rational>("dim 3\n"); }).find("even"), std::string::npos);
  // J^2 = -I fails: caught by validation after parsing.
  const std::string badJ = "dim 2\nJ 1 0\nJ 0 1\n";
  EXPECT_NE(errorOf([&] { io::parseSpec<Rational>(badJ); }).find("lie-geometry/acs"), std::string::npos);
  EXPECT_NE(errorOf([] { io::loadSpec<Rational>("/nonexistent/x.spec"); }).find("cannot open"), std::string::npos);
}

TEST(SpecIo, SpecDuplicateBracketRejected) {
  const std::string text =
      "dim 4\nc 1 2 3 1\nc 2 1 3 -1\nJ 0 0 0 1\nJ 0 0 -1 0\nJ 0 1 0 0\nJ -1 0 0 0\n";
  EXPECT_NE(errorOf([&] { io::parseSpec<Rational>(text); }).find("twice"), std::string::npos);
}

TEST(SpecIo, ShippedModelsLoad) {
  const auto cp2 = io::loadModel(kData + "/cp2.model");
  ASSERT_TRUE(cp2.seed);
  EXPECT_NEAR(cohomology::evalZBound(cp2.model, *cp2.seed), 12.0 * std::sqrt(2.0) * std::numbers::pi, 1e-12);
  EXPECT_TRUE(cohomology::acCheck(cp2.model));
  EXPECT_FALSE(cohomology::acCheck(io::loadModel(kData + "/cp2_reversed.model").model));
  const auto torus = io::loadModel(kData + "/torus4.model");
  EXPECT_TRUE(cohomology::acCheck(torus.model));
  EXPECT_EQ(cohomology::evalZBound(torus.model, *torus.seed), 0.0);

  const auto barlow = io::loadModel(kData + "/barlow_sigma2.model");
  const auto ref = cohomology::catalog::blownUpPlaneTimesCurve(8, "ref");
  EXPECT_EQ(barlow.model.q, ref.q);
  EXPECT_EQ(barlow.model.c1Base, ref.c1Base);
  EXPECT_EQ(barlow.model.fiberChern, ref.fiberChern);
  EXPECT_EQ(barlow.model.euler, 11);
  EXPECT_EQ(barlow.model.signature, -7);
  EXPECT_EQ(barlow.seed->flat(), cohomology::catalog::negativeSeed(8).flat());
  const auto r8 = io::loadModel(kData + "/r8_sigma2.model");
  EXPECT_EQ(r8.seed->flat(), cohomology::catalog::positiveSeed(8).flat());
}

TEST(SpecIo, ModelParseErrors) {
  EXPECT_NE(errorOf([] { io::parseModel(""); }).find("empty"), std::string::npos);
  EXPECT_NE(errorOf([] { io::parseModel("rank 1\nQ 1\n"); }).find("missing 'c1'"), std::string::npos);
  EXPECT_NE(errorOf([] { io::parseModel("rank 1\nQ x\n"); }).find(":2:"), std::string::npos);
  EXPECT_NE(errorOf([] { io::parseModel("rank 2\nQ 1 0\nQ 0 0\nc1 0 0\n"); }).find("degenerate"), std::string::npos);
  EXPECT_NE(errorOf([] { io::parseModel("n 3\nrank 1\nQ 1\nc1 3\n"); }).find("fiberChern"), std::string::npos);
  EXPECT_NE(errorOf([] { io::parseModel("rank 1\nrank 1\n"); }).find("twice"), std::string::npos);
}

TEST(SpecIo, ClassText) {
  const auto m = cohomology::catalog::blownUpPlaneTimesCurve(8, "b");
  const auto c = io::parseClass("-3,1,1,1,1,1,1,1,1;2", m);
  EXPECT_EQ(c.base(0), -3.0);
  EXPECT_EQ(*c.fiber, 2.0);
  EXPECT_THROW(io::parseClass("-3,1,1,1,1,1,1,1,1", m), Error);
  EXPECT_THROW(io::parseClass("1,2;1", m), Error);
  EXPECT_THROW(io::parseClass("a,1,1,1,1,1,1,1,1;1", m), Error);
}
