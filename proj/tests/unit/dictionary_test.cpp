#include <koopest/dictionary.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace koopest;

namespace {

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

std::size_t binomial(std::size_t n, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST(BuildDictionary, DegreeTwoOrdering) {
  const auto d = build_dictionary(2, 2);
  const std::vector<MultiIndex> want{{1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  EXPECT_EQ(d.terms(), want);
}

TEST(BuildDictionary, DegreeTenHasSixtyFiveTerms) { EXPECT_EQ(build_dictionary(2, 10).size(), 65u); }

TEST(BuildDictionary, DegreeOneIsIdentity) {
  const auto d = build_dictionary(2, 1);
  const std::vector<MultiIndex> want{{1, 0}, {0, 1}};
  EXPECT_EQ(d.terms(), want);
}

TEST(BuildDictionary, ConstantGoesLast) {
  const auto d = build_dictionary(2, 2, true);
  ASSERT_EQ(d.size(), 6u);
  EXPECT_EQ(d.terms().back(), (MultiIndex{0, 0}));
  EXPECT_TRUE(d.has_constant());
}

TEST(BuildDictionary, SizeFormulaAndMonotone) {
  for (std::size_t n = 1; n <= 3; ++n) {
    std::size_t prev = 0;
    for (int deg = 1; deg <= 6; ++deg) {
      const std::size_t size = build_dictionary(n, deg).size();
      EXPECT_EQ(size, binomial(n + deg, deg) - 1);
      EXPECT_GE(size, prev);
      prev = size;
    }
  }
}

TEST(BuildDictionary, StableOrdering) { EXPECT_EQ(build_dictionary(3, 5), build_dictionary(3, 5)); }

TEST(BuildDictionary, RejectsBadParameters) {
  EXPECT_THROW(build_dictionary(0, 2), InvalidArgument);
  EXPECT_THROW(build_dictionary(2, 0), InvalidArgument);
}

TEST(PolynomialDictionary, RejectsMissingIdentityPrefix) {
  EXPECT_THROW(PolynomialDictionary(2, {{0, 1}, {1, 0}}), InvalidArgument);
  EXPECT_THROW(PolynomialDictionary(2, {{1, 0}, {0, 1}, {2, 0}, {2, 0}}), InvalidArgument);
}

TEST(Lift, DegreeTwoValues) {
  const Vector psi = build_dictionary(2, 2).lift(v2(2, 3));
  EXPECT_EQ(psi, (Vector(5) << 2, 3, 4, 6, 9).finished());
}

TEST(Lift, OriginWithoutConstantIsZero) {
  EXPECT_TRUE(build_dictionary(2, 4).lift(v2(0, 0)).isZero(0.0));
}

TEST(Lift, ExampleOneDictionary) {
  const PolynomialDictionary d(2, {{1, 0}, {0, 1}, {2, 0}});
  EXPECT_EQ(d.lift(v2(2, -1)), (Vector(3) << 2, -1, 4).finished());
}

TEST(Lift, ScaledMonomials) {
  const auto d = build_dictionary(2, 3, false, 4.0);
  const Vector psi = d.lift(v2(2, 3));
  // degree >= 2 terms are 4 * prod (x_i / 4)^e_i
  EXPECT_DOUBLE_EQ(psi(0), 2.0);
  EXPECT_DOUBLE_EQ(psi(1), 3.0);
  EXPECT_DOUBLE_EQ(psi(2), 4.0 * 0.5 * 0.5);
  EXPECT_DOUBLE_EQ(psi(3), 4.0 * 0.5 * 0.75);
  EXPECT_DOUBLE_EQ(psi(5), 4.0 * 0.5 * 0.5 * 0.5);
}

TEST(Lift, DimensionChecked) {
  EXPECT_THROW(build_dictionary(2, 2).lift(Vector::Ones(3)), DimensionMismatch);
}

TEST(LiftMatrix, ColumnsAreLifts) {
  const auto d = build_dictionary(2, 3);
  const Matrix one = d.lift_matrix({v2(1.5, -2)});
  ASSERT_EQ(one.cols(), 1);
  EXPECT_EQ(Vector(one.col(0)), d.lift(v2(1.5, -2)));
  const Matrix two = d.lift_matrix({v2(0.2, 0.3), v2(0.2, 0.3)});
  EXPECT_EQ(two.col(0), two.col(1));
}

TEST(LiftMatrix, ToySizedData) {
  std::vector<Vector> states(4000, v2(0.1, 0.2));
  const Matrix m = build_dictionary(2, 10).lift_matrix(states);
  EXPECT_EQ(m.rows(), 65);
  EXPECT_EQ(m.cols(), 4000);
}

TEST(Reconstruct, TakesPrefix) {
  const auto d = build_dictionary(2, 2);
  EXPECT_EQ(reconstruct(d.lift(v2(2, 3)), 2), v2(2, 3));
  EXPECT_EQ(reconstruct((Vector(4) << 5, 7, 99, 99).finished(), 2), v2(5, 7));
  EXPECT_THROW(reconstruct(Vector::Ones(1), 2), InvalidArgument);
}

TEST(Reconstruct, IdentityPrefixOnRandomStates) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (double scale : {1.0, 20.0}) {
    const auto d = build_dictionary(2, 10, false, scale);
    for (int i = 0; i < 10000; ++i) {
      const Vector x = v2(u(rng), u(rng));
      ASSERT_EQ(reconstruct(d.lift(x), 2), x);
    }
  }
}
