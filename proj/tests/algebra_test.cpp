#include <random>
#include <set>

#include <gtest/gtest.h>

#include "cumulants/partitions.hpp"
#include "cumulants/rational_fn.hpp"

namespace cumulants {
namespace {

RationalFn R(const char* text) { return parse_rational(text); }

TEST(RationalFn, InversePairCancels) { EXPECT_EQ(R("m/(m-1)") * R("(m-1)/m"), RationalFn(1)); }

TEST(RationalFn, FallingFactorialOverPower) {
  EXPECT_EQ(RationalFn(Polynomial::falling_factorial(2), Polynomial::m() * Polynomial::m()), R("(m-1)/m"));
}

TEST(RationalFn, ComplementaryFractions) { EXPECT_EQ(R("1/m") + R("(m-1)/m"), RationalFn(1)); }

TEST(RationalFn, CanonicalForm) {
  const RationalFn r(Polynomial({-4, 0, 2}), Polynomial({-2, -2}));  // (2m^2 - 4)/(-2m - 2)
  EXPECT_GT(r.denominator().leading(), 0);
  EXPECT_EQ(r.denominator().content(), 1);
  EXPECT_EQ(RationalFn(r.numerator(), r.denominator()), r);
  EXPECT_EQ(R("(m^2-1)/(m-1)"), R("m+1"));
  EXPECT_EQ(R("6(m+4)/(2m+2)").to_pretty_string(), "3(m + 4)/(m + 1)");
}

TEST(RationalFn, Evaluate) {
  EXPECT_EQ(R("m/(m-1)").evaluate(3), mpq_class(3, 2));
  EXPECT_EQ(R("m^2/((m-1)(m-2))").evaluate(3), mpq_class(9, 2));
  EXPECT_EQ(R("6(m+4)/(m+1)").evaluate(10), mpq_class(84, 11));
}

TEST(RationalFn, PoleIsNamed) {
  try {
    (void)R("m/(m-1)").evaluate(1);
    FAIL() << "expected a pole";
  } catch (const std::domain_error& e) {
    EXPECT_NE(std::string(e.what()).find("m = 1"), std::string::npos);
  }
  EXPECT_EQ(R("m^2/((m-1)(m-2)(m+3))").positive_integer_poles(), (std::vector<long>{1, 2}));
}

TEST(RationalFn, DivisionByZeroThrows) {
  EXPECT_THROW((void)(R("m") / RationalFn(0)), std::domain_error);
  EXPECT_THROW(RationalFn(Polynomial(1), Polynomial(0)), std::domain_error);
}

TEST(RationalFn, LimitAtInfinity) {
  EXPECT_EQ(R("(34m-16)/(m-1)").limit_at_infinity(), 34);
  EXPECT_FALSE(R("m^2/(m-1)").bounded_at_infinity());
}

TEST(RationalFn, FieldAxiomsOnRandomValues) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<long> coef(-6, 6);
  auto random_poly = [&](int degree) {
    std::vector<mpz_class> c;
    for (int i = 0; i <= degree; ++i) c.emplace_back(coef(rng));
    return Polynomial(std::move(c));
  };
  auto random_fn = [&] {
    Polynomial den = random_poly(2);
    while (den.is_zero()) den = random_poly(2);
    return RationalFn(random_poly(2), den);
  };
  for (int trial = 0; trial < 60; ++trial) {
    const RationalFn a = random_fn(), b = random_fn(), c = random_fn();
    EXPECT_EQ((a + b) + c, a + (b + c));
    EXPECT_EQ((a * b) * c, a * (b * c));
    EXPECT_EQ(a * (b + c), a * b + a * c);
    EXPECT_EQ(a - a, RationalFn(0));
    if (!b.is_zero()) EXPECT_EQ(a / b * b, a);
  }
}

TEST(RationalFn, ParserRoundTrip) {
  for (const char* text : {"m^2/((m-1)(m-2))", "-3(m-1)/(m+1)", "(34m-16)/(m(m-1))", "6", "0"}) {
    const RationalFn r = R(text);
    EXPECT_EQ(parse_rational(r.to_string()), r) << text;
    EXPECT_EQ(parse_rational(r.to_pretty_string()), r) << text;
  }
}

TEST(Partitions, SmallExamples) {
  const std::vector<int> two{2, 3};
  const auto splits = enumerate_partitions(two, 1);
  ASSERT_EQ(splits.size(), 2u);
  EXPECT_EQ(splits[0], (SubsetSplit{{2}, {3}}));
  EXPECT_EQ(splits[1], (SubsetSplit{{3}, {2}}));

  const std::vector<int> three{2, 3, 4};
  const auto none = enumerate_partitions(three, 0);
  ASSERT_EQ(none.size(), 1u);
  EXPECT_EQ(none[0], (SubsetSplit{{}, {2, 3, 4}}));

  const auto empty = enumerate_partitions(std::vector<int>{}, 0);
  ASSERT_EQ(empty.size(), 1u);
  EXPECT_TRUE(empty[0].chosen.empty() && empty[0].remainder.empty());

  EXPECT_THROW(enumerate_partitions(three, 4), std::out_of_range);
  EXPECT_THROW(enumerate_partitions(three, -1), std::out_of_range);
}

TEST(Partitions, CountsMatchBinomial) {
  for (int n = 0; n <= 8; ++n) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = 10 + i;
    for (int nu = 0; nu <= n; ++nu) {
      const auto splits = enumerate_partitions(idx, nu);
      ASSERT_EQ(static_cast<long long>(splits.size()), binomial(n, nu));
      std::set<std::vector<int>> distinct;
      for (const auto& s : splits) {
        EXPECT_EQ(s.chosen.size() + s.remainder.size(), idx.size());
        distinct.insert(s.chosen);
      }
      EXPECT_EQ(distinct.size(), splits.size());
    }
  }
}

TEST(Partitions, BellNumbersAndCanonicalOrder) {
  const long bell[] = {1, 1, 2, 5, 15, 52, 203};
  for (int n = 1; n <= 6; ++n) {
    const auto all = set_partitions(n);
    EXPECT_EQ(static_cast<long>(all.size()), bell[n]);
    for (std::size_t i = 1; i < all.size(); ++i) EXPECT_TRUE(partition_precedes(all[i - 1], all[i]));
  }
  const auto three = set_partitions(3);
  EXPECT_EQ(three[0].blocks(), (std::vector<std::vector<int>>{{0, 1, 2}}));
  EXPECT_EQ(three[1].blocks(), (std::vector<std::vector<int>>{{0, 1}, {2}}));
  EXPECT_EQ(three[4].blocks(), (std::vector<std::vector<int>>{{0}, {1}, {2}}));
  EXPECT_TRUE(three[4].refines(three[1]));
  EXPECT_FALSE(three[1].refines(three[4]));
  EXPECT_THROW(SlotPartition({{0, 1}, {1}}), std::invalid_argument);
}

}  // namespace
}  // namespace cumulants
