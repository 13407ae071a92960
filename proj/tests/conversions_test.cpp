#include <random>

#include <gtest/gtest.h>

#include "cumulants/conversions.hpp"

namespace cumulants {
namespace {

constexpr Label x = 0, y = 1, z = 2;

MomentProduct M(std::vector<Block> blocks) { return MomentProduct(std::move(blocks)); }
CumulantProduct C(std::vector<Block> blocks) { return CumulantProduct(std::move(blocks)); }

FiniteDistribution coin() { return {{{1}, {-1}}, {mpq_class(1, 2), mpq_class(1, 2)}}; }

FiniteDistribution three_point(std::mt19937& rng, int dimension) {
  std::uniform_int_distribution<int> value(-4, 4);
  std::uniform_int_distribution<int> weight(1, 5);
  std::vector<std::vector<mpq_class>> pts(3);
  std::vector<mpq_class> probs;
  int total = 0;
  std::vector<int> w;
  for (auto& p : pts) {
    for (int d = 0; d < dimension; ++d) p.emplace_back(value(rng), 1 + (weight(rng) % 2));
    w.push_back(weight(rng));
    total += w.back();
  }
  for (int wi : w) probs.emplace_back(wi, total);
  for (auto& p : probs) p.canonicalize();
  for (auto& p : pts)
    for (auto& v : p) v.canonicalize();
  return {std::move(pts), std::move(probs)};
}

TEST(CumulantsFromMoments, LowOrders) {
  EXPECT_EQ(cumulants_from_moments({x}), MomentExpr::single(M({{x}}), 1));

  MomentExpr c2 = MomentExpr::single(M({{x, y}}), 1);
  c2.add(M({{x}, {y}}), -1);
  EXPECT_EQ(cumulants_from_moments({x, y}), c2);

  const auto& c3 = cumulants_from_moments({x, y, z});
  EXPECT_EQ(c3.size(), 5u);
  EXPECT_EQ(c3.coefficient(M({{x, y, z}})), 1);
  EXPECT_EQ(c3.coefficient(M({{x, y}, {z}})), -1);
  EXPECT_EQ(c3.coefficient(M({{x, z}, {y}})), -1);
  EXPECT_EQ(c3.coefficient(M({{y, z}, {x}})), -1);
  EXPECT_EQ(c3.coefficient(M({{x}, {y}, {z}})), 2);

  EXPECT_EQ(cumulants_from_moments({0, 1, 2, 3}).size(), 15u);
  EXPECT_THROW(cumulants_from_moments(Block(9, x)), std::out_of_range);
  EXPECT_THROW(cumulants_from_moments(Block{}), std::out_of_range);
}

TEST(MomentsFromCumulants, SecondOrderAndDeterministicLimit) {
  CumulantExpr m2 = CumulantExpr::single(C({{x, y}}), 1);
  m2.add(C({{x}, {y}}), 1);
  EXPECT_EQ(moments_from_cumulants({x, y}), m2);

  const auto only_means = moments_from_cumulants({0, 1, 2, 3}).filtered([](const CumulantProduct& p) {
    for (const auto& b : p.blocks())
      if (b.size() > 1) return false;
    return true;
  });
  EXPECT_EQ(only_means, CumulantExpr::single(C({{0}, {1}, {2}, {3}}), 1));
}

TEST(Conversions, RoundTripIdentity) {
  for (int n = 1; n <= 6; ++n) {
    Block distinct(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) distinct[static_cast<std::size_t>(i)] = i;
    for (const Block& labels : {distinct, Block(static_cast<std::size_t>(n), 0)}) {
      const MomentExpr single = MomentExpr::single(M({labels}), 1);
      EXPECT_EQ(to_moments(to_cumulants(single)), single) << n;
      const CumulantExpr c = CumulantExpr::single(C({labels}), 1);
      EXPECT_EQ(to_cumulants(to_moments(c)), c) << n;
    }
  }
}

TEST(ExactCumulant, Examples) {
  const FiniteDistribution point({{5}}, {1});
  EXPECT_EQ(exact_cumulant(point, std::vector<int>{0, 0}), 0);
  EXPECT_EQ(exact_cumulant(coin(), std::vector<int>{0, 0, 0, 0}), -2);

  const FiniteDistribution joint = coin().independent_join(FiniteDistribution({{0}, {2}, {3}}, {mpq_class(1, 4), mpq_class(1, 4), mpq_class(1, 2)}));
  EXPECT_EQ(exact_cumulant(joint, std::vector<int>{0, 1}), 0);
  EXPECT_EQ(exact_cumulant(joint, std::vector<int>{0, 0, 1, 1}), 0);
  EXPECT_THROW(exact_cumulant(joint, std::vector<int>{0, 2}), std::out_of_range);
}

TEST(ExactCumulant, InvalidDistributions) {
  EXPECT_THROW(FiniteDistribution({{1}, {2}}, {mpq_class(1, 2), mpq_class(1, 3)}), std::invalid_argument);
  EXPECT_THROW(FiniteDistribution({{1}, {2, 3}}, {mpq_class(1, 2), mpq_class(1, 2)}), std::invalid_argument);
}

TEST(ExactCumulant, AdditiveOverIndependentSums) {
  std::mt19937 rng(3);
  const std::vector<std::vector<int>> slot_sets = {{0, 1}, {0, 0, 1}, {0, 1, 1, 0}, {1, 1, 1}, {0, 0, 0, 0}};
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = three_point(rng, 2), q = three_point(rng, 2);
    const auto sum = p.independent_sum(q);
    for (const auto& slots : slot_sets)
      EXPECT_EQ(exact_cumulant(sum, slots), exact_cumulant(p, slots) + exact_cumulant(q, slots));
  }
}

TEST(ExactCumulant, MomentsAreNotAdditive) {
  const FiniteDistribution p({{1}, {3}}, {mpq_class(1, 2), mpq_class(1, 2)});
  const FiniteDistribution q({{2}}, {1});
  const std::vector<int> slots{0, 0};
  EXPECT_NE(p.independent_sum(q).moment(slots), p.moment(slots) + q.moment(slots));
}

TEST(ExactCumulant, ShiftInvarianceAndMultilinearity) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = three_point(rng, 2);
    const auto shifted = p.affine(1, 1, mpq_class(7, 3));
    const auto scaled = p.affine(0, mpq_class(-5, 2), 0);
    for (const std::vector<int>& slots : {std::vector<int>{0, 1}, {0, 1, 1}, {0, 0, 1, 1}}) {
      EXPECT_EQ(exact_cumulant(shifted, slots), exact_cumulant(p, slots));
      const long zeros = std::count(slots.begin(), slots.end(), 0);
      mpq_class factor = 1;
      for (long i = 0; i < zeros; ++i) factor *= mpq_class(-5, 2);
      EXPECT_EQ(exact_cumulant(scaled, slots), factor * exact_cumulant(p, slots));
    }
  }
}

TEST(Smith, Examples) {
  const std::vector<mpq_class> ones(6, 1);
  const auto c = smith_univariate_cumulants(ones);
  EXPECT_EQ(c[0], 1);
  for (std::size_t k = 1; k < c.size(); ++k) EXPECT_EQ(c[k], 0);

  const std::vector<mpq_class> coin_moments{0, 1, 0, 1, 0, 1};
  const auto k = smith_univariate_cumulants(coin_moments);
  EXPECT_EQ(k[1], 1);
  EXPECT_EQ(k[3], -2);
  EXPECT_EQ(k[0], 0);
  EXPECT_EQ(k[2], 0);
  EXPECT_EQ(k[4], 0);
  EXPECT_THROW(smith_univariate_cumulants(std::vector<mpq_class>(9, 1)), std::out_of_range);
}

TEST(Smith, AgreesWithMultivariateRecursion) {
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> num(-20, 20), den(1, 9);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<mpq_class> moments;
    for (int k = 0; k < 8; ++k) {
      moments.emplace_back(num(rng), den(rng));
      moments.back().canonicalize();
    }
    const auto smith = smith_univariate_cumulants(moments);
    for (int n = 1; n <= 8; ++n) {
      mpq_class value = 0;
      for (const auto& [product, coeff] : cumulants_from_moments(Block(static_cast<std::size_t>(n), 0)).terms()) {
        mpq_class term = coeff;
        for (const auto& b : product.blocks()) term *= moments[b.size() - 1];
        value += term;
      }
      ASSERT_EQ(value, smith[static_cast<std::size_t>(n - 1)]) << "order " << n;
    }
  }
}

}  // namespace
}  // namespace cumulants
