#include <gtest/gtest.h>

#include "cumulants/expectation.hpp"
#include "oracle.hpp"

namespace cumulants {
namespace {

constexpr Label x = 0, y = 1, z = 2, w = 3;

MeanProductTerm Mean(std::vector<Block> b) { return MeanProductTerm(std::move(b)); }
MomentProduct Mom(std::vector<Block> b) { return MomentProduct(std::move(b)); }
RationalFn R(const char* text) { return parse_rational(text); }

// m_k / m^n
RationalFn ratio(int k, int n) {
  Polynomial den(1);
  for (int i = 0; i < n; ++i) den *= Polynomial::m();
  return {Polynomial::falling_factorial(k), den};
}

TEST(ExpandMeanProduct, PaperExamples) {
  const auto xy = expand_mean_product(Mean({{x}, {y}}));
  EXPECT_EQ(xy.size(), 2u);
  EXPECT_EQ(xy.coefficient(Mom({{x, y}})), R("1/m"));
  EXPECT_EQ(xy.coefficient(Mom({{x}, {y}})), R("(m-1)/m"));

  EXPECT_EQ(expand_mean_product(Mean({{x, y, z}})), ExpectedMoments::single(Mom({{x, y, z}}), 1));

  const auto four = expand_mean_product(Mean({{x}, {y}, {z}, {w}}));
  EXPECT_EQ(four.coefficient(Mom({{x}, {y}, {z}, {w}})), R("(m-1)(m-2)(m-3)/m^3"));
  EXPECT_EQ(four.size(), 15u);
  EXPECT_THROW(expand_mean_product(Mean({Block(9, x)})), std::out_of_range);
}

TEST(ExpandMeanProduct, RowSumsAreOne) {
  for (int n = 1; n <= 8; ++n)
    for (const auto& partition : set_partitions(n)) {
      if (n == 8 && partition.blocks().size() < 6) continue;  // keeps the run short
      for (bool repeated : {false, true}) {
        std::vector<Block> blocks;
        for (const auto& b : partition.blocks()) {
          Block labels;
          for (int slot : b) labels.push_back(repeated ? slot % 2 : slot);
          blocks.push_back(labels);
        }
        RationalFn sum;
        const auto expansion = expand_mean_product(Mean(blocks));
        for (const auto& [product, coeff] : expansion.terms()) sum += coeff;
        ASSERT_EQ(sum, RationalFn(1)) << "n = " << n;
      }
    }
}

TEST(ExpandMeanProduct, AgreesWithBruteForceEnumeration) {
  std::mt19937 rng(23);
  const std::vector<std::vector<Block>> terms = {
      {{x}, {y}}, {{x, y}, {z}}, {{x}, {y}, {z}}, {{x, x}, {x}}, {{x}, {x}, {x}},
      {{x, y}, {z}, {w}}, {{x, y}, {z, w}}, {{x, x}, {y}, {x}, {y}}, {{x, y, y}, {x, y}, {x}}};
  for (int trial = 0; trial < 3; ++trial) {
    const auto dist = testing::random_three_point(rng, 4);
    for (const auto& blocks : terms) {
      const auto expansion = expand_mean_product(Mean(blocks));
      for (int m : {2, 3}) {
        mpq_class symbolic = 0;
        for (const auto& [product, coeff] : expansion.terms()) {
          mpq_class v = coeff.evaluate(m);
          for (const auto& b : product.blocks()) v *= dist.moment(b);
          symbolic += v;
        }
        const mpq_class brute = testing::brute_expectation(dist, m, [&](const testing::Sample& s) {
          mpq_class v = 1;
          for (const auto& b : blocks) v *= testing::sample_mean(s, b);
          return v;
        });
        ASSERT_EQ(symbolic, brute) << "m = " << m;
      }
    }
  }
}

TEST(MultiplicityMatrix, SecondOrder) {
  const auto a = build_multiplicity_matrix(2);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a.entries[0][0], RationalFn(1));
  EXPECT_EQ(a.entries[0][1], RationalFn(0));
  EXPECT_EQ(a.entries[1][0], R("1/m"));
  EXPECT_EQ(a.entries[1][1], R("(m-1)/m"));
  EXPECT_EQ(reduced_matrix({x, x}).entries, a.entries);
}

TEST(MultiplicityMatrix, ThirdOrderRows) {
  const auto a = build_multiplicity_matrix(3);
  ASSERT_EQ(a.size(), 5u);
  EXPECT_EQ(a.rows[1], Mean({{x, y}, {z}}));
  const std::vector<RationalFn> row{ratio(1, 2), ratio(2, 2), 0, 0, 0};
  EXPECT_EQ(a.entries[1], row);
  const std::vector<RationalFn> last{ratio(1, 3), ratio(2, 3), ratio(2, 3), ratio(2, 3), ratio(3, 3)};
  EXPECT_EQ(a.entries[4], last);
}

TEST(MultiplicityMatrix, FourthOrderMatchesTable) {
  // Falling-factorial index k of each nonzero entry m_k / m^n, row by row.
  const std::vector<std::vector<std::pair<int, int>>> nonzero = {
      {{0, 1}},
      {{0, 1}, {1, 2}}, {{0, 1}, {2, 2}}, {{0, 1}, {3, 2}}, {{0, 1}, {4, 2}},
      {{0, 1}, {5, 2}}, {{0, 1}, {6, 2}}, {{0, 1}, {7, 2}},
      {{0, 1}, {1, 2}, {2, 2}, {5, 2}, {8, 3}},
      {{0, 1}, {1, 2}, {3, 2}, {6, 2}, {9, 3}},
      {{0, 1}, {2, 2}, {3, 2}, {7, 2}, {10, 3}},
      {{0, 1}, {1, 2}, {4, 2}, {7, 2}, {11, 3}},
      {{0, 1}, {2, 2}, {4, 2}, {6, 2}, {12, 3}},
      {{0, 1}, {3, 2}, {4, 2}, {5, 2}, {13, 3}},
      {{0, 1}, {1, 2}, {2, 2}, {3, 2}, {4, 2}, {5, 2}, {6, 2}, {7, 2},
       {8, 3}, {9, 3}, {10, 3}, {11, 3}, {12, 3}, {13, 3}, {14, 4}}};
  const std::vector<int> power = {1, 2, 2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3, 4};
  const auto a = build_multiplicity_matrix(4);
  ASSERT_EQ(a.size(), 15u);
  EXPECT_EQ(a.columns[1], Mom({{x, y, z}, {w}}));
  EXPECT_EQ(a.columns[7], Mom({{x, w}, {y, z}}));
  EXPECT_EQ(a.columns[13], Mom({{z, w}, {x}, {y}}));
  for (std::size_t i = 0; i < 15; ++i) {
    std::vector<RationalFn> expected(15);
    for (auto [col, k] : nonzero[i]) expected[static_cast<std::size_t>(col)] = ratio(k, power[i]);
    EXPECT_EQ(a.entries[i], expected) << "row " << i;
  }
  EXPECT_EQ(a.entries[14][0], ratio(1, 4));
}

TEST(MultiplicityMatrix, DeterminantIsDiagonalProduct) {
  for (int order : {2, 3, 4}) {
    const auto a = build_multiplicity_matrix(order);
    EXPECT_FALSE(a.determinant().is_zero());
    for (std::size_t i = 0; i < a.size(); ++i) {
      RationalFn sum;
      for (const auto& e : a.entries[i]) sum += e;
      EXPECT_EQ(sum, RationalFn(1));
      const std::size_t blocks = a.rows[i].blocks().size();
      EXPECT_EQ(a.entries[i][i], ratio(static_cast<int>(blocks), static_cast<int>(blocks)));
    }
  }
  EXPECT_THROW(build_multiplicity_matrix(5), std::out_of_range);
}

TEST(ReducedMatrix, SingleVariableThirdOrder) {
  const auto a = reduced_matrix({x, x, x});
  ASSERT_EQ(a.size(), 3u);
  const std::vector<std::vector<RationalFn>> expected = {
      {1, 0, 0},
      {ratio(1, 2), ratio(2, 2), 0},
      {ratio(1, 3), RationalFn(3) * ratio(2, 3), ratio(3, 3)}};
  EXPECT_EQ(a.entries, expected);
}

TEST(ReducedMatrix, SingleVariableFourthOrderInverse) {
  const auto a = reduced_matrix({x, x, x, x});
  ASSERT_EQ(a.size(), 5u);
  EXPECT_EQ(a.columns[1], Mom({{x, x, x}, {x}}));
  EXPECT_EQ(a.columns[2], Mom({{x, x}, {x, x}}));
  const auto r = solve_left(a, {1, -4, -3, 12, -6});
  const RationalFn pre = R("m^2/((m-1)(m-2)(m-3))");
  EXPECT_EQ(r[0], pre * R("m+1"));
  EXPECT_EQ(r[1], pre * R("-4(m+1)"));
  EXPECT_EQ(r[2], pre * R("-3(m-1)"));
  EXPECT_EQ(r[3], pre * R("12m"));
  EXPECT_EQ(r[4], pre * R("-6m"));
}

}  // namespace
}  // namespace cumulants
