#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dynfrs/criterion.hpp"
#include "dynfrs/errors.hpp"
#include "dynfrs/rng.hpp"

namespace dynfrs {
namespace {

TEST(Gini, PureChildrenScoreZero) { EXPECT_DOUBLE_EQ(gini({2, 0, 2, 2}), 0.0); }

TEST(Gini, BalancedChildrenScoreHalf) { EXPECT_DOUBLE_EQ(gini({2, 1, 2, 1}), 0.5); }

TEST(Gini, EmptySideEqualsParentImpurity) { EXPECT_DOUBLE_EQ(gini({4, 2, 0, 0}), 0.5); }

TEST(Entropy, PureChildren) { EXPECT_DOUBLE_EQ(entropy({2, 0, 2, 2}), 0.0); }

TEST(Entropy, FairCoinChildrenGiveOneBit) { EXPECT_DOUBLE_EQ(entropy({2, 1, 2, 1}), 1.0); }

TEST(Entropy, SingletonChildren) { EXPECT_DOUBLE_EQ(entropy({1, 1, 1, 0}), 0.0); }

TEST(Criterion, BothSidesEmptyIsAnError) {
  EXPECT_THROW(gini({0, 0, 0, 0}), ArgumentError);
  EXPECT_THROW(entropy({0, 0, 0, 0}), ArgumentError);
}

TEST(Criterion, InconsistentCountsAreRejected) {
  EXPECT_THROW(gini({2, 3, 1, 0}), ArgumentError);
  EXPECT_THROW(entropy({2, 0, 1, -1}), ArgumentError);
}

TEST(Criterion, ParseNames) {
  EXPECT_EQ(parse_criterion("gini"), Criterion::kGini);
  EXPECT_EQ(parse_criterion("entropy"), Criterion::kEntropy);
  EXPECT_EQ(criterion_name(Criterion::kEntropy), "entropy");
  EXPECT_THROW(parse_criterion("mse"), ArgumentError);
}

// Impurity of one child computed from its raw labels.
double raw_impurity(const std::vector<int>& labels, bool use_gini) {
  if (labels.empty()) return 0.0;
  double pos = 0;
  for (const int y : labels) pos += y;
  const double n = static_cast<double>(labels.size());
  const double p1 = pos / n;
  const double p0 = (n - pos) / n;
  if (use_gini) return 1.0 - (p0 * p0 + p1 * p1);
  double h = 0;
  if (p1 > 0) h -= p1 * std::log2(p1);
  if (p0 > 0) h -= p0 * std::log2(p0);
  return h;
}

class CriterionProperties : public ::testing::TestWithParam<Criterion> {};

TEST_P(CriterionProperties, RandomSplitsAgreeWithRawSampleSets) {
  const auto crit = GetParam();
  const bool use_gini = crit == Criterion::kGini;
  Rng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto n = 1 + uniform_below(rng, 50);
    std::vector<int> left;
    std::vector<int> right;
    for (std::uint64_t i = 0; i < n; ++i) {
      const int y = static_cast<int>(uniform_below(rng, 2));
      (uniform_below(rng, 2) ? left : right).push_back(y);
    }
    const double nl = static_cast<double>(left.size());
    const double nr = static_cast<double>(right.size());
    const double expected =
        (nl * raw_impurity(left, use_gini) + nr * raw_impurity(right, use_gini)) / (nl + nr);
    std::int64_t pl = 0;
    std::int64_t pr = 0;
    for (const int y : left) pl += y;
    for (const int y : right) pr += y;
    const SplitCounts c{static_cast<std::int64_t>(left.size()), pl,
                        static_cast<std::int64_t>(right.size()), pr};
    const double got = split_score(crit, c);
    ASSERT_NEAR(got, expected, 1e-12);

    // Bounds.
    ASSERT_GE(got, 0.0);
    ASSERT_LE(got, use_gini ? 0.5 + 1e-15 : 1.0 + 1e-15);
    // Swapping sides.
    ASSERT_NEAR(split_score(crit, {c.n_right, c.pos_right, c.n_left, c.pos_left}), got, 1e-15);
    // Flipping every label.
    ASSERT_NEAR(split_score(crit, {c.n_left, c.n_left - c.pos_left, c.n_right, c.n_right - c.pos_right}),
                got, 1e-15);
  }
}

INSTANTIATE_TEST_SUITE_P(BothCriteria, CriterionProperties,
                         ::testing::Values(Criterion::kGini, Criterion::kEntropy));

}  // namespace
}  // namespace dynfrs
