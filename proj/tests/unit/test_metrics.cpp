#include <gtest/gtest.h>

#include "dynfrs/errors.hpp"
#include "dynfrs/metrics.hpp"
#include "dynfrs/rng.hpp"

namespace dynfrs {
namespace {

// Fraction of (positive, negative) pairs ordered correctly, ties half.
double pairwise_auc(const std::vector<double>& s, const std::vector<Label>& y) {
  double wins = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j]) continue;
      pairs += 1;
      wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
    }
  }
  return wins / pairs;
}

TEST(Auc, PerfectSeparation) {
  EXPECT_EQ(auc_roc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<Label>{0, 0, 1, 1}), 1.0);
}

TEST(Auc, AllScoresTied) {
  EXPECT_EQ(auc_roc(std::vector<double>{0.3, 0.3, 0.3, 0.3}, std::vector<Label>{0, 1, 0, 1}), 0.5);
}

TEST(Auc, HandWorkedFourSamples) {
  EXPECT_DOUBLE_EQ(auc_roc(std::vector<double>{0.9, 0.8, 0.7, 0.1}, std::vector<Label>{1, 0, 1, 0}), 0.75);
}

TEST(Auc, SingleClassGivesHalf) {
  EXPECT_EQ(auc_roc(std::vector<double>{0.2, 0.4}, std::vector<Label>{1, 1}), 0.5);
}

TEST(Auc, AgreesWithAllPairsOnRandomScoreSets) {
  Rng rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = 2 + uniform_below(rng, 60);
    std::vector<double> s(n);
    std::vector<Label> y(n);
    const auto levels = 1 + uniform_below(rng, 10);  // few levels -> many ties
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(uniform_below(rng, levels)) / static_cast<double>(levels);
      y[i] = static_cast<Label>(uniform_below(rng, 2));
    }
    y[0] = 1;
    y[1] = 0;
    ASSERT_NEAR(auc_roc(s, y), pairwise_auc(s, y), 1e-12);
  }
}

TEST(Accuracy, ThresholdAtHalf) {
  const std::vector<double> s{0.1, 0.5, 0.7, 0.4};
  const std::vector<Label> y{0, 1, 0, 1};
  EXPECT_EQ(accuracy(s, y), 0.5);
  EXPECT_EQ(accuracy(s, y, 0.35), 0.75);
  EXPECT_THROW(accuracy(s, std::vector<Label>{0}), ArgumentError);
}

TEST(Headline, FollowsThePositiveRate) {
  EXPECT_EQ(headline_metric(0.10), "accuracy");
  EXPECT_EQ(headline_metric(0.239), "auc");
}

}  // namespace
}  // namespace dynfrs
