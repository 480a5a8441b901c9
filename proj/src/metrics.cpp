#include "dynfrs/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "dynfrs/errors.hpp"

namespace dynfrs {

namespace {
void check_sizes(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) throw ArgumentError("scores and labels differ in length");
}
}  // namespace

double accuracy(std::span<const double> scores, std::span<const Label> labels, double threshold) {
  check_sizes(scores, labels);
  if (scores.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    hits += (scores[i] >= threshold) == (labels[i] != 0);
  }
  return static_cast<double>(hits) / static_cast<double>(scores.size());
}

double auc_roc(std::span<const double> scores, std::span<const Label> labels) {
  check_sizes(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });

  // Sum of positive ranks, tied groups sharing their mean rank.
  double rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t group_pos = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) group_pos += labels[order[j++]] != 0;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    rank_sum += midrank * static_cast<double>(group_pos);
    positives += group_pos;
    i = j;
  }
  const auto negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0) return 0.5;
  const double p = static_cast<double>(positives);
  return (rank_sum - p * (p + 1) / 2.0) / (p * static_cast<double>(negatives));
}

std::string_view headline_metric(double positive_rate) {
  return positive_rate < 0.21 ? "accuracy" : "auc";
}

}  // namespace dynfrs
