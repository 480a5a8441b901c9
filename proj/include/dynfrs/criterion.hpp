#pragma once

#include <cstdint>
#include <string_view>

namespace dynfrs {

enum class Criterion : std::uint8_t { kGini = 0, kEntropy = 1 };

// Child sizes and positive counts of a binary split.
struct SplitCounts {
  std::int64_t n_left = 0;
  std::int64_t pos_left = 0;
  std::int64_t n_right = 0;
  std::int64_t pos_right = 0;
};

// Size-weighted Gini impurity of the two children. An empty side contributes
// zero. Throws ArgumentError when both sides are empty or counts are
// inconsistent.
double gini(const SplitCounts& counts);

// Size-weighted Shannon entropy of the two children, in bits, with
// 0 log 0 = 0.
double entropy(const SplitCounts& counts);

double split_score(Criterion criterion, const SplitCounts& counts);

Criterion parse_criterion(std::string_view name);
std::string_view criterion_name(Criterion criterion);

}  // namespace dynfrs
