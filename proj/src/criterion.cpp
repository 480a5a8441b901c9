#include "dynfrs/criterion.hpp"

#include <cmath>
#include <string>

#include "dynfrs/errors.hpp"

namespace dynfrs {
namespace {

void check(const SplitCounts& c) {
  if (c.n_left < 0 || c.n_right < 0 || c.pos_left < 0 || c.pos_right < 0 ||
      c.pos_left > c.n_left || c.pos_right > c.n_right) {
    throw ArgumentError("split counts out of range");
  }
  if (c.n_left + c.n_right == 0) throw ArgumentError("split of an empty node");
}

// 1 - p^2 - (1-p)^2, scaled by the side's share of the parent.
double weighted_gini(std::int64_t n, std::int64_t pos, double total) {
  if (n == 0) return 0.0;
  const auto nd = static_cast<double>(n);
  const auto neg = static_cast<double>(n - pos);
  const auto p = static_cast<double>(pos);
  return 2.0 * p * neg / (nd * total);
}

double weighted_entropy(std::int64_t n, std::int64_t pos, double total) {
  if (n == 0 || pos == 0 || pos == n) return 0.0;
  const auto nd = static_cast<double>(n);
  const double p = static_cast<double>(pos) / nd;
  const double h = -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
  return nd / total * h;
}

}  // namespace

double gini(const SplitCounts& c) {
  check(c);
  const auto total = static_cast<double>(c.n_left + c.n_right);
  return weighted_gini(c.n_left, c.pos_left, total) +
         weighted_gini(c.n_right, c.pos_right, total);
}

double entropy(const SplitCounts& c) {
  check(c);
  const auto total = static_cast<double>(c.n_left + c.n_right);
  return weighted_entropy(c.n_left, c.pos_left, total) +
         weighted_entropy(c.n_right, c.pos_right, total);
}

double split_score(Criterion criterion, const SplitCounts& counts) {
  return criterion == Criterion::kGini ? gini(counts) : entropy(counts);
}

Criterion parse_criterion(std::string_view name) {
  if (name == "gini") return Criterion::kGini;
  if (name == "entropy") return Criterion::kEntropy;
  throw ArgumentError("unknown criterion '" + std::string(name) + "'");
}

std::string_view criterion_name(Criterion criterion) {
  return criterion == Criterion::kGini ? "gini" : "entropy";
}

}  // namespace dynfrs
