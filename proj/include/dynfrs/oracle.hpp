#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dynfrs/data.hpp"
#include "dynfrs/ert.hpp"
#include "dynfrs/forest.hpp"

// Reference implementations for tests and benchmarks. Nothing here calls the
// code it checks: counts, ranges and scores are recomputed from raw samples
// with separate arithmetic.
namespace dynfrs::oracle {

struct Violation {
  std::int64_t tree = -1;  // -1 for forest-level checks
  std::string path;        // "root", "root/L/R", ...; empty for forest-level checks
  std::string field;
  std::string expected;
  std::string found;
};

struct AuditReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  void merge(AuditReport other);
  std::string to_string(std::size_t limit = 20) const;
};

// Recomputes every node's counts, ranges, thresholds and split statistics
// from its ids and checks the structural invariants (tag topology, child
// partition, conservation of ids, best split = arg-min).
AuditReport audit_tree(const Tree& tree, const Dataset& ds, std::int64_t tree_index = 0);
AuditReport audit_forest(const Forest& forest);

// Every live id held by exactly its k assigned trees, nothing else held, and
// sum of tree sizes = k * n.
AuditReport occupancy_check(const Forest& forest);

// Sort-then-merge reference for one slot's (below, below_pos) counts.
std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>> sortmerge_split_stats(
    std::span<const SampleId> ids, const Dataset& ds, std::size_t attr,
    std::span<const double> thresholds);

// Gini or entropy of a split written out from class proportions.
double reference_score(Criterion criterion, std::int64_t n_left, std::int64_t pos_left,
                       std::int64_t n_right, std::int64_t pos_right);

// Retrains from scratch on the given samples. The baseline forest uses q = 1
// (every tree sees every sample) unless keep_occupancy is set, in which case
// params.q is kept.
Forest naive_retrain(const Dataset& ds_without, ForestParams params, std::uint64_t seed,
                     bool keep_occupancy = false);

}  // namespace dynfrs::oracle
