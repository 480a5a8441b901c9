#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "dynfrs/data.hpp"
#include "dynfrs/ert.hpp"
#include "dynfrs/rng.hpp"

namespace dynfrs {

class WorkerPool;

struct ForestParams {
  std::uint32_t trees = 100;
  double q = 0.2;  // occupancy fraction; each sample lands in ceil(qT) trees
  TreeParams tree;
  std::uint64_t seed = 0;

  // k = ceil(qT), guarded so that e.g. q = 0.3, T = 10 gives 3 and not 4.
  std::uint32_t occupancy() const;
  void validate(std::size_t dim) const;
};

inline constexpr std::uint32_t kNoTree = std::numeric_limits<std::uint32_t>::max();

struct Occupancy {
  std::uint32_t k = 0;
  std::vector<std::vector<SampleId>> tree_ids;  // per tree, ascending
  // Row i (k entries, ascending) lists the trees that received ids[i].
  std::vector<std::uint32_t> rows;
};

// Draws k = ceil(qT) distinct trees for every id, in the order given.
Occupancy distribute(std::span<const SampleId> ids, std::uint32_t trees, double q, Rng& rng);

// How a modification treats the subtrees it invalidates: kLazy leaves them
// tagged for the next query, kEager regrows them before returning.
enum class RebuildMode { kLazy, kEager };

// T trees over a sample store the forest owns. Every live sample of the store
// is held by exactly k trees, recorded in an explicit id -> trees map.
//
// Seeds: tree t draws from mix_seed(seed, t + 1); the forest's own stream
// (tree choice for added samples) is mix_seed(seed, 0) after distribution.
//
// Operations are serialized by the caller. Per-tree work fans out to the
// worker pool if one is attached; results are combined in tree order, so the
// outcome never depends on the pool size.
class Forest {
 public:
  static Forest train(Dataset store, const ForestParams& params, WorkerPool* pool = nullptr);

  // Mean over trees of the reached leaf's positive fraction; an empty leaf
  // votes the store's positive rate. May regrow tagged nodes.
  double predict(std::span<const double> x);
  // predict() for every live sample of `ds`, in id order.
  std::vector<double> predict_all(const Dataset& ds);
  // Per-tree votes, for tests.
  std::vector<double> tree_votes(std::span<const double> x);

  // Appends the sample to the store and to k freshly drawn trees.
  SampleId add(std::span<const double> x, Label y);
  // Throws NotFoundError unless id is live.
  void remove(SampleId id);
  // Validates every id (live, no repeats) before touching anything, then
  // deletes them all. finalize regrows every tagged subtree afterwards.
  void unlearn_batch(std::span<const SampleId> ids, bool finalize);
  void flush();

  void set_pool(WorkerPool* pool) { pool_ = pool; }
  void set_mode(RebuildMode mode) { mode_ = mode; }
  RebuildMode mode() const { return mode_; }

  const ForestParams& params() const { return params_; }
  std::uint32_t occupancy() const { return k_; }
  const Dataset& store() const { return store_; }
  double prior() const;
  const std::vector<Tree>& trees() const { return trees_; }
  // Trees holding id, ascending; empty when id is not live.
  std::span<const std::uint32_t> trees_of(SampleId id) const;
  std::size_t tagged_count() const;
  Telemetry telemetry() const;
  void reset_telemetry();

  // Versioned binary snapshot, little-endian:
  //   magic "DYNFRS\0\0", u32 version
  //   schema JSON; forest params; sample store (deleted rows zeroed);
  //   k and the id -> trees map; forest engine state; T trees.
  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static Forest load(std::istream& in);
  static Forest load(const std::filesystem::path& path);

  Tree& tree_for_testing(std::size_t t) { return trees_[t]; }
  std::vector<std::uint32_t>& assignment_for_testing() { return assignment_; }

 private:
  Forest() = default;
  std::span<std::uint32_t> row(SampleId id);

  ForestParams params_;
  std::uint32_t k_ = 0;
  Dataset store_;
  std::vector<Tree> trees_;
  std::vector<std::uint32_t> assignment_;  // k entries per id; kNoTree once deleted
  Rng rng_;
  WorkerPool* pool_ = nullptr;
  RebuildMode mode_ = RebuildMode::kLazy;
};

}  // namespace dynfrs
