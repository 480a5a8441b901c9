#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "dynfrs/criterion.hpp"
#include "dynfrs/data.hpp"
#include "dynfrs/rng.hpp"

namespace dynfrs {

class BinaryReader;
class BinaryWriter;

struct TreeParams {
  std::uint32_t max_depth = 20;  // the root sits at depth 1
  std::uint32_t thresholds = 30; // candidate thresholds per attribute (s)
  std::uint32_t attrs = 0;       // candidate attributes per node (p); 0 = ceil(sqrt(d))
  std::uint32_t min_split = 10;
  Criterion criterion = Criterion::kGini;
  std::uint64_t seed = 0;

  std::uint32_t resolved_attrs(std::size_t dim) const;
  // Throws ArgumentError on out-of-range knobs.
  void validate(std::size_t dim) const;
};

// One node's candidate splits on one attribute, together with the cached
// statistics that make add/delete O(s) per slot:
//   below[i]     = #{ samples in node with x[attr] <= thresholds[i] }
//   below_pos[i] = the same restricted to positive samples
// lo/hi is the observed range over the node's samples, and lo_count/hi_count
// how many samples sit exactly on it, so a delete only rescans the node when
// the last extreme sample leaves.
//
// Thresholds are a pure function of (seed, lo, hi, s); snapshots store the
// seed instead of the thresholds. Criterion scores are not cached: every
// update changes n, so all of them are recomputed from below/below_pos anyway.
struct AttributeSlot {
  std::uint32_t attr = 0;
  std::uint64_t seed = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::uint32_t lo_count = 0;
  std::uint32_t hi_count = 0;
  std::vector<double> thresholds;  // ascending, within [lo, hi]
  std::vector<std::uint32_t> below;
  std::vector<std::uint32_t> below_pos;

  bool splittable() const { return lo < hi; }
  std::size_t size() const { return thresholds.size(); }
};

// Work counters. The names follow the cost model: range_resample_samples sums
// |S_u| over nodes where a range change forced resampling, attrs_resampled
// counts the resampled slots, subtree_samples_rebuilt sums |S_u| over tagged
// nodes that were regrown.
struct Telemetry {
  std::uint64_t nodes_updated = 0;
  std::uint64_t subtree_samples_rebuilt = 0;
  std::uint64_t range_resample_samples = 0;
  std::uint64_t attrs_resampled = 0;
  std::uint64_t tags_placed = 0;
  std::uint64_t nodes_grown = 0;

  void reset() { *this = Telemetry{}; }
  bool operator==(const Telemetry&) const = default;
};

using NodeIndex = std::uint32_t;
inline constexpr NodeIndex kNoNode = std::numeric_limits<NodeIndex>::max();

// A node is exactly one of
//   internal: untagged, two children, slots filled, best split set;
//   leaf:     untagged, no children, no slots;
//   tagged:   no children, no slots; its subtree is regrown on demand.
// Every node keeps the sorted ids of its samples.
struct Node {
  std::uint32_t depth = 1;
  std::vector<SampleId> ids;
  std::uint32_t n_pos = 0;
  std::vector<AttributeSlot> slots;
  std::int32_t best_slot = -1;
  std::int32_t best_index = -1;
  NodeIndex left = kNoNode;
  NodeIndex right = kNoNode;
  bool tagged = false;

  std::uint32_t size() const { return static_cast<std::uint32_t>(ids.size()); }
  bool is_internal() const { return left != kNoNode; }
  bool is_leaf() const { return left == kNoNode && !tagged; }
  std::uint32_t split_attr() const { return slots[best_slot].attr; }
  double split_value() const { return slots[best_slot].thresholds[best_index]; }
};

struct LeafCounts {
  std::uint32_t n = 0;
  std::uint32_t n_pos = 0;

  bool operator==(const LeafCounts&) const = default;
};

// s i.i.d. uniform draws from [lo, hi], sorted ascending.
std::vector<double> sample_thresholds(double lo, double hi, std::size_t s, Rng& rng);

// Sets slot.lo/hi and the extreme counts from the samples in `ids`.
void fill_range(std::span<const SampleId> ids, const Dataset& ds, AttributeSlot& slot);

// Redraws slot.thresholds from slot.seed over the slot's current range.
void regenerate_thresholds(AttributeSlot& slot, std::size_t s);

// Prefix-sum split finder: one binary search per sample into the sorted
// thresholds, counts accumulated as differences, then one prefix pass.
// Fills below/below_pos for the slot's current thresholds.
void score_candidates(std::span<const SampleId> ids, const Dataset& ds, AttributeSlot& slot);

// Criterion score of candidate i for a node of n samples with n_pos
// positives; +inf on a zero-width slot or an empty node.
double candidate_score(const AttributeSlot& slot, std::size_t i, std::uint32_t n,
                       std::uint32_t n_pos, Criterion criterion);

// All s scores of a slot.
std::vector<double> slot_scores(const AttributeSlot& slot, std::uint32_t n, std::uint32_t n_pos,
                                Criterion criterion);

// An Extremely Randomized Tree that supports exact add/delete with lazy
// subtree regrowth.
//
// Modifications walk one root-to-leaf path updating cached statistics. When a
// node's best split changes (or it starts meeting a stopping rule) the node is
// tagged and its subtree discarded; later modifications stop at the tag.
// query() regrows only the path it needs below a tag; flush() regrows
// everything.
//
// Random draws come from the tree's own engine, in this order whenever a node
// is grown: the p attribute indices, then one threshold seed per slot in
// ascending attribute order. A range-change resample draws one new seed.
// build() grows nodes in preorder.
//
// Not thread-safe: every member, including query(), needs exclusive access.
class Tree {
 public:
  Tree(const TreeParams& params, std::size_t dim);

  // ids must be live in ds; they are sorted and deduplicated.
  static Tree build(std::vector<SampleId> ids, const Dataset& ds, const TreeParams& params);

  // Throws ContractViolation if the id is already present.
  void add(const Dataset& ds, SampleId id);
  // Throws ContractViolation if the id is absent. The sample must still be
  // readable from ds.
  void remove(const Dataset& ds, SampleId id);
  // Descends to a leaf, regrowing tagged nodes on the way.
  LeafCounts query(const Dataset& ds, std::span<const double> x);
  // Read-only descent; nullopt when the path reaches a tagged node.
  std::optional<LeafCounts> peek(std::span<const double> x) const;
  // Regrows every tagged subtree.
  void flush(const Dataset& ds);

  bool contains(SampleId id) const;
  std::size_t size() const { return nodes_[root_].ids.size(); }
  std::span<const SampleId> ids() const { return nodes_[root_].ids; }

  NodeIndex root_index() const { return root_; }
  const Node& root() const { return nodes_[root_]; }
  const Node& node(NodeIndex i) const { return nodes_[i]; }
  std::size_t node_count() const;
  std::size_t tagged_count() const { return tagged_; }
  std::size_t leaf_count() const;
  std::uint32_t height() const;

  const TreeParams& params() const { return params_; }
  std::size_t dim() const { return dim_; }
  std::uint32_t attrs_per_node() const { return attrs_; }

  const Telemetry& telemetry() const { return telemetry_; }
  void reset_telemetry() { telemetry_.reset(); }

  // Writes the root ids and, in preorder, each node's shape, split choice and
  // slot seeds. Everything else (child ids, ranges, thresholds, counts) is
  // recomputed by load() from the samples in ds.
  void save(BinaryWriter& out) const;
  static Tree load(BinaryReader& in, const Dataset& ds);

  // Direct node access for detector tests.
  Node& node_for_testing(NodeIndex i) { return nodes_[i]; }

 private:
  NodeIndex alloc(Node node);
  void fill_slot(const Dataset& ds, const Node& u, AttributeSlot& slot);
  NodeIndex load_node(BinaryReader& in, const Dataset& ds, std::vector<SampleId> ids,
                      std::uint32_t depth);
  void release_subtree(NodeIndex i);
  bool meets_stop_rule(const Node& u) const;
  // Chooses u's split from fresh draws. Non-recursive growth leaves both
  // children tagged.
  void grow(const Dataset& ds, NodeIndex u, bool recursive);
  void tag(NodeIndex u);
  // Shared walk for add/delete; delta is +1 or -1.
  void modify(const Dataset& ds, SampleId id, int delta);
  // Applies one sample's +-1 to an internal node's slots. Returns true when
  // the node must be tagged.
  bool update_slots(const Dataset& ds, Node& u, SampleId id, int delta);

  TreeParams params_;
  std::size_t dim_ = 0;
  std::uint32_t attrs_ = 1;
  Rng rng_;
  std::vector<Node> nodes_;
  std::vector<NodeIndex> free_;
  NodeIndex root_ = kNoNode;
  std::size_t tagged_ = 0;
  Telemetry telemetry_;
};

// (slot, threshold) of the lowest score, scanning slots then thresholds in
// order with strict less-than. {-1, -1} when every score is +inf.
std::pair<std::int32_t, std::int32_t> best_candidate(std::span<const AttributeSlot> slots,
                                                     std::uint32_t n, std::uint32_t n_pos,
                                                     Criterion criterion);

}  // namespace dynfrs
