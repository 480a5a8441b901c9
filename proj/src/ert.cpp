#include "dynfrs/ert.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dynfrs/binary_io.hpp"
#include "dynfrs/errors.hpp"

namespace dynfrs {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

// ---------------------------------------------------------------------------
// Parameters

std::uint32_t TreeParams::resolved_attrs(std::size_t dim) const {
  if (attrs != 0) return attrs;
  const auto p = static_cast<std::uint32_t>(std::ceil(std::sqrt(static_cast<double>(dim))));
  return std::max<std::uint32_t>(1, p);
}

void TreeParams::validate(std::size_t dim) const {
  if (dim == 0) throw ArgumentError("dataset has no attributes");
  if (max_depth < 1) throw ArgumentError("max depth must be >= 1");
  if (thresholds < 1) throw ArgumentError("thresholds per attribute must be >= 1");
  if (min_split < 2) throw ArgumentError("min split size must be >= 2");
  const auto p = resolved_attrs(dim);
  if (p < 1 || p > dim) {
    throw ArgumentError("attributes per node must lie in [1, " + std::to_string(dim) + "]");
  }
}

// ---------------------------------------------------------------------------
// Split statistics

std::vector<double> sample_thresholds(double lo, double hi, std::size_t s, Rng& rng) {
  std::vector<double> w(s, lo);
  if (lo == hi) return w;
  const double width = hi - lo;
  for (auto& v : w) v = std::min(hi, lo + width * uniform01(rng));
  std::sort(w.begin(), w.end());
  return w;
}

void fill_range(std::span<const SampleId> ids, const Dataset& ds, AttributeSlot& slot) {
  if (ids.empty()) {
    slot.lo = slot.hi = 0.0;
    slot.lo_count = slot.hi_count = 0;
    return;
  }
  const auto col = ds.column(slot.attr);
  double lo = col[ids.front()];
  double hi = lo;
  std::uint32_t lo_count = 0;
  std::uint32_t hi_count = 0;
  for (const auto id : ids) {
    const double v = col[id];
    if (v < lo) {
      lo = v;
      lo_count = 1;
    } else if (v == lo) {
      ++lo_count;
    }
    if (v > hi) {
      hi = v;
      hi_count = 1;
    } else if (v == hi) {
      ++hi_count;
    }
  }
  slot.lo = lo;
  slot.hi = hi;
  slot.lo_count = lo_count;
  slot.hi_count = hi_count;
}

void regenerate_thresholds(AttributeSlot& slot, std::size_t s) {
  Rng local(slot.seed);
  slot.thresholds = sample_thresholds(slot.lo, slot.hi, s, local);
}

void score_candidates(std::span<const SampleId> ids, const Dataset& ds, AttributeSlot& slot) {
  const auto s = slot.thresholds.size();
  const auto col = ds.column(slot.attr);
  const auto labels = ds.labels();
  const auto* w = slot.thresholds.data();

  // diff[i] counts samples whose first threshold with x <= w is i; index s
  // collects samples above every threshold.
  std::vector<std::uint32_t> diff(s + 1, 0);
  std::vector<std::uint32_t> diff_pos(s + 1, 0);
  for (const auto id : ids) {
    const auto at = static_cast<std::size_t>(std::lower_bound(w, w + s, col[id]) - w);
    ++diff[at];
    diff_pos[at] += labels[id];
  }
  slot.below.resize(s);
  slot.below_pos.resize(s);
  std::uint32_t b = 0;
  std::uint32_t c = 0;
  for (std::size_t i = 0; i < s; ++i) {
    b += diff[i];
    c += diff_pos[i];
    slot.below[i] = b;
    slot.below_pos[i] = c;
  }
}

double candidate_score(const AttributeSlot& slot, std::size_t i, std::uint32_t n,
                       std::uint32_t n_pos, Criterion criterion) {
  if (n == 0 || !slot.splittable()) return kInf;
  const SplitCounts counts{slot.below[i], slot.below_pos[i],
                           static_cast<std::int64_t>(n) - slot.below[i],
                           static_cast<std::int64_t>(n_pos) - slot.below_pos[i]};
  return split_score(criterion, counts);
}

std::vector<double> slot_scores(const AttributeSlot& slot, std::uint32_t n, std::uint32_t n_pos,
                                Criterion criterion) {
  std::vector<double> out(slot.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = candidate_score(slot, i, n, n_pos, criterion);
  }
  return out;
}

std::pair<std::int32_t, std::int32_t> best_candidate(std::span<const AttributeSlot> slots,
                                                     std::uint32_t n, std::uint32_t n_pos,
                                                     Criterion criterion) {
  double best = kInf;
  std::pair<std::int32_t, std::int32_t> at{-1, -1};
  for (std::size_t k = 0; k < slots.size(); ++k) {
    if (!slots[k].splittable()) continue;
    for (std::size_t i = 0; i < slots[k].size(); ++i) {
      const double score = candidate_score(slots[k], i, n, n_pos, criterion);
      if (score < best) {
        best = score;
        at = {static_cast<std::int32_t>(k), static_cast<std::int32_t>(i)};
      }
    }
  }
  return at;
}

// ---------------------------------------------------------------------------
// Tree: construction and growth

Tree::Tree(const TreeParams& params, std::size_t dim)
    : params_(params), dim_(dim), rng_(params.seed) {
  params_.validate(dim);
  attrs_ = params_.resolved_attrs(dim);
  root_ = alloc(Node{});
}

Tree Tree::build(std::vector<SampleId> ids, const Dataset& ds, const TreeParams& params) {
  Tree tree(params, ds.dim());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  Node& root = tree.nodes_[tree.root_];
  for (const auto id : ids) {
    if (!ds.is_live(id)) {
      throw ContractViolation("build: sample " + std::to_string(id) + " is not live");
    }
    root.n_pos += ds.label(id);
  }
  root.ids = std::move(ids);
  tree.grow(ds, tree.root_, true);
  return tree;
}

NodeIndex Tree::alloc(Node node) {
  if (!free_.empty()) {
    const auto i = free_.back();
    free_.pop_back();
    nodes_[i] = std::move(node);
    return i;
  }
  nodes_.push_back(std::move(node));
  return static_cast<NodeIndex>(nodes_.size() - 1);
}

void Tree::release_subtree(NodeIndex i) {
  std::vector<NodeIndex> stack{i};
  while (!stack.empty()) {
    const auto u = stack.back();
    stack.pop_back();
    Node& node = nodes_[u];
    if (node.tagged) --tagged_;
    if (node.left != kNoNode) stack.push_back(node.left);
    if (node.right != kNoNode) stack.push_back(node.right);
    node = Node{};
    free_.push_back(u);
  }
}

bool Tree::meets_stop_rule(const Node& u) const {
  const auto n = u.size();
  return u.depth >= params_.max_depth || n < params_.min_split || u.n_pos == 0 || u.n_pos == n;
}

void Tree::fill_slot(const Dataset& ds, const Node& u, AttributeSlot& slot) {
  fill_range(u.ids, ds, slot);
  regenerate_thresholds(slot, params_.thresholds);
  score_candidates(u.ids, ds, slot);
}

void Tree::grow(const Dataset& ds, NodeIndex u, bool recursive) {
  std::vector<SampleId> left_ids;
  std::vector<SampleId> right_ids;
  std::uint32_t left_pos = 0;
  std::uint32_t right_pos = 0;
  std::uint32_t child_depth = 0;
  {
    Node& node = nodes_[u];
    if (node.tagged) {
      node.tagged = false;
      --tagged_;
      telemetry_.subtree_samples_rebuilt += node.size();
    }
    ++telemetry_.nodes_grown;
    node.slots.clear();
    node.best_slot = node.best_index = -1;
    if (meets_stop_rule(node)) {
      node.slots.shrink_to_fit();
      return;
    }

    const auto attrs = sample_without_replacement(rng_, static_cast<std::uint32_t>(dim_), attrs_);
    node.slots.resize(attrs.size());
    for (std::size_t k = 0; k < attrs.size(); ++k) {
      auto& slot = node.slots[k];
      slot.attr = attrs[k];
      slot.seed = rng_();
      fill_slot(ds, node, slot);
    }
    const auto [k, i] = best_candidate(node.slots, node.size(), node.n_pos, params_.criterion);
    if (k < 0) {
      node.slots.clear();
      node.slots.shrink_to_fit();
      return;
    }
    node.best_slot = k;
    node.best_index = i;

    const auto col = ds.column(node.split_attr());
    const double w = node.split_value();
    const auto& slot = node.slots[k];
    left_ids.reserve(slot.below[i]);
    right_ids.reserve(node.size() - slot.below[i]);
    for (const auto id : node.ids) {
      if (col[id] <= w) {
        left_ids.push_back(id);
        left_pos += ds.label(id);
      } else {
        right_ids.push_back(id);
        right_pos += ds.label(id);
      }
    }
    child_depth = node.depth + 1;
  }

  const auto make_child = [&](std::vector<SampleId>& ids, std::uint32_t pos) {
    Node child;
    child.depth = child_depth;
    child.ids = std::move(ids);
    child.n_pos = pos;
    child.tagged = !recursive;
    return child;
  };
  const auto l = alloc(make_child(left_ids, left_pos));
  const auto r = alloc(make_child(right_ids, right_pos));
  nodes_[u].left = l;
  nodes_[u].right = r;
  if (recursive) {
    grow(ds, l, true);
    grow(ds, r, true);
  } else {
    tagged_ += 2;
  }
}

void Tree::tag(NodeIndex u) {
  Node& node = nodes_[u];
  const auto l = node.left;
  const auto r = node.right;
  node.left = node.right = kNoNode;
  node.slots.clear();
  node.slots.shrink_to_fit();
  node.best_slot = node.best_index = -1;
  node.tagged = true;
  ++tagged_;
  ++telemetry_.tags_placed;
  if (l != kNoNode) release_subtree(l);
  if (r != kNoNode) release_subtree(r);
}

// ---------------------------------------------------------------------------
// Tree: add / delete

void Tree::add(const Dataset& ds, SampleId id) { modify(ds, id, +1); }

void Tree::remove(const Dataset& ds, SampleId id) { modify(ds, id, -1); }

bool Tree::update_slots(const Dataset& ds, Node& u, SampleId id, int delta) {
  const auto label = ds.label(id);
  const auto n = u.size();
  bool best_resampled = false;
  bool any_resampled = false;
  for (std::size_t k = 0; k < u.slots.size(); ++k) {
    auto& slot = u.slots[k];
    const double v = ds.value(id, slot.attr);
    bool range_changed = false;
    if (delta > 0) {
      if (v < slot.lo) {
        range_changed = true;
      } else if (v == slot.lo) {
        ++slot.lo_count;
      }
      if (v > slot.hi) {
        range_changed = true;
      } else if (v == slot.hi) {
        ++slot.hi_count;
      }
    } else {
      if (v == slot.lo && --slot.lo_count == 0) range_changed = true;
      if (v == slot.hi && --slot.hi_count == 0) range_changed = true;
    }

    if (range_changed) {
      slot.seed = rng_();
      fill_slot(ds, u, slot);
      ++telemetry_.attrs_resampled;
      any_resampled = true;
      best_resampled |= static_cast<std::int32_t>(k) == u.best_slot;
      continue;
    }
    const auto first = static_cast<std::size_t>(
        std::lower_bound(slot.thresholds.begin(), slot.thresholds.end(), v) -
        slot.thresholds.begin());
    for (std::size_t i = first; i < slot.size(); ++i) {
      slot.below[i] += delta;
      if (label) slot.below_pos[i] += delta;
    }
  }
  if (any_resampled) telemetry_.range_resample_samples += n;

  if (meets_stop_rule(u)) return true;
  const auto [k, i] = best_candidate(u.slots, n, u.n_pos, params_.criterion);
  return k < 0 || best_resampled || k != u.best_slot || i != u.best_index;
}

void Tree::modify(const Dataset& ds, SampleId id, int delta) {
  const bool present = contains(id);
  if (delta > 0 && present) {
    throw ContractViolation("tree already holds sample " + std::to_string(id));
  }
  if (delta < 0 && !present) {
    throw ContractViolation("tree does not hold sample " + std::to_string(id));
  }
  const auto label = ds.label(id);

  NodeIndex u = root_;
  while (true) {
    Node& node = nodes_[u];
    ++telemetry_.nodes_updated;
    auto at = std::lower_bound(node.ids.begin(), node.ids.end(), id);
    if (delta > 0) {
      node.ids.insert(at, id);
      node.n_pos += label;
    } else {
      if (at == node.ids.end() || *at != id) {
        throw ContractViolation("sample " + std::to_string(id) + " missing below the root");
      }
      node.ids.erase(at);
      node.n_pos -= label;
    }

    if (node.tagged) return;
    if (!node.is_internal()) {
      // A leaf that no longer meets a stopping rule is regrown on demand.
      if (delta > 0 && !meets_stop_rule(node)) tag(u);
      return;
    }
    if (update_slots(ds, node, id, delta)) {
      tag(u);
      return;
    }
    u = ds.value(id, node.split_attr()) <= node.split_value() ? node.left : node.right;
  }
}

// ---------------------------------------------------------------------------
// Tree: query / flush

LeafCounts Tree::query(const Dataset& ds, std::span<const double> x) {
  NodeIndex u = root_;
  while (true) {
    if (nodes_[u].tagged) grow(ds, u, false);
    const Node& node = nodes_[u];
    if (!node.is_internal()) return {node.size(), node.n_pos};
    u = x[node.split_attr()] <= node.split_value() ? node.left : node.right;
  }
}

std::optional<LeafCounts> Tree::peek(std::span<const double> x) const {
  NodeIndex u = root_;
  while (true) {
    const Node& node = nodes_[u];
    if (node.tagged) return std::nullopt;
    if (!node.is_internal()) return LeafCounts{node.size(), node.n_pos};
    u = x[node.split_attr()] <= node.split_value() ? node.left : node.right;
  }
}

void Tree::flush(const Dataset& ds) {
  if (tagged_ == 0) return;
  std::vector<NodeIndex> pending;
  std::vector<NodeIndex> stack{root_};
  while (!stack.empty()) {
    const auto u = stack.back();
    stack.pop_back();
    const Node& node = nodes_[u];
    if (node.tagged) {
      pending.push_back(u);
    } else if (node.is_internal()) {
      stack.push_back(node.right);
      stack.push_back(node.left);
    }
  }
  for (const auto u : pending) grow(ds, u, true);
}

bool Tree::contains(SampleId id) const {
  const auto& ids = nodes_[root_].ids;
  return std::binary_search(ids.begin(), ids.end(), id);
}

std::size_t Tree::node_count() const {
  std::size_t count = 0;
  std::vector<NodeIndex> stack{root_};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    ++count;
    if (node.is_internal()) {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  return count;
}

std::size_t Tree::leaf_count() const {
  std::size_t count = 0;
  std::vector<NodeIndex> stack{root_};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (node.is_internal()) {
      stack.push_back(node.left);
      stack.push_back(node.right);
    } else if (!node.tagged) {
      ++count;
    }
  }
  return count;
}

std::uint32_t Tree::height() const {
  std::uint32_t h = 0;
  std::vector<NodeIndex> stack{root_};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    h = std::max(h, node.depth);
    if (node.is_internal()) {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Tree: snapshot

namespace {
enum NodeKind : std::uint8_t { kLeafNode = 0, kTaggedNode = 1, kInternalNode = 2 };
}  // namespace

void Tree::save(BinaryWriter& out) const {
  out.put<std::uint32_t>(params_.max_depth);
  out.put<std::uint32_t>(params_.thresholds);
  out.put<std::uint32_t>(params_.attrs);
  out.put<std::uint32_t>(params_.min_split);
  out.put<std::uint8_t>(static_cast<std::uint8_t>(params_.criterion));
  out.put<std::uint64_t>(params_.seed);
  out.put<std::uint64_t>(dim_);
  out.put_string(rng_state(rng_));
  out.put_vector(nodes_[root_].ids);

  std::vector<NodeIndex> stack{root_};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (node.tagged) {
      out.put<std::uint8_t>(kTaggedNode);
    } else if (!node.is_internal()) {
      out.put<std::uint8_t>(kLeafNode);
    } else {
      out.put<std::uint8_t>(kInternalNode);
      out.put<std::int32_t>(node.best_slot);
      out.put<std::int32_t>(node.best_index);
      out.put<std::uint32_t>(static_cast<std::uint32_t>(node.slots.size()));
      for (const auto& slot : node.slots) {
        out.put<std::uint32_t>(slot.attr);
        out.put<std::uint64_t>(slot.seed);
      }
      stack.push_back(node.right);
      stack.push_back(node.left);
    }
  }
}

NodeIndex Tree::load_node(BinaryReader& in, const Dataset& ds, std::vector<SampleId> ids,
                          std::uint32_t depth) {
  Node node;
  node.depth = depth;
  for (const auto id : ids) node.n_pos += ds.label(id);
  node.ids = std::move(ids);
  const auto kind = in.get<std::uint8_t>();
  if (kind == kTaggedNode) {
    node.tagged = true;
    ++tagged_;
    return alloc(std::move(node));
  }
  if (kind == kLeafNode) return alloc(std::move(node));
  if (kind != kInternalNode) throw ParseError("snapshot: bad node kind");

  node.best_slot = in.get<std::int32_t>();
  node.best_index = in.get<std::int32_t>();
  const auto slots = in.get<std::uint32_t>();
  if (slots == 0 || slots > dim_) throw ParseError("snapshot: bad slot count");
  node.slots.resize(slots);
  for (auto& slot : node.slots) {
    slot.attr = in.get<std::uint32_t>();
    slot.seed = in.get<std::uint64_t>();
    if (slot.attr >= dim_) throw ParseError("snapshot: attribute out of range");
    fill_slot(ds, node, slot);
  }
  if (node.best_slot < 0 || static_cast<std::uint32_t>(node.best_slot) >= slots ||
      node.best_index < 0 || static_cast<std::uint32_t>(node.best_index) >= params_.thresholds) {
    throw ParseError("snapshot: bad split index");
  }

  std::vector<SampleId> left_ids;
  std::vector<SampleId> right_ids;
  const auto col = ds.column(node.split_attr());
  const double w = node.split_value();
  for (const auto id : node.ids) (col[id] <= w ? left_ids : right_ids).push_back(id);

  const auto u = alloc(std::move(node));
  const auto l = load_node(in, ds, std::move(left_ids), depth + 1);
  const auto r = load_node(in, ds, std::move(right_ids), depth + 1);
  nodes_[u].left = l;
  nodes_[u].right = r;
  return u;
}

Tree Tree::load(BinaryReader& in, const Dataset& ds) {
  TreeParams params;
  params.max_depth = in.get<std::uint32_t>();
  params.thresholds = in.get<std::uint32_t>();
  params.attrs = in.get<std::uint32_t>();
  params.min_split = in.get<std::uint32_t>();
  const auto criterion = in.get<std::uint8_t>();
  if (criterion > 1) throw ParseError("snapshot: bad criterion");
  params.criterion = static_cast<Criterion>(criterion);
  params.seed = in.get<std::uint64_t>();
  const auto dim = in.get<std::uint64_t>();
  if (dim != ds.dim()) throw ParseError("snapshot: tree dimension does not match the store");

  Tree tree(params, dim);
  restore_rng_state(tree.rng_, in.get_string());
  auto ids = in.get_vector<SampleId>();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!ds.is_live(ids[i]) || (i > 0 && ids[i - 1] >= ids[i])) {
      throw ParseError("snapshot: bad tree id list");
    }
  }
  tree.nodes_.clear();
  tree.free_.clear();
  tree.root_ = tree.load_node(in, ds, std::move(ids), 1);
  return tree;
}

}  // namespace dynfrs
