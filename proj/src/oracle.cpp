#include "dynfrs/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace dynfrs::oracle {

namespace {

std::string str(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <typename T>
std::string str(T v) {
  return std::to_string(v);
}

std::string str_list(std::span<const std::uint32_t> v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + "]";
}

double side_gini(double n, double pos) {
  if (n == 0) return 0.0;
  const double p = pos / n;
  const double q = 1.0 - p;
  return 1.0 - p * p - q * q;
}

double side_entropy(double n, double pos) {
  if (n == 0) return 0.0;
  double h = 0.0;
  for (const double c : {pos, n - pos}) {
    if (c > 0) h -= (c / n) * std::log2(c / n);
  }
  return h;
}

struct Auditor {
  const Tree& tree;
  const Dataset& ds;
  std::int64_t index;
  AuditReport report;

  void fail(const std::string& path, std::string field, std::string expected, std::string found) {
    report.violations.push_back({index, path, std::move(field), std::move(expected), std::move(found)});
  }

  bool stop_rule(const Node& u) const {
    const auto& p = tree.params();
    return u.depth >= p.max_depth || u.ids.size() < p.min_split || u.n_pos == 0 ||
           u.n_pos == u.ids.size();
  }

  void check_slot(const std::string& path, const Node& u, std::size_t k) {
    const auto& slot = u.slots[k];
    const std::string at = "slot " + std::to_string(k) + " ";
    if (slot.attr >= ds.dim()) {
      fail(path, at + "attr", "< " + str(ds.dim()), str(slot.attr));
      return;
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto id : u.ids) {
      lo = std::min(lo, ds.value(id, slot.attr));
      hi = std::max(hi, ds.value(id, slot.attr));
    }
    std::uint32_t lo_count = 0;
    std::uint32_t hi_count = 0;
    for (const auto id : u.ids) {
      lo_count += ds.value(id, slot.attr) == lo;
      hi_count += ds.value(id, slot.attr) == hi;
    }
    if (!u.ids.empty()) {
      if (slot.lo != lo) fail(path, at + "lo", str(lo), str(slot.lo));
      if (slot.hi != hi) fail(path, at + "hi", str(hi), str(slot.hi));
      if (slot.lo_count != lo_count) fail(path, at + "lo_count", str(lo_count), str(slot.lo_count));
      if (slot.hi_count != hi_count) fail(path, at + "hi_count", str(hi_count), str(slot.hi_count));
    }
    if (slot.thresholds.size() != tree.params().thresholds) {
      fail(path, at + "thresholds.size", str(tree.params().thresholds), str(slot.thresholds.size()));
    }
    for (std::size_t i = 0; i < slot.thresholds.size(); ++i) {
      const double w = slot.thresholds[i];
      if (w < slot.lo || w > slot.hi) {
        fail(path, at + "thresholds[" + str(i) + "]", "within [" + str(slot.lo) + ", " + str(slot.hi) + "]", str(w));
      }
      if (i > 0 && w < slot.thresholds[i - 1]) {
        fail(path, at + "thresholds[" + str(i) + "]", ">= " + str(slot.thresholds[i - 1]), str(w));
      }
    }
    if (slot.below.size() != slot.thresholds.size() || slot.below_pos.size() != slot.thresholds.size()) {
      fail(path, at + "below.size", str(slot.thresholds.size()), str(slot.below.size()));
      return;
    }
    for (std::size_t i = 0; i < slot.thresholds.size(); ++i) {
      std::uint32_t b = 0;
      std::uint32_t c = 0;
      for (const auto id : u.ids) {
        if (ds.value(id, slot.attr) <= slot.thresholds[i]) {
          ++b;
          c += ds.label(id);
        }
      }
      if (slot.below[i] != b) fail(path, at + "below[" + str(i) + "]", str(b), str(slot.below[i]));
      if (slot.below_pos[i] != c) {
        fail(path, at + "below_pos[" + str(i) + "]", str(c), str(slot.below_pos[i]));
      }
    }
  }

  // Recomputes every candidate score from raw samples and checks that the
  // stored split is the first minimum (up to rounding between formulas).
  void check_best(const std::string& path, const Node& u) {
    const auto n = static_cast<std::int64_t>(u.ids.size());
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> scores(u.slots.size());
    for (std::size_t k = 0; k < u.slots.size(); ++k) {
      const auto& slot = u.slots[k];
      if (slot.attr >= ds.dim()) return;
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (const auto id : u.ids) {
        lo = std::min(lo, ds.value(id, slot.attr));
        hi = std::max(hi, ds.value(id, slot.attr));
      }
      scores[k].assign(slot.thresholds.size(), std::numeric_limits<double>::infinity());
      if (!(lo < hi)) continue;
      for (std::size_t i = 0; i < slot.thresholds.size(); ++i) {
        std::int64_t b = 0;
        std::int64_t c = 0;
        for (const auto id : u.ids) {
          if (ds.value(id, slot.attr) <= slot.thresholds[i]) {
            ++b;
            c += ds.label(id);
          }
        }
        scores[k][i] = reference_score(tree.params().criterion, b, c, n - b, u.n_pos - c);
        best = std::min(best, scores[k][i]);
      }
    }
    if (u.best_slot < 0 || static_cast<std::size_t>(u.best_slot) >= u.slots.size() ||
        u.best_index < 0 || static_cast<std::size_t>(u.best_index) >= scores[u.best_slot].size()) {
      fail(path, "best", "valid (slot, threshold)", str(u.best_slot) + "," + str(u.best_index));
      return;
    }
    const double chosen = scores[u.best_slot][u.best_index];
    constexpr double kTol = 1e-12;
    if (!(chosen <= best + kTol)) {
      fail(path, "best.score", str(best), str(chosen));
      return;
    }
    for (std::size_t k = 0; k <= static_cast<std::size_t>(u.best_slot); ++k) {
      const auto end = k == static_cast<std::size_t>(u.best_slot) ? static_cast<std::size_t>(u.best_index)
                                                                   : scores[k].size();
      for (std::size_t i = 0; i < end; ++i) {
        if (scores[k][i] < chosen - kTol) {
          fail(path, "best", str(k) + "," + str(i), str(u.best_slot) + "," + str(u.best_index));
          return;
        }
      }
    }
  }

  void run() {
    struct Item {
      NodeIndex node;
      std::string path;
      std::uint32_t depth;
    };
    std::multiset<SampleId> held;
    std::vector<Item> stack{{tree.root_index(), "root", 1}};
    while (!stack.empty()) {
      auto [ui, path, depth] = stack.back();
      stack.pop_back();
      const Node& u = tree.node(ui);

      if (u.depth != depth) fail(path, "depth", str(depth), str(u.depth));
      std::uint32_t pos = 0;
      for (std::size_t i = 0; i < u.ids.size(); ++i) {
        if (!ds.is_live(u.ids[i])) fail(path, "ids", "live ids", "dead id " + str(u.ids[i]));
        if (i > 0 && u.ids[i - 1] >= u.ids[i]) fail(path, "ids", "strictly ascending", "unsorted at " + str(i));
        pos += ds.label(u.ids[i]);
      }
      if (u.n_pos != pos) fail(path, "n_pos", str(pos), str(u.n_pos));

      const bool has_left = u.left != kNoNode;
      const bool has_right = u.right != kNoNode;
      if (has_left != has_right) {
        fail(path, "children", "both or neither", has_left ? "left only" : "right only");
        continue;
      }
      if (u.tagged || !has_left) {
        if (u.tagged && has_left) fail(path, "tagged", "no children", "has children");
        if (!u.slots.empty()) fail(path, "slots", "none", str(u.slots.size()));
        held.insert(u.ids.begin(), u.ids.end());
        continue;
      }

      // Untagged internal node.
      if (stop_rule(u)) fail(path, "split", "leaf (stopping rule met)", "internal");
      if (u.slots.size() != tree.attrs_per_node()) {
        fail(path, "slots", str(tree.attrs_per_node()), str(u.slots.size()));
      }
      std::set<std::uint32_t> attrs;
      for (const auto& s : u.slots) attrs.insert(s.attr);
      if (attrs.size() != u.slots.size()) fail(path, "slots", "distinct attributes", "repeated attribute");
      for (std::size_t k = 0; k < u.slots.size(); ++k) check_slot(path, u, k);
      check_best(path, u);
      if (u.best_slot < 0 || static_cast<std::size_t>(u.best_slot) >= u.slots.size() ||
          u.best_index < 0 ||
          static_cast<std::size_t>(u.best_index) >= u.slots[u.best_slot].thresholds.size()) {
        continue;
      }

      const auto attr = u.slots[u.best_slot].attr;
      const double w = u.slots[u.best_slot].thresholds[u.best_index];
      std::vector<SampleId> left;
      std::vector<SampleId> right;
      for (const auto id : u.ids) (ds.value(id, attr) <= w ? left : right).push_back(id);
      if (tree.node(u.left).ids != left) {
        fail(path + "/L", "ids", str(left.size()) + " samples with x <= w", str(tree.node(u.left).ids.size()) + " samples");
      }
      if (tree.node(u.right).ids != right) {
        fail(path + "/R", "ids", str(right.size()) + " samples with x > w", str(tree.node(u.right).ids.size()) + " samples");
      }
      stack.push_back({u.right, path + "/R", depth + 1});
      stack.push_back({u.left, path + "/L", depth + 1});
    }

    const auto root_ids = tree.node(tree.root_index()).ids;
    const std::multiset<SampleId> expected(root_ids.begin(), root_ids.end());
    if (held != expected) {
      fail("root", "conservation", str(expected.size()) + " ids over leaves and tags",
           str(held.size()) + " ids, different multiset");
    }
  }
};

}  // namespace

void AuditReport::merge(AuditReport other) {
  violations.insert(violations.end(), std::make_move_iterator(other.violations.begin()),
                    std::make_move_iterator(other.violations.end()));
}

std::string AuditReport::to_string(std::size_t limit) const {
  std::ostringstream os;
  os << violations.size() << " violation(s)";
  for (std::size_t i = 0; i < violations.size() && i < limit; ++i) {
    const auto& v = violations[i];
    os << "\n  tree " << v.tree << " " << v.path << " " << v.field << ": expected " << v.expected
       << ", found " << v.found;
  }
  return os.str();
}

double reference_score(Criterion criterion, std::int64_t n_left, std::int64_t pos_left,
                       std::int64_t n_right, std::int64_t pos_right) {
  const double nl = static_cast<double>(n_left);
  const double nr = static_cast<double>(n_right);
  const double n = nl + nr;
  const auto side = criterion == Criterion::kGini ? side_gini : side_entropy;
  return (nl / n) * side(nl, static_cast<double>(pos_left)) +
         (nr / n) * side(nr, static_cast<double>(pos_right));
}

AuditReport audit_tree(const Tree& tree, const Dataset& ds, std::int64_t tree_index) {
  Auditor a{tree, ds, tree_index, {}};
  a.run();
  return std::move(a.report);
}

AuditReport audit_forest(const Forest& forest) {
  AuditReport report;
  for (std::size_t t = 0; t < forest.trees().size(); ++t) {
    report.merge(audit_tree(forest.trees()[t], forest.store(), static_cast<std::int64_t>(t)));
  }
  return report;
}

AuditReport occupancy_check(const Forest& forest) {
  AuditReport report;
  const auto& store = forest.store();
  const auto k = forest.occupancy();
  const auto T = forest.trees().size();

  // Membership by full scan of every tree's ids.
  std::vector<std::vector<std::uint32_t>> holders(store.id_limit());
  std::size_t total = 0;
  for (std::size_t t = 0; t < T; ++t) {
    for (const auto id : forest.trees()[t].ids()) {
      total += 1;
      if (id >= store.id_limit() || !store.is_live(id)) {
        report.violations.push_back({static_cast<std::int64_t>(t), "root", "ids", "live ids", "dead id " + str(id)});
        continue;
      }
      holders[id].push_back(static_cast<std::uint32_t>(t));
    }
  }
  for (SampleId id = 0; id < store.id_limit(); ++id) {
    if (!store.is_live(id)) continue;
    const auto row = forest.trees_of(id);
    std::vector<std::uint32_t> assigned(row.begin(), row.end());
    std::sort(assigned.begin(), assigned.end());
    const bool distinct = std::adjacent_find(assigned.begin(), assigned.end()) == assigned.end();
    const bool in_range = std::all_of(assigned.begin(), assigned.end(), [&](auto t) { return t < T; });
    if (assigned.size() != k || !distinct || !in_range || assigned != holders[id]) {
      report.violations.push_back({-1, "", "assignment[" + str(id) + "]",
                                   str(k) + " distinct trees " + str_list(holders[id]),
                                   str_list(row)});
    }
  }
  if (total != static_cast<std::size_t>(k) * store.size()) {
    report.violations.push_back({-1, "", "sum of tree sizes", str(static_cast<std::size_t>(k) * store.size()), str(total)});
  }
  return report;
}

std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>> sortmerge_split_stats(
    std::span<const SampleId> ids, const Dataset& ds, std::size_t attr,
    std::span<const double> thresholds) {
  std::vector<std::pair<double, Label>> samples;
  samples.reserve(ids.size());
  for (const auto id : ids) samples.emplace_back(ds.value(id, attr), ds.label(id));
  std::sort(samples.begin(), samples.end());

  std::vector<std::uint32_t> b(thresholds.size(), 0);
  std::vector<std::uint32_t> c(thresholds.size(), 0);
  std::size_t j = 0;
  std::uint32_t count = 0;
  std::uint32_t pos = 0;
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    while (j < samples.size() && samples[j].first <= thresholds[i]) {
      ++count;
      pos += samples[j].second;
      ++j;
    }
    b[i] = count;
    c[i] = pos;
  }
  return {b, c};
}

Forest naive_retrain(const Dataset& ds_without, ForestParams params, std::uint64_t seed,
                     bool keep_occupancy) {
  if (!keep_occupancy) params.q = 1.0;
  params.seed = seed;
  return Forest::train(ds_without, params);
}

}  // namespace dynfrs::oracle
