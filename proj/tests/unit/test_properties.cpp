#include <gtest/gtest.h>

#include <algorithm>

#include "dynfrs/ert.hpp"
#include "dynfrs/forest.hpp"
#include "dynfrs/oracle.hpp"
#include "dynfrs/worker_pool.hpp"
#include "helpers.hpp"

namespace dynfrs {
namespace {

TreeParams tree_params(Criterion c, std::uint64_t seed) {
  TreeParams p;
  p.max_depth = 8;
  p.thresholds = 6;
  p.attrs = 2;
  p.min_split = 3;
  p.criterion = c;
  p.seed = seed;
  return p;
}

bool telemetry_le(const Telemetry& a, const Telemetry& b) {
  return a.nodes_updated <= b.nodes_updated && a.subtree_samples_rebuilt <= b.subtree_samples_rebuilt &&
         a.range_resample_samples <= b.range_resample_samples && a.attrs_resampled <= b.attrs_resampled &&
         a.tags_placed <= b.tags_placed && a.nodes_grown <= b.nodes_grown;
}

class TreeFuzz : public ::testing::TestWithParam<Criterion> {};

// Random interleavings of add/delete/query/flush; after every step the tree
// must agree with a from-scratch recount of its own ids.
TEST_P(TreeFuzz, CachedStatisticsStayExact) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto ds = testing::grid_store(400, 4, 100 + seed);
    Rng rng(seed);
    std::vector<SampleId> in;
    std::vector<SampleId> out;
    for (const auto id : ds.live_ids()) (uniform_below(rng, 2) ? in : out).push_back(id);
    auto tree = Tree::build(in, ds, tree_params(GetParam(), seed));
    Telemetry last = tree.telemetry();
    for (int step = 0; step < 250; ++step) {
      const auto r = uniform_below(rng, 10);
      if (r < 4 && !in.empty()) {
        const auto at = uniform_below(rng, in.size());
        tree.remove(ds, in[at]);
        out.push_back(in[at]);
        in[at] = in.back();
        in.pop_back();
      } else if (r < 8 && !out.empty()) {
        const auto at = uniform_below(rng, out.size());
        tree.add(ds, out[at]);
        in.push_back(out[at]);
        out[at] = out.back();
        out.pop_back();
      } else if (r < 9) {
        const auto x = ds.features(static_cast<SampleId>(uniform_below(rng, ds.id_limit())));
        const auto before = tree.peek(x);
        const auto got = tree.query(ds, x);
        if (before) ASSERT_EQ(*before, got);
        ASSERT_EQ(tree.peek(x), got);
      } else {
        tree.flush(ds);
        ASSERT_EQ(tree.tagged_count(), 0u);
      }
      const auto report = oracle::audit_tree(tree, ds);
      ASSERT_TRUE(report.ok()) << "step " << step << "\n" << report.to_string();
      ASSERT_EQ(tree.size(), in.size());
      ASSERT_TRUE(telemetry_le(last, tree.telemetry()));
      last = tree.telemetry();
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Criteria, TreeFuzz, ::testing::Values(Criterion::kGini, Criterion::kEntropy));

TEST(TreeProperties, AddThenRemoveRestoresMembership) {
  const auto ds = testing::grid_store(300, 3, 8);
  std::vector<SampleId> ids(200);
  for (SampleId i = 0; i < 200; ++i) ids[i] = i;
  auto tree = Tree::build(ids, ds, tree_params(Criterion::kGini, 1));
  for (SampleId id = 200; id < 300; ++id) {
    tree.add(ds, id);
    tree.remove(ds, id);
  }
  EXPECT_EQ(std::vector<SampleId>(tree.ids().begin(), tree.ids().end()), ids);
  tree.flush(ds);
  EXPECT_TRUE(oracle::audit_tree(tree, ds).ok());
}

TEST(TreeProperties, QueriesAloneNeverTag) {
  const auto ds = testing::grid_store(300, 3, 8);
  auto tree = Tree::build(ds.live_ids(), ds, tree_params(Criterion::kGini, 1));
  for (SampleId id = 0; id < 300; ++id) tree.query(ds, ds.features(id));
  EXPECT_EQ(tree.tagged_count(), 0u);
  EXPECT_EQ(tree.telemetry().tags_placed, 0u);
}

TEST(ForestProperties, OccupancyHoldsUnderRandomOperations) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto ds = testing::grid_store(300, 3, seed);
    ForestParams p;
    p.trees = 3 + static_cast<std::uint32_t>(seed) * 4;
    p.q = 0.1 + 0.2 * static_cast<double>(seed);
    p.seed = seed;
    p.tree.min_split = 4;
    p.tree.thresholds = 8;
    auto f = Forest::train(ds, p);
    Rng rng(seed);
    auto live = ds.live_ids();
    for (int op = 0; op < 300; ++op) {
      if (uniform_below(rng, 2) && !live.empty()) {
        const auto at = uniform_below(rng, live.size());
        f.remove(live[at]);
        live[at] = live.back();
        live.pop_back();
      } else {
        live.push_back(f.add(ds.features(static_cast<SampleId>(uniform_below(rng, 300))), 1));
      }
    }
    const auto occ = oracle::occupancy_check(f);
    ASSERT_TRUE(occ.ok()) << occ.to_string();
    const auto audit = oracle::audit_forest(f);
    ASSERT_TRUE(audit.ok()) << audit.to_string();
  }
}

TEST(ForestProperties, WorkerCountDoesNotChangeTheModel) {
  const auto ds = testing::grid_store(800, 4, 3);
  ForestParams p;
  p.trees = 9;
  p.q = 0.4;
  p.seed = 12;
  WorkerPool pool(3);
  auto serial = Forest::train(ds, p);
  auto parallel = Forest::train(ds, p, &pool);
  EXPECT_EQ(testing::snapshot_bytes(serial), testing::snapshot_bytes(parallel));
  const auto victims = testing::shuffled(ds.live_ids(), 1);
  std::vector<SampleId> batch(victims.begin(), victims.begin() + 100);
  std::sort(batch.begin(), batch.end());
  serial.unlearn_batch(batch, true);
  parallel.unlearn_batch(batch, true);
  EXPECT_EQ(testing::snapshot_bytes(serial), testing::snapshot_bytes(parallel));
  EXPECT_EQ(serial.predict_all(ds), parallel.predict_all(ds));
}

TEST(ForestProperties, BatchAndSequentialDeletesLeaveTheSameSamples) {
  const auto ds = testing::grid_store(600, 4, 3);
  ForestParams p;
  p.trees = 6;
  p.q = 0.5;
  auto a = Forest::train(ds, p);
  auto b = a;
  std::vector<SampleId> batch;
  for (SampleId id = 0; id < 600; id += 7) batch.push_back(id);
  a.unlearn_batch(batch, true);
  for (const auto id : batch) b.remove(id);
  b.flush();
  for (std::size_t t = 0; t < a.trees().size(); ++t) {
    const auto ia = a.trees()[t].ids();
    const auto ib = b.trees()[t].ids();
    EXPECT_TRUE(std::equal(ia.begin(), ia.end(), ib.begin(), ib.end()));
  }
  EXPECT_TRUE(oracle::audit_forest(a).ok());
  EXPECT_TRUE(oracle::audit_forest(b).ok());
}

TEST(ForestProperties, PredictionsAreProbabilities) {
  const auto ds = testing::grid_store(400, 3, 5);
  ForestParams p;
  p.trees = 10;
  auto f = Forest::train(ds, p);
  for (const auto s : f.predict_all(ds)) {
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
}

}  // namespace
}  // namespace dynfrs
