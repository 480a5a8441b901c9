#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <sstream>

#include "dynfrs/errors.hpp"
#include "dynfrs/forest.hpp"
#include "dynfrs/oracle.hpp"
#include "helpers.hpp"

namespace dynfrs {
namespace {

ForestParams params() {
  ForestParams p;
  p.trees = 7;
  p.q = 0.3;
  p.seed = 21;
  p.tree.min_split = 4;
  p.tree.thresholds = 12;
  p.tree.criterion = Criterion::kEntropy;
  return p;
}

Forest reload(const Forest& f) {
  std::istringstream in(testing::snapshot_bytes(f), std::ios::binary);
  return Forest::load(in);
}

TEST(Snapshot, RoundTripKeepsPredictionsAndBytes) {
  const auto ds = testing::grid_store(500, 4, 7);
  auto f = Forest::train(ds, params());
  auto g = reload(f);
  EXPECT_EQ(testing::snapshot_bytes(g), testing::snapshot_bytes(f));
  EXPECT_EQ(g.predict_all(ds), f.predict_all(ds));
  EXPECT_EQ(g.params().tree.criterion, Criterion::kEntropy);
  EXPECT_TRUE(oracle::audit_forest(g).ok());
}

TEST(Snapshot, TaggedForestContinuesIdentically) {
  const auto ds = testing::grid_store(500, 4, 7);
  auto f = Forest::train(ds, params());
  const auto victims = testing::shuffled(ds.live_ids(), 4);
  for (std::size_t i = 0; i < 80; ++i) f.remove(victims[i]);
  f.add(std::vector<double>{9, 9, 9, 9}, 1);
  ASSERT_GT(f.tagged_count(), 0u);
  auto g = reload(f);
  EXPECT_EQ(g.tagged_count(), f.tagged_count());
  EXPECT_TRUE(oracle::audit_forest(g).ok());
  EXPECT_TRUE(oracle::occupancy_check(g).ok());

  // Same future: the tree and forest engines were restored too.
  for (std::size_t i = 80; i < 120; ++i) {
    f.remove(victims[i]);
    g.remove(victims[i]);
  }
  EXPECT_EQ(f.add(std::vector<double>{1, 2, 3, 4}, 0), g.add(std::vector<double>{1, 2, 3, 4}, 0));
  EXPECT_EQ(g.predict_all(ds), f.predict_all(ds));
  EXPECT_EQ(testing::snapshot_bytes(g), testing::snapshot_bytes(f));
}

TEST(Snapshot, DeletedSamplesAreNotWritten) {
  auto ds = testing::numeric_store(2);
  const double marker = 1234.5678;
  for (int i = 0; i < 50; ++i) {
    ds.append(std::vector<double>{static_cast<double>(i % 7), static_cast<double>(i % 3)}, i % 2);
  }
  ds.append(std::vector<double>{marker, marker}, 1);
  auto f = Forest::train(ds, params());
  f.remove(50);
  f.flush();
  const auto bytes = testing::snapshot_bytes(f);
  char pattern[sizeof(double)];
  std::memcpy(pattern, &marker, sizeof(double));
  EXPECT_EQ(bytes.find(std::string(pattern, sizeof(double))), std::string::npos);
  auto g = reload(f);
  EXPECT_FALSE(g.store().is_live(50));
  EXPECT_EQ(g.store().id_limit(), 51u);
}

TEST(Snapshot, FileRoundTrip) {
  const auto dir = testing::temp_dir("snapshot");
  const auto ds = testing::grid_store(200, 3, 7);
  auto f = Forest::train(ds, params());
  f.save(dir / "m.bin");
  auto g = Forest::load(dir / "m.bin");
  EXPECT_EQ(g.predict_all(ds), f.predict_all(ds));
  EXPECT_THROW(Forest::load(dir / "missing.bin"), NotFoundError);
}

TEST(Snapshot, CorruptInputIsRejected) {
  const auto ds = testing::grid_store(200, 3, 7);
  const auto bytes = testing::snapshot_bytes(Forest::train(ds, params()));
  {
    std::istringstream in(bytes.substr(0, bytes.size() / 2), std::ios::binary);
    EXPECT_THROW(Forest::load(in), ParseError);
  }
  {
    std::string bad = bytes;
    bad[0] = 'X';
    std::istringstream in(bad, std::ios::binary);
    EXPECT_THROW(Forest::load(in), ParseError);
  }
  {
    std::string bad = bytes;
    bad[8] = 9;  // version
    std::istringstream in(bad, std::ios::binary);
    EXPECT_THROW(Forest::load(in), ParseError);
  }
}

}  // namespace
}  // namespace dynfrs
