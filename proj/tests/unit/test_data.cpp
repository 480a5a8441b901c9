#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "dynfrs/data.hpp"
#include "dynfrs/errors.hpp"
#include "helpers.hpp"

namespace dynfrs {
namespace {

const char* kColorSchema = R"({
  "positive_label": "1",
  "columns": [
    {"name": "color", "kind": "categorical", "values": ["r", "g", "b"]},
    {"name": "label", "kind": "label"}
  ]
})";

Dataset parse(const std::string& csv, const Schema& schema) {
  std::istringstream in(csv);
  return load_csv(in, schema);
}

TEST(Schema, ParsesAndSortsCategoricalValues) {
  const auto s = Schema::parse(kColorSchema);
  ASSERT_EQ(s.columns().size(), 2u);
  EXPECT_EQ(s.columns()[0].values, (std::vector<std::string>{"b", "g", "r"}));
  EXPECT_EQ(s.encoded_width(), 3u);
  EXPECT_EQ(s.label_column(), 1u);
  EXPECT_EQ(s.attribute_names(), (std::vector<std::string>{"color=b", "color=g", "color=r"}));
}

TEST(Schema, JsonRoundTrip) {
  const auto s = Schema::parse(kColorSchema);
  EXPECT_EQ(Schema::parse(s.to_json()), s);
}

TEST(Schema, RejectsBadDeclarations) {
  EXPECT_THROW(Schema({{"a", ColumnKind::kNumeric, {}}}, "1"), SchemaError);
  EXPECT_THROW(Schema({{"y", ColumnKind::kLabel, {}}, {"z", ColumnKind::kLabel, {}}}, "1"),
               SchemaError);
  EXPECT_THROW(Schema({{"c", ColumnKind::kCategorical, {}}, {"y", ColumnKind::kLabel, {}}}, "1"),
               SchemaError);
  EXPECT_THROW(
      Schema({{"c", ColumnKind::kCategorical, {"a", "a"}}, {"y", ColumnKind::kLabel, {}}}, "1"),
      SchemaError);
  EXPECT_THROW(Schema({{"a", ColumnKind::kNumeric, {}}, {"a", ColumnKind::kLabel, {}}}, "1"),
               SchemaError);
  EXPECT_THROW(Schema::parse("{not json"), ParseError);
  EXPECT_THROW(Schema::parse(R"({"columns": []})"), SchemaError);
}

TEST(Schema, MissingFileIsReported) {
  EXPECT_THROW(Schema::load("/nonexistent/schema.json"), NotFoundError);
}

TEST(LoadCsv, OneHotOfThreeValuedCategory) {
  const auto ds = parse("color,label\nr,1\ng,0\nb,1\n", Schema::parse(kColorSchema));
  EXPECT_EQ(ds.dim(), 3u);
  EXPECT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds.features(0), (std::vector<double>{0, 0, 1}));
  EXPECT_EQ(ds.features(1), (std::vector<double>{0, 1, 0}));
  EXPECT_EQ(ds.features(2), (std::vector<double>{1, 0, 0}));
  EXPECT_EQ(ds.label(0), 1);
  EXPECT_EQ(ds.label(1), 0);
  EXPECT_EQ(ds.positives(), 2u);
}

TEST(LoadCsv, ArityMismatchNamesTheLine) {
  try {
    parse("color,label\nr,1\nr,g,1\n", Schema::parse(kColorSchema));
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(LoadCsv, UnknownCategoryIsSchemaError) {
  EXPECT_THROW(parse("color,label\ny,1\n", Schema::parse(kColorSchema)), SchemaError);
}

TEST(LoadCsv, MissingLabelIsSchemaError) {
  EXPECT_THROW(parse("color,label\nr,\n", Schema::parse(kColorSchema)), SchemaError);
}

TEST(LoadCsv, HeaderMustMatch) {
  EXPECT_THROW(parse("colour,label\nr,1\n", Schema::parse(kColorSchema)), SchemaError);
}

TEST(LoadCsv, MissingOrBadNumbersAreRejected) {
  const Schema s({{"a", ColumnKind::kNumeric, {}}, {"y", ColumnKind::kLabel, {}}}, "yes");
  EXPECT_THROW(parse("a,y\n,yes\n", s), ParseError);
  EXPECT_THROW(parse("a,y\n1.5x,yes\n", s), ParseError);
  EXPECT_THROW(parse("a,y\nnan,yes\n", s), ParseError);
  const auto ds = parse("a,y\n 2.5 ,yes\n\n-1e3,no\n", s);
  EXPECT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.value(0, 0), 2.5);
  EXPECT_EQ(ds.value(1, 0), -1000.0);
  EXPECT_EQ(ds.label(0), 1);
  EXPECT_EQ(ds.label(1), 0);
}

TEST(LoadCsv, QuotedFieldsAndNumericPositiveLabel) {
  const Schema s({{"c", ColumnKind::kCategorical, {"a,b", "c"}}, {"y", ColumnKind::kLabel, {}}},
                 "1");
  const auto ds = parse("c,y\n\"a,b\",1.0\nc,0\n", s);
  EXPECT_EQ(ds.features(0), (std::vector<double>{1, 0}));
  EXPECT_EQ(ds.label(0), 1);
  EXPECT_EQ(ds.label(1), 0);
}

TEST(LoadCsv, AdultHas107EncodedAttributes) {
  const std::string dir = DYNFRS_DATA_DIR "/adult";
  const auto schema = Schema::load(dir + "/adult_schema.json");
  EXPECT_EQ(schema.encoded_width(), 107u);
  const auto train = load_csv(dir + "/adult_train.csv", schema);
  EXPECT_EQ(train.dim(), 107u);
  EXPECT_EQ(train.size(), 32561u);
  const auto test = load_csv(dir + "/adult_test.csv", schema);
  EXPECT_EQ(test.size(), 16281u);
  // 23.9% positives over both files.
  const double rate = static_cast<double>(train.positives() + test.positives()) /
                      static_cast<double>(train.size() + test.size());
  EXPECT_NEAR(rate, 0.239, 0.0005);
}

TEST(LoadCsv, RoundTripIsBitIdenticalAndOneHotIsConsistent) {
  const Schema s({{"a", ColumnKind::kNumeric, {}},
                  {"c", ColumnKind::kCategorical, {"p", "q", "r", "s"}},
                  {"y", ColumnKind::kLabel, {}}},
                 "1");
  Rng rng(5);
  std::ostringstream csv;
  csv << "a,c,y\n";
  std::vector<double> values;
  std::vector<int> cats;
  char buf[64];
  for (int i = 0; i < 500; ++i) {
    const double v = (uniform01(rng) - 0.5) * std::pow(10.0, static_cast<double>(uniform_below(rng, 20)) - 10);
    const int c = static_cast<int>(uniform_below(rng, 4));
    values.push_back(v);
    cats.push_back(c);
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    csv << buf << "," << "pqrs"[c] << "," << (i % 3 == 0) << "\n";
  }
  const auto ds = parse(csv.str(), s);
  ASSERT_EQ(ds.size(), 500u);
  for (SampleId id = 0; id < 500; ++id) {
    const auto x = ds.features(id);
    EXPECT_EQ(std::memcmp(&x[0], &values[id], sizeof(double)), 0);
    int ones = 0;
    for (std::size_t k = 1; k < 5; ++k) {
      ASSERT_TRUE(x[k] == 0.0 || x[k] == 1.0);
      ones += x[k] == 1.0;
    }
    EXPECT_EQ(ones, 1);
    EXPECT_EQ(x[1 + cats[id]], 1.0);
  }
}

TEST(Dataset, TombstonesKeepIdsStable) {
  auto ds = testing::line_store({1, 2, 3}, {1, 0, 1});
  ds.tombstone(1);
  EXPECT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.positives(), 2u);
  EXPECT_FALSE(ds.is_live(1));
  EXPECT_THROW(ds.tombstone(1), NotFoundError);
  EXPECT_THROW(ds.tombstone(7), NotFoundError);
  const auto id = ds.append(std::vector<double>{4}, 0);
  EXPECT_EQ(id, 3u);  // never reuses 1
  EXPECT_EQ(ds.live_ids(), (std::vector<SampleId>{0, 2, 3}));
  EXPECT_THROW(ds.append(std::vector<double>{1, 2}, 0), ArgumentError);
  EXPECT_THROW(ds.append(std::vector<double>{1}, 2), ArgumentError);
}

TEST(TrainTestSplit, SizesFollowTheFraction) {
  const auto ds = testing::grid_store(10, 2, 1);
  const auto split = train_test_split(ds, 0.2, 7);
  EXPECT_EQ(split.train.size(), 8u);
  EXPECT_EQ(split.test.size(), 2u);
  std::set<SampleId> all(split.train_ids.begin(), split.train_ids.end());
  all.insert(split.test_ids.begin(), split.test_ids.end());
  EXPECT_EQ(all.size(), 10u);
  for (std::size_t i = 0; i < split.test_ids.size(); ++i) {
    EXPECT_EQ(split.test.features(static_cast<SampleId>(i)), ds.features(split.test_ids[i]));
  }
}

TEST(TrainTestSplit, DeterministicForASeed) {
  const auto ds = testing::grid_store(100, 2, 1);
  const auto a = train_test_split(ds, 0.3, 42);
  const auto b = train_test_split(ds, 0.3, 42);
  const auto c = train_test_split(ds, 0.3, 43);
  EXPECT_EQ(a.test_ids, b.test_ids);
  EXPECT_NE(a.test_ids, c.test_ids);
  EXPECT_EQ(a.test_ids.size(), 30u);
}

TEST(TrainTestSplit, DegenerateInputsAreRejected) {
  EXPECT_THROW(train_test_split(testing::grid_store(1, 2, 1), 0.5, 1), ArgumentError);
  EXPECT_THROW(train_test_split(testing::grid_store(10, 2, 1), 0.0, 1), ArgumentError);
  EXPECT_THROW(train_test_split(testing::grid_store(10, 2, 1), 1.0, 1), ArgumentError);
  EXPECT_THROW(train_test_split(testing::grid_store(3, 2, 1), 0.01, 1), ArgumentError);
}

TEST(Synthetic, DeterministicAndRoughlyBalanced) {
  const auto a = make_synthetic(2000, 8, 3);
  const auto b = make_synthetic(2000, 8, 3);
  EXPECT_EQ(a.dim(), 8u);
  for (SampleId id = 0; id < 2000; id += 97) EXPECT_EQ(a.features(id), b.features(id));
  const double rate = static_cast<double>(a.positives()) / a.size();
  EXPECT_GT(rate, 0.3);
  EXPECT_LT(rate, 0.7);
  EXPECT_THROW(make_synthetic(10, 5, 1), ArgumentError);
}

}  // namespace
}  // namespace dynfrs
