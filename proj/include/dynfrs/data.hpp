#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dynfrs {

using SampleId = std::uint32_t;
using Label = std::uint8_t;

enum class ColumnKind { kNumeric, kCategorical, kLabel };

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  // Categorical only. Kept in lexicographic order; one indicator attribute
  // per value, in this order.
  std::vector<std::string> values;

  bool operator==(const Column&) const = default;
};

// Column layout of a CSV file plus the label value mapped to 1.
//
// JSON form (the sidecar schema file):
//   {
//     "positive_label": ">50K",
//     "columns": [
//       {"name": "age", "kind": "numeric"},
//       {"name": "color", "kind": "categorical", "values": ["r", "g", "b"]},
//       {"name": "income", "kind": "label"}
//     ]
//   }
class Schema {
 public:
  Schema() = default;
  Schema(std::vector<Column> columns, std::string positive_label);

  static Schema parse(std::string_view json_text);
  static Schema load(const std::filesystem::path& path);
  std::string to_json() const;

  const std::vector<Column>& columns() const { return columns_; }
  const std::string& positive_label() const { return positive_label_; }
  std::size_t label_column() const { return label_column_; }

  // Number of attributes after one-hot encoding.
  std::size_t encoded_width() const { return width_; }
  // One name per encoded attribute, e.g. "color=r".
  std::vector<std::string> attribute_names() const;

  bool operator==(const Schema& other) const {
    return columns_ == other.columns_ && positive_label_ == other.positive_label_;
  }

 private:
  void validate_and_index();

  std::vector<Column> columns_;
  std::string positive_label_;
  std::size_t label_column_ = 0;
  std::size_t width_ = 0;
};

// Id-indexed sample store. Ids are allocated monotonically and never reused;
// deleted samples are tombstoned, so their rows stay addressable but are no
// longer live. Values are stored attribute-major because split finding scans
// one attribute across many samples.
//
// Reads are safe from many threads; append and tombstone need exclusive
// access (the forest serializes all mutations).
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(Schema schema);

  SampleId append(std::span<const double> features, Label label);
  void tombstone(SampleId id);

  bool is_live(SampleId id) const { return id < live_.size() && live_[id] != 0; }
  // Copy of one sample's attribute vector.
  std::vector<double> features(SampleId id) const;
  double value(SampleId id, std::size_t attr) const { return columns_[attr][id]; }
  // Attribute-major storage: column(a)[id] is attribute a of sample id.
  std::span<const double> column(std::size_t attr) const { return columns_[attr]; }
  std::span<const Label> labels() const { return labels_; }
  Label label(SampleId id) const { return labels_[id]; }

  std::size_t dim() const { return dim_; }
  // Live sample count.
  std::size_t size() const { return live_count_; }
  std::size_t positives() const { return live_positives_; }
  // One past the largest id ever allocated.
  SampleId id_limit() const { return static_cast<SampleId>(labels_.size()); }
  std::vector<SampleId> live_ids() const;

  const Schema& schema() const { return schema_; }

 private:
  Schema schema_;
  std::size_t dim_ = 0;
  std::vector<std::vector<double>> columns_;
  std::vector<Label> labels_;
  std::vector<std::uint8_t> live_;
  std::size_t live_count_ = 0;
  std::size_t live_positives_ = 0;
};

// Parses a CSV with a header row. Categorical columns are expanded to one
// indicator per schema value; numeric fields must be present and finite.
// Ids are assigned 0..n-1 in row order.
Dataset load_csv(const std::filesystem::path& path, const Schema& schema);
Dataset load_csv(std::istream& in, const Schema& schema);

// Encodes one CSV data row (already split into fields) into features/label.
// line_no is only used in error messages.
void encode_row(const Schema& schema, const std::vector<std::string>& fields,
                std::size_t line_no, std::vector<double>& features, Label& label);

// Splits a CSV line on commas, honouring double-quoted fields and trimming
// surrounding whitespace.
std::vector<std::string> split_csv_line(const std::string& line);

// New store holding the given live samples of `ds`, re-numbered 0..m-1 in
// the given order.
Dataset subset(const Dataset& ds, std::span<const SampleId> ids);

struct TrainTestSplit {
  Dataset train;
  Dataset test;
  // Source ids of `ds` that went to each side, in ascending order.
  std::vector<SampleId> train_ids;
  std::vector<SampleId> test_ids;
};

// Seeded random partition. The test side gets round(n * test_fraction)
// samples; throws ArgumentError if either side would be empty.
TrainTestSplit train_test_split(const Dataset& ds, double test_fraction,
                                std::uint64_t seed);

// Numeric binary-classification data for desk-scale benchmarks: d standard
// normal attributes, the label a noisy nonlinear function of the first few.
Dataset make_synthetic(std::size_t n, std::size_t d, std::uint64_t seed);

}  // namespace dynfrs
