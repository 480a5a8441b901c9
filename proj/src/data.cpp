#include "dynfrs/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unordered_set>

#include "dynfrs/errors.hpp"
#include "dynfrs/rng.hpp"
#include "json.hpp"

namespace dynfrs {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::string kind_name(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kNumeric:
      return "numeric";
    case ColumnKind::kCategorical:
      return "categorical";
    case ColumnKind::kLabel:
      return "label";
  }
  return "?";
}

}  // namespace

// ---------------------------------------------------------------------------
// Schema

Schema::Schema(std::vector<Column> columns, std::string positive_label)
    : columns_(std::move(columns)), positive_label_(std::move(positive_label)) {
  validate_and_index();
}

void Schema::validate_and_index() {
  std::size_t labels = 0;
  width_ = 0;
  std::unordered_set<std::string> names;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    auto& col = columns_[i];
    if (!names.insert(col.name).second) {
      throw SchemaError("duplicate column name '" + col.name + "'");
    }
    switch (col.kind) {
      case ColumnKind::kLabel:
        ++labels;
        label_column_ = i;
        break;
      case ColumnKind::kNumeric:
        ++width_;
        break;
      case ColumnKind::kCategorical: {
        if (col.values.empty()) {
          throw SchemaError("categorical column '" + col.name + "' has no values");
        }
        std::sort(col.values.begin(), col.values.end());
        if (std::adjacent_find(col.values.begin(), col.values.end()) != col.values.end()) {
          throw SchemaError("categorical column '" + col.name + "' repeats a value");
        }
        width_ += col.values.size();
        break;
      }
    }
  }
  if (labels != 1) {
    throw SchemaError("schema needs exactly one label column, found " +
                      std::to_string(labels));
  }
}

Schema Schema::parse(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("schema: ") + e.what());
  }
  try {
    std::string positive;
    const auto& pl = j.at("positive_label");
    positive = pl.is_string() ? pl.get<std::string>() : pl.dump();
    std::vector<Column> columns;
    for (const auto& c : j.at("columns")) {
      Column col;
      col.name = c.at("name").get<std::string>();
      const auto kind = c.at("kind").get<std::string>();
      if (kind == "numeric") {
        col.kind = ColumnKind::kNumeric;
      } else if (kind == "categorical") {
        col.kind = ColumnKind::kCategorical;
        for (const auto& v : c.at("values")) {
          col.values.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        }
      } else if (kind == "label") {
        col.kind = ColumnKind::kLabel;
      } else {
        throw SchemaError("column '" + col.name + "': unknown kind '" + kind + "'");
      }
      columns.push_back(std::move(col));
    }
    return Schema(std::move(columns), std::move(positive));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("schema: ") + e.what());
  }
}

Schema Schema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open schema file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string Schema::to_json() const {
  nlohmann::json j;
  j["positive_label"] = positive_label_;
  j["columns"] = nlohmann::json::array();
  for (const auto& c : columns_) {
    nlohmann::json col{{"name", c.name}, {"kind", kind_name(c.kind)}};
    if (c.kind == ColumnKind::kCategorical) col["values"] = c.values;
    j["columns"].push_back(std::move(col));
  }
  return j.dump();
}

std::vector<std::string> Schema::attribute_names() const {
  std::vector<std::string> names;
  names.reserve(width_);
  for (const auto& c : columns_) {
    if (c.kind == ColumnKind::kNumeric) {
      names.push_back(c.name);
    } else if (c.kind == ColumnKind::kCategorical) {
      for (const auto& v : c.values) names.push_back(c.name + "=" + v);
    }
  }
  return names;
}

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(Schema schema)
    : schema_(std::move(schema)), dim_(schema_.encoded_width()), columns_(dim_) {}

std::vector<double> Dataset::features(SampleId id) const {
  std::vector<double> x(dim_);
  for (std::size_t a = 0; a < dim_; ++a) x[a] = columns_[a][id];
  return x;
}

SampleId Dataset::append(std::span<const double> features, Label label) {
  if (features.size() != dim_) {
    throw ArgumentError("sample has " + std::to_string(features.size()) +
                        " attributes, store expects " + std::to_string(dim_));
  }
  if (label > 1) throw ArgumentError("label must be 0 or 1");
  const auto id = static_cast<SampleId>(labels_.size());
  for (std::size_t a = 0; a < dim_; ++a) columns_[a].push_back(features[a]);
  labels_.push_back(label);
  live_.push_back(1);
  ++live_count_;
  live_positives_ += label;
  return id;
}

void Dataset::tombstone(SampleId id) {
  if (!is_live(id)) throw NotFoundError("sample " + std::to_string(id) + " is not live");
  live_[id] = 0;
  --live_count_;
  live_positives_ -= labels_[id];
}

std::vector<SampleId> Dataset::live_ids() const {
  std::vector<SampleId> ids;
  ids.reserve(live_count_);
  for (SampleId i = 0; i < live_.size(); ++i) {
    if (live_[i]) ids.push_back(i);
  }
  return ids;
}

// ---------------------------------------------------------------------------
// CSV

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

void encode_row(const Schema& schema, const std::vector<std::string>& fields,
                std::size_t line_no, std::vector<double>& features, Label& label) {
  const auto& columns = schema.columns();
  const auto where = "line " + std::to_string(line_no) + ": ";
  if (fields.size() != columns.size()) {
    throw ParseError(where + "expected " + std::to_string(columns.size()) +
                     " fields, found " + std::to_string(fields.size()));
  }
  features.assign(schema.encoded_width(), 0.0);
  std::size_t at = 0;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    const auto& col = columns[i];
    const auto& field = fields[i];
    switch (col.kind) {
      case ColumnKind::kNumeric: {
        double v = 0.0;
        if (!parse_double(field, v) || !std::isfinite(v)) {
          throw ParseError(where + "column '" + col.name + "': bad or missing number '" +
                           field + "'");
        }
        features[at++] = v;
        break;
      }
      case ColumnKind::kCategorical: {
        const auto it = std::lower_bound(col.values.begin(), col.values.end(), field);
        if (it == col.values.end() || *it != field) {
          throw SchemaError(where + "column '" + col.name + "': unknown value '" + field +
                            "'");
        }
        features[at + static_cast<std::size_t>(it - col.values.begin())] = 1.0;
        at += col.values.size();
        break;
      }
      case ColumnKind::kLabel: {
        if (field.empty()) throw SchemaError(where + "missing label");
        double a = 0.0;
        double b = 0.0;
        if (field == schema.positive_label() ||
            (parse_double(field, a) && parse_double(schema.positive_label(), b) && a == b)) {
          label = 1;
        } else {
          label = 0;
        }
        break;
      }
    }
  }
}

Dataset load_csv(std::istream& in, const Schema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("line 1: missing header row");
  const auto header = split_csv_line(line);
  const auto& columns = schema.columns();
  bool header_ok = header.size() == columns.size();
  for (std::size_t i = 0; header_ok && i < header.size(); ++i) {
    header_ok = header[i] == columns[i].name;
  }
  if (!header_ok) throw SchemaError("line 1: header does not match schema column names");

  Dataset ds(schema);
  std::vector<double> features;
  Label label = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    encode_row(schema, split_csv_line(line), line_no, features, label);
    ds.append(features, label);
  }
  return ds;
}

Dataset load_csv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open CSV file " + path.string());
  return load_csv(in, schema);
}

// ---------------------------------------------------------------------------
// Splitting and synthesis

Dataset subset(const Dataset& ds, std::span<const SampleId> ids) {
  Dataset out(ds.schema());
  for (const auto id : ids) {
    if (!ds.is_live(id)) throw NotFoundError("sample " + std::to_string(id) + " is not live");
    out.append(ds.features(id), ds.label(id));
  }
  return out;
}

TrainTestSplit train_test_split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ArgumentError("test fraction must lie in (0, 1)");
  }
  const auto n = ds.size();
  if (n < 2) throw ArgumentError("need at least two samples to split");
  const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
  if (n_test == 0 || n_test == n) throw ArgumentError("split leaves one side empty");

  auto ids = ds.live_ids();
  Rng rng(mix_seed(seed, 0x5eed));
  for (std::size_t i = ids.size() - 1; i > 0; --i) {
    std::swap(ids[i], ids[uniform_below(rng, i + 1)]);
  }
  TrainTestSplit split;
  split.test_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_test));
  split.train_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_test), ids.end());
  std::sort(split.test_ids.begin(), split.test_ids.end());
  std::sort(split.train_ids.begin(), split.train_ids.end());
  split.train = subset(ds, split.train_ids);
  split.test = subset(ds, split.test_ids);
  return split;
}

Dataset make_synthetic(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (d < 6) throw ArgumentError("synthetic data needs at least 6 attributes");
  std::vector<Column> columns;
  for (std::size_t j = 0; j < d; ++j) columns.push_back({"x" + std::to_string(j), ColumnKind::kNumeric, {}});
  columns.push_back({"label", ColumnKind::kLabel, {}});
  Dataset ds(Schema(std::move(columns), "1"));

  Rng rng(mix_seed(seed, 0x51a7));
  auto normal = [&rng] {
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    const double u = 1.0 - uniform01(rng);
    const double v = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
  };
  std::vector<double> x(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : x) v = normal();
    const double f = x[0] + 0.8 * x[1] - 0.6 * x[2] + 0.7 * x[3] * x[4] +
                     std::sin(2.0 * x[5]) + 0.35 * normal();
    ds.append(x, f > 0.0 ? 1 : 0);
  }
  return ds;
}

}  // namespace dynfrs
