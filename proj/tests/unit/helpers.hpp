#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "dynfrs/data.hpp"
#include "dynfrs/forest.hpp"
#include "dynfrs/rng.hpp"

namespace dynfrs::testing {

// Store with d numeric attributes x0.. and a 0/1 label.
inline Dataset numeric_store(std::size_t d) {
  std::vector<Column> cols;
  for (std::size_t j = 0; j < d; ++j) cols.push_back({"x" + std::to_string(j), ColumnKind::kNumeric, {}});
  cols.push_back({"y", ColumnKind::kLabel, {}});
  return Dataset(Schema(std::move(cols), "1"));
}

// One-attribute store from parallel value/label lists.
inline Dataset line_store(std::initializer_list<double> xs, std::initializer_list<int> ys) {
  Dataset ds = numeric_store(1);
  auto y = ys.begin();
  for (const double x : xs) ds.append(std::vector<double>{x}, static_cast<Label>(*y++));
  return ds;
}

// Small attribute values on a coarse grid so that ties and range edges occur.
inline Dataset grid_store(std::size_t n, std::size_t d, std::uint64_t seed) {
  Dataset ds = numeric_store(d);
  Rng rng(seed);
  std::vector<double> x(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : x) v = static_cast<double>(uniform_below(rng, 8));
    const double signal = x[0] + x[1] - 7.0 + 3.0 * (uniform01(rng) - 0.5);
    ds.append(x, signal > 0 ? 1 : 0);
  }
  return ds;
}

inline std::vector<SampleId> shuffled(std::vector<SampleId> ids, std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[uniform_below(rng, i)]);
  return ids;
}

inline std::string snapshot_bytes(const Forest& f) {
  std::ostringstream out(std::ios::binary);
  f.save(out);
  return out.str();
}

inline std::vector<Label> live_labels(const Dataset& ds) {
  std::vector<Label> y;
  for (const auto id : ds.live_ids()) y.push_back(ds.label(id));
  return y;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("dynfrs_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace dynfrs::testing
