#include "dynfrs/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>

#include "dynfrs/binary_io.hpp"
#include "dynfrs/errors.hpp"
#include "dynfrs/worker_pool.hpp"

namespace dynfrs {

namespace {

constexpr char kMagic[8] = {'D', 'Y', 'N', 'F', 'R', 'S', '\0', '\0'};
constexpr std::uint32_t kVersion = 1;

std::uint32_t occupancy_of(std::uint32_t trees, double q) {
  const auto k = static_cast<std::int64_t>(std::ceil(q * trees - 1e-9));
  return static_cast<std::uint32_t>(std::clamp<std::int64_t>(k, 1, trees));
}

}  // namespace

std::uint32_t ForestParams::occupancy() const { return occupancy_of(trees, q); }

void ForestParams::validate(std::size_t dim) const {
  if (trees < 1) throw ArgumentError("forest needs at least one tree");
  if (!(q > 0.0 && q <= 1.0)) throw ArgumentError("q must lie in (0, 1]");
  tree.validate(dim);
}

Occupancy distribute(std::span<const SampleId> ids, std::uint32_t trees, double q, Rng& rng) {
  Occupancy occ;
  occ.k = occupancy_of(trees, q);
  occ.tree_ids.resize(trees);
  occ.rows.reserve(ids.size() * occ.k);
  for (const auto id : ids) {
    const auto chosen = occ.k == trees ? std::vector<std::uint32_t>{}
                                       : sample_without_replacement(rng, trees, occ.k);
    for (std::uint32_t j = 0; j < occ.k; ++j) {
      const auto t = occ.k == trees ? j : chosen[j];
      occ.rows.push_back(t);
      occ.tree_ids[t].push_back(id);
    }
  }
  for (auto& v : occ.tree_ids) std::sort(v.begin(), v.end());
  return occ;
}

// ---------------------------------------------------------------------------

Forest Forest::train(Dataset store, const ForestParams& params, WorkerPool* pool) {
  params.validate(store.dim());
  Forest f;
  f.params_ = params;
  f.k_ = params.occupancy();
  f.pool_ = pool;
  f.rng_.seed(mix_seed(params.seed, 0));

  const auto ids = store.live_ids();
  auto occ = distribute(ids, params.trees, params.q, f.rng_);
  f.assignment_.assign(static_cast<std::size_t>(store.id_limit()) * f.k_, kNoTree);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::copy_n(occ.rows.begin() + static_cast<std::ptrdiff_t>(i * f.k_), f.k_,
                f.assignment_.begin() + static_cast<std::ptrdiff_t>(ids[i]) * f.k_);
  }
  f.store_ = std::move(store);

  std::vector<std::optional<Tree>> built(params.trees);
  run_indexed(pool, params.trees, [&](std::size_t t) {
    TreeParams tp = params.tree;
    tp.seed = mix_seed(params.seed, t + 1);
    built[t].emplace(Tree::build(std::move(occ.tree_ids[t]), f.store_, tp));
  });
  f.trees_.reserve(params.trees);
  for (auto& t : built) f.trees_.push_back(std::move(*t));
  return f;
}

double Forest::prior() const {
  if (store_.size() == 0) return 0.5;
  return static_cast<double>(store_.positives()) / static_cast<double>(store_.size());
}

std::vector<double> Forest::tree_votes(std::span<const double> x) {
  if (x.size() != store_.dim()) {
    throw SchemaError("query has " + std::to_string(x.size()) + " attributes, model expects " +
                      std::to_string(store_.dim()));
  }
  const double fallback = prior();
  std::vector<double> votes(trees_.size());
  run_indexed(pool_, trees_.size(), [&](std::size_t t) {
    const auto leaf = trees_[t].query(store_, x);
    votes[t] = leaf.n == 0 ? fallback : static_cast<double>(leaf.n_pos) / leaf.n;
  });
  return votes;
}

double Forest::predict(std::span<const double> x) {
  const auto votes = tree_votes(x);
  double sum = 0.0;
  for (const double v : votes) sum += v;
  return sum / static_cast<double>(votes.size());
}

std::vector<double> Forest::predict_all(const Dataset& ds) {
  if (ds.dim() != store_.dim()) {
    throw SchemaError("dataset has " + std::to_string(ds.dim()) + " attributes, model expects " +
                      std::to_string(store_.dim()));
  }
  std::vector<double> out;
  out.reserve(ds.size());
  for (const auto id : ds.live_ids()) out.push_back(predict(ds.features(id)));
  return out;
}

std::span<std::uint32_t> Forest::row(SampleId id) {
  return {assignment_.data() + static_cast<std::size_t>(id) * k_, k_};
}

std::span<const std::uint32_t> Forest::trees_of(SampleId id) const {
  if (!store_.is_live(id)) return {};
  return {assignment_.data() + static_cast<std::size_t>(id) * k_, k_};
}

SampleId Forest::add(std::span<const double> x, Label y) {
  if (x.size() != store_.dim()) {
    throw SchemaError("sample has " + std::to_string(x.size()) + " attributes, model expects " +
                      std::to_string(store_.dim()));
  }
  const auto id = store_.append(x, y);
  const auto chosen = k_ == params_.trees ? std::vector<std::uint32_t>{}
                                          : sample_without_replacement(rng_, params_.trees, k_);
  assignment_.resize(assignment_.size() + k_);
  auto r = row(id);
  for (std::uint32_t j = 0; j < k_; ++j) r[j] = k_ == params_.trees ? j : chosen[j];

  run_indexed(pool_, k_, [&](std::size_t j) {
    Tree& tree = trees_[r[j]];
    tree.add(store_, id);
    if (mode_ == RebuildMode::kEager) tree.flush(store_);
  });
  return id;
}

void Forest::remove(SampleId id) {
  if (!store_.is_live(id)) throw NotFoundError("sample " + std::to_string(id) + " is not live");
  auto r = row(id);
  run_indexed(pool_, k_, [&](std::size_t j) {
    Tree& tree = trees_[r[j]];
    tree.remove(store_, id);
    if (mode_ == RebuildMode::kEager) tree.flush(store_);
  });
  std::fill(r.begin(), r.end(), kNoTree);
  store_.tombstone(id);
}

void Forest::unlearn_batch(std::span<const SampleId> ids, bool finalize) {
  std::vector<SampleId> sorted(ids.begin(), ids.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!store_.is_live(sorted[i])) {
      throw NotFoundError("sample " + std::to_string(sorted[i]) + " is not live");
    }
    if (i > 0 && sorted[i] == sorted[i - 1]) {
      throw NotFoundError("sample " + std::to_string(sorted[i]) + " appears twice in the batch");
    }
  }

  // Group by tree so that each tree's deletes run on one worker, in the
  // order the caller gave them.
  std::vector<std::vector<SampleId>> per_tree(trees_.size());
  for (const auto id : ids) {
    for (const auto t : row(id)) per_tree[t].push_back(id);
  }
  run_indexed(pool_, trees_.size(), [&](std::size_t t) {
    for (const auto id : per_tree[t]) {
      trees_[t].remove(store_, id);
      if (mode_ == RebuildMode::kEager) trees_[t].flush(store_);
    }
    if (finalize) trees_[t].flush(store_);
  });
  for (const auto id : ids) {
    auto r = row(id);
    std::fill(r.begin(), r.end(), kNoTree);
    store_.tombstone(id);
  }
}

void Forest::flush() {
  run_indexed(pool_, trees_.size(), [&](std::size_t t) { trees_[t].flush(store_); });
}

std::size_t Forest::tagged_count() const {
  std::size_t n = 0;
  for (const auto& t : trees_) n += t.tagged_count();
  return n;
}

Telemetry Forest::telemetry() const {
  Telemetry sum;
  for (const auto& t : trees_) {
    const auto& m = t.telemetry();
    sum.nodes_updated += m.nodes_updated;
    sum.subtree_samples_rebuilt += m.subtree_samples_rebuilt;
    sum.range_resample_samples += m.range_resample_samples;
    sum.attrs_resampled += m.attrs_resampled;
    sum.tags_placed += m.tags_placed;
    sum.nodes_grown += m.nodes_grown;
  }
  return sum;
}

void Forest::reset_telemetry() {
  for (auto& t : trees_) t.reset_telemetry();
}

// ---------------------------------------------------------------------------
// Snapshot

void Forest::save(std::ostream& out) const {
  out.write(kMagic, sizeof(kMagic));
  BinaryWriter w(out);
  w.put<std::uint32_t>(kVersion);
  w.put_string(store_.schema().to_json());

  w.put<std::uint32_t>(params_.trees);
  w.put<double>(params_.q);
  w.put<std::uint64_t>(params_.seed);
  w.put<std::uint32_t>(params_.tree.max_depth);
  w.put<std::uint32_t>(params_.tree.thresholds);
  w.put<std::uint32_t>(params_.tree.attrs);
  w.put<std::uint32_t>(params_.tree.min_split);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(params_.tree.criterion));

  // Deleted rows are written as zeros: the file must not retain unlearned data.
  const auto limit = store_.id_limit();
  w.put<std::uint64_t>(store_.dim());
  w.put<std::uint64_t>(limit);
  std::vector<std::uint8_t> live(limit);
  std::vector<std::uint8_t> labels(limit);
  for (SampleId id = 0; id < limit; ++id) {
    live[id] = store_.is_live(id) ? 1 : 0;
    labels[id] = live[id] ? store_.label(id) : 0;
  }
  w.put_vector(live);
  w.put_vector(labels);
  std::vector<double> column(limit);
  for (std::size_t a = 0; a < store_.dim(); ++a) {
    const auto src = store_.column(a);
    for (SampleId id = 0; id < limit; ++id) column[id] = live[id] ? src[id] : 0.0;
    w.put_vector(column);
  }

  w.put<std::uint32_t>(k_);
  w.put_vector(assignment_);
  w.put_string(rng_state(rng_));
  for (const auto& t : trees_) t.save(w);
}

void Forest::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write " + path.string());
  save(out);
  out.flush();
  if (!out) throw ArgumentError("failed writing " + path.string());
}

Forest Forest::load(std::istream& in) {
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (in.gcount() != sizeof(magic) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("not a model snapshot");
  }
  BinaryReader r(in);
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) {
    throw ParseError("unsupported snapshot version " + std::to_string(version));
  }
  Forest f;
  auto schema = Schema::parse(r.get_string());

  f.params_.trees = r.get<std::uint32_t>();
  f.params_.q = r.get<double>();
  f.params_.seed = r.get<std::uint64_t>();
  f.params_.tree.max_depth = r.get<std::uint32_t>();
  f.params_.tree.thresholds = r.get<std::uint32_t>();
  f.params_.tree.attrs = r.get<std::uint32_t>();
  f.params_.tree.min_split = r.get<std::uint32_t>();
  const auto criterion = r.get<std::uint8_t>();
  if (criterion > 1) throw ParseError("snapshot: bad criterion");
  f.params_.tree.criterion = static_cast<Criterion>(criterion);

  const auto dim = r.get<std::uint64_t>();
  if (dim != schema.encoded_width()) throw ParseError("snapshot: store width disagrees with schema");
  f.params_.validate(dim);
  const auto limit = r.get<std::uint64_t>();
  const auto live = r.get_vector<std::uint8_t>();
  const auto labels = r.get_vector<std::uint8_t>();
  if (live.size() != limit || labels.size() != limit) throw ParseError("snapshot: bad store");
  std::vector<std::vector<double>> columns(dim);
  for (auto& c : columns) {
    c = r.get_vector<double>();
    if (c.size() != limit) throw ParseError("snapshot: bad store column");
  }
  f.store_ = Dataset(std::move(schema));
  std::vector<double> x(dim);
  for (std::size_t id = 0; id < limit; ++id) {
    for (std::size_t a = 0; a < dim; ++a) x[a] = columns[a][id];
    f.store_.append(x, labels[id]);
  }
  columns.clear();
  for (SampleId id = 0; id < limit; ++id) {
    if (!live[id]) f.store_.tombstone(id);
  }

  f.k_ = r.get<std::uint32_t>();
  if (f.k_ != f.params_.occupancy()) throw ParseError("snapshot: occupancy disagrees with params");
  f.assignment_ = r.get_vector<std::uint32_t>();
  if (f.assignment_.size() != limit * f.k_) throw ParseError("snapshot: bad assignment map");
  restore_rng_state(f.rng_, r.get_string());
  f.trees_.reserve(f.params_.trees);
  for (std::uint32_t t = 0; t < f.params_.trees; ++t) f.trees_.push_back(Tree::load(r, f.store_));
  return f;
}

Forest Forest::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open model " + path.string());
  return load(in);
}

}  // namespace dynfrs
