// dynforest: train, evaluate and unlearn with a DynFrs forest from the shell.
//
// Every command prints key=value lines on stdout. Exit codes: 0 ok,
// 1 unexpected failure, 2 bad data/config/arguments, 3 unknown sample id.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dynfrs/bench.hpp"
#include "dynfrs/data.hpp"
#include "dynfrs/errors.hpp"
#include "dynfrs/forest.hpp"
#include "dynfrs/metrics.hpp"
#include "dynfrs/stream.hpp"
#include "dynfrs/worker_pool.hpp"

namespace fs = std::filesystem;
using namespace dynfrs;

namespace {

constexpr int kExitData = 2;
constexpr int kExitUnknownId = 3;

struct Options {
  std::string csv;
  std::string schema;
  std::string test_csv;
  std::string model;
  std::string out;
  std::string ids;
  std::string requests = "-";
  std::string batch_sizes = "1,10,100,0.1%,1%";
  std::uint64_t seed = 0;
  std::uint32_t trees = 100;
  double q = 0.2;
  std::uint32_t depth = 20;
  std::uint32_t thresholds = 30;
  std::uint32_t attrs = 0;
  std::uint32_t min_split = 10;
  std::string criterion = "gini";
  bool no_lazy = false;
  std::size_t workers = 1;
  std::size_t n = 100000;
  std::size_t d = 40;
  std::size_t stream_requests = 10000;
  double mod_share = 0.5;
};

// Reports an unknown id with its own exit code.
struct UnknownId {
  std::string message;
};

void print(const std::string& key, double v) {
  std::printf("%s=%.10g\n", key.c_str(), v);
}

void print(const std::string& key, std::size_t v) { std::printf("%s=%zu\n", key.c_str(), v); }

void print(const std::string& key, const std::string& v) {
  std::printf("%s=%s\n", key.c_str(), v.c_str());
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::uint64_t effective_seed(const Options& o) {
  if (const char* env = std::getenv("DYNFOREST_SEED"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw ArgumentError("DYNFOREST_SEED must be a non-negative integer");
    return v;
  }
  return o.seed;
}

ForestParams forest_params(const Options& o) {
  ForestParams p;
  p.trees = o.trees;
  p.q = o.q;
  p.seed = effective_seed(o);
  p.tree.max_depth = o.depth;
  p.tree.thresholds = o.thresholds;
  p.tree.attrs = o.attrs;
  p.tree.min_split = o.min_split;
  p.tree.criterion = parse_criterion(o.criterion);
  return p;
}

std::unique_ptr<WorkerPool> make_pool(const Options& o) {
  if (o.workers <= 1) return nullptr;
  return std::make_unique<WorkerPool>(o.workers);
}

Forest load_model(const Options& o) {
  if (o.model.empty()) throw ArgumentError("--model is required");
  auto forest = Forest::load(fs::path(o.model));
  if (o.no_lazy) forest.set_mode(RebuildMode::kEager);
  return forest;
}

std::vector<SampleId> read_ids(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open id file " + path);
  std::vector<SampleId> ids;
  std::string tok;
  while (in >> tok) {
    char* end = nullptr;
    const auto v = std::strtoull(tok.c_str(), &end, 10);
    if (*end != '\0' || tok[0] == '-' || v > std::numeric_limits<SampleId>::max()) {
      throw ParseError("bad id '" + tok + "' in " + path);
    }
    ids.push_back(static_cast<SampleId>(v));
  }
  return ids;
}

void require_live(const Forest& forest, const std::vector<SampleId>& ids) {
  std::vector<SampleId> sorted = ids;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!forest.store().is_live(sorted[i])) {
      throw UnknownId{"sample " + std::to_string(sorted[i]) + " is not in the model"};
    }
    if (i > 0 && sorted[i] == sorted[i - 1]) {
      throw UnknownId{"sample " + std::to_string(sorted[i]) + " is listed twice"};
    }
  }
}

void report_metrics(const std::vector<double>& scores, const Dataset& ds) {
  const std::vector<Label> labels(ds.labels().begin(), ds.labels().end());
  std::vector<Label> live_labels;
  live_labels.reserve(ds.size());
  for (const auto id : ds.live_ids()) live_labels.push_back(labels[id]);
  const double rate = ds.size() ? static_cast<double>(ds.positives()) / ds.size() : 0.0;
  print("samples", ds.size());
  print("positive_rate", rate);
  print("accuracy", accuracy(scores, live_labels));
  print("auc", auc_roc(scores, live_labels));
  print("headline", std::string(headline_metric(rate)));
}

// ---------------------------------------------------------------------------

int cmd_train(const Options& o) {
  if (o.csv.empty() || o.schema.empty()) throw ArgumentError("--csv and --schema are required");
  const auto schema = Schema::load(o.schema);
  auto data = load_csv(o.csv, schema);
  const auto params = forest_params(o);
  auto pool = make_pool(o);

  const auto start = std::chrono::steady_clock::now();
  auto forest = Forest::train(std::move(data), params, pool.get());
  const double secs = seconds_since(start);

  std::size_t min_size = SIZE_MAX;
  std::size_t max_size = 0;
  std::size_t total = 0;
  std::size_t nodes = 0;
  std::size_t leaves = 0;
  std::uint32_t height = 0;
  for (const auto& t : forest.trees()) {
    min_size = std::min(min_size, t.size());
    max_size = std::max(max_size, t.size());
    total += t.size();
    nodes += t.node_count();
    leaves += t.leaf_count();
    height = std::max(height, t.height());
  }
  const double T = static_cast<double>(forest.trees().size());
  print("train_seconds", secs);
  print("samples", forest.store().size());
  print("attributes", forest.store().dim());
  print("trees", forest.trees().size());
  print("occupancy", static_cast<std::size_t>(forest.occupancy()));
  print("attrs_per_node", static_cast<std::size_t>(forest.trees()[0].attrs_per_node()));
  print("tree_samples_min", min_size);
  print("tree_samples_mean", static_cast<double>(total) / T);
  print("tree_samples_max", max_size);
  print("tree_nodes_mean", static_cast<double>(nodes) / T);
  print("tree_leaves_mean", static_cast<double>(leaves) / T);
  print("tree_height_max", static_cast<std::size_t>(height));

  if (!o.test_csv.empty()) {
    const auto test = load_csv(o.test_csv, schema);
    report_metrics(forest.predict_all(test), test);
  }
  if (!o.out.empty()) {
    forest.save(fs::path(o.out));
    print("model", o.out);
  }
  return 0;
}

int cmd_eval(const Options& o) {
  if (o.csv.empty()) throw ArgumentError("--csv is required");
  auto forest = load_model(o);
  auto pool = make_pool(o);
  forest.set_pool(pool.get());
  const auto schema = o.schema.empty() ? forest.store().schema() : Schema::load(o.schema);
  const auto test = load_csv(o.csv, schema);
  if (test.dim() != forest.store().dim()) {
    throw SchemaError("data has " + std::to_string(test.dim()) + " attributes, model expects " +
                      std::to_string(forest.store().dim()));
  }
  report_metrics(forest.predict_all(test), test);
  return 0;
}

int cmd_predict(const Options& o) {
  if (o.csv.empty()) throw ArgumentError("--csv is required");
  auto forest = load_model(o);
  auto pool = make_pool(o);
  forest.set_pool(pool.get());
  const auto schema = o.schema.empty() ? forest.store().schema() : Schema::load(o.schema);
  const auto data = load_csv(o.csv, schema);
  const auto scores = forest.predict_all(data);

  std::ofstream file;
  if (!o.out.empty()) {
    file.open(o.out);
    if (!file) throw ArgumentError("cannot write " + o.out);
  }
  std::ostream& out = o.out.empty() ? std::cout : file;
  char buf[32];
  for (const double s : scores) {
    std::snprintf(buf, sizeof(buf), "%.17g", s);
    out << buf << '\n';
  }
  if (!o.out.empty()) print("predictions", scores.size());
  return 0;
}

int cmd_unlearn_seq(const Options& o) {
  if (o.ids.empty()) throw ArgumentError("--ids is required");
  auto forest = load_model(o);
  auto pool = make_pool(o);
  forest.set_pool(pool.get());
  const auto ids = read_ids(o.ids);
  require_live(forest, ids);
  if (ids.empty()) throw ArgumentError("id file is empty");

  const double budget = naive_unlearn_seconds(forest.store(), forest.params(), ids.front(), pool.get());
  const auto r = sequential_unlearn(forest, ids, budget);
  print("mode", std::string(o.no_lazy ? "eager" : "lazy"));
  print("naive_seconds", budget);
  print("unlearned", r.unlearned);
  print("unlearn_seconds", r.seconds);
  print("exhausted", static_cast<std::size_t>(r.exhausted));
  print("boost", r.boost);
  if (!o.out.empty()) {
    forest.flush();
    forest.save(fs::path(o.out));
    print("model", o.out);
  }
  return 0;
}

std::vector<std::size_t> parse_batch_sizes(const std::string& text, std::size_t n) {
  std::vector<std::size_t> sizes;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    const bool percent = tok.back() == '%';
    if (percent) tok.pop_back();
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (*end != '\0' || !(v > 0)) throw ArgumentError("bad batch size '" + tok + "'");
    const double count = percent ? std::round(v / 100.0 * static_cast<double>(n)) : v;
    sizes.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(count)));
  }
  if (sizes.empty()) throw ArgumentError("no batch sizes given");
  return sizes;
}

int cmd_unlearn_batch(const Options& o) {
  if (o.ids.empty()) throw ArgumentError("--ids is required");
  auto forest = load_model(o);
  auto pool = make_pool(o);
  forest.set_pool(pool.get());
  const auto ids = read_ids(o.ids);
  require_live(forest, ids);
  const auto sizes = parse_batch_sizes(o.batch_sizes, forest.store().size());

  // Warm-up on the smallest batch, not reported.
  const auto smallest = std::min(*std::min_element(sizes.begin(), sizes.end()), ids.size());
  time_batch(forest, std::span(ids).first(smallest));
  for (const auto size : sizes) {
    const std::string key = "batch." + std::to_string(size);
    if (size > ids.size()) {
      print(key + ".skipped", std::string("not enough ids"));
      continue;
    }
    print(key + ".seconds", time_batch(forest, std::span(ids).first(size)));
  }
  if (!o.out.empty()) {
    forest.unlearn_batch(ids, true);
    forest.save(fs::path(o.out));
    print("model", o.out);
  }
  return 0;
}

int cmd_stream(const Options& o) {
  auto forest = load_model(o);
  auto pool = make_pool(o);
  forest.set_pool(pool.get());

  std::ifstream file;
  if (o.requests != "-") {
    file.open(o.requests);
    if (!file) throw NotFoundError("cannot open request file " + o.requests);
  }
  std::istream& in = o.requests == "-" ? std::cin : file;
  std::ofstream log;
  if (!o.out.empty()) {
    log.open(o.out);
    if (!log) throw ArgumentError("cannot write " + o.out);
  }
  const auto records = replay(forest, in, o.out.empty() ? nullptr : &log);
  const auto s = summarize(records);
  print("requests", records.size());
  print("malformed", s.malformed);
  for (const auto& [name, op] : {std::pair{"add", s.add}, std::pair{"delete", s.del},
                                 std::pair{"query", s.query}}) {
    const std::string k = name;
    print(k + ".count", op.count);
    print(k + ".errors", op.errors);
    print(k + ".mean_us", op.mean_us);
    print(k + ".min_us", op.min_us);
    print(k + ".max_us", op.max_us);
  }
  return 0;
}

int cmd_gen_stream(const Options& o) {
  if (o.csv.empty()) throw ArgumentError("--csv (sample pool) is required");
  if (o.out.empty()) throw ArgumentError("--out is required");
  const auto forest = load_model(o);
  const auto schema = o.schema.empty() ? forest.store().schema() : Schema::load(o.schema);
  const auto pool = load_csv(o.csv, schema);
  if (pool.dim() != forest.store().dim()) {
    throw SchemaError("pool has " + std::to_string(pool.dim()) + " attributes, model expects " +
                      std::to_string(forest.store().dim()));
  }
  StreamSpec spec;
  spec.requests = o.stream_requests;
  spec.modification_share = o.mod_share;
  spec.seed = effective_seed(o);
  std::ofstream out(o.out);
  if (!out) throw ArgumentError("cannot write " + o.out);
  generate_stream(pool, forest.store().live_ids(), forest.store().id_limit(), spec, out);
  print("requests", spec.requests);
  print("out", o.out);
  return 0;
}

int cmd_synth(const Options& o) {
  if (o.out.empty()) throw ArgumentError("--out (file prefix) is required");
  const auto ds = make_synthetic(o.n, o.d, effective_seed(o));
  {
    std::ofstream schema(o.out + "_schema.json");
    if (!schema) throw ArgumentError("cannot write " + o.out + "_schema.json");
    schema << ds.schema().to_json() << '\n';
  }
  std::ofstream csv(o.out + ".csv");
  if (!csv) throw ArgumentError("cannot write " + o.out + ".csv");
  const auto& cols = ds.schema().columns();
  for (std::size_t c = 0; c < cols.size(); ++c) csv << (c ? "," : "") << cols[c].name;
  csv << '\n';
  char buf[32];
  for (SampleId id = 0; id < ds.id_limit(); ++id) {
    for (std::size_t a = 0; a < ds.dim(); ++a) {
      std::snprintf(buf, sizeof(buf), "%.17g", ds.value(id, a));
      csv << buf << ',';
    }
    csv << static_cast<int>(ds.label(id)) << '\n';
  }
  print("samples", ds.size());
  print("csv", o.out + ".csv");
  print("schema", o.out + "_schema.json");
  return 0;
}

void add_forest_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--seed", o.seed, "Random seed (DYNFOREST_SEED overrides)");
  cmd->add_option("--trees", o.trees, "Number of trees T")->check(CLI::PositiveNumber);
  cmd->add_option("--q", o.q, "Occupancy fraction; each sample lands in ceil(qT) trees");
  cmd->add_option("--depth", o.depth, "Maximum depth (root = 1)");
  cmd->add_option("--thresholds", o.thresholds, "Candidate thresholds per attribute (s)");
  cmd->add_option("--attrs", o.attrs, "Candidate attributes per node (p); 0 = ceil(sqrt(d))");
  cmd->add_option("--min-split", o.min_split, "Nodes smaller than this become leaves");
  cmd->add_option("--criterion", o.criterion, "gini or entropy");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DynFrs random forest with exact unlearning"};
  app.require_subcommand(1);
  Options o;

  auto* train = app.add_subcommand("train", "Train a forest and write a model snapshot");
  train->add_option("--csv", o.csv, "Training CSV");
  train->add_option("--schema", o.schema, "Schema JSON");
  train->add_option("--test-csv", o.test_csv, "Optional held-out CSV to evaluate");
  train->add_option("--out", o.out, "Model snapshot path");
  train->add_option("--workers", o.workers, "Worker threads");
  add_forest_flags(train, o);

  auto* eval = app.add_subcommand("eval", "Accuracy and AUC-ROC of a model on a CSV");
  eval->add_option("--model", o.model, "Model snapshot");
  eval->add_option("--csv", o.csv, "Evaluation CSV");
  eval->add_option("--schema", o.schema, "Schema JSON (default: the model's)");
  eval->add_option("--workers", o.workers, "Worker threads");

  auto* predict = app.add_subcommand("predict", "Positive-class probability for each CSV row");
  predict->add_option("--model", o.model, "Model snapshot");
  predict->add_option("--csv", o.csv, "Input CSV");
  predict->add_option("--schema", o.schema, "Schema JSON (default: the model's)");
  predict->add_option("--out", o.out, "Output file (default stdout)");
  predict->add_option("--workers", o.workers, "Worker threads");

  auto* seq = app.add_subcommand("unlearn-seq", "Sequential unlearning boost vs naive retraining");
  seq->add_option("--model", o.model, "Model snapshot");
  seq->add_option("--ids", o.ids, "File of sample ids to delete, in order");
  seq->add_flag("--no-lazy", o.no_lazy, "Regrow tagged subtrees immediately");
  seq->add_option("--workers", o.workers, "Worker threads");
  seq->add_option("--out", o.out, "Write the model after unlearning");

  auto* batch = app.add_subcommand("unlearn-batch", "Batch unlearning runtime per batch size");
  batch->add_option("--model", o.model, "Model snapshot");
  batch->add_option("--ids", o.ids, "File of sample ids; each batch takes a prefix");
  batch->add_option("--batch-size", o.batch_sizes, "Comma list; N% is a fraction of the samples");
  batch->add_flag("--no-lazy", o.no_lazy, "Regrow tagged subtrees after every delete");
  batch->add_option("--workers", o.workers, "Worker threads");
  batch->add_option("--out", o.out, "Unlearn every listed id and write the model");

  auto* stream = app.add_subcommand("stream", "Replay a JSONL request stream");
  stream->add_option("--model", o.model, "Model snapshot");
  stream->add_option("--requests", o.requests, "Request file, or - for stdin");
  stream->add_option("--workers", o.workers, "Worker threads");
  stream->add_option("--out", o.out, "Latency log (JSONL)");
  stream->add_flag("--no-lazy", o.no_lazy, "Regrow tagged subtrees after every modification");

  auto* gen = app.add_subcommand("gen-stream", "Generate a request stream for a model");
  gen->add_option("--model", o.model, "Model snapshot (source of live ids)");
  gen->add_option("--csv", o.csv, "Sample pool for adds and queries");
  gen->add_option("--schema", o.schema, "Schema JSON (default: the model's)");
  gen->add_option("--requests", o.stream_requests, "Number of requests");
  gen->add_option("--mod-share", o.mod_share, "Fraction of requests that add or delete");
  gen->add_option("--seed", o.seed, "Random seed (DYNFOREST_SEED overrides)");
  gen->add_option("--out", o.out, "Output JSONL");

  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset (CSV + schema)");
  synth->add_option("--n", o.n, "Samples");
  synth->add_option("--d", o.d, "Attributes (>= 6)");
  synth->add_option("--seed", o.seed, "Random seed (DYNFOREST_SEED overrides)");
  synth->add_option("--out", o.out, "Output prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitData;
  }

  try {
    if (*train) return cmd_train(o);
    if (*eval) return cmd_eval(o);
    if (*predict) return cmd_predict(o);
    if (*seq) return cmd_unlearn_seq(o);
    if (*batch) return cmd_unlearn_batch(o);
    if (*stream) return cmd_stream(o);
    if (*gen) return cmd_gen_stream(o);
    if (*synth) return cmd_synth(o);
  } catch (const UnknownId& e) {
    std::cerr << "error: " << e.message << "\n";
    return kExitUnknownId;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
