#include "dynfrs/bench.hpp"

#include <chrono>

#include "dynfrs/errors.hpp"
#include "dynfrs/worker_pool.hpp"

namespace dynfrs {

namespace {
using Clock = std::chrono::steady_clock;

double since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}
}  // namespace

double time_training(const Dataset& ds, const ForestParams& params, WorkerPool* pool) {
  Dataset copy = ds;
  const auto start = Clock::now();
  {
    const auto forest = Forest::train(std::move(copy), params, pool);
  }
  return since(start);
}

double naive_unlearn_seconds(const Dataset& store, ForestParams params, SampleId victim,
                             WorkerPool* pool) {
  Dataset without = store;
  without.tombstone(victim);
  params.q = 1.0;
  ForestParams warm = params;
  warm.trees = 1;
  time_training(without, warm, pool);
  return time_training(without, params, pool);
}

SequentialResult sequential_unlearn(Forest& forest, std::span<const SampleId> ids,
                                    double budget_seconds, std::size_t warmup) {
  if (budget_seconds <= 0) throw ArgumentError("budget must be positive");
  SequentialResult r;
  r.budget_seconds = budget_seconds;
  std::size_t i = 0;
  for (; i < ids.size() && i < warmup; ++i) forest.remove(ids[i]);

  const auto start = Clock::now();
  double elapsed = 0.0;
  for (; i < ids.size(); ++i) {
    forest.remove(ids[i]);
    const double now = since(start);
    if (now > budget_seconds) break;
    elapsed = now;
    ++r.unlearned;
  }
  r.seconds = elapsed;
  r.exhausted = i == ids.size();
  if (!r.exhausted) {
    r.boost = static_cast<double>(r.unlearned);
  } else if (elapsed > 0) {
    r.boost = static_cast<double>(r.unlearned) * budget_seconds / elapsed;
  }
  return r;
}

double time_batch(const Forest& model, std::span<const SampleId> ids, bool finalize) {
  Forest copy = model;
  const auto start = Clock::now();
  copy.unlearn_batch(ids, finalize);
  return since(start);
}

}  // namespace dynfrs
