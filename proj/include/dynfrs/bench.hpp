#pragma once

#include <cstddef>
#include <span>

#include "dynfrs/data.hpp"
#include "dynfrs/forest.hpp"

namespace dynfrs {

class WorkerPool;

// Wall-clock seconds to train a forest (the forest is discarded).
double time_training(const Dataset& ds, const ForestParams& params, WorkerPool* pool = nullptr);

// Time the naive approach needs to unlearn one sample: retrain with q = 1 on
// the store minus `victim`. A one-tree training run goes first as warm-up and
// is not counted.
double naive_unlearn_seconds(const Dataset& store, ForestParams params, SampleId victim,
                             WorkerPool* pool = nullptr);

struct SequentialResult {
  std::size_t unlearned = 0;    // deletes finished within the budget
  double seconds = 0.0;         // time spent on those deletes
  double budget_seconds = 0.0;  // naive time for one sample
  bool exhausted = false;       // ran out of ids before the budget
  // Samples unlearned per naive-retrain time. When the ids run out first this
  // is the observed rate scaled to the budget.
  double boost = 0.0;
};

// Deletes ids one by one until the budget is spent. The first `warmup` ids
// are deleted untimed and not counted.
SequentialResult sequential_unlearn(Forest& forest, std::span<const SampleId> ids,
                                    double budget_seconds, std::size_t warmup = 10);

// Seconds for unlearn_batch(ids, finalize) on a copy of `model`.
double time_batch(const Forest& model, std::span<const SampleId> ids, bool finalize = true);

}  // namespace dynfrs
