//
// subcount - Copyright 2026 The subcount Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "subcount/models.hpp"

namespace subcount {

enum class TrainErrc { kDivergedLoss, kEmptyDataset, kIncompatibleSpecs };
using TrainError = Error<TrainErrc>;

struct Example {
  const Graph* pattern = nullptr;
  const Graph* graph = nullptr;
  double count = 0.0;
};

struct Hyper {
  nk::AdamWHyper optimizer;
  std::size_t batch_size = 64;
  std::size_t epochs = 100;
  /// Epochs without dev improvement before stopping; 0 disables.
  std::size_t patience = 10;
  std::uint64_t seed = 1;
  /// Start the output bias at the mean training count.
  bool init_bias_to_mean = true;
  /// Stop after this many seconds (0 = unlimited); the best checkpoint so far is kept.
  double max_seconds = 0.0;
  std::size_t jobs = 1;
  std::function<void(const std::string&)> log;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double dev_rmse = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  double best_dev_rmse = 0.0;
  std::size_t best_epoch = 0;
  std::vector<EpochRecord> history;
  /// One entry per training phase, oldest first.
  std::vector<std::string> lineage;
  double seconds = 0.0;
};

struct Metrics {
  double rmse = 0.0;
  double mae = 0.0;
  std::size_t n = 0;
  double seconds = 0.0;
};

/// RMSE / MAE after clamping negative predictions to zero.
Metrics compute_metrics(std::span<const double> predictions, std::span<const double> truths);

enum class Baseline { kZero, kAvg };
/// Constant predictor; kAvg predicts the mean count of `train`.
Metrics baseline_metrics(std::span<const Example> train, std::span<const Example> eval, Baseline kind);

/// Runs f(i) for i in [0, n) on up to `jobs` threads, in contiguous chunks.
/// The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& f);

/// Runs the model on every example; `jobs` worker threads.
std::vector<double> predict_all(Model& model, std::span<const Example> examples, std::size_t jobs = 1);
Metrics evaluate(Model& model, std::span<const Example> examples, std::size_t jobs = 1);

/// Trains `model` in place and leaves it holding the best-dev parameters.
TrainResult train(Model& model, std::span<const Example> train_set, std::span<const Example> dev_set,
                  const Hyper& hyper);

/// Small phase, encoding extension to `large_spec`, then the large phase.
TrainResult curriculum(Model& model, std::span<const Example> small_train,
                       std::span<const Example> small_dev, std::span<const Example> large_train,
                       std::span<const Example> large_dev, const EncodingSpec& large_spec,
                       const Hyper& hyper);

/// Continues training from the current parameters. The learning rate is the
/// caller's; 1e-4 is the usual choice for real data.
TrainResult fine_tune(Model& model, std::span<const Example> train_set,
                      std::span<const Example> dev_set, const EncodingSpec& target_spec,
                      const Hyper& hyper);

/// Per-bin error breakdown. Bins are keyed by a (pattern, graph) value pair
/// under one of four orderings: vertices, edges, vertex labels, edge labels.
struct BinRow {
  std::string ordering;
  std::size_t pattern_value = 0;
  std::size_t graph_value = 0;
  std::size_t n = 0;
  double mean_truth = 0.0;
  double mean_prediction = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
};
std::vector<BinRow> bin_breakdown(std::span<const Example> examples, std::span<const double> predictions);
std::string bins_csv(const std::vector<BinRow>& rows);

}  // namespace subcount
