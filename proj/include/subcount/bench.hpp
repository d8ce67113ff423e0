//
// subcount - Copyright 2026 The subcount Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <span>
#include <string>
#include <vector>

#include "subcount/trainer.hpp"

namespace subcount {

struct BenchOptions {
  /// Worker threads for the VF2 side; the neural side runs on one thread.
  std::size_t vf2_jobs = 1;
  double timeout_seconds = 60.0;
};

struct BenchPair {
  double vf2_seconds = 0.0;
  double neural_seconds = 0.0;
  std::uint64_t vf2_count = 0;
  double prediction = 0.0;
  bool timed_out = false;
};

struct BenchReport {
  std::vector<BenchPair> pairs;
  /// Sums of the per-pair times.
  double vf2_total = 0.0;
  double neural_total = 0.0;
  /// Wall time of each whole pass.
  double vf2_wall = 0.0;
  double neural_wall = 0.0;
  double speedup = 0.0;
  std::size_t timeouts = 0;
  /// VF2 counts that disagree with the example's recorded count.
  std::size_t count_mismatches = 0;
  Metrics neural;
};

/// Times VF2 and the model on the same pairs. Graphs are already in memory,
/// so no file I/O is measured. A timed-out pair is charged the full timeout.
BenchReport run_benchmark(Model& model, std::span<const Example> examples, const BenchOptions& opts);

/// One row per pair.
std::string bench_csv(const BenchReport& r);
/// Totals as a single JSON object.
std::string bench_summary_json(const BenchReport& r);

}  // namespace subcount
