//
// subcount - Copyright 2026 The subcount Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "subcount/bench.hpp"

#include <chrono>
#include <sstream>

#include <json.hpp>

#include "subcount/exact_count.hpp"

namespace subcount {
namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

}  // namespace

BenchReport run_benchmark(Model& model, std::span<const Example> examples, const BenchOptions& opts) {
  BenchReport r;
  r.pairs.resize(examples.size());

  CountOptions co;
  if (opts.timeout_seconds > 0.0) co.timeout = std::chrono::duration<double>(opts.timeout_seconds);
  const auto v0 = Clock::now();
  parallel_for(examples.size(), opts.vf2_jobs, [&](std::size_t i) {
    BenchPair& p = r.pairs[i];
    const auto t0 = Clock::now();
    try {
      p.vf2_count = vf2_count(*examples[i].pattern, *examples[i].graph, co).count;
      p.vf2_seconds = since(t0);
    } catch (const CountError& e) {
      if (e.code() != CountErrc::kTimeout) throw;
      p.timed_out = true;
      p.vf2_seconds = opts.timeout_seconds;
    }
  });
  r.vf2_wall = since(v0);

  const auto n0 = Clock::now();
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto t0 = Clock::now();
    r.pairs[i].prediction = model.predict(*examples[i].pattern, *examples[i].graph);
    r.pairs[i].neural_seconds = since(t0);
  }
  r.neural_wall = since(n0);

  std::vector<double> pred, truth;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const BenchPair& p = r.pairs[i];
    r.vf2_total += p.vf2_seconds;
    r.neural_total += p.neural_seconds;
    r.timeouts += p.timed_out;
    r.count_mismatches += !p.timed_out && static_cast<double>(p.vf2_count) != examples[i].count;
    pred.push_back(p.prediction);
    truth.push_back(examples[i].count);
  }
  r.neural = compute_metrics(pred, truth);
  r.neural.seconds = r.neural_total;
  r.speedup = r.neural_total > 0.0 ? r.vf2_total / r.neural_total : 0.0;
  return r;
}

std::string bench_csv(const BenchReport& r) {
  std::ostringstream os;
  os.precision(10);
  os << "pair,vf2_seconds,neural_seconds,vf2_count,prediction,timed_out\n";
  for (std::size_t i = 0; i < r.pairs.size(); ++i) {
    const BenchPair& p = r.pairs[i];
    os << i << ',' << p.vf2_seconds << ',' << p.neural_seconds << ',' << p.vf2_count << ','
       << p.prediction << ',' << (p.timed_out ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string bench_summary_json(const BenchReport& r) {
  const nlohmann::json j{{"pairs", r.pairs.size()},
                         {"vf2_total_seconds", r.vf2_total},
                         {"vf2_wall_seconds", r.vf2_wall},
                         {"neural_total_seconds", r.neural_total},
                         {"neural_wall_seconds", r.neural_wall},
                         {"speedup", r.speedup},
                         {"timeouts", r.timeouts},
                         {"count_mismatches", r.count_mismatches},
                         {"rmse", r.neural.rmse},
                         {"mae", r.neural.mae}};
  return j.dump(2) + "\n";
}

}  // namespace subcount
