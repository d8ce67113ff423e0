//
// subcount - Copyright 2026 The subcount Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "subcount/trainer.hpp"
#include "test_util.hpp"

namespace subcount {
namespace {

using testing::random_connected;
using testing::random_graph;

ModelConfig tiny_config(Representation r, Interaction i) {
  ModelConfig c;
  c.representation = r;
  c.interaction = i;
  c.hidden = 8;
  c.heads = 2;
  c.blocks = 2;
  c.memory = 2;
  c.steps = 1;
  c.layers = 2;
  c.dropout = 0.0;
  c.encoding = {2, 16, 4, 4};
  return c;
}

struct Corpus {
  std::vector<Graph> graphs;
  std::vector<Example> examples;
};

/// Pairs with arbitrary target counts; enough for the plumbing tests.
Corpus make_corpus(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  Corpus c;
  c.graphs.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    c.graphs.push_back(random_connected(rng, 3 + rng.below(3), 2, 4, 4));
    c.graphs.push_back(random_graph(rng, 6 + rng.below(6), 12 + rng.below(10), 4, 4));
  }
  for (std::size_t i = 0; i < n; ++i)
    c.examples.push_back({&c.graphs[2 * i], &c.graphs[2 * i + 1], static_cast<double>(rng.below(20))});
  return c;
}

template <class F>
TrainErrc error_of(F&& f) {
  try {
    f();
  } catch (const TrainError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no TrainError";
  return TrainErrc::kEmptyDataset;
}

TEST(Metrics, ClampsNegativePredictions) {
  const double p[] = {-2.0}, y[] = {0.0};
  const Metrics m = compute_metrics(p, y);
  EXPECT_EQ(m.rmse, 0.0);
  EXPECT_EQ(m.mae, 0.0);
  const double p2[] = {-2.0, 3.0}, y2[] = {0.0, 3.0};
  EXPECT_EQ(compute_metrics(p2, y2).rmse, 0.0);
}

TEST(Metrics, HandComputed) {
  const double p[] = {1.0}, y[] = {3.0};
  const Metrics m = compute_metrics(p, y);
  EXPECT_DOUBLE_EQ(m.rmse, 2.0);
  EXPECT_DOUBLE_EQ(m.mae, 2.0);
  const double p2[] = {0.0, 0.0}, y2[] = {3.0, 4.0};
  const Metrics m2 = compute_metrics(p2, y2);
  EXPECT_DOUBLE_EQ(m2.rmse, std::sqrt(12.5));
  EXPECT_DOUBLE_EQ(m2.mae, 3.5);
}

TEST(Metrics, RmseAtLeastMae) {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(1 + rng.below(20)), y(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = rng.normal() * 10.0;
      y[i] = static_cast<double>(rng.below(50));
    }
    const Metrics m = compute_metrics(p, y);
    EXPECT_GE(m.rmse, m.mae);
  }
}

TEST(Baselines, ZeroAndAverage) {
  Graph g = testing::triangle();
  const std::vector<Example> train = {{&g, &g, 0.0}, {&g, &g, 4.0}};
  const std::vector<Example> eval = {{&g, &g, 2.0}, {&g, &g, 6.0}};
  const Metrics avg = baseline_metrics(train, eval, Baseline::kAvg);
  EXPECT_DOUBLE_EQ(avg.mae, 2.0);
  EXPECT_DOUBLE_EQ(avg.rmse, std::sqrt(8.0));
  const Metrics zero = baseline_metrics(train, eval, Baseline::kZero);
  EXPECT_DOUBLE_EQ(zero.mae, 4.0);
  EXPECT_DOUBLE_EQ(zero.rmse, std::sqrt(20.0));
  EXPECT_EQ(error_of([&] { baseline_metrics({}, eval, Baseline::kAvg); }), TrainErrc::kEmptyDataset);
}

TEST(Train, EmptyTrainingSetRejected) {
  Model m(tiny_config(Representation::kRgcn, Interaction::kSumPool), 1);
  EXPECT_EQ(error_of([&] { train(m, {}, {}, Hyper{}); }), TrainErrc::kEmptyDataset);
}

TEST(Train, BiasStartsAtTrainingMean) {
  Corpus c = make_corpus(3, 10);
  Model m(tiny_config(Representation::kRgcn, Interaction::kSumPool), 1);
  Hyper h;
  h.epochs = 0;
  train(m, c.examples, c.examples, h);
  double mean = 0.0;
  for (const Example& e : c.examples) mean += e.count;
  EXPECT_DOUBLE_EQ(m.params().at("head.l2.b").value.data[0], mean / 10.0);
}

TEST(Train, MemorizesSingleExample) {
  Corpus c = make_corpus(5, 1);
  c.examples[0].count = 7.0;
  for (Representation r : {Representation::kCnn, Representation::kRgin}) {
    Model m(tiny_config(r, Interaction::kDiamNet), 2);
    Hyper h;
    h.init_bias_to_mean = false;
    h.optimizer.lr = 1e-2;
    h.epochs = 400;
    h.patience = 0;
    const double before = std::abs(m.predict(*c.examples[0].pattern, *c.examples[0].graph) - 7.0);
    const TrainResult r1 = train(m, c.examples, c.examples, h);
    const double after = std::abs(m.predict(*c.examples[0].pattern, *c.examples[0].graph) - 7.0);
    EXPECT_LT(after, 0.05) << to_string(r);
    EXPECT_LT(after, before);
    EXPECT_NEAR(r1.best_dev_rmse, after, 1e-12);
  }
}

TEST(Train, DeterministicForFixedSeed) {
  Corpus c = make_corpus(7, 24);
  std::vector<Example> tr(c.examples.begin(), c.examples.begin() + 16);
  std::vector<Example> dev(c.examples.begin() + 16, c.examples.end());
  std::vector<std::vector<std::uint8_t>> blobs;
  for (std::size_t jobs : {1, 3}) {
    ModelConfig cfg = tiny_config(Representation::kRgin, Interaction::kMemAttn);
    cfg.dropout = 0.2;
    Model m(cfg, 9);
    Hyper h;
    h.epochs = 3;
    h.batch_size = 5;
    h.jobs = jobs;
    train(m, tr, dev, h);
    blobs.push_back(nk::serialize_params(m.params()));
  }
  EXPECT_EQ(blobs[0], blobs[1]);
}

TEST(Train, KeepsBestDevParameters) {
  Corpus c = make_corpus(8, 20);
  std::vector<Example> tr(c.examples.begin(), c.examples.begin() + 14);
  std::vector<Example> dev(c.examples.begin() + 14, c.examples.end());
  Model m(tiny_config(Representation::kRgcn, Interaction::kMeanPool), 4);
  Hyper h;
  h.epochs = 6;
  h.patience = 0;
  h.optimizer.lr = 5e-2;
  const TrainResult r = train(m, tr, dev, h);
  ASSERT_EQ(r.history.size(), 6u);
  double best = r.best_dev_rmse;
  for (const EpochRecord& e : r.history) EXPECT_GE(e.dev_rmse, best);
  EXPECT_NEAR(evaluate(m, dev).rmse, r.best_dev_rmse, 1e-12);
}

TEST(Train, PatienceStopsEarly) {
  Corpus c = make_corpus(9, 8);
  Model m(tiny_config(Representation::kRgcn, Interaction::kSumPool), 4);
  Hyper h;
  h.epochs = 50;
  h.patience = 2;
  h.optimizer.lr = 0.0;  // dev RMSE never improves
  const TrainResult r = train(m, c.examples, c.examples, h);
  EXPECT_EQ(r.history.size(), 2u);
  EXPECT_EQ(r.best_epoch, 0u);
}

TEST(Train, DivergenceReported) {
  Corpus c = make_corpus(10, 4);
  c.examples[0].count = 1e200;
  Model m(tiny_config(Representation::kRgcn, Interaction::kSumPool), 4);
  Hyper h;
  h.epochs = 1;
  h.init_bias_to_mean = false;
  EXPECT_EQ(error_of([&] { train(m, c.examples, c.examples, h); }), TrainErrc::kDivergedLoss);
}

TEST(FineTune, ZeroEpochsLeavesModelUnchanged) {
  Corpus c = make_corpus(11, 6);
  Model m(tiny_config(Representation::kRgin, Interaction::kDiamNet), 4);
  const auto before = nk::serialize_params(m.params());
  Hyper h;
  h.epochs = 0;
  const TrainResult r = fine_tune(m, c.examples, c.examples, m.config().encoding, h);
  EXPECT_EQ(nk::serialize_params(m.params()), before);
  ASSERT_EQ(r.lineage.size(), 1u);
  EXPECT_EQ(r.lineage[0].rfind("finetune:", 0), 0u);
}

TEST(FineTune, ShrinkingSpecRejected) {
  Corpus c = make_corpus(12, 4);
  Model m(tiny_config(Representation::kCnn, Interaction::kSumPool), 4);
  Hyper h;
  h.epochs = 0;
  EXPECT_EQ(error_of([&] { fine_tune(m, c.examples, c.examples, {2, 4, 2, 2}, h); }),
            TrainErrc::kIncompatibleSpecs);
  EXPECT_EQ(error_of([&] { fine_tune(m, c.examples, c.examples, {3, 16, 4, 4}, h); }),
            TrainErrc::kIncompatibleSpecs);
}

TEST(Curriculum, ExtendsEncodingAndRecordsLineage) {
  Corpus small = make_corpus(13, 8);
  Rng rng(14);
  std::vector<Graph> graphs;
  graphs.reserve(16);
  for (int i = 0; i < 8; ++i) {
    graphs.push_back(random_connected(rng, 6, 4, 8, 8));
    graphs.push_back(random_graph(rng, 40, 80, 8, 8));
  }
  std::vector<Example> large;
  for (int i = 0; i < 8; ++i) large.push_back({&graphs[2 * i], &graphs[2 * i + 1], 3.0});
  const EncodingSpec large_spec{2, 64, 8, 8};
  for (Representation r : {Representation::kCnn, Representation::kRgcn}) {
    Model m(tiny_config(r, Interaction::kMaxPool), 4);
    Hyper h;
    h.epochs = 2;
    const TrainResult res = curriculum(m, small.examples, small.examples, large, large, large_spec, h);
    EXPECT_EQ(m.config().encoding, large_spec);
    ASSERT_EQ(res.lineage.size(), 2u);
    EXPECT_EQ(res.lineage[0].rfind("small:", 0), 0u);
    EXPECT_EQ(res.lineage[1].rfind("large:", 0), 0u);
    ASSERT_EQ(res.history.size(), 4u);
    EXPECT_EQ(res.history.back().epoch, 4u);
    EXPECT_TRUE(std::isfinite(evaluate(m, large).rmse));
  }
}

TEST(Predict, ParallelMatchesSerial) {
  Corpus c = make_corpus(15, 17);
  Model m(tiny_config(Representation::kRgin, Interaction::kDiamNet), 4);
  const auto a = predict_all(m, c.examples, 1);
  const auto b = predict_all(m, c.examples, 4);
  EXPECT_EQ(a, b);
}

TEST(Bins, CountsAndCsv) {
  Graph p = testing::triangle();
  Rng rng(16);
  Graph g1 = random_graph(rng, 5, 6, 1, 1);
  Graph g2 = random_graph(rng, 7, 6, 1, 1);
  const std::vector<Example> ex = {{&p, &g1, 2.0}, {&p, &g1, 4.0}, {&p, &g2, 1.0}};
  const std::vector<double> pred = {3.0, 3.0, -1.0};
  const auto rows = bin_breakdown(ex, pred);
  // V splits into two bins; E, X, Y each collapse to one.
  ASSERT_EQ(rows.size(), 5u);
  const BinRow* v5 = nullptr;
  for (const BinRow& r : rows)
    if (r.ordering == "V" && r.graph_value == 5) v5 = &r;
  ASSERT_NE(v5, nullptr);
  EXPECT_EQ(v5->n, 2u);
  EXPECT_DOUBLE_EQ(v5->mean_truth, 3.0);
  EXPECT_DOUBLE_EQ(v5->rmse, 1.0);
  for (const BinRow& r : rows)
    if (r.ordering == "E") {
      EXPECT_EQ(r.n, 3u);
      EXPECT_DOUBLE_EQ(r.mae, 1.0);  // clamped -1 -> 0 against 1
    }
  const std::string csv = bins_csv(rows);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "ordering,pattern_value,graph_value,n,mean_truth,mean_prediction,rmse,mae");
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  EXPECT_EQ(n, rows.size());
}

}  // namespace
}  // namespace subcount
