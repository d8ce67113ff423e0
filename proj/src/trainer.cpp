//
// subcount - Copyright 2026 The subcount Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "subcount/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

namespace subcount {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Encoded {
  ModelInput pattern;
  ModelInput graph;
  double count = 0.0;
};

std::vector<Encoded> encode_all(const Model& model, std::span<const Example> examples) {
  std::vector<Encoded> out;
  out.reserve(examples.size());
  for (const Example& e : examples)
    out.push_back({encode_input(*e.pattern, model.config()), encode_input(*e.graph, model.config()),
                   e.count});
  return out;
}

std::vector<double> predict_encoded(Model& model, const std::vector<Encoded>& data, std::size_t jobs) {
  std::vector<double> out(data.size());
  parallel_for(data.size(), jobs, [&](std::size_t i) { out[i] = model.predict(data[i].pattern, data[i].graph); });
  return out;
}

double rmse_of(const std::vector<double>& pred, const std::vector<Encoded>& data) {
  std::vector<double> truth(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) truth[i] = data[i].count;
  return compute_metrics(pred, truth).rmse;
}

void say(const Hyper& h, const std::string& s) {
  if (h.log) h.log(s);
}

void extend_to(Model& model, const EncodingSpec& spec) {
  if (model.config().encoding == spec) return;
  try {
    model.extend_encoding(spec);
  } catch (const CodecError& e) {
    throw TrainError(TrainErrc::kIncompatibleSpecs, e.what());
  } catch (const ModelError& e) {
    throw TrainError(TrainErrc::kIncompatibleSpecs, e.what());
  }
}

}  // namespace

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& f) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(jobs);
  for (std::size_t j = 0; j < jobs; ++j)
    pool.emplace_back([&, j] {
      try {
        for (std::size_t i = j * n / jobs; i < (j + 1) * n / jobs; ++i) f(i);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

Metrics compute_metrics(std::span<const double> predictions, std::span<const double> truths) {
  if (predictions.size() != truths.size())
    throw TrainError(TrainErrc::kEmptyDataset, "prediction and truth counts differ");
  Metrics m;
  m.n = truths.size();
  if (m.n == 0) return m;
  double se = 0.0, ae = 0.0;
  for (std::size_t i = 0; i < m.n; ++i) {
    const double d = std::max(predictions[i], 0.0) - truths[i];
    se += d * d;
    ae += std::abs(d);
  }
  m.rmse = std::sqrt(se / static_cast<double>(m.n));
  m.mae = ae / static_cast<double>(m.n);
  // Power-mean inequality; rounding can break it only in the last bit.
  m.rmse = std::max(m.rmse, m.mae);
  return m;
}

Metrics baseline_metrics(std::span<const Example> train, std::span<const Example> eval, Baseline kind) {
  double value = 0.0;
  if (kind == Baseline::kAvg) {
    if (train.empty()) throw TrainError(TrainErrc::kEmptyDataset, "average of an empty training split");
    for (const Example& e : train) value += e.count;
    value /= static_cast<double>(train.size());
  }
  std::vector<double> pred(eval.size(), value), truth;
  for (const Example& e : eval) truth.push_back(e.count);
  return compute_metrics(pred, truth);
}

std::vector<double> predict_all(Model& model, std::span<const Example> examples, std::size_t jobs) {
  std::vector<double> out(examples.size());
  parallel_for(examples.size(), jobs,
               [&](std::size_t i) { out[i] = model.predict(*examples[i].pattern, *examples[i].graph); });
  return out;
}

Metrics evaluate(Model& model, std::span<const Example> examples, std::size_t jobs) {
  const auto t0 = Clock::now();
  const std::vector<double> pred = predict_all(model, examples, jobs);
  std::vector<double> truth;
  for (const Example& e : examples) truth.push_back(e.count);
  Metrics m = compute_metrics(pred, truth);
  m.seconds = seconds_since(t0);
  return m;
}

TrainResult train(Model& model, std::span<const Example> train_set, std::span<const Example> dev_set,
                  const Hyper& hyper) {
  if (train_set.empty()) throw TrainError(TrainErrc::kEmptyDataset, "empty training split");
  const auto t0 = Clock::now();
  const std::vector<Encoded> tr = encode_all(model, train_set);
  const std::vector<Encoded> dev = dev_set.empty() ? tr : encode_all(model, dev_set);

  if (hyper.init_bias_to_mean) {
    double mean = 0.0;
    for (const Encoded& e : tr) mean += e.count;
    model.params().at("head.l2.b").value.data[0] = mean / static_cast<double>(tr.size());
  }

  TrainResult result;
  result.lineage.push_back("train:" + to_string(model.config().representation) + "+" +
                           to_string(model.config().interaction) + " seed=" + std::to_string(hyper.seed));
  nk::ParamStore best = model.params();
  result.best_dev_rmse = rmse_of(predict_encoded(model, dev, hyper.jobs), dev);
  result.best_epoch = 0;

  Rng rng(hyper.seed);
  Rng drop_rng = rng.split(1);
  std::vector<std::size_t> order(tr.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = std::max<std::size_t>(1, hyper.batch_size);
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const double inv = 1.0 / static_cast<double>(end - start);
      model.params().zero_grad();
      try {
        for (std::size_t k = start; k < end; ++k) {
          const Encoded& e = tr[order[k]];
          nk::Tape t;
          ForwardOptions o;
          o.train = true;
          o.rng = &drop_rng;
          const nk::Var pred = model.forward(t, e.pattern, e.graph, o);
          const nk::Var loss = nk::scale(nk::mse(pred, t.constant(Matrix(1, 1, e.count))), inv);
          loss_sum += loss.value().data[0] / inv;
          t.backward(loss);
        }
        nk::adamw_step(model.params(), hyper.optimizer);
      } catch (const nk::NumError& err) {
        if (err.code() != nk::NumErrc::kNonFinite) throw;
        throw TrainError(TrainErrc::kDivergedLoss, std::string("epoch ") + std::to_string(epoch) + ": " + err.what());
      }
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(tr.size());
    if (!std::isfinite(rec.train_loss))
      throw TrainError(TrainErrc::kDivergedLoss, "training loss is not finite");
    rec.dev_rmse = rmse_of(predict_encoded(model, dev, hyper.jobs), dev);
    rec.seconds = seconds_since(t0);
    result.history.push_back(rec);
    std::ostringstream msg;
    msg << "epoch " << epoch << " train_mse " << rec.train_loss << " dev_rmse " << rec.dev_rmse;
    if (rec.dev_rmse < result.best_dev_rmse) {
      result.best_dev_rmse = rec.dev_rmse;
      result.best_epoch = epoch;
      best = model.params();
      since_best = 0;
      msg << " *";
    } else {
      ++since_best;
    }
    say(hyper, msg.str());
    if (hyper.patience > 0 && since_best >= hyper.patience) break;
    if (hyper.max_seconds > 0.0 && rec.seconds >= hyper.max_seconds) {
      say(hyper, "time limit reached");
      break;
    }
  }
  model.params() = std::move(best);
  result.seconds = seconds_since(t0);
  return result;
}

TrainResult curriculum(Model& model, std::span<const Example> small_train,
                       std::span<const Example> small_dev, std::span<const Example> large_train,
                       std::span<const Example> large_dev, const EncodingSpec& large_spec,
                       const Hyper& hyper) {
  TrainResult first = train(model, small_train, small_dev, hyper);
  first.lineage.back() = "small:" + first.lineage.back();
  extend_to(model, large_spec);
  Hyper second_hyper = hyper;
  second_hyper.init_bias_to_mean = false;
  TrainResult second = train(model, large_train, large_dev, second_hyper);
  second.lineage.back() = "large:" + second.lineage.back();
  second.lineage.insert(second.lineage.begin(), first.lineage.begin(), first.lineage.end());
  for (EpochRecord& r : second.history) r.epoch += first.history.size();
  second.history.insert(second.history.begin(), first.history.begin(), first.history.end());
  second.seconds += first.seconds;
  return second;
}

TrainResult fine_tune(Model& model, std::span<const Example> train_set,
                      std::span<const Example> dev_set, const EncodingSpec& target_spec,
                      const Hyper& hyper) {
  extend_to(model, target_spec);
  Hyper h = hyper;
  h.init_bias_to_mean = false;
  TrainResult r = train(model, train_set, dev_set, h);
  r.lineage.back() = "finetune:" + r.lineage.back();
  return r;
}

std::vector<BinRow> bin_breakdown(std::span<const Example> examples, std::span<const double> predictions) {
  struct Acc {
    std::size_t n = 0;
    double truth = 0.0, pred = 0.0, se = 0.0, ae = 0.0;
  };
  using Key = std::tuple<int, std::size_t, std::size_t>;
  std::map<Key, Acc> acc;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const Graph& p = *examples[i].pattern;
    const Graph& g = *examples[i].graph;
    const double y = examples[i].count;
    const double q = std::max(predictions[i], 0.0);
    const std::pair<std::size_t, std::size_t> keys[4] = {
        {p.vertex_count(), g.vertex_count()},
        {p.edge_count(), g.edge_count()},
        {p.num_vertex_labels(), g.num_vertex_labels()},
        {p.num_edge_labels(), g.num_edge_labels()}};
    for (int o = 0; o < 4; ++o) {
      Acc& a = acc[{o, keys[o].first, keys[o].second}];
      ++a.n;
      a.truth += y;
      a.pred += q;
      a.se += (q - y) * (q - y);
      a.ae += std::abs(q - y);
    }
  }
  static const char* kNames[4] = {"V", "E", "X", "Y"};
  std::vector<BinRow> rows;
  for (const auto& [key, a] : acc) {
    BinRow r;
    r.ordering = kNames[std::get<0>(key)];
    r.pattern_value = std::get<1>(key);
    r.graph_value = std::get<2>(key);
    r.n = a.n;
    const double n = static_cast<double>(a.n);
    r.mean_truth = a.truth / n;
    r.mean_prediction = a.pred / n;
    r.mae = a.ae / n;
    r.rmse = std::max(std::sqrt(a.se / n), r.mae);
    rows.push_back(r);
  }
  return rows;
}

std::string bins_csv(const std::vector<BinRow>& rows) {
  std::ostringstream os;
  os.precision(10);
  os << "ordering,pattern_value,graph_value,n,mean_truth,mean_prediction,rmse,mae\n";
  for (const BinRow& r : rows)
    os << r.ordering << ',' << r.pattern_value << ',' << r.graph_value << ',' << r.n << ','
       << r.mean_truth << ',' << r.mean_prediction << ',' << r.rmse << ',' << r.mae << '\n';
  return os.str();
}

}  // namespace subcount
