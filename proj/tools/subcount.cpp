//
// subcount - Copyright 2026 The subcount Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: one subcommand per pipeline stage.
//

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "subcount/bench.hpp"
#include "subcount/checkpoint.hpp"
#include "subcount/dataset.hpp"
#include "subcount/exact_count.hpp"
#include "subcount/trainer.hpp"
#include "subcount/tu_import.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace subcount;

namespace {

struct Common {
  std::uint64_t seed = 1;
  std::string config;
  std::size_t jobs = 1;
  std::string out = ".";
  bool verify = false;
  double timeout = 60.0;
};

void add_common(CLI::App* c, Common& o) {
  c->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  c->add_option("--config", o.config, "Grid config (generation) or model config (training)");
  c->add_option("--jobs", o.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  c->add_option("--out", o.out, "Output directory")->capture_default_str();
  c->add_flag("--verify", o.verify, "Re-count pairs with VF2");
  c->add_option("--timeout", o.timeout, "Per-pair VF2 limit in seconds (0 = none)")->capture_default_str();
}

void write_text(const fs::path& p, const std::string& s) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(IoErrc::kFileError, "cannot write " + p.string());
  out << s;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError(IoErrc::kFileError, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

GridConfig grid_from(const Common& o) {
  if (o.config.empty()) throw CLI::RequiredError("--config");
  return load_grid_config(o.config);
}

struct TrainFlags {
  std::size_t epochs = 100;
  std::size_t batch = 64;
  double lr = 1e-3;
  double weight_decay = 1e-6;
  std::size_t patience = 10;
  double max_seconds = 0.0;
};

void add_train_flags(CLI::App* c, TrainFlags& t, double default_lr) {
  t.lr = default_lr;
  c->add_option("--epochs", t.epochs)->capture_default_str();
  c->add_option("--batch", t.batch)->capture_default_str()->check(CLI::PositiveNumber);
  c->add_option("--lr", t.lr)->capture_default_str();
  c->add_option("--weight-decay", t.weight_decay)->capture_default_str();
  c->add_option("--patience", t.patience, "0 disables early stopping")->capture_default_str();
  c->add_option("--max-seconds", t.max_seconds, "Training time limit (0 = none)")->capture_default_str();
}

Hyper hyper_from(const TrainFlags& t, const Common& o) {
  Hyper h;
  h.optimizer.lr = t.lr;
  h.optimizer.weight_decay = t.weight_decay;
  h.batch_size = t.batch;
  h.epochs = t.epochs;
  h.patience = t.patience;
  h.max_seconds = t.max_seconds;
  h.seed = o.seed;
  h.jobs = o.jobs;
  h.log = [](const std::string& s) { std::cerr << s << '\n'; };
  return h;
}

json metrics_json(const Metrics& m) {
  return json{{"rmse", m.rmse}, {"mae", m.mae}, {"pairs", m.n}, {"seconds", m.seconds}};
}

std::string history_csv(const TrainResult& r) {
  std::ostringstream os;
  os.precision(10);
  os << "epoch,train_mse,dev_rmse,seconds\n";
  for (const EpochRecord& e : r.history)
    os << e.epoch << ',' << e.train_loss << ',' << e.dev_rmse << ',' << e.seconds << '\n';
  return os.str();
}

void write_training_outputs(const fs::path& dir, const Model& m, const TrainResult& r,
                            std::vector<std::string> lineage) {
  lineage.insert(lineage.end(), r.lineage.begin(), r.lineage.end());
  save_model(dir, m, lineage);
  write_text(dir / "history.csv", history_csv(r));
  write_text(dir / "train.json", json{{"best_dev_rmse", r.best_dev_rmse},
                                      {"best_epoch", r.best_epoch},
                                      {"epochs_run", r.history.size()},
                                      {"seconds", r.seconds}}
                                     .dump(2) + "\n");
  std::cout << "best dev RMSE " << r.best_dev_rmse << " at epoch " << r.best_epoch << "; model in "
            << dir.string() << '\n';
}

int cmd_gen_patterns(const Common& o, std::size_t count) {
  const GridConfig c = grid_from(o);
  const std::vector<Graph> ps = generate_patterns(c, count ? count : c.patterns, o.seed);
  fs::create_directories(o.out);
  write_graph_file(fs::path(o.out) / "patterns.jsonl", ps);
  std::cout << ps.size() << " patterns written to " << (fs::path(o.out) / "patterns.jsonl").string() << '\n';
  return 0;
}

int cmd_gen_graphs(const Common& o, const std::string& patterns_file, std::size_t pairs) {
  GridConfig c = grid_from(o);
  if (pairs) c.pairs = pairs;
  std::vector<Graph> ps;
  if (!patterns_file.empty()) {
    ps = read_graph_file(patterns_file);
  } else if (fs::exists(fs::path(o.out) / "patterns.jsonl")) {
    ps = read_graph_file(fs::path(o.out) / "patterns.jsonl");
  } else {
    ps = generate_patterns(c, c.patterns, o.seed);
  }
  GenOptions g;
  g.seed = o.seed;
  g.jobs = o.jobs;
  g.verify = o.verify;
  g.progress = [](std::size_t done, std::size_t total) {
    if (done % 500 == 0 || done == total) std::cerr << "generated " << done << "/" << total << '\n';
  };
  const Dataset d = generate_dataset(c, ps, g);
  const DatasetManifest m = save_dataset(d, o.out);
  std::cout << "dataset " << m.name << ": " << m.split_sizes[0] << " train, " << m.split_sizes[1] << " dev, "
            << m.split_sizes[2] << " test pairs; max count " << m.max_count << '\n';
  return 0;
}

int cmd_count(const Common& o, const std::string& dataset_dir) {
  const Dataset d = load_dataset(dataset_dir);
  struct Job {
    Split split;
    const PairRecord* rec;
  };
  std::vector<Job> jobs;
  for (int s = 0; s < 3; ++s)
    for (const PairRecord& r : d.splits[s]) jobs.push_back({static_cast<Split>(s), &r});
  std::vector<CountResult> res(jobs.size());
  std::vector<char> timed_out(jobs.size(), 0);
  CountOptions co;
  if (o.timeout > 0) co.timeout = std::chrono::duration<double>(o.timeout);
  parallel_for(jobs.size(), o.jobs, [&](std::size_t i) {
    try {
      res[i] = vf2_count(d.patterns.at(jobs[i].rec->pattern_id), d.graphs.at(jobs[i].rec->graph_id), co);
    } catch (const CountError& e) {
      if (e.code() != CountErrc::kTimeout) throw;
      timed_out[i] = 1;
    }
  });
  std::ostringstream csv;
  csv.precision(10);
  csv << "split,pattern_id,graph_id,recorded,vf2,seconds,nodes_expanded,status\n";
  std::size_t mismatches = 0, timeouts = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const PairRecord& r = *jobs[i].rec;
    std::string status = "ok";
    if (timed_out[i]) {
      status = "timeout";
      ++timeouts;
    } else if (res[i].count != r.count) {
      status = "mismatch";
      ++mismatches;
    }
    total += res[i].elapsed.count();
    csv << kSplitNames[static_cast<int>(jobs[i].split)] << ',' << r.pattern_id << ',' << r.graph_id << ','
        << r.count << ',' << res[i].count << ',' << res[i].elapsed.count() << ',' << res[i].nodes_expanded
        << ',' << status << '\n';
  }
  write_text(fs::path(o.out) / "counts.csv", csv.str());
  std::cout << jobs.size() << " pairs counted in " << total << " s (sum over pairs); " << mismatches
            << " mismatches, " << timeouts << " timeouts\n";
  return (o.verify && (mismatches || timeouts)) ? 1 : 0;
}

int cmd_encode(const Common& o, const std::string& dataset_dir) {
  const Dataset d = load_dataset(dataset_dir);
  ModelConfig cfg;
  if (!o.config.empty()) cfg = parse_model_config(read_text(o.config));
  cfg.encoding = d.encoding;
  auto bits = [](const Matrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows; ++r) {
      std::string s;
      for (double x : m.row(r)) s += x != 0.0 ? '1' : '0';
      rows.push_back(std::move(s));
    }
    return rows;
  };
  std::ostringstream os;
  auto emit = [&](const char* kind, std::size_t id, const Graph& g) {
    json code = json::array();
    for (const EdgeTuple& t : minimum_code(g)) code.push_back({t.u, t.v, t.xu, t.y, t.xv});
    const ModelInput in = encode_input(g, cfg);
    os << json{{"kind", kind},
               {"id", id},
               {"layout", cfg.graph_view() ? "vertex" : "edge"},
               {"width", in.features.cols},
               {"code", std::move(code)},
               {"rows", bits(in.features)}}
              .dump()
       << '\n';
  };
  for (const auto& [id, g] : d.patterns) emit("pattern", id, g);
  for (const auto& [id, g] : d.graphs) emit("graph", id, g);
  write_text(fs::path(o.out) / "encoded.jsonl", os.str());
  std::cout << "encoded " << d.patterns.size() + d.graphs.size() << " graphs, row width "
            << cfg.input_width() << '\n';
  return 0;
}

int cmd_train(const Common& o, const TrainFlags& t, const std::string& dataset_dir,
              const std::string& curriculum_dir) {
  const Dataset d = load_dataset(dataset_dir);
  ModelConfig cfg;
  if (!o.config.empty()) cfg = parse_model_config(read_text(o.config));
  cfg.encoding = d.encoding;
  Model m(cfg, o.seed);
  const Hyper h = hyper_from(t, o);
  TrainResult r;
  if (curriculum_dir.empty()) {
    r = train(m, d.examples(Split::kTrain), d.examples(Split::kDev), h);
  } else {
    const Dataset large = load_dataset(curriculum_dir);
    r = curriculum(m, d.examples(Split::kTrain), d.examples(Split::kDev), large.examples(Split::kTrain),
                   large.examples(Split::kDev), large.encoding, h);
  }
  write_training_outputs(o.out, m, r, {});
  return 0;
}

int cmd_eval(const Common& o, const std::string& model_dir, const std::string& dataset_dir,
             const std::string& split_name) {
  Model m = load_model(model_dir);
  const Dataset d = load_dataset(dataset_dir);
  const Split s = parse_split(split_name);
  const std::vector<Example> ex = d.examples(s);
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> pred = predict_all(m, ex, o.jobs);
  std::vector<double> truth;
  for (const Example& e : ex) truth.push_back(e.count);
  Metrics mt = compute_metrics(pred, truth);
  mt.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::vector<Example> tr = d.examples(Split::kTrain);
  json j{{"split", split_name}, {"model", metrics_json(mt)}};
  j["zero"] = metrics_json(baseline_metrics(tr, ex, Baseline::kZero));
  if (!tr.empty()) j["avg"] = metrics_json(baseline_metrics(tr, ex, Baseline::kAvg));
  const fs::path out(o.out);
  write_text(out / "metrics.json", j.dump(2) + "\n");
  write_text(out / "bins.csv", bins_csv(bin_breakdown(ex, pred)));
  std::ostringstream pc;
  pc.precision(10);
  pc << "pattern_id,graph_id,count,prediction\n";
  const auto& recs = d.split(s);
  for (std::size_t i = 0; i < recs.size(); ++i)
    pc << recs[i].pattern_id << ',' << recs[i].graph_id << ',' << recs[i].count << ',' << pred[i] << '\n';
  write_text(out / "predictions.csv", pc.str());
  std::cout << split_name << " RMSE " << mt.rmse << " MAE " << mt.mae << " over " << mt.n << " pairs\n";
  return 0;
}

int cmd_finetune(const Common& o, const TrainFlags& t, const std::string& model_dir,
                 const std::string& dataset_dir, double fraction) {
  Model m = load_model(model_dir);
  const Dataset d = load_dataset(dataset_dir);
  std::vector<Example> tr = d.examples(Split::kTrain);
  if (fraction < 1.0) {
    Rng(o.seed).shuffle(tr.begin(), tr.end());
    tr.resize(std::max<std::size_t>(1, static_cast<std::size_t>(fraction * static_cast<double>(tr.size()))));
  }
  const TrainResult r = fine_tune(m, tr, d.examples(Split::kDev), d.encoding, hyper_from(t, o));
  write_training_outputs(o.out, m, r, load_lineage(model_dir));
  return 0;
}

int cmd_bench(const Common& o, const std::string& model_dir, const std::string& dataset_dir,
              const std::string& split_name, std::size_t limit) {
  Model m = load_model(model_dir);
  const Dataset d = load_dataset(dataset_dir);
  std::vector<Example> ex = d.examples(parse_split(split_name));
  if (limit && ex.size() > limit) ex.resize(limit);
  BenchOptions bo;
  bo.vf2_jobs = o.jobs;
  bo.timeout_seconds = o.timeout;
  const BenchReport r = run_benchmark(m, ex, bo);
  write_text(fs::path(o.out) / "bench.csv", bench_csv(r));
  write_text(fs::path(o.out) / "bench.json", bench_summary_json(r));
  std::cout << "VF2 " << r.vf2_total << " s, neural " << r.neural_total << " s, speedup " << r.speedup
            << "x, RMSE " << r.neural.rmse << ", " << r.timeouts << " timeouts\n";
  return (o.verify && r.count_mismatches) ? 1 : 0;
}

int cmd_import_mutag(const Common& o, const std::string& root, const std::string& name, std::size_t patterns) {
  RealDataOptions opts;
  opts.seed = o.seed;
  opts.jobs = o.jobs;
  opts.patterns = patterns;
  if (!o.config.empty()) opts.grid = load_grid_config(o.config);
  std::vector<Graph> graphs = read_tu_dataset(root, name);
  double v = 0, e = 0;
  for (const Graph& g : graphs) {
    v += static_cast<double>(g.vertex_count());
    e += static_cast<double>(g.edge_count());
  }
  const std::size_t n = graphs.size();
  std::cout << n << " graphs, mean " << v / static_cast<double>(n) << " vertices / "
            << e / static_cast<double>(n) << " directed edges\n";
  const Dataset d = build_real_dataset(std::move(graphs), opts);
  const DatasetManifest m = save_dataset(d, o.out);
  std::cout << m.split_sizes[0] << " train, " << m.split_sizes[1] << " dev, " << m.split_sizes[2]
            << " test pairs; max count " << m.max_count << '\n';
  if (o.verify && !verify_dataset(d, o.jobs).empty()) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subgraph isomorphism counting workbench"};
  app.require_subcommand(1);
  Common o;

  std::size_t n_patterns = 0, n_pairs = 0, limit = 0, mutag_patterns = 24;
  std::string patterns_file, dataset, model_dir, curriculum_dir, split = "test", tu_root, tu_name = "MUTAG";
  double fraction = 1.0;
  TrainFlags train_flags, tune_flags;

  auto* gp = app.add_subcommand("gen-patterns", "Draw distinct patterns from a grid config");
  add_common(gp, o);
  gp->add_option("--count", n_patterns, "Number of patterns (default: from config)");

  auto* gg = app.add_subcommand("gen-graphs", "Generate graphs with exact counts and write a dataset");
  add_common(gg, o);
  gg->add_option("--patterns", patterns_file, "patterns.jsonl (default: <out>/patterns.jsonl or fresh)");
  gg->add_option("--pairs", n_pairs, "Number of pairs (default: from config)");

  auto* ct = app.add_subcommand("count", "Re-count every pair of a dataset with VF2");
  add_common(ct, o);
  ct->add_option("dataset", dataset)->required();

  auto* en = app.add_subcommand("encode", "Write minimum codes and multi-hot rows");
  add_common(en, o);
  en->add_option("dataset", dataset)->required();

  auto* tr = app.add_subcommand("train", "Train a model; --config is a model config");
  add_common(tr, o);
  add_train_flags(tr, train_flags, 1e-3);
  tr->add_option("dataset", dataset)->required();
  tr->add_option("--curriculum", curriculum_dir, "Continue on this larger dataset after the first");

  auto* ev = app.add_subcommand("eval", "Metrics, baselines and bin tables for one split");
  add_common(ev, o);
  ev->add_option("model", model_dir)->required();
  ev->add_option("dataset", dataset)->required();
  ev->add_option("--split", split)->capture_default_str();

  auto* ft = app.add_subcommand("finetune", "Continue training a saved model on another dataset");
  add_common(ft, o);
  add_train_flags(ft, tune_flags, 1e-4);
  ft->add_option("model", model_dir)->required();
  ft->add_option("dataset", dataset)->required();
  ft->add_option("--fraction", fraction, "Share of training pairs used")->check(CLI::Range(0.0, 1.0));

  auto* bn = app.add_subcommand("bench", "Time VF2 against the model");
  add_common(bn, o);
  bn->add_option("model", model_dir)->required();
  bn->add_option("dataset", dataset)->required();
  bn->add_option("--split", split)->capture_default_str();
  bn->add_option("--limit", limit, "Use at most this many pairs");

  auto* im = app.add_subcommand("import-mutag", "Import a TU-format dataset and pair it with patterns");
  add_common(im, o);
  im->add_option("root", tu_root)->required();
  im->add_option("--name", tu_name)->capture_default_str();
  im->add_option("--patterns", mutag_patterns)->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gp) return cmd_gen_patterns(o, n_patterns);
    if (*gg) return cmd_gen_graphs(o, patterns_file, n_pairs);
    if (*ct) return cmd_count(o, dataset);
    if (*en) return cmd_encode(o, dataset);
    if (*tr) return cmd_train(o, train_flags, dataset, curriculum_dir);
    if (*ev) return cmd_eval(o, model_dir, dataset, split);
    if (*ft) return cmd_finetune(o, tune_flags, model_dir, dataset, fraction);
    if (*bn) return cmd_bench(o, model_dir, dataset, split, limit);
    if (*im) return cmd_import_mutag(o, tu_root, tu_name, mutag_patterns);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
