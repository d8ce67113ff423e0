//
// subcount - Copyright 2026 The subcount Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "subcount/tu_import.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "subcount/exact_count.hpp"

namespace subcount {
namespace {

namespace fs = std::filesystem;

/// Integer columns of every non-blank line; separators are commas and blanks.
std::vector<std::vector<long long>> read_columns(const fs::path& p, std::size_t width) {
  std::ifstream in(p);
  if (!in) throw IoError(IoErrc::kLayoutError, "missing " + p.filename().string());
  std::vector<std::vector<long long>> rows;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    std::vector<long long> row;
    long long v;
    while (ss >> v) row.push_back(v);
    if (!ss.eof()) throw IoError(IoErrc::kLayoutError, p.filename().string() + ":" + std::to_string(n) + ": not an integer");
    if (row.empty()) continue;
    if (row.size() != width)
      throw IoError(IoErrc::kLayoutError, p.filename().string() + ":" + std::to_string(n) + ": expected " +
                                              std::to_string(width) + " values");
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<Graph> read_tu_dataset(const fs::path& root, const std::string& name) {
  const auto file = [&](const char* suffix) { return root / (name + suffix); };
  const auto adjacency = read_columns(file("_A.txt"), 2);
  const auto indicator = read_columns(file("_graph_indicator.txt"), 1);
  const auto node_labels = read_columns(file("_node_labels.txt"), 1);
  std::vector<std::vector<long long>> edge_labels;
  if (fs::exists(file("_edge_labels.txt"))) {
    edge_labels = read_columns(file("_edge_labels.txt"), 1);
    if (edge_labels.size() != adjacency.size())
      throw IoError(IoErrc::kLayoutError, "edge label count differs from adjacency line count");
  }
  if (node_labels.size() != indicator.size())
    throw IoError(IoErrc::kInconsistentIndicator, "graph indicator and node label files differ in length");

  const std::size_t n = indicator.size();
  std::vector<std::size_t> graph_of(n), local(n);
  std::vector<std::size_t> sizes;
  for (std::size_t i = 0; i < n; ++i) {
    const long long g = indicator[i][0];
    // Graph ids run 1..G and nodes of one graph are contiguous.
    if (g == static_cast<long long>(sizes.size()) + 1) sizes.push_back(0);
    else if (sizes.empty() || g != static_cast<long long>(sizes.size()))
      throw IoError(IoErrc::kInconsistentIndicator, "graph indicator line " + std::to_string(i + 1) +
                                                        ": graph ids must start at 1 and not skip or repeat");
    graph_of[i] = sizes.size() - 1;
    local[i] = sizes.back()++;
  }

  Label vl = 1, el = 1;
  for (const auto& r : node_labels) {
    if (r[0] < 0) throw IoError(IoErrc::kLayoutError, "negative node label");
    vl = std::max<Label>(vl, static_cast<Label>(r[0] + 1));
  }
  for (const auto& r : edge_labels) {
    if (r[0] < 0) throw IoError(IoErrc::kLayoutError, "negative edge label");
    el = std::max<Label>(el, static_cast<Label>(r[0] + 1));
  }

  std::vector<std::set<Edge>> edges(sizes.size());
  for (std::size_t k = 0; k < adjacency.size(); ++k) {
    const long long a = adjacency[k][0], b = adjacency[k][1];
    if (a < 1 || b < 1 || a > static_cast<long long>(n) || b > static_cast<long long>(n))
      throw IoError(IoErrc::kLayoutError, "adjacency line " + std::to_string(k + 1) + ": node out of range");
    const std::size_t u = static_cast<std::size_t>(a - 1), v = static_cast<std::size_t>(b - 1);
    if (graph_of[u] != graph_of[v])
      throw IoError(IoErrc::kInconsistentIndicator,
                    "adjacency line " + std::to_string(k + 1) + " joins two different graphs");
    if (u == v) throw IoError(IoErrc::kLayoutError, "adjacency line " + std::to_string(k + 1) + ": self-loop");
    const Label y = edge_labels.empty() ? 0 : static_cast<Label>(edge_labels[k][0]);
    const auto lu = static_cast<VertexId>(local[u]), lv = static_cast<VertexId>(local[v]);
    edges[graph_of[u]].insert({lu, lv, y});
    edges[graph_of[u]].insert({lv, lu, y});
  }

  std::vector<Graph> out;
  std::size_t first = 0;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    std::vector<Vertex> vs;
    for (std::size_t i = 0; i < sizes[g]; ++i)
      vs.push_back({static_cast<VertexId>(i), static_cast<Label>(node_labels[first + i][0])});
    out.push_back(Graph::build(std::move(vs), {edges[g].begin(), edges[g].end()}, vl, el));
    first += sizes[g];
  }
  return out;
}

GridConfig mutag_grid() {
  GridConfig c;
  c.name = "mutag";
  c.pattern_vertices = {3, 4};
  c.pattern_edges = {2, 3, 4};
  c.pattern_vertex_labels = {1, 2};
  c.pattern_edge_labels = {1, 2};
  c.graph_vertices = {32};
  c.graph_edges = {64};
  c.graph_vertex_labels = {7};
  c.graph_edge_labels = {4};
  c.encoding = {2, 64, 16, 16};
  return c;
}

Dataset build_real_dataset(std::vector<Graph> graphs, const RealDataOptions& opts) {
  if (graphs.empty()) throw IoError(IoErrc::kLayoutError, "no graphs");
  Dataset d;
  d.name = opts.grid.name;
  d.encoding = opts.grid.encoding;
  const std::vector<Graph> patterns = generate_patterns(opts.grid, opts.patterns, opts.seed);
  for (std::size_t i = 0; i < patterns.size(); ++i) d.patterns.emplace(i, patterns[i]);

  const std::size_t n = graphs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng(opts.seed).split(1).shuffle(order.begin(), order.end());
  const std::size_t held = (n + 2) / 3;
  const std::size_t n_train = n - std::min(n, 2 * held);
  std::array<std::vector<std::size_t>, 3> parts;
  for (std::size_t k = 0; k < n; ++k) parts[k < n_train ? 0 : (k < n_train + held ? 1 : 2)].push_back(order[k]);

  for (std::size_t g = 0; g < n; ++g) d.graphs.emplace(g, std::move(graphs[g]));
  for (int s = 0; s < 3; ++s) {
    std::sort(parts[s].begin(), parts[s].end());
    for (std::size_t g : parts[s])
      for (std::size_t p = 0; p < patterns.size(); ++p) d.splits[s].push_back({p, g, 0, {}, opts.seed});
  }
  std::vector<PairRecord*> all;
  for (auto& split : d.splits)
    for (PairRecord& r : split) all.push_back(&r);
  parallel_for(all.size(), opts.jobs, [&](std::size_t i) {
    all[i]->count = vf2_count(d.patterns.at(all[i]->pattern_id), d.graphs.at(all[i]->graph_id)).count;
  });
  return d;
}

}  // namespace subcount
