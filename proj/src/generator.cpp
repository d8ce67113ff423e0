//
// subcount - Copyright 2026 The subcount Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "subcount/generator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <string>

#include "subcount/exact_count.hpp"

namespace subcount {
namespace {

constexpr std::size_t kSampleAttempts = 64;
constexpr std::size_t kMaxStalls = 256;

std::string str(std::size_t v) { return std::to_string(v); }

}  // namespace

// --- WorkingGraph -----------------------------------------------------------

std::size_t WorkingGraph::add_component(std::span<const Label> labels) {
  const std::size_t c = starts_.size();
  starts_.push_back(labels_.size());
  for (Label x : labels) {
    if (x >= vertex_labels_) throw GenError(GenErrc::kInfeasibleParams, "vertex label out of range");
    labels_.push_back(x);
    component_.push_back(c);
  }
  return c;
}

bool WorkingGraph::add_edge(std::size_t u, std::size_t v, Label y) {
  if (u == v || y >= edge_labels_) return false;
  const Edge e{static_cast<VertexId>(u), static_cast<VertexId>(v), y};
  if (!keys_.insert(e).second) return false;
  edges_.push_back(e);
  return true;
}

bool WorkingGraph::has_edge(std::size_t u, std::size_t v, Label y) const {
  return keys_.contains(Edge{static_cast<VertexId>(u), static_cast<VertexId>(v), y});
}

Graph WorkingGraph::component(std::size_t c) const {
  const auto [begin, end] = component_range(c);
  std::vector<Vertex> vertices;
  for (std::size_t v = begin; v < end; ++v)
    vertices.push_back({static_cast<VertexId>(v - begin), labels_[v]});
  std::vector<Edge> edges;
  for (const Edge& e : edges_)
    if (component_[e.src] == c && component_[e.dst] == c)
      edges.push_back({static_cast<VertexId>(e.src - begin), static_cast<VertexId>(e.dst - begin),
                       e.label});
  return Graph::build(std::move(vertices), std::move(edges), vertex_labels_, edge_labels_);
}

Graph WorkingGraph::to_graph() const {
  std::vector<Vertex> vertices;
  for (std::size_t v = 0; v < labels_.size(); ++v)
    vertices.push_back({static_cast<VertexId>(v), labels_[v]});
  return Graph::build(std::move(vertices), edges_, vertex_labels_, edge_labels_);
}

// --- trees and patterns -----------------------------------------------------

Graph generate_directed_tree(std::size_t n, Rng& rng) {
  if (n == 0) throw GenError(GenErrc::kInfeasibleParams, "tree needs at least one vertex");
  std::vector<Vertex> vertices(n);
  for (std::size_t i = 0; i < n; ++i) vertices[i] = {static_cast<VertexId>(i), 0};
  std::vector<std::pair<std::size_t, std::size_t>> links;
  if (n == 2) links.emplace_back(0, 1);
  if (n > 2) {
    std::vector<std::size_t> prufer(n - 2);
    for (auto& x : prufer) x = rng.below(n);
    std::vector<std::size_t> degree(n, 1);
    for (auto x : prufer) ++degree[x];
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> leaves;
    for (std::size_t v = 0; v < n; ++v)
      if (degree[v] == 1) leaves.push(v);
    for (auto x : prufer) {
      const std::size_t leaf = leaves.top();
      leaves.pop();
      links.emplace_back(leaf, x);
      if (--degree[x] == 1) leaves.push(x);
    }
    const std::size_t a = leaves.top();
    leaves.pop();
    links.emplace_back(a, leaves.top());
  }
  std::vector<Edge> edges;
  for (auto [a, b] : links) {
    if (rng.bernoulli(0.5)) std::swap(a, b);
    edges.push_back({static_cast<VertexId>(a), static_cast<VertexId>(b), 0});
  }
  return Graph::build(std::move(vertices), std::move(edges), 1, 1);
}

Graph generate_pattern(const PatternParams& pp, Rng& rng) {
  const std::size_t nv = pp.vertices;
  const std::size_t ne = pp.edges;
  if (nv == 0 || pp.vertex_labels == 0 || pp.edge_labels == 0)
    throw GenError(GenErrc::kInfeasibleParams, "pattern sizes must be positive");
  if (ne + 1 < nv)
    throw GenError(GenErrc::kInfeasibleParams, "pattern needs at least N_v - 1 edges");
  if (pp.vertex_labels > nv)
    throw GenError(GenErrc::kInfeasibleParams,
                   str(pp.vertex_labels) + " vertex labels cannot all appear on " + str(nv) +
                       " vertices");
  if (ne > 0 && pp.edge_labels > ne)
    throw GenError(GenErrc::kInfeasibleParams,
                   str(pp.edge_labels) + " edge labels cannot all appear on " + str(ne) + " edges");
  if (ne == 0 && pp.edge_labels > 1)
    throw GenError(GenErrc::kInfeasibleParams, "edgeless pattern cannot use edge labels");
  if (ne > nv * (nv - 1) * pp.edge_labels)
    throw GenError(GenErrc::kInfeasibleParams, "too many edges for distinct (u, v, y) triples");

  const Graph tree = generate_directed_tree(nv, rng);

  // Every vertex label appears at least once.
  std::vector<std::size_t> order(nv);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order.begin(), order.end());
  std::vector<Label> required(pp.vertex_labels);
  std::iota(required.begin(), required.end(), 0);
  rng.shuffle(required.begin(), required.end());
  std::vector<Label> vlabel(nv);
  for (std::size_t i = 0; i < nv; ++i)
    vlabel[order[i]] = i < required.size() ? required[i]
                                           : static_cast<Label>(rng.below(pp.vertex_labels));

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> multiplicity;
  for (const Edge& e : tree.edges()) {
    pairs.emplace_back(e.src, e.dst);
    ++multiplicity[{e.src, e.dst}];
  }
  for (std::size_t extra = ne + 1 - nv; extra > 0; --extra) {
    std::optional<std::pair<std::size_t, std::size_t>> pick;
    for (std::size_t t = 0; t < kSampleAttempts && !pick; ++t) {
      const std::size_t u = rng.below(nv);
      const std::size_t v = rng.below(nv);
      if (u != v && multiplicity[{u, v}] < pp.edge_labels) pick.emplace(u, v);
    }
    if (!pick) {
      std::vector<std::pair<std::size_t, std::size_t>> open;
      for (std::size_t u = 0; u < nv; ++u)
        for (std::size_t v = 0; v < nv; ++v)
          if (u != v && multiplicity[{u, v}] < pp.edge_labels) open.emplace_back(u, v);
      pick = open[rng.below(open.size())];
    }
    pairs.push_back(*pick);
    ++multiplicity[*pick];
  }

  // Edge labels: cover every label first, never repeat a label on one (u, v).
  std::vector<std::size_t> edge_order(pairs.size());
  std::iota(edge_order.begin(), edge_order.end(), 0);
  rng.shuffle(edge_order.begin(), edge_order.end());
  std::vector<Label> pending(pp.edge_labels);
  std::iota(pending.begin(), pending.end(), 0);
  rng.shuffle(pending.begin(), pending.end());
  std::map<std::pair<std::size_t, std::size_t>, std::set<Label>> used;
  std::vector<Label> elabel(pairs.size());
  for (std::size_t idx : edge_order) {
    auto& taken = used[pairs[idx]];
    Label y = 0;
    if (!pending.empty()) {
      y = pending.back();
      pending.pop_back();
    } else {
      std::vector<Label> free;
      for (Label c = 0; c < pp.edge_labels; ++c)
        if (!taken.contains(c)) free.push_back(c);
      y = free[rng.below(free.size())];
    }
    taken.insert(y);
    elabel[idx] = y;
  }

  std::vector<Vertex> vertices(nv);
  for (std::size_t i = 0; i < nv; ++i) vertices[i] = {static_cast<VertexId>(i), vlabel[i]};
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    edges.push_back({static_cast<VertexId>(pairs[i].first),
                     static_cast<VertexId>(pairs[i].second), elabel[i]});
  return Graph::build(std::move(vertices), std::move(edges), pp.vertex_labels, pp.edge_labels);
}

NecTree build_nec_tree(const Graph& p) {
  NecTree nec;
  using Key = std::pair<Label, std::vector<std::pair<int, Signature>>>;
  std::map<Key, std::size_t> classes;
  nec.vertex_class.resize(p.vertex_count());
  for (std::size_t v = 0; v < p.vertex_count(); ++v) {
    const Label x = p.vertices()[v].label;
    std::vector<std::pair<int, Signature>> incident;
    for (const auto& a : p.out_arcs(v))
      incident.push_back({1, Signature{x, a.label, p.vertices()[a.to].label}});
    for (const auto& a : p.in_arcs(v))
      incident.push_back({0, Signature{p.vertices()[a.to].label, a.label, x}});
    std::sort(incident.begin(), incident.end());
    const auto [it, fresh] = classes.emplace(Key{x, std::move(incident)}, nec.class_bounds.size());
    if (fresh) nec.class_bounds.push_back({p.in_degree(v), p.out_degree(v)});
    auto& b = nec.class_bounds[it->second];
    b.min_in = std::min(b.min_in, p.in_degree(v));
    b.min_out = std::min(b.min_out, p.out_degree(v));
    nec.vertex_class[v] = it->second;
  }
  for (const Edge& e : p.edges())
    nec.signatures.insert({p.label_of(e.src), e.label, p.label_of(e.dst)});
  return nec;
}

// --- components -------------------------------------------------------------

std::vector<std::size_t> sample_component_sizes(std::size_t n, double beta,
                                                std::size_t components, Rng& rng) {
  if (n == 0) throw GenError(GenErrc::kInfeasibleParams, "no vertices to split");
  const std::size_t k = std::clamp<std::size_t>(components, 1, n);
  std::vector<double> w(k);
  for (auto& x : w) x = rng.gamma(beta);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<std::size_t> sizes(k);
  std::vector<std::pair<double, std::size_t>> frac(k);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double raw = static_cast<double>(n) * w[i] / total;
    sizes[i] = static_cast<std::size_t>(std::floor(raw));
    frac[i] = {raw - std::floor(raw), i};
    assigned += sizes[i];
  }
  // Hand out the remainder by largest fractional part, then fix empties.
  std::sort(frac.begin(), frac.end(),
            [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first
                                                                          : a.second < b.second; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++sizes[frac[i % k].second];
  for (std::size_t i = 0; i < k; ++i) {
    while (sizes[i] == 0) {
      const auto big = std::max_element(sizes.begin(), sizes.end());
      --*big;
      ++sizes[i];
    }
  }
  return sizes;
}

std::vector<std::size_t> sample_component_sizes(std::size_t n, double beta, Rng& rng) {
  const std::size_t hi = std::max<std::size_t>(1, n / 8);
  const auto k = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(hi)));
  return sample_component_sizes(n, beta, k, rng);
}

std::size_t add_random_edges(WorkingGraph& g, std::size_t c1, std::size_t c2, const NecTree* nec,
                             std::size_t budget, Rng& rng) {
  const bool cross = c1 != c2;
  const bool constrained = cross && nec != nullptr;
  const auto [b1, e1] = g.component_range(c1);
  const auto [b2, e2] = g.component_range(c2);
  auto admissible = [&](std::size_t u, std::size_t v, Label y) {
    if (u == v) return false;
    return !constrained || !nec->uses({g.label(u), y, g.label(v)});
  };

  std::size_t added = 0;
  for (; added < budget; ++added) {
    bool placed = false;
    for (std::size_t t = 0; t < kSampleAttempts && !placed; ++t) {
      std::size_t u = b1 + rng.below(e1 - b1);
      std::size_t v = b2 + rng.below(e2 - b2);
      if (cross && rng.bernoulli(0.5)) std::swap(u, v);
      const auto y = static_cast<Label>(rng.below(g.edge_labels()));
      placed = admissible(u, v, y) && g.add_edge(u, v, y);
    }
    if (placed) continue;

    std::vector<Edge> open;
    bool any_admissible = false;
    auto scan = [&](std::size_t bu, std::size_t eu, std::size_t bv, std::size_t ev) {
      for (std::size_t u = bu; u < eu; ++u)
        for (std::size_t v = bv; v < ev; ++v)
          for (Label y = 0; y < g.edge_labels(); ++y) {
            if (!admissible(u, v, y)) continue;
            any_admissible = true;
            if (!g.has_edge(u, v, y))
              open.push_back({static_cast<VertexId>(u), static_cast<VertexId>(v), y});
          }
    };
    scan(b1, e1, b2, e2);
    if (cross) scan(b2, e2, b1, e1);
    if (open.empty()) {
      if (constrained && !any_admissible)
        throw GenError(GenErrc::kNoAdmissibleEdge,
                       "every cross-component edge would carry a pattern signature");
      break;
    }
    const Edge& e = open[rng.below(open.size())];
    g.add_edge(e.src, e.dst, e.label);
  }
  return added;
}

std::size_t add_pattern_instance(WorkingGraph& g, std::size_t c, const Graph& pattern, Rng& rng) {
  const auto [begin, end] = g.component_range(c);
  for (const Edge& e : pattern.edges())
    if (e.label >= g.edge_labels())
      throw GenError(GenErrc::kNoCompatibleVertexSet, "pattern edge label not in graph alphabet");

  std::map<Label, std::vector<std::size_t>> by_label;
  for (std::size_t v = begin; v < end; ++v) by_label[g.label(v)].push_back(v);
  std::map<Label, std::size_t> need;
  for (const Vertex& v : pattern.vertices()) ++need[v.label];
  for (const auto& [x, k] : need) {
    const auto it = by_label.find(x);
    if (it == by_label.end() || it->second.size() < k)
      throw GenError(GenErrc::kNoCompatibleVertexSet,
                     "component lacks vertices with label " + std::to_string(x));
  }
  for (auto& [x, vs] : by_label) rng.shuffle(vs.begin(), vs.end());

  std::vector<std::size_t> image(pattern.vertex_count());
  std::map<Label, std::size_t> taken;
  for (std::size_t i = 0; i < pattern.vertex_count(); ++i) {
    const Label x = pattern.vertices()[i].label;
    image[i] = by_label[x][taken[x]++];
  }
  std::size_t added = 0;
  for (const Edge& e : pattern.edges())
    if (g.add_edge(image[pattern.index_of(e.src)], image[pattern.index_of(e.dst)], e.label)) ++added;
  return added;
}

MergeResult merge_and_shuffle(const WorkingGraph& g, Rng& rng, bool shuffle) {
  const std::size_t n = g.vertex_count();
  MergeResult out;
  out.id_of.resize(n);
  std::iota(out.id_of.begin(), out.id_of.end(), 0);
  if (shuffle) rng.shuffle(out.id_of.begin(), out.id_of.end());
  std::vector<Vertex> vertices(n);
  for (std::size_t v = 0; v < n; ++v) vertices[out.id_of[v]] = {out.id_of[v], g.label(v)};
  std::vector<Edge> edges;
  edges.reserve(g.edge_count());
  for (const Edge& e : g.edges()) edges.push_back({out.id_of[e.src], out.id_of[e.dst], e.label});
  std::sort(edges.begin(), edges.end());
  out.graph = Graph::build(std::move(vertices), std::move(edges), g.vertex_labels(), g.edge_labels());
  return out;
}

MergeResult merge_and_shuffle(std::span<const Graph> components, Rng& rng, bool shuffle) {
  Label vl = 1;
  Label el = 1;
  for (const Graph& c : components) {
    vl = std::max(vl, c.num_vertex_labels());
    el = std::max(el, c.num_edge_labels());
  }
  WorkingGraph w(vl, el);
  for (const Graph& c : components) {
    std::vector<Label> labels;
    for (const Vertex& v : c.vertices()) labels.push_back(v.label);
    const std::size_t id = w.add_component(labels);
    const std::size_t base = w.component_range(id).first;
    for (const Edge& e : c.edges()) w.add_edge(base + c.index_of(e.src), base + c.index_of(e.dst), e.label);
  }
  return merge_and_shuffle(w, rng, shuffle);
}

// --- graph generator --------------------------------------------------------

namespace {

std::optional<GeneratedExample> attempt_graph(const Graph& pattern, const GraphParams& gp,
                                              const NecTree& nec, Rng& rng) {
  const auto sizes = sample_component_sizes(gp.vertices, gp.beta, rng);
  WorkingGraph w(gp.vertex_labels, gp.edge_labels);
  std::size_t remaining = gp.edges;
  for (std::size_t n : sizes) {
    const Graph tree = generate_directed_tree(n, rng);
    std::vector<Label> labels(n);
    for (auto& x : labels) x = static_cast<Label>(rng.below(gp.vertex_labels));
    const std::size_t c = w.add_component(labels);
    const std::size_t base = w.component_range(c).first;
    for (const Edge& e : tree.edges())
      w.add_edge(base + e.src, base + e.dst, static_cast<Label>(rng.below(gp.edge_labels)));
    remaining -= n - 1;
  }

  const std::size_t pattern_edges = std::max<std::size_t>(1, pattern.edge_count());
  const std::size_t k = w.component_count();
  std::size_t stalls = 0;
  while (remaining > 0) {
    const std::size_t c1 = rng.below(k);
    const std::size_t c2 = rng.below(k);
    const double r = rng.uniform();
    std::size_t added = 0;
    try {
      if (remaining < pattern_edges) {
        added = add_random_edges(w, c1, c2, &nec, remaining, rng);
      } else if (r < gp.alpha) {
        try {
          added = add_pattern_instance(w, c1, pattern, rng);
        } catch (const GenError& e) {
          if (e.code() != GenErrc::kNoCompatibleVertexSet) throw;
          added = add_random_edges(w, c1, c2, &nec, pattern_edges, rng);
        }
      } else {
        added = add_random_edges(w, c1, c2, &nec, pattern_edges, rng);
      }
    } catch (const GenError& e) {
      if (e.code() != GenErrc::kNoAdmissibleEdge) throw;
    }
    if (added == 0) {
      if (++stalls > kMaxStalls)
        throw GenError(GenErrc::kBudgetInfeasible, "edge budget cannot be spent");
      continue;
    }
    stalls = 0;
    remaining -= std::min(added, remaining);
  }

  MergeResult merged = merge_and_shuffle(w, rng);

  GeneratedExample ex;
  ex.pattern = pattern;
  ex.provenance.component_sizes = sizes;
  ex.provenance.component_of.resize(w.vertex_count());
  for (std::size_t v = 0; v < w.vertex_count(); ++v)
    ex.provenance.component_of[merged.id_of[v]] = static_cast<std::uint32_t>(w.component_of(v));

  for (std::size_t c = 0; c < k; ++c) {
    CountOptions opts;
    opts.keep_mappings = true;
    opts.limit = gp.max_count - ex.count;
    const CountResult part = vf2_count(pattern, w.component(c), opts);
    if (part.limit_exceeded) return std::nullopt;
    const std::size_t base = w.component_range(c).first;
    for (const IsoMapping& m : *part.mappings) {
      IsoMapping global;
      for (const auto& [local, pv] : m.pairs) global.pairs.emplace_back(merged.id_of[base + local], pv);
      ex.mappings.push_back(std::move(global));
    }
    ex.count += part.count;
  }
  ex.graph = std::move(merged.graph);
  return ex;
}

}  // namespace

GeneratedExample generate_graph(const Graph& pattern, const GraphParams& gp, Rng& rng) {
  if (gp.vertices == 0 || gp.vertex_labels == 0 || gp.edge_labels == 0)
    throw GenError(GenErrc::kBudgetInfeasible, "graph sizes must be positive");
  if (gp.edges + 1 < gp.vertices)
    throw GenError(GenErrc::kBudgetInfeasible, "graph needs at least N_v - 1 edges");
  if (static_cast<double>(gp.edges) > gp.max_average_degree * static_cast<double>(gp.vertices))
    throw GenError(GenErrc::kBudgetInfeasible, "average degree cap exceeded");
  if (gp.alpha < 0.0 || gp.alpha > 1.0)
    throw GenError(GenErrc::kBudgetInfeasible, "alpha must lie in [0, 1]");

  const NecTree nec = build_nec_tree(pattern);
  for (std::size_t attempt = 0; attempt <= gp.max_retries; ++attempt) {
    Rng local = rng.split(attempt);
    std::optional<GeneratedExample> ex;
    try {
      ex = attempt_graph(pattern, gp, nec, local);
    } catch (const GenError& e) {
      if (e.code() != GenErrc::kBudgetInfeasible || attempt == gp.max_retries) throw;
      continue;
    }
    if (ex) {
      ex->provenance.seed = rng.seed();
      ex->provenance.attempts = attempt + 1;
      return std::move(*ex);
    }
  }
  throw GenError(GenErrc::kCapExceededAfterRetries,
                 "count exceeded " + std::to_string(gp.max_count) + " on every attempt");
}

}  // namespace subcount
