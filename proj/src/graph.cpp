//
// subcount - Copyright 2026 The subcount Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "subcount/graph.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

namespace subcount {
namespace {

std::string edge_str(const Edge& e) {
  return "(" + std::to_string(e.src) + "," + std::to_string(e.dst) + "," +
         std::to_string(e.label) + ")";
}

void build_csr(std::size_t n, const std::vector<std::pair<std::uint32_t, Graph::Arc>>& items,
               std::vector<std::size_t>& offsets, std::vector<Graph::Arc>& arcs) {
  offsets.assign(n + 1, 0);
  for (const auto& [from, arc] : items) ++offsets[from + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  arcs.resize(items.size());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (const auto& [from, arc] : items) arcs[cursor[from]++] = arc;
  for (std::size_t v = 0; v < n; ++v)
    std::sort(arcs.begin() + static_cast<std::ptrdiff_t>(offsets[v]),
              arcs.begin() + static_cast<std::ptrdiff_t>(offsets[v + 1]));
}

}  // namespace

Graph Graph::build(std::vector<Vertex> vertices, std::vector<Edge> edges,
                   Label num_vertex_labels, Label num_edge_labels) {
  if (num_vertex_labels == 0 || num_edge_labels == 0)
    throw GraphError(GraphErrc::kBadLabelCount, "label counts must be positive");

  Graph g;
  g.num_vertex_labels_ = num_vertex_labels;
  g.num_edge_labels_ = num_edge_labels;
  g.index_.reserve(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Vertex& v = vertices[i];
    if (v.label >= num_vertex_labels)
      throw GraphError(GraphErrc::kLabelOutOfRange,
                       "vertex " + std::to_string(v.id) + " label " + std::to_string(v.label) +
                           " out of range");
    if (!g.index_.emplace(v.id, static_cast<std::uint32_t>(i)).second)
      throw GraphError(GraphErrc::kDuplicateVertexId,
                       "duplicate vertex id " + std::to_string(v.id));
  }

  std::vector<std::pair<std::uint32_t, Arc>> outs;
  std::vector<std::pair<std::uint32_t, Arc>> ins;
  outs.reserve(edges.size());
  ins.reserve(edges.size());
  for (const Edge& e : edges) {
    const auto s = g.index_.find(e.src);
    const auto d = g.index_.find(e.dst);
    if (s == g.index_.end() || d == g.index_.end())
      throw GraphError(GraphErrc::kDanglingEndpoint, "edge " + edge_str(e) + " has unknown endpoint");
    if (e.label >= num_edge_labels)
      throw GraphError(GraphErrc::kLabelOutOfRange, "edge " + edge_str(e) + " label out of range");
    outs.push_back({s->second, Arc{d->second, e.label}});
    ins.push_back({d->second, Arc{s->second, e.label}});
  }
  build_csr(vertices.size(), outs, g.out_offsets_, g.out_arcs_);
  build_csr(vertices.size(), ins, g.in_offsets_, g.in_arcs_);
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    const auto arcs = g.out_arcs(v);
    const auto dup = std::adjacent_find(arcs.begin(), arcs.end());
    if (dup != arcs.end()) {
      const Edge e{vertices[v].id, vertices[dup->to].id, dup->label};
      throw GraphError(GraphErrc::kDuplicateEdgeTriple, "duplicate edge " + edge_str(e));
    }
  }
  g.vertices_ = std::move(vertices);
  g.edges_ = std::move(edges);
  return g;
}

std::optional<std::size_t> Graph::find(VertexId id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Graph::index_of(VertexId id) const {
  const auto it = index_.find(id);
  if (it == index_.end())
    throw GraphError(GraphErrc::kUnknownVertex, "unknown vertex id " + std::to_string(id));
  return it->second;
}

bool Graph::has_arc(std::size_t src, std::size_t dst, Label label) const {
  const auto arcs = out_arcs(src);
  return std::binary_search(arcs.begin(), arcs.end(),
                            Arc{static_cast<std::uint32_t>(dst), label});
}

bool Graph::has_edge(VertexId src, VertexId dst, Label label) const {
  const auto s = find(src);
  const auto d = find(dst);
  if (!s || !d) return false;
  return has_arc(*s, *d, label);
}

Graph remap_vertex_ids(const Graph& g, const std::map<VertexId, VertexId>& perm) {
  std::set<VertexId> image;
  std::vector<Vertex> vertices;
  vertices.reserve(g.vertex_count());
  for (const Vertex& v : g.vertices()) {
    const auto it = perm.find(v.id);
    if (it == perm.end())
      throw GraphError(GraphErrc::kNonBijectivePermutation,
                       "permutation misses vertex " + std::to_string(v.id));
    if (!image.insert(it->second).second)
      throw GraphError(GraphErrc::kNonBijectivePermutation,
                       "permutation maps two vertices to " + std::to_string(it->second));
    vertices.push_back({it->second, v.label});
  }
  if (perm.size() != g.vertex_count())
    throw GraphError(GraphErrc::kNonBijectivePermutation,
                     "permutation has entries for unknown vertices");
  std::vector<Edge> edges;
  edges.reserve(g.edge_count());
  for (const Edge& e : g.edges()) edges.push_back({perm.at(e.src), perm.at(e.dst), e.label});
  return Graph::build(std::move(vertices), std::move(edges), g.num_vertex_labels(),
                      g.num_edge_labels());
}

bool verify_mapping(const Graph& pattern, const Graph& graph, const IsoMapping& m) {
  // image[pattern index] = graph vertex id
  std::vector<std::optional<VertexId>> image(pattern.vertex_count());
  for (const auto& [gv, pv] : m.pairs) {
    const auto pi = pattern.find(pv);
    if (!pi)
      throw GraphError(GraphErrc::kMappingNotTotal,
                       "mapping references unknown pattern vertex " + std::to_string(pv));
    if (image[*pi])
      throw GraphError(GraphErrc::kMappingNotTotal,
                       "pattern vertex " + std::to_string(pv) + " mapped twice");
    image[*pi] = gv;
  }
  for (std::size_t i = 0; i < image.size(); ++i)
    if (!image[i])
      throw GraphError(GraphErrc::kMappingNotTotal,
                       "pattern vertex " + std::to_string(pattern.vertices()[i].id) +
                           " is unmapped");

  std::set<VertexId> used;
  std::vector<std::size_t> gidx(image.size());
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (!used.insert(*image[i]).second) return false;
    const auto gi = graph.find(*image[i]);
    if (!gi) return false;
    if (graph.vertices()[*gi].label != pattern.vertices()[i].label) return false;
    gidx[i] = *gi;
  }
  for (const Edge& e : pattern.edges()) {
    if (!graph.has_arc(gidx[pattern.index_of(e.src)], gidx[pattern.index_of(e.dst)], e.label))
      return false;
  }
  return true;
}

IsoMapping remap_mapping(const IsoMapping& m, const std::map<VertexId, VertexId>& perm) {
  IsoMapping out;
  out.pairs.reserve(m.pairs.size());
  for (const auto& [gv, pv] : m.pairs) out.pairs.emplace_back(perm.at(gv), pv);
  return out;
}

bool is_weakly_connected(const Graph& g) {
  const std::size_t n = g.vertex_count();
  if (n == 0) return true;
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    auto visit = [&](std::span<const Graph::Arc> arcs) {
      for (const auto& a : arcs)
        if (!seen[a.to]) {
          seen[a.to] = 1;
          ++reached;
          stack.push_back(a.to);
        }
    };
    visit(g.out_arcs(v));
    visit(g.in_arcs(v));
  }
  return reached == n;
}

bool is_valid_pattern(const Graph& g) {
  if (!is_weakly_connected(g)) return false;
  std::vector<char> vl(g.num_vertex_labels(), 0);
  std::vector<char> el(g.num_edge_labels(), 0);
  for (const Vertex& v : g.vertices()) vl[v.label] = 1;
  for (const Edge& e : g.edges()) el[e.label] = 1;
  const bool all_vl = std::all_of(vl.begin(), vl.end(), [](char c) { return c != 0; });
  // An edgeless pattern has no edge label to cover.
  const bool all_el =
      g.edge_count() == 0 || std::all_of(el.begin(), el.end(), [](char c) { return c != 0; });
  return all_vl && all_el;
}

}  // namespace subcount
