//
// subcount - Copyright 2026 The subcount Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "subcount/common.hpp"

namespace subcount {

enum class GraphErrc {
  kDuplicateEdgeTriple,
  kDanglingEndpoint,
  kLabelOutOfRange,
  kDuplicateVertexId,
  kBadLabelCount,
  kNonBijectivePermutation,
  kMappingNotTotal,
  kUnknownVertex,
};
using GraphError = Error<GraphErrc>;

struct Vertex {
  VertexId id = 0;
  Label label = 0;
  bool operator==(const Vertex&) const = default;
};

struct Edge {
  VertexId src = 0;
  VertexId dst = 0;
  Label label = 0;
  auto operator<=>(const Edge&) const = default;
};

/// Directed heterogeneous multigraph with one label per vertex and per edge.
/// Parallel edges are allowed as long as their labels differ. Immutable once
/// built; the same type is used for patterns.
class Graph {
 public:
  /// Adjacency entry in index space (positions in vertices()).
  struct Arc {
    std::uint32_t to = 0;
    Label label = 0;
    auto operator<=>(const Arc&) const = default;
  };

  Graph() = default;

  /// Validates and builds. Throws GraphError.
  static Graph build(std::vector<Vertex> vertices, std::vector<Edge> edges,
                     Label num_vertex_labels, Label num_edge_labels);

  std::span<const Vertex> vertices() const noexcept { return vertices_; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::size_t vertex_count() const noexcept { return vertices_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  Label num_vertex_labels() const noexcept { return num_vertex_labels_; }
  Label num_edge_labels() const noexcept { return num_edge_labels_; }

  std::optional<std::size_t> find(VertexId id) const;
  /// Position of `id` in vertices(); throws kUnknownVertex.
  std::size_t index_of(VertexId id) const;
  Label label_of(VertexId id) const { return vertices_[index_of(id)].label; }

  bool has_edge(VertexId src, VertexId dst, Label label) const;
  /// Index-space variant of has_edge.
  bool has_arc(std::size_t src, std::size_t dst, Label label) const;

  /// Outgoing / incoming arcs of the vertex at position `idx`, sorted by (to, label).
  std::span<const Arc> out_arcs(std::size_t idx) const {
    return {out_arcs_.data() + out_offsets_[idx], out_offsets_[idx + 1] - out_offsets_[idx]};
  }
  std::span<const Arc> in_arcs(std::size_t idx) const {
    return {in_arcs_.data() + in_offsets_[idx], in_offsets_[idx + 1] - in_offsets_[idx]};
  }
  std::size_t out_degree(std::size_t idx) const { return out_arcs(idx).size(); }
  std::size_t in_degree(std::size_t idx) const { return in_arcs(idx).size(); }

  /// Structural equality: same vertex list, edge list (in order) and label counts.
  bool operator==(const Graph& other) const {
    return vertices_ == other.vertices_ && edges_ == other.edges_ &&
           num_vertex_labels_ == other.num_vertex_labels_ &&
           num_edge_labels_ == other.num_edge_labels_;
  }

 private:
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  Label num_vertex_labels_ = 1;
  Label num_edge_labels_ = 1;
  std::unordered_map<VertexId, std::uint32_t> index_;
  std::vector<std::size_t> out_offsets_{0};
  std::vector<std::size_t> in_offsets_{0};
  std::vector<Arc> out_arcs_;
  std::vector<Arc> in_arcs_;
};

/// A subgraph isomorphism, as (graph vertex id, pattern vertex id) pairs.
struct IsoMapping {
  std::vector<std::pair<VertexId, VertexId>> pairs;
  bool operator==(const IsoMapping&) const = default;
};

inline Graph build_graph(std::vector<Vertex> vertices, std::vector<Edge> edges,
                         Label num_vertex_labels, Label num_edge_labels) {
  return Graph::build(std::move(vertices), std::move(edges), num_vertex_labels,
                      num_edge_labels);
}

/// Renames vertex ids through `perm`, which must be total over g's ids and
/// injective. Vertex and edge order are preserved.
Graph remap_vertex_ids(const Graph& g, const std::map<VertexId, VertexId>& perm);

/// True iff `m` is injective, respects vertex labels and every pattern edge
/// (u, v, y) has a graph edge between the images with label y. Throws
/// kMappingNotTotal if some pattern vertex is unmapped or mapped twice.
bool verify_mapping(const Graph& pattern, const Graph& graph, const IsoMapping& m);

/// Rewrites the graph-side ids of a mapping.
IsoMapping remap_mapping(const IsoMapping& m, const std::map<VertexId, VertexId>& perm);

bool is_weakly_connected(const Graph& g);

/// Weakly connected, and every label in [0, L_v) and [0, L_e) is used.
bool is_valid_pattern(const Graph& g);

}  // namespace subcount
