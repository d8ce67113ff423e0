//
// subcount - Copyright 2026 The subcount Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <compare>
#include <cstdint>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "subcount/graph.hpp"
#include "subcount/rng.hpp"

namespace subcount {

enum class GenErrc {
  kInfeasibleParams,
  kNoAdmissibleEdge,
  kNoCompatibleVertexSet,
  kBudgetInfeasible,
  kCapExceededAfterRetries,
};
using GenError = Error<GenErrc>;

struct PatternParams {
  std::size_t vertices = 3;
  std::size_t edges = 2;
  Label vertex_labels = 1;
  Label edge_labels = 1;
};

struct GraphParams {
  std::size_t vertices = 8;
  std::size_t edges = 8;
  Label vertex_labels = 4;
  Label edge_labels = 4;
  /// Probability of planting a pattern instance instead of random edges.
  double alpha = 0.5;
  /// Symmetric Dirichlet concentration for component sizes.
  double beta = 512.0;
  std::uint64_t max_count = 1024;
  double max_average_degree = 4.0;
  std::size_t max_retries = 10;
};

/// (source label, edge label, target label) of a directed edge.
struct Signature {
  Label src = 0;
  Label edge = 0;
  Label dst = 0;
  auto operator<=>(const Signature&) const = default;
};

/// Neighbourhood equivalence classes of a pattern and the edge signatures
/// any match can use.
struct NecTree {
  /// Class id per pattern vertex (index space).
  std::vector<std::size_t> vertex_class;
  std::set<Signature> signatures;
  struct Bounds {
    std::size_t min_in = 0;
    std::size_t min_out = 0;
  };
  std::vector<Bounds> class_bounds;

  std::size_t class_count() const { return class_bounds.size(); }
  bool uses(const Signature& s) const { return signatures.contains(s); }
};

/// Graph under construction: a list of components whose vertices occupy
/// consecutive global indices, plus edges that may cross components.
class WorkingGraph {
 public:
  WorkingGraph(Label vertex_labels, Label edge_labels)
      : vertex_labels_(vertex_labels), edge_labels_(edge_labels) {}

  std::size_t add_component(std::span<const Label> labels);
  /// Adds (u, v, y) in global indices; false if already present or a loop.
  bool add_edge(std::size_t u, std::size_t v, Label y);
  bool has_edge(std::size_t u, std::size_t v, Label y) const;

  std::size_t vertex_count() const { return labels_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  std::size_t component_count() const { return starts_.size(); }
  std::pair<std::size_t, std::size_t> component_range(std::size_t c) const {
    return {starts_[c], c + 1 < starts_.size() ? starts_[c + 1] : labels_.size()};
  }
  std::size_t component_of(std::size_t v) const { return component_[v]; }
  Label label(std::size_t v) const { return labels_[v]; }
  Label vertex_labels() const { return vertex_labels_; }
  Label edge_labels() const { return edge_labels_; }
  std::span<const Edge> edges() const { return edges_; }

  /// Component c alone, with local ids 0..n-1.
  Graph component(std::size_t c) const;
  /// Whole graph with ids equal to global indices.
  Graph to_graph() const;

 private:
  Label vertex_labels_;
  Label edge_labels_;
  std::vector<Label> labels_;
  std::vector<std::size_t> component_;
  std::vector<std::size_t> starts_;
  std::vector<Edge> edges_;  // endpoints are global indices
  std::set<Edge> keys_;
};

/// Uniform random labelled tree (Pruefer) with random edge directions.
/// Vertex ids 0..n-1, all labels 0.
Graph generate_directed_tree(std::size_t n, Rng& rng);

Graph generate_pattern(const PatternParams& params, Rng& rng);

NecTree build_nec_tree(const Graph& pattern);

/// Sizes from a symmetric Dirichlet(beta) sample, component count uniform
/// in [1, max(1, n/8)].
std::vector<std::size_t> sample_component_sizes(std::size_t n, double beta, Rng& rng);
std::vector<std::size_t> sample_component_sizes(std::size_t n, double beta,
                                                std::size_t components, Rng& rng);

/// Adds up to `budget` random edges from component c1 to component c2 and
/// returns how many were added. Edges between different components avoid
/// every signature used by `nec` (when given), so they cannot take part in
/// any match. Throws kNoAdmissibleEdge if no such edge can exist.
std::size_t add_random_edges(WorkingGraph& g, std::size_t c1, std::size_t c2, const NecTree* nec,
                             std::size_t budget, Rng& rng);

/// Picks label-compatible vertices of component c and adds the pattern edges
/// they are missing. Returns the number of edges added.
std::size_t add_pattern_instance(WorkingGraph& g, std::size_t c, const Graph& pattern, Rng& rng);

struct MergeResult {
  Graph graph;
  /// Final vertex id for each global index of the working graph.
  std::vector<VertexId> id_of;
};

/// Merges the components and re-samples vertex ids as a permutation of
/// 0..n-1. Edges are emitted sorted.
MergeResult merge_and_shuffle(const WorkingGraph& g, Rng& rng, bool shuffle = true);
MergeResult merge_and_shuffle(std::span<const Graph> components, Rng& rng, bool shuffle = true);

struct Provenance {
  std::uint64_t seed = 0;
  std::size_t attempts = 0;
  std::vector<std::size_t> component_sizes;
  /// Component index of each vertex, indexed by final vertex id.
  std::vector<std::uint32_t> component_of;
};

struct GeneratedExample {
  Graph pattern;
  Graph graph;
  std::uint64_t count = 0;
  std::vector<IsoMapping> mappings;
  Provenance provenance;
};

/// Builds a graph whose subgraph isomorphism count against `pattern` is known
/// from per-component search. Rejects and retries when the count exceeds the
/// cap.
GeneratedExample generate_graph(const Graph& pattern, const GraphParams& params, Rng& rng);

}  // namespace subcount
