//
// subcount - Copyright 2026 The subcount Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "subcount/graph.hpp"

namespace subcount {

enum class CountErrc { kSizeGuardExceeded, kTimeout };
using CountError = Error<CountErrc>;

struct CountResult {
  std::uint64_t count = 0;
  std::optional<std::vector<IsoMapping>> mappings;
  std::chrono::duration<double> elapsed{0.0};
  std::uint64_t nodes_expanded = 0;
  /// Set when CountOptions::limit stopped the search early; `count` is then
  /// limit + 1 and only proves the true count exceeds the limit.
  bool limit_exceeded = false;
};

struct CountOptions {
  bool keep_mappings = false;
  /// Wall-clock limit; exceeding it throws CountError{kTimeout}.
  std::optional<std::chrono::duration<double>> timeout;
  /// Stop as soon as more than `limit` mappings have been found.
  std::optional<std::uint64_t> limit;
};

struct BruteForceOptions {
  bool keep_mappings = false;
  std::size_t max_graph_vertices = 12;
};

/// Enumerates every injective assignment of pattern vertices to graph
/// vertices and counts those that are subgraph isomorphisms. Exponential;
/// guarded by max_graph_vertices.
CountResult count_brute_force(const Graph& pattern, const Graph& graph,
                              const BruteForceOptions& opts = {});

/// VF2-style backtracking counter. Counts bijections, not vertex subsets.
CountResult vf2_count(const Graph& pattern, const Graph& graph, const CountOptions& opts = {});

/// Sum of vf2_count over disjoint components, mappings concatenated.
CountResult per_component_count(std::span<const Graph> components, const Graph& pattern,
                                const CountOptions& opts = {});

/// Pattern vertex indices in the order the VF2 search extends them.
std::vector<std::size_t> vf2_match_order(const Graph& pattern);

}  // namespace subcount
