//
// subcount - Copyright 2026 The subcount Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <compare>
#include <cstddef>
#include <vector>

#include "subcount/common.hpp"
#include "subcount/graph.hpp"

namespace subcount {

enum class CodecErrc { kValueExceedsSpec, kIncompatibleSpecs, kBadSpec };
using CodecError = Error<CodecErrc>;

/// One edge as (u, v, X(u), y, X(v)).
struct EdgeTuple {
  VertexId u = 0;
  VertexId v = 0;
  Label xu = 0;
  Label y = 0;
  Label xv = 0;
  bool operator==(const EdgeTuple&) const = default;
};

using Code = std::vector<EdgeTuple>;

Code to_tuples(const Graph& g);

/// Edge order: u, then v, then y; xu then xv only break remaining ties.
std::strong_ordering compare_tuple(const EdgeTuple& a, const EdgeTuple& b);

/// Lexicographic extension of compare_tuple; a strict prefix orders first.
std::strong_ordering compare_code(const Code& a, const Code& b);

/// Edges sorted ascending by compare_tuple. Vertex ids are kept as given.
Code minimum_code(const Graph& g);

/// B-nary multi-hot layout. Values encoded under a spec must be strictly
/// below the corresponding maximum.
struct EncodingSpec {
  unsigned base = 2;
  std::size_t max_vertices = 1;
  std::size_t max_vertex_labels = 1;
  std::size_t max_edge_labels = 1;

  /// Smallest k with base^k >= max.
  std::size_t digits_for(std::size_t max) const;
  std::size_t vertex_digits() const { return digits_for(max_vertices); }
  std::size_t vertex_label_digits() const { return digits_for(max_vertex_labels); }
  std::size_t edge_label_digits() const { return digits_for(max_edge_labels); }

  /// Width of one encoded 5-tuple: B * (2*dv + 2*dx + dy).
  std::size_t tuple_width() const {
    return base * (2 * vertex_digits() + 2 * vertex_label_digits() + edge_label_digits());
  }
  /// Width of one encoded vertex label.
  std::size_t vertex_feature_width() const { return base * vertex_label_digits(); }

  void validate() const;
  bool operator==(const EncodingSpec&) const = default;
};

enum class EncodingLayout { kEdgeTuple, kVertexLabel };

/// Appends the one-hot digits of `value` (most significant first).
void encode_value(std::size_t value, std::size_t digits, unsigned base, std::span<double> out);
std::size_t decode_value(std::span<const double> in, std::size_t digits, unsigned base);

/// |code| x tuple_width() multi-hot matrix.
Matrix multi_hot_encode(const Code& code, const EncodingSpec& spec);
EdgeTuple decode_tuple(std::span<const double> row, const EncodingSpec& spec);

/// Vertex rows plus per-edge-label adjacency for message passing, all in the
/// index space of g.vertices().
struct VertexFeatureMatrix {
  Matrix features;
  /// relations[y] holds (src index, dst index) for every edge labelled y.
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> relations;
};

VertexFeatureMatrix vertex_features(const Graph& g, const EncodingSpec& spec);

/// For each column of the `from` layout, its column in the `to` layout. New
/// leading digits occupy the remaining columns.
std::vector<std::size_t> extension_column_map(const EncodingSpec& from, const EncodingSpec& to,
                                              EncodingLayout layout);

/// Re-expresses rows encoded under `from` in the wider `to` layout by
/// prepending zero digits to each group. Decoded values are unchanged.
Matrix extend_encoding(const Matrix& encoded, const EncodingSpec& from, const EncodingSpec& to,
                       EncodingLayout layout = EncodingLayout::kEdgeTuple);

}  // namespace subcount
