//
// subcount - Copyright 2026 The subcount Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "subcount/codec.hpp"

#include <algorithm>
#include <array>
#include <string>

namespace subcount {
namespace {

std::strong_ordering cmp(std::uint32_t a, std::uint32_t b) { return a <=> b; }

std::vector<std::size_t> group_digits(const EncodingSpec& s, EncodingLayout layout) {
  if (layout == EncodingLayout::kVertexLabel) return {s.vertex_label_digits()};
  return {s.vertex_digits(), s.vertex_digits(), s.vertex_label_digits(), s.edge_label_digits(),
          s.vertex_label_digits()};
}

}  // namespace

Code to_tuples(const Graph& g) {
  Code code;
  code.reserve(g.edge_count());
  for (const Edge& e : g.edges())
    code.push_back({e.src, e.dst, g.label_of(e.src), e.label, g.label_of(e.dst)});
  return code;
}

std::strong_ordering compare_tuple(const EdgeTuple& a, const EdgeTuple& b) {
  if (auto c = cmp(a.u, b.u); c != 0) return c;
  if (auto c = cmp(a.v, b.v); c != 0) return c;
  if (auto c = cmp(a.y, b.y); c != 0) return c;
  if (auto c = cmp(a.xu, b.xu); c != 0) return c;
  return cmp(a.xv, b.xv);
}

std::strong_ordering compare_code(const Code& a, const Code& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i)
    if (auto c = compare_tuple(a[i], b[i]); c != 0) return c;
  return a.size() <=> b.size();
}

Code minimum_code(const Graph& g) {
  Code code = to_tuples(g);
  std::sort(code.begin(), code.end(),
            [](const EdgeTuple& a, const EdgeTuple& b) { return compare_tuple(a, b) < 0; });
  return code;
}

std::size_t EncodingSpec::digits_for(std::size_t max) const {
  std::size_t k = 0;
  std::size_t reach = 1;
  while (reach < max) {
    reach *= base;
    ++k;
  }
  return k;
}

void EncodingSpec::validate() const {
  if (base < 2) throw CodecError(CodecErrc::kBadSpec, "base must be at least 2");
  if (max_vertices == 0 || max_vertex_labels == 0 || max_edge_labels == 0)
    throw CodecError(CodecErrc::kBadSpec, "maxima must be positive");
}

void encode_value(std::size_t value, std::size_t digits, unsigned base, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t d = digits; d-- > 0;) {
    out[d * base + value % base] = 1.0;
    value /= base;
  }
}

std::size_t decode_value(std::span<const double> in, std::size_t digits, unsigned base) {
  std::size_t value = 0;
  for (std::size_t d = 0; d < digits; ++d) {
    const auto group = in.subspan(d * base, base);
    const auto hot = std::max_element(group.begin(), group.end()) - group.begin();
    value = value * base + static_cast<std::size_t>(hot);
  }
  return value;
}

Matrix multi_hot_encode(const Code& code, const EncodingSpec& spec) {
  spec.validate();
  const std::size_t dv = spec.vertex_digits();
  const std::size_t dx = spec.vertex_label_digits();
  const std::size_t dy = spec.edge_label_digits();
  const unsigned b = spec.base;
  Matrix out(code.size(), spec.tuple_width());
  for (std::size_t r = 0; r < code.size(); ++r) {
    const EdgeTuple& t = code[r];
    if (t.u >= spec.max_vertices || t.v >= spec.max_vertices)
      throw CodecError(CodecErrc::kValueExceedsSpec,
                       "vertex id exceeds max " + std::to_string(spec.max_vertices));
    if (t.xu >= spec.max_vertex_labels || t.xv >= spec.max_vertex_labels)
      throw CodecError(CodecErrc::kValueExceedsSpec, "vertex label exceeds spec");
    if (t.y >= spec.max_edge_labels)
      throw CodecError(CodecErrc::kValueExceedsSpec, "edge label exceeds spec");
    auto row = out.row(r);
    std::size_t at = 0;
    const std::array<std::pair<std::size_t, std::size_t>, 5> fields{
        {{t.u, dv}, {t.v, dv}, {t.xu, dx}, {t.y, dy}, {t.xv, dx}}};
    for (const auto& [value, digits] : fields) {
      encode_value(value, digits, b, row.subspan(at, digits * b));
      at += digits * b;
    }
  }
  return out;
}

EdgeTuple decode_tuple(std::span<const double> row, const EncodingSpec& spec) {
  const std::size_t dv = spec.vertex_digits();
  const std::size_t dx = spec.vertex_label_digits();
  const std::size_t dy = spec.edge_label_digits();
  const unsigned b = spec.base;
  std::size_t at = 0;
  auto next = [&](std::size_t digits) {
    const auto v = decode_value(row.subspan(at, digits * b), digits, b);
    at += digits * b;
    return static_cast<std::uint32_t>(v);
  };
  EdgeTuple t;
  t.u = next(dv);
  t.v = next(dv);
  t.xu = next(dx);
  t.y = next(dy);
  t.xv = next(dx);
  return t;
}

VertexFeatureMatrix vertex_features(const Graph& g, const EncodingSpec& spec) {
  spec.validate();
  const std::size_t dx = spec.vertex_label_digits();
  VertexFeatureMatrix out;
  out.features = Matrix(g.vertex_count(), spec.vertex_feature_width());
  for (std::size_t i = 0; i < g.vertex_count(); ++i) {
    const Label x = g.vertices()[i].label;
    if (x >= spec.max_vertex_labels)
      throw CodecError(CodecErrc::kValueExceedsSpec, "vertex label exceeds spec");
    encode_value(x, dx, spec.base, out.features.row(i));
  }
  out.relations.resize(spec.max_edge_labels);
  for (const Edge& e : g.edges()) {
    if (e.label >= spec.max_edge_labels)
      throw CodecError(CodecErrc::kValueExceedsSpec, "edge label exceeds spec");
    out.relations[e.label].emplace_back(static_cast<std::uint32_t>(g.index_of(e.src)),
                                        static_cast<std::uint32_t>(g.index_of(e.dst)));
  }
  return out;
}

std::vector<std::size_t> extension_column_map(const EncodingSpec& from, const EncodingSpec& to,
                                              EncodingLayout layout) {
  from.validate();
  to.validate();
  if (from.base != to.base)
    throw CodecError(CodecErrc::kIncompatibleSpecs, "encodings use different bases");
  const auto old_groups = group_digits(from, layout);
  const auto new_groups = group_digits(to, layout);
  std::vector<std::size_t> map;
  std::size_t new_at = 0;
  const unsigned b = from.base;
  for (std::size_t g = 0; g < old_groups.size(); ++g) {
    if (new_groups[g] < old_groups[g])
      throw CodecError(CodecErrc::kIncompatibleSpecs, "target encoding is narrower");
    const std::size_t lead = (new_groups[g] - old_groups[g]) * b;
    for (std::size_t c = 0; c < old_groups[g] * b; ++c) map.push_back(new_at + lead + c);
    new_at += new_groups[g] * b;
  }
  return map;
}

Matrix extend_encoding(const Matrix& encoded, const EncodingSpec& from, const EncodingSpec& to,
                       EncodingLayout layout) {
  const auto map = extension_column_map(from, to, layout);
  if (encoded.cols != map.size())
    throw CodecError(CodecErrc::kIncompatibleSpecs, "matrix width does not match source spec");
  const auto new_groups = group_digits(to, layout);
  const auto old_groups = group_digits(from, layout);
  const unsigned b = to.base;
  const std::size_t width = layout == EncodingLayout::kVertexLabel ? to.vertex_feature_width()
                                                                   : to.tuple_width();
  Matrix out(encoded.rows, width);
  for (std::size_t r = 0; r < encoded.rows; ++r) {
    auto row = out.row(r);
    std::size_t new_at = 0;
    for (std::size_t g = 0; g < new_groups.size(); ++g) {
      // Leading zero digits select one-hot position 0.
      for (std::size_t d = 0; d < new_groups[g] - old_groups[g]; ++d) row[new_at + d * b] = 1.0;
      new_at += new_groups[g] * b;
    }
    for (std::size_t c = 0; c < map.size(); ++c) row[map[c]] = encoded(r, c);
  }
  return out;
}

}  // namespace subcount
