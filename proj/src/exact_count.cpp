//
// subcount - Copyright 2026 The subcount Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "subcount/exact_count.hpp"

#include <algorithm>
#include <string>

namespace subcount {
namespace {

using Clock = std::chrono::steady_clock;

IsoMapping make_mapping(const Graph& pattern, const Graph& graph,
                        std::span<const std::size_t> image) {
  IsoMapping m;
  m.pairs.reserve(image.size());
  for (std::size_t p = 0; p < image.size(); ++p)
    m.pairs.emplace_back(graph.vertices()[image[p]].id, pattern.vertices()[p].id);
  return m;
}

// Search state for one (pattern, graph) pair.
class Vf2Search {
 public:
  Vf2Search(const Graph& pattern, const Graph& graph, const CountOptions& opts)
      : p_(pattern), g_(graph), opts_(opts), start_(Clock::now()) {
    order_ = vf2_match_order(pattern);
    const std::size_t k = order_.size();
    std::vector<std::size_t> pos_of(k);
    for (std::size_t i = 0; i < k; ++i) pos_of[order_[i]] = i;

    checks_.resize(k);
    anchor_.assign(k, Anchor{});
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t u = order_[i];
      for (const auto& a : p_.out_arcs(u)) {
        const std::size_t j = pos_of[a.to];
        if (j <= i) checks_[i].push_back({j, true, a.label});
        if (j < i && !anchor_[i].valid) anchor_[i] = {true, j, false};
      }
      for (const auto& a : p_.in_arcs(u)) {
        const std::size_t j = pos_of[a.to];
        if (j < i) checks_[i].push_back({j, false, a.label});
        if (j < i && !anchor_[i].valid) anchor_[i] = {true, j, true};
      }
    }
    image_.assign(k, 0);
    used_.assign(g_.vertex_count(), 0);
    if (opts_.keep_mappings) mappings_.emplace();
  }

  CountResult run() {
    if (order_.size() <= g_.vertex_count()) extend(0);
    CountResult r;
    r.count = count_;
    r.mappings = std::move(mappings_);
    r.nodes_expanded = nodes_;
    r.limit_exceeded = stopped_;
    r.elapsed = Clock::now() - start_;
    return r;
  }

 private:
  struct Check {
    std::size_t pos;  // earlier position in the order (or self)
    bool outgoing;    // pattern edge goes from the current vertex to order_[pos]
    Label label;
  };
  struct Anchor {
    bool valid = false;
    std::size_t pos = 0;
    bool from_anchor = false;  // pattern edge goes from order_[pos] to the current vertex
  };

  bool feasible(std::size_t i, std::size_t c) const {
    const std::size_t u = order_[i];
    if (used_[c]) return false;
    if (g_.vertices()[c].label != p_.vertices()[u].label) return false;
    if (g_.out_degree(c) < p_.out_degree(u) || g_.in_degree(c) < p_.in_degree(u)) return false;
    for (const Check& chk : checks_[i]) {
      const std::size_t other = chk.pos == i ? c : image_[chk.pos];
      const bool ok = chk.outgoing ? g_.has_arc(c, other, chk.label)
                                   : g_.has_arc(other, c, chk.label);
      if (!ok) return false;
    }
    return true;
  }

  void tick() {
    ++nodes_;
    if (opts_.timeout && (nodes_ & 1023) == 0 && Clock::now() - start_ > *opts_.timeout)
      throw CountError(CountErrc::kTimeout,
                       "vf2 timed out after " + std::to_string(nodes_) +
                           " nodes (partial count " + std::to_string(count_) + ")");
  }

  void try_candidate(std::size_t i, std::size_t c) {
    if (stopped_ || !feasible(i, c)) return;
    tick();
    image_[i] = c;
    used_[c] = 1;
    extend(i + 1);
    used_[c] = 0;
  }

  void extend(std::size_t i) {
    if (stopped_) return;
    if (i == order_.size()) {
      ++count_;
      if (mappings_) {
        std::vector<std::size_t> by_pattern(order_.size());
        for (std::size_t j = 0; j < order_.size(); ++j) by_pattern[order_[j]] = image_[j];
        mappings_->push_back(make_mapping(p_, g_, by_pattern));
      }
      if (opts_.limit && count_ > *opts_.limit) stopped_ = true;
      return;
    }
    const Anchor& a = anchor_[i];
    if (a.valid) {
      const std::size_t src = image_[a.pos];
      const auto arcs = a.from_anchor ? g_.out_arcs(src) : g_.in_arcs(src);
      for (std::size_t k = 0; k < arcs.size(); ++k) {
        if (k > 0 && arcs[k].to == arcs[k - 1].to) continue;
        try_candidate(i, arcs[k].to);
      }
    } else {
      for (std::size_t c = 0; c < g_.vertex_count(); ++c) try_candidate(i, c);
    }
  }

  const Graph& p_;
  const Graph& g_;
  const CountOptions& opts_;
  Clock::time_point start_;
  std::vector<std::size_t> order_;
  std::vector<std::vector<Check>> checks_;
  std::vector<Anchor> anchor_;
  std::vector<std::size_t> image_;
  std::vector<char> used_;
  std::optional<std::vector<IsoMapping>> mappings_;
  std::uint64_t count_ = 0;
  std::uint64_t nodes_ = 0;
  bool stopped_ = false;
};

}  // namespace

std::vector<std::size_t> vf2_match_order(const Graph& pattern) {
  const std::size_t k = pattern.vertex_count();
  std::vector<char> placed(k, 0);
  std::vector<char> frontier(k, 0);
  std::vector<std::size_t> order;
  order.reserve(k);
  auto degree = [&](std::size_t v) { return pattern.out_degree(v) + pattern.in_degree(v); };
  auto better = [&](std::size_t a, std::size_t b) {
    if (degree(a) != degree(b)) return degree(a) > degree(b);
    return pattern.vertices()[a].id < pattern.vertices()[b].id;
  };
  while (order.size() < k) {
    // Prefer vertices adjacent to the placed set so candidates come from
    // neighbourhoods; fall back to any vertex when starting a new component.
    std::optional<std::size_t> best;
    for (std::size_t v = 0; v < k; ++v)
      if (!placed[v] && frontier[v] && (!best || better(v, *best))) best = v;
    if (!best)
      for (std::size_t v = 0; v < k; ++v)
        if (!placed[v] && (!best || better(v, *best))) best = v;
    placed[*best] = 1;
    order.push_back(*best);
    for (const auto& a : pattern.out_arcs(*best)) frontier[a.to] = 1;
    for (const auto& a : pattern.in_arcs(*best)) frontier[a.to] = 1;
  }
  return order;
}

CountResult vf2_count(const Graph& pattern, const Graph& graph, const CountOptions& opts) {
  Vf2Search search(pattern, graph, opts);
  return search.run();
}

CountResult count_brute_force(const Graph& pattern, const Graph& graph,
                              const BruteForceOptions& opts) {
  if (graph.vertex_count() > opts.max_graph_vertices)
    throw CountError(CountErrc::kSizeGuardExceeded,
                     "brute force limited to " + std::to_string(opts.max_graph_vertices) +
                         " graph vertices");
  const auto start = Clock::now();
  CountResult r;
  if (opts.keep_mappings) r.mappings.emplace();
  const std::size_t k = pattern.vertex_count();
  const std::size_t n = graph.vertex_count();
  if (k > n) {
    r.elapsed = Clock::now() - start;
    return r;
  }
  std::vector<std::size_t> image(k);
  std::vector<char> used(n, 0);

  auto accept = [&]() {
    for (std::size_t p = 0; p < k; ++p)
      if (graph.vertices()[image[p]].label != pattern.vertices()[p].label) return false;
    for (const Edge& e : pattern.edges())
      if (!graph.has_arc(image[pattern.index_of(e.src)], image[pattern.index_of(e.dst)], e.label))
        return false;
    return true;
  };

  // Plain enumeration of Perm(n, k) assignments; no pruning before the leaf.
  auto rec = [&](auto&& self, std::size_t p) -> void {
    ++r.nodes_expanded;
    if (p == k) {
      if (accept()) {
        ++r.count;
        if (r.mappings) r.mappings->push_back(make_mapping(pattern, graph, image));
      }
      return;
    }
    for (std::size_t c = 0; c < n; ++c) {
      if (used[c]) continue;
      used[c] = 1;
      image[p] = c;
      self(self, p + 1);
      used[c] = 0;
    }
  };
  rec(rec, 0);
  r.elapsed = Clock::now() - start;
  return r;
}

CountResult per_component_count(std::span<const Graph> components, const Graph& pattern,
                                const CountOptions& opts) {
  CountResult total;
  if (opts.keep_mappings) total.mappings.emplace();
  for (const Graph& c : components) {
    CountResult part = vf2_count(pattern, c, opts);
    total.count += part.count;
    total.nodes_expanded += part.nodes_expanded;
    total.elapsed += part.elapsed;
    total.limit_exceeded = total.limit_exceeded || part.limit_exceeded;
    if (part.mappings)
      for (auto& m : *part.mappings) total.mappings->push_back(std::move(m));
    if (opts.limit && total.count > *opts.limit) {
      total.limit_exceeded = true;
      break;
    }
  }
  return total;
}

}  // namespace subcount
