//
// subcount - Copyright 2026 The subcount Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "subcount/models.hpp"

#include <algorithm>
#include <cctype>
#include <string_view>
#include <cmath>
#include <sstream>

namespace subcount {

using nk::Mask;
using nk::ParamStore;
using nk::PoolMode;
using nk::Tape;
using nk::Var;

namespace {

[[noreturn]] void bad_config(const std::string& what) { throw ModelError(ModelErrc::kBadConfig, what); }

Mask leading_mask(std::size_t rows, std::size_t valid) {
  if (valid >= rows) return {};
  Mask m(rows, 0);
  std::fill_n(m.begin(), valid, 1);
  return m;
}

/// Zeroes rows at index >= valid.
Var mask_rows(Var x, std::size_t valid) {
  const std::size_t rows = x.rows();
  if (valid >= rows) return x;
  Matrix keep(rows, 1);
  std::fill_n(keep.data.begin(), valid, 1.0);
  return nk::mul_col(x, x.tape->constant(std::move(keep)));
}

Var act(Var x) { return nk::leaky_relu(x, 0.01); }

Var drop(Var x, const ModelConfig& c, const ForwardOptions& o) {
  if (!o.train || !o.rng || c.dropout <= 0.0) return x;
  return nk::dropout(x, c.dropout, *o.rng, true);
}

Var param(Tape& t, ParamStore& s, const std::string& name) { return t.param(s, name); }

Var linear(Tape& t, ParamStore& s, const std::string& p, Var x) {
  return nk::dense(x, param(t, s, p + ".w"), param(t, s, p + ".b"));
}

/// sigmoid(a U^T + b V^T), or a constant when gates are forced.
Var gate(Tape& t, ParamStore& s, const std::string& u, const std::string& v, Var a, Var b,
         const ForwardOptions& o) {
  if (o.force_gates) return t.constant(Matrix(a.rows(), a.cols(), *o.force_gates));
  return nk::sigmoid(nk::add(nk::dense(a, param(t, s, u)), nk::dense(b, param(t, s, v))));
}

/// z * a + (1 - z) * b
Var blend(Var z, Var a, Var b) { return nk::add(nk::mul(z, a), nk::mul(nk::one_minus(z), b)); }

std::string rep_prefix(const ModelConfig& c, bool pattern) {
  if (c.shared) return "rep";
  return pattern ? "rep.pattern" : "rep.graph";
}

void add_linear(ParamStore& s, const std::string& p, std::size_t out, std::size_t in, Rng& rng) {
  s.add_glorot(p + ".w", out, in, rng);
  s.add_zeros(p + ".b", 1, out);
}

void init_representation(ParamStore& s, const ModelConfig& c, const std::string& p, Rng& rng) {
  const std::size_t d = c.hidden;
  for (std::size_t l = 0; l < c.layers; ++l) {
    const std::string lp = p + ".l" + std::to_string(l);
    if (c.representation == Representation::kCnn) {
      add_linear(s, lp + ".conv", d, (l + 2) * d, rng);
      continue;
    }
    s.add_glorot(lp + ".self", d, d, rng);
    s.add_zeros(lp + ".b", 1, d);
    for (std::size_t y = 0; y < c.encoding.max_edge_labels; ++y)
      s.add_glorot(lp + ".rel" + std::to_string(y), d, d / c.blocks, rng);
    if (c.representation == Representation::kRgin) {
      add_linear(s, lp + ".mlp1", d, d, rng);
      add_linear(s, lp + ".mlp2", d, d, rng);
    }
  }
}

nk::MultiHeadAttention attention(const ModelConfig& c, const std::string& name) {
  return nk::MultiHeadAttention(name, c.hidden, c.heads);
}

Matrix widen_cols(const Matrix& m, const std::vector<std::size_t>& map, std::size_t width) {
  Matrix out(m.rows, width);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t j = 0; j < map.size(); ++j) out(r, map[j]) = m(r, j);
  return out;
}

const std::pair<Representation, const char*> kRepNames[] = {
    {Representation::kCnn, "CNN"}, {Representation::kRgcn, "RGCN"}, {Representation::kRgin, "RGIN"}};
const std::pair<Interaction, const char*> kInterNames[] = {
    {Interaction::kSumPool, "SumPool"}, {Interaction::kMeanPool, "MeanPool"},
    {Interaction::kMaxPool, "MaxPool"}, {Interaction::kMemAttn, "MemAttn"},
    {Interaction::kDiamNet, "DIAMNet"}};
const std::pair<PoolMode, const char*> kPoolNames[] = {
    {PoolMode::kSum, "sum"}, {PoolMode::kMean, "mean"}, {PoolMode::kMax, "max"}};

bool same_name(const std::string& a, const char* b) {
  const std::string_view bv(b);
  return a.size() == bv.size() && std::equal(a.begin(), a.end(), bv.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

// --- config ---------------------------------------------------------------------

void ModelConfig::validate() const {
  if (hidden < 2) bad_config("hidden must be at least 2");
  if (heads == 0 || hidden % heads != 0) bad_config("heads must divide hidden");
  if (blocks == 0 || hidden % blocks != 0) bad_config("blocks must divide hidden");
  if (memory == 0) bad_config("memory must be at least 1");
  if (layers == 0) bad_config("layers must be at least 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) bad_config("dropout must be in [0, 1)");
  if (interaction == Interaction::kMemAttn && steps == 0) bad_config("MemAttn needs steps >= 1");
  try {
    encoding.validate();
  } catch (const CodecError& e) {
    bad_config(e.what());
  }
}

std::string to_string(Representation r) {
  for (auto [k, v] : kRepNames)
    if (k == r) return v;
  return "?";
}

std::string to_string(Interaction i) {
  for (auto [k, v] : kInterNames)
    if (k == i) return v;
  return "?";
}

Representation parse_representation(const std::string& s) {
  for (auto [k, v] : kRepNames)
    if (same_name(s, v)) return k;
  bad_config("unknown representation '" + s + "'");
}

Interaction parse_interaction(const std::string& s) {
  for (auto [k, v] : kInterNames)
    if (same_name(s, v)) return k;
  bad_config("unknown interaction '" + s + "'");
}

std::string format_model_config(const ModelConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "representation = " << to_string(c.representation) << '\n'
     << "interaction = " << to_string(c.interaction) << '\n'
     << "hidden = " << c.hidden << '\n'
     << "memory = " << c.memory << '\n'
     << "steps = " << c.steps << '\n'
     << "heads = " << c.heads << '\n'
     << "layers = " << c.layers << '\n'
     << "blocks = " << c.blocks << '\n'
     << "dropout = " << c.dropout << '\n'
     << "shared = " << (c.shared ? "true" : "false") << '\n'
     << "filter = " << (c.filter ? "true" : "false") << '\n';
  for (auto [k, v] : kPoolNames)
    if (k == c.mem_init) os << "mem_init = " << v << '\n';
  os << "base = " << c.encoding.base << '\n'
     << "max_vertices = " << c.encoding.max_vertices << '\n'
     << "max_vertex_labels = " << c.encoding.max_vertex_labels << '\n'
     << "max_edge_labels = " << c.encoding.max_edge_labels << '\n';
  return os.str();
}

ModelConfig parse_model_config(const std::string& text) {
  ModelConfig c;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto eq = line.find('=');
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) bad_config("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto count = [&]() -> std::size_t {
      std::size_t pos = 0;
      unsigned long long v = 0;
      try {
        v = std::stoull(value, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos == 0 || pos != value.size() || value[0] == '-')
        bad_config("line " + std::to_string(lineno) + ": bad integer for " + key);
      return static_cast<std::size_t>(v);
    };
    auto flag = [&]() {
      if (value == "true" || value == "1") return true;
      if (value == "false" || value == "0") return false;
      bad_config("line " + std::to_string(lineno) + ": bad boolean for " + key);
    };
    if (key == "representation") c.representation = parse_representation(value);
    else if (key == "interaction") c.interaction = parse_interaction(value);
    else if (key == "hidden") c.hidden = count();
    else if (key == "memory") c.memory = count();
    else if (key == "steps") c.steps = count();
    else if (key == "heads") c.heads = count();
    else if (key == "layers") c.layers = count();
    else if (key == "blocks") c.blocks = count();
    else if (key == "shared") c.shared = flag();
    else if (key == "filter") c.filter = flag();
    else if (key == "base") c.encoding.base = static_cast<unsigned>(count());
    else if (key == "max_vertices") c.encoding.max_vertices = count();
    else if (key == "max_vertex_labels") c.encoding.max_vertex_labels = count();
    else if (key == "max_edge_labels") c.encoding.max_edge_labels = count();
    else if (key == "dropout") {
      try {
        std::size_t pos = 0;
        c.dropout = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        bad_config("line " + std::to_string(lineno) + ": bad number for dropout");
      }
    } else if (key == "mem_init") {
      bool found = false;
      for (auto [k, v] : kPoolNames)
        if (value == v) {
          c.mem_init = k;
          found = true;
        }
      if (!found) bad_config("unknown mem_init '" + value + "'");
    } else {
      bad_config("line " + std::to_string(lineno) + ": unknown key " + key);
    }
  }
  c.validate();
  return c;
}

// --- inputs ---------------------------------------------------------------------

Mask ModelInput::mask() const { return leading_mask(features.rows, valid_rows); }

ModelInput encode_input(const Graph& g, const ModelConfig& config) {
  ModelInput in;
  in.vertex_count = g.vertex_count();
  in.edge_count = g.edge_count();
  if (config.graph_view()) {
    VertexFeatureMatrix vf = vertex_features(g, config.encoding);
    in.features = std::move(vf.features);
    in.relations = std::move(vf.relations);
  } else {
    in.features = multi_hot_encode(minimum_code(g), config.encoding);
  }
  in.valid_rows = in.features.rows;
  return in;
}

ModelInput pad_input(ModelInput in, std::size_t rows) {
  if (in.features.rows >= rows) return in;
  Matrix m(rows, in.features.cols);
  std::copy(in.features.data.begin(), in.features.data.end(), m.data.begin());
  in.features = std::move(m);
  return in;
}

ModelInput extend_input(const ModelInput& in, const EncodingSpec& from, const EncodingSpec& to,
                        EncodingLayout layout) {
  ModelInput out = in;
  out.features = subcount::extend_encoding(in.features, from, to, layout);
  // Padding rows stay zero.
  for (std::size_t r = in.valid_rows; r < out.features.rows; ++r)
    for (double& x : out.features.row(r)) x = 0.0;
  return out;
}

// --- blocks ---------------------------------------------------------------------

Var filter_net(Tape& t, ParamStore& s, Var pattern, const Mask& pattern_mask, Var graph,
               const Mask& graph_mask) {
  (void)graph_mask;  // padding rows are zero and stay zero after scaling
  if (pattern.cols() != graph.cols())
    throw ModelError(ModelErrc::kShapeMismatch, "pattern and graph encodings differ in width");
  const Var pbar = nk::pool_rows(pattern, PoolMode::kMax, pattern_mask);
  const Var ghat = nk::dense(graph, t.param(s, "filter.wg"));
  const Var f = nk::sigmoid(nk::dense(nk::mul_row(ghat, pbar), t.param(s, "filter.wf")));
  return nk::mul_col(graph, f);
}

Rep cnn_represent(Tape& t, ParamStore& s, const ModelConfig& c, const std::string& prefix, Var x,
                  std::size_t valid, const ForwardOptions& o) {
  if (valid == 0) throw ModelError(ModelErrc::kEmptySequence, "empty edge sequence");
  Rep r{x, valid};
  for (std::size_t l = 0; l < c.layers; ++l) {
    const std::size_t k = l + 2;
    const std::string lp = prefix + ".l" + std::to_string(l) + ".conv";
    const Var y = nk::conv_pool_block(r.rows, param(t, s, lp + ".w"), param(t, s, lp + ".b"), k);
    r.valid = std::max(r.valid, 2 * k - 1) - 2 * (k - 1);
    r.rows = mask_rows(drop(act(y), c, o), r.valid);
  }
  return r;
}

Rep rgcn_represent(Tape& t, ParamStore& s, const ModelConfig& c, const std::string& prefix, Var x,
                   const ModelInput& in, const ForwardOptions& o) {
  const std::size_t rows = x.rows();
  const std::size_t nrel = c.encoding.max_edge_labels;
  for (std::size_t y = nrel; y < in.relations.size(); ++y)
    if (!in.relations[y].empty())
      throw ModelError(ModelErrc::kUnknownRelationLabel, "edge label " + std::to_string(y));

  struct Rel {
    std::size_t label;
    std::vector<std::uint32_t> src, dst;
    Var inv_degree;
  };
  std::vector<Rel> rels;
  for (std::size_t y = 0; y < std::min(nrel, in.relations.size()); ++y) {
    if (in.relations[y].empty()) continue;
    Rel rel{y, {}, {}, {}};
    std::vector<double> deg(rows, 0.0);
    for (auto [a, b] : in.relations[y]) {
      rel.src.push_back(a);
      rel.dst.push_back(b);
      deg[b] += 1.0;
    }
    if (c.representation == Representation::kRgcn) {
      Matrix inv(rows, 1);
      for (std::size_t i = 0; i < rows; ++i) inv.data[i] = deg[i] > 0 ? 1.0 / deg[i] : 0.0;
      rel.inv_degree = t.constant(std::move(inv));
    }
    rels.push_back(std::move(rel));
  }

  Var h = x;
  for (std::size_t l = 0; l < c.layers; ++l) {
    const std::string lp = prefix + ".l" + std::to_string(l);
    Var u = nk::add_row(nk::dense(h, param(t, s, lp + ".self")), param(t, s, lp + ".b"));
    for (const Rel& rel : rels) {
      const Var msg = nk::block_diag_nt(nk::gather_rows(h, rel.src),
                                        param(t, s, lp + ".rel" + std::to_string(rel.label)), c.blocks);
      Var agg = nk::scatter_add_rows(msg, rel.dst, rows);
      if (c.representation == Representation::kRgcn) agg = nk::mul_col(agg, rel.inv_degree);
      u = nk::add(u, agg);
    }
    Var update = act(u);
    if (c.representation == Representation::kRgin)
      update = act(linear(t, s, lp + ".mlp2", act(linear(t, s, lp + ".mlp1", update))));
    h = mask_rows(nk::add(h, drop(update, c, o)), in.valid_rows);
  }
  return {h, in.valid_rows};
}

Var mem_init(Var rows, std::size_t valid, std::size_t m, PoolMode mode) {
  if (valid == 0 || m == 0) throw ModelError(ModelErrc::kShapeMismatch, "memory from empty input");
  const std::size_t stride = valid / m;
  const std::size_t k = valid - (m - 1) * stride;
  std::vector<Var> blocks;
  blocks.reserve(m);
  for (std::size_t i = 0; i < m; ++i)
    blocks.push_back(nk::pool_rows(nk::slice_rows(rows, i * stride, k), mode));
  return nk::concat_rows(blocks);
}

Var size_features(Tape& t, const ModelInput& pattern, const ModelInput& graph) {
  auto f = [](std::size_t n) { return std::log1p(static_cast<double>(n)); };
  return t.constant(Matrix(1, 4, {f(pattern.vertex_count), f(pattern.edge_count),
                                  f(graph.vertex_count), f(graph.edge_count)}));
}

Var pool_interact(Tape& t, const Rep& graph, const Rep& pattern, Var sizes, PoolMode mode) {
  (void)t;
  const Var g = nk::pool_rows(graph.rows, mode, leading_mask(graph.rows.rows(), graph.valid));
  const Var p = nk::pool_rows(pattern.rows, mode, leading_mask(pattern.rows.rows(), pattern.valid));
  const Var parts[] = {g, p, nk::sub(g, p), nk::mul(g, p), sizes};
  return nk::concat_cols(parts);
}

Var diamnet_interact(Tape& t, ParamStore& s, const ModelConfig& c, const Rep& pattern,
                     const Rep& graph, const ForwardOptions& o) {
  const auto att1 = attention(c, "diamnet.att1");
  const auto att2 = attention(c, "diamnet.att2");
  const auto kv_p = att1.project(t, s, pattern.rows, pattern.rows,
                                 leading_mask(pattern.rows.rows(), pattern.valid));
  const auto kv_g =
      att2.project(t, s, graph.rows, graph.rows, leading_mask(graph.rows.rows(), graph.valid));
  Var mem = mem_init(graph.rows, graph.valid, c.memory, c.mem_init);
  for (std::size_t step = 0; step < c.steps; ++step) {
    const Var sp = att1.attend(t, s, mem, kv_p);
    const Var z = gate(t, s, "diamnet.up", "diamnet.vp", mem, sp, o);
    const Var sbar = blend(z, mem, sp);
    const Var sg = att2.attend(t, s, sbar, kv_g);
    const Var zt = gate(t, s, "diamnet.ug", "diamnet.vg", sbar, sg, o);
    mem = blend(zt, sbar, sg);
  }
  return mem;
}

Var memattn_interact(Tape& t, ParamStore& s, const ModelConfig& c, const Rep& pattern,
                     const Rep& graph, const ForwardOptions& o) {
  const auto att1 = attention(c, "memattn.att1");
  const auto att2 = attention(c, "memattn.att2");
  // The pattern memory does not change between steps, so it is built once.
  const Var mp = mem_init(pattern.rows, pattern.valid, c.memory, c.mem_init);
  const auto kv_p = att1.project(t, s, mp, mp);
  Var g = graph.rows;
  for (std::size_t step = 0; step < c.steps; ++step) {
    const Var sp = att1.attend(t, s, g, kv_p);
    const Var z = gate(t, s, "memattn.up", "memattn.vp", g, sp, o);
    const Var sbar = mask_rows(blend(z, g, sp), graph.valid);
    const Var mbar = mem_init(sbar, graph.valid, c.memory, c.mem_init);
    const Var ss = att2.forward(t, s, sbar, mbar, mbar);
    const Var zt = gate(t, s, "memattn.us", "memattn.vs", sbar, ss, o);
    g = mask_rows(blend(zt, sbar, ss), graph.valid);
  }
  return g;
}

Var predict_head(Tape& t, ParamStore& s, Var features) {
  return linear(t, s, "head.l2", act(linear(t, s, "head.l1", features)));
}

std::size_t head_input_width(const ModelConfig& c) {
  if (c.interaction == Interaction::kDiamNet) return c.memory * c.hidden + 4;
  return 4 * c.hidden + 4;
}

// --- model ----------------------------------------------------------------------

Model::Model(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  Rng rng(seed);
  const std::size_t d = config_.hidden;
  const std::size_t w = config_.input_width();
  if (config_.filter) {
    params_.add_glorot("filter.wg", w, w, rng);
    params_.add_glorot("filter.wf", 1, w, rng);
  }
  add_linear(params_, "in.pattern", d, w, rng);
  add_linear(params_, "in.graph", d, w, rng);
  init_representation(params_, config_, rep_prefix(config_, true), rng);
  if (!config_.shared) init_representation(params_, config_, rep_prefix(config_, false), rng);
  if (config_.interaction == Interaction::kDiamNet || config_.interaction == Interaction::kMemAttn) {
    const std::string p = config_.interaction == Interaction::kDiamNet ? "diamnet" : "memattn";
    attention(config_, p + ".att1").init(params_, rng);
    attention(config_, p + ".att2").init(params_, rng);
    const char* second = config_.interaction == Interaction::kDiamNet ? "g" : "s";
    for (const std::string& n : {std::string("up"), std::string("vp"), std::string("u") + second,
                                std::string("v") + second})
      params_.add_glorot(p + "." + n, d, d, rng);
  }
  add_linear(params_, "head.l1", d / 2, head_input_width(config_), rng);
  add_linear(params_, "head.l2", 1, d / 2, rng);
}

Model::Model(ModelConfig config, ParamStore params) : config_(std::move(config)) {
  config_.validate();
  const Model fresh(config_, 0);
  for (const auto& [name, p] : fresh.params().params()) {
    if (!params.contains(name)) bad_config("checkpoint lacks parameter " + name);
    const Matrix& v = params.at(name).value;
    if (v.rows != p.value.rows || v.cols != p.value.cols)
      bad_config("checkpoint parameter " + name + " has the wrong shape");
  }
  if (params.size() != fresh.params().size()) bad_config("checkpoint has unexpected parameters");
  params_ = std::move(params);
}

Var Model::forward(Tape& t, const ModelInput& pattern, const ModelInput& graph,
                   const ForwardOptions& o) {
  const std::size_t w = config_.input_width();
  if (pattern.features.cols != w || graph.features.cols != w)
    throw ModelError(ModelErrc::kShapeMismatch,
                     "input width " + std::to_string(graph.features.cols) + ", model expects " +
                         std::to_string(w));
  Var xp = t.constant(pattern.features);
  Var xg = t.constant(graph.features);
  if (config_.filter) xg = filter_net(t, params_, xp, pattern.mask(), xg, graph.mask());
  const Var hp = mask_rows(linear(t, params_, "in.pattern", xp), pattern.valid_rows);
  const Var hg = mask_rows(linear(t, params_, "in.graph", xg), graph.valid_rows);

  Rep rp, rg;
  if (config_.graph_view()) {
    rp = rgcn_represent(t, params_, config_, rep_prefix(config_, true), hp, pattern, o);
    rg = rgcn_represent(t, params_, config_, rep_prefix(config_, false), hg, graph, o);
  } else {
    rp = cnn_represent(t, params_, config_, rep_prefix(config_, true), hp, pattern.valid_rows, o);
    rg = cnn_represent(t, params_, config_, rep_prefix(config_, false), hg, graph.valid_rows, o);
  }

  const Var sizes = size_features(t, pattern, graph);
  Var features;
  switch (config_.interaction) {
    case Interaction::kSumPool: features = pool_interact(t, rg, rp, sizes, PoolMode::kSum); break;
    case Interaction::kMeanPool: features = pool_interact(t, rg, rp, sizes, PoolMode::kMean); break;
    case Interaction::kMaxPool: features = pool_interact(t, rg, rp, sizes, PoolMode::kMax); break;
    case Interaction::kMemAttn: {
      const Rep updated{memattn_interact(t, params_, config_, rp, rg, o), rg.valid};
      features = pool_interact(t, updated, rp, sizes, PoolMode::kMean);
      break;
    }
    case Interaction::kDiamNet: {
      const Var mem = diamnet_interact(t, params_, config_, rp, rg, o);
      std::vector<Var> parts;
      for (std::size_t i = 0; i < config_.memory; ++i) parts.push_back(nk::slice_rows(mem, i, 1));
      parts.push_back(sizes);
      features = nk::concat_cols(parts);
      break;
    }
  }
  return predict_head(t, params_, features);
}

double Model::predict(const ModelInput& pattern, const ModelInput& graph) {
  Tape t(false);
  return forward(t, pattern, graph).value().data[0];
}

double Model::predict(const Graph& pattern, const Graph& graph) {
  return predict(encode_input(pattern, config_), encode_input(graph, config_));
}

void Model::extend_encoding(const EncodingSpec& to) {
  const EncodingLayout layout =
      config_.graph_view() ? EncodingLayout::kVertexLabel : EncodingLayout::kEdgeTuple;
  const auto map = extension_column_map(config_.encoding, to, layout);
  ModelConfig next = config_;
  next.encoding = to;
  next.validate();
  const std::size_t w = next.input_width();

  auto replace = [this](const std::string& name, Matrix m) {
    const std::uint64_t step = params_.step;
    params_.add(name, std::move(m));
    params_.step = step;
  };
  for (const char* name : {"in.pattern.w", "in.graph.w"})
    replace(name, widen_cols(params_.at(name).value, map, w));
  if (config_.filter) {
    const Matrix wide = widen_cols(params_.at("filter.wg").value, map, w);
    Matrix wg(w, w);
    for (std::size_t r = 0; r < map.size(); ++r)
      std::copy_n(wide.data.begin() + static_cast<std::ptrdiff_t>(r * w), w,
                  wg.data.begin() + static_cast<std::ptrdiff_t>(map[r] * w));
    replace("filter.wg", std::move(wg));
    replace("filter.wf", widen_cols(params_.at("filter.wf").value, map, w));
  }
  if (config_.graph_view()) {
    for (const std::string& p : {rep_prefix(config_, true), rep_prefix(config_, false)})
      for (std::size_t l = 0; l < config_.layers; ++l)
        for (std::size_t y = config_.encoding.max_edge_labels; y < to.max_edge_labels; ++y) {
          const std::string name = p + ".l" + std::to_string(l) + ".rel" + std::to_string(y);
          if (!params_.contains(name)) params_.add_zeros(name, config_.hidden, config_.hidden / config_.blocks);
        }
  }
  config_ = next;
}

std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> model_param_shapes(
    const ModelConfig& c) {
  const Model m(c, 0);
  std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> out;
  for (const auto& [name, p] : m.params().params()) out.push_back({name, {p.value.rows, p.value.cols}});
  return out;
}

}  // namespace subcount
