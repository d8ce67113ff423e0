//
// subcount - Copyright 2026 The subcount Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "subcount/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "subcount/exact_count.hpp"

namespace subcount {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size() || s.front() == '-') throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError(IoErrc::kBadConfig, key + ": expected a non-negative integer, got '" + s + "'");
  }
}

double to_double(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError(IoErrc::kBadConfig, key + ": expected a number, got '" + s + "'");
  }
}

template <class T>
std::vector<T> uint_list(const std::string& key, const std::string& s) {
  std::vector<T> out;
  for (const std::string& item : split_list(s)) out.push_back(static_cast<T>(to_uint(key, item)));
  return out;
}

std::vector<double> double_list(const std::string& key, const std::string& s) {
  std::vector<double> out;
  for (const std::string& item : split_list(s)) out.push_back(to_double(key, item));
  return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  return os.str();
}

template <class T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[rng.below(v.size())];
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError(IoErrc::kFileError, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(IoErrc::kFileError, "cannot write " + p.string());
  return out;
}

/// Calls f(line, 1-based number) for every non-empty line.
template <class F>
void for_each_line(const fs::path& p, F&& f) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError(IoErrc::kFileError, "cannot open " + p.string());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    f(line, n);
  }
}

json parse_json_line(const std::string& line, const std::string& file, std::size_t line_no) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(file, line_no, e.what());
  }
}

template <class T>
T field(const json& j, const char* key, const std::string& file, std::size_t line_no) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(file, line_no, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(file, line_no, std::string("field '") + key + "': " + e.what());
  }
}

json pair_json(const PairRecord& r) {
  json maps = json::array();
  for (const IsoMapping& m : r.mappings) {
    json one = json::array();
    for (const auto& [g, p] : m.pairs) one.push_back({g, p});
    maps.push_back(std::move(one));
  }
  return json{{"pattern_id", r.pattern_id}, {"graph_id", r.graph_id}, {"count", r.count},
              {"mappings", std::move(maps)}, {"seed", r.seed}};
}

PairRecord parse_pair(const std::string& line, const std::string& file, std::size_t line_no) {
  const json j = parse_json_line(line, file, line_no);
  PairRecord r;
  r.pattern_id = field<std::size_t>(j, "pattern_id", file, line_no);
  r.graph_id = field<std::size_t>(j, "graph_id", file, line_no);
  if (!j.contains("count") || !j["count"].is_number_unsigned())
    throw ParseError(file, line_no, "count must be a non-negative integer");
  r.count = j["count"].get<std::uint64_t>();
  r.seed = field<std::uint64_t>(j, "seed", file, line_no);
  const auto maps = field<std::vector<std::vector<std::pair<VertexId, VertexId>>>>(j, "mappings", file, line_no);
  for (const auto& m : maps) r.mappings.push_back({m});
  if (!r.mappings.empty() && r.mappings.size() != r.count)
    throw ParseError(file, line_no, "mapping list length differs from count");
  return r;
}

json spec_json(const EncodingSpec& s) {
  return json{{"base", s.base},
              {"max_vertices", s.max_vertices},
              {"max_vertex_labels", s.max_vertex_labels},
              {"max_edge_labels", s.max_edge_labels}};
}

EncodingSpec spec_from_json(const json& j, const std::string& file) {
  EncodingSpec s;
  s.base = field<unsigned>(j, "base", file, 1);
  s.max_vertices = field<std::size_t>(j, "max_vertices", file, 1);
  s.max_vertex_labels = field<std::size_t>(j, "max_vertex_labels", file, 1);
  s.max_edge_labels = field<std::size_t>(j, "max_edge_labels", file, 1);
  return s;
}

bool isomorphic(const Graph& a, const Graph& b) {
  if (a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() ||
      a.num_vertex_labels() != b.num_vertex_labels() || a.num_edge_labels() != b.num_edge_labels())
    return false;
  // Equal edge counts make any non-induced embedding edge-bijective.
  CountOptions o;
  o.limit = 0;
  return vf2_count(a, b, o).count > 0;
}

}  // namespace

void GridConfig::validate() const {
  auto bad = [](const std::string& what) { throw IoError(IoErrc::kBadConfig, what); };
  if (patterns == 0 || pairs == 0) bad("patterns and pairs must be positive");
  if (train_fraction <= 0.0 || dev_fraction < 0.0 || train_fraction + dev_fraction > 1.0)
    bad("split fractions must be positive and sum to at most 1");
  if (pattern_vertices.empty() || pattern_edges.empty() || pattern_vertex_labels.empty() ||
      pattern_edge_labels.empty() || graph_vertices.empty() || graph_edges.empty() ||
      graph_vertex_labels.empty() || graph_edge_labels.empty() || alpha.empty())
    bad("every grid list needs at least one value");
  for (double a : alpha)
    if (a < 0.0 || a > 1.0) bad("alpha values must lie in [0, 1]");
  if (beta <= 0.0) bad("beta must be positive");
  if (max_average_degree <= 0.0) bad("max_average_degree must be positive");
  try {
    encoding.validate();
  } catch (const std::exception& e) {
    bad(std::string("encoding: ") + e.what());
  }
  const auto max_of = [](const auto& v) { return *std::max_element(v.begin(), v.end()); };
  if (max_of(graph_vertices) > encoding.max_vertices || max_of(pattern_vertices) > encoding.max_vertices)
    bad("encoding.max_vertices is smaller than the largest graph");
  if (max_of(graph_vertex_labels) > encoding.max_vertex_labels ||
      max_of(pattern_vertex_labels) > encoding.max_vertex_labels)
    bad("encoding.max_vertex_labels is smaller than the largest alphabet");
  if (max_of(graph_edge_labels) > encoding.max_edge_labels ||
      max_of(pattern_edge_labels) > encoding.max_edge_labels)
    bad("encoding.max_edge_labels is smaller than the largest alphabet");
}

GridConfig parse_grid_config(const std::string& text) {
  GridConfig c;
  std::stringstream ss(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(ss, raw)) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw IoError(IoErrc::kBadConfig, "line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "name") c.name = value;
    else if (key == "patterns") c.patterns = to_uint(key, value);
    else if (key == "pairs") c.pairs = to_uint(key, value);
    else if (key == "split") {
      const auto f = double_list(key, value);
      if (f.size() != 3 || std::abs(f[0] + f[1] + f[2] - 1.0) > 1e-9)
        throw IoError(IoErrc::kBadConfig, "split: expected three fractions summing to 1");
      c.train_fraction = f[0];
      c.dev_fraction = f[1];
    }
    else if (key == "pattern.vertices") c.pattern_vertices = uint_list<std::size_t>(key, value);
    else if (key == "pattern.edges") c.pattern_edges = uint_list<std::size_t>(key, value);
    else if (key == "pattern.vertex_labels") c.pattern_vertex_labels = uint_list<Label>(key, value);
    else if (key == "pattern.edge_labels") c.pattern_edge_labels = uint_list<Label>(key, value);
    else if (key == "graph.vertices") c.graph_vertices = uint_list<std::size_t>(key, value);
    else if (key == "graph.edges") c.graph_edges = uint_list<std::size_t>(key, value);
    else if (key == "graph.vertex_labels") c.graph_vertex_labels = uint_list<Label>(key, value);
    else if (key == "graph.edge_labels") c.graph_edge_labels = uint_list<Label>(key, value);
    else if (key == "graph.alpha") c.alpha = double_list(key, value);
    else if (key == "graph.beta") c.beta = to_double(key, value);
    else if (key == "max_count") c.max_count = to_uint(key, value);
    else if (key == "max_average_degree") c.max_average_degree = to_double(key, value);
    else if (key == "max_retries") c.max_retries = to_uint(key, value);
    else if (key == "encoding.base") c.encoding.base = static_cast<unsigned>(to_uint(key, value));
    else if (key == "encoding.max_vertices") c.encoding.max_vertices = to_uint(key, value);
    else if (key == "encoding.max_vertex_labels") c.encoding.max_vertex_labels = to_uint(key, value);
    else if (key == "encoding.max_edge_labels") c.encoding.max_edge_labels = to_uint(key, value);
    else throw IoError(IoErrc::kBadConfig, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

GridConfig load_grid_config(const fs::path& path) { return parse_grid_config(read_file(path)); }

std::string format_grid_config(const GridConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "name = " << c.name << "\n"
     << "patterns = " << c.patterns << "\n"
     << "pairs = " << c.pairs << "\n"
     << "split = " << c.train_fraction << ", " << c.dev_fraction << ", "
     << 1.0 - c.train_fraction - c.dev_fraction << "\n"
     << "pattern.vertices = " << join(c.pattern_vertices) << "\n"
     << "pattern.edges = " << join(c.pattern_edges) << "\n"
     << "pattern.vertex_labels = " << join(c.pattern_vertex_labels) << "\n"
     << "pattern.edge_labels = " << join(c.pattern_edge_labels) << "\n"
     << "graph.vertices = " << join(c.graph_vertices) << "\n"
     << "graph.edges = " << join(c.graph_edges) << "\n"
     << "graph.vertex_labels = " << join(c.graph_vertex_labels) << "\n"
     << "graph.edge_labels = " << join(c.graph_edge_labels) << "\n"
     << "graph.alpha = " << join(c.alpha) << "\n"
     << "graph.beta = " << c.beta << "\n"
     << "max_count = " << c.max_count << "\n"
     << "max_average_degree = " << c.max_average_degree << "\n"
     << "max_retries = " << c.max_retries << "\n"
     << "encoding.base = " << c.encoding.base << "\n"
     << "encoding.max_vertices = " << c.encoding.max_vertices << "\n"
     << "encoding.max_vertex_labels = " << c.encoding.max_vertex_labels << "\n"
     << "encoding.max_edge_labels = " << c.encoding.max_edge_labels << "\n";
  return os.str();
}

Split parse_split(const std::string& s) {
  for (int i = 0; i < 3; ++i)
    if (s == kSplitNames[i]) return static_cast<Split>(i);
  throw IoError(IoErrc::kBadConfig, "unknown split '" + s + "'");
}

std::vector<Example> Dataset::examples(Split s) const {
  std::vector<Example> out;
  for (const PairRecord& r : split(s)) {
    const auto p = patterns.find(r.pattern_id);
    const auto g = graphs.find(r.graph_id);
    if (p == patterns.end() || g == graphs.end())
      throw IoError(IoErrc::kMissingReference, "pair refers to a missing pattern or graph");
    out.push_back({&p->second, &g->second, static_cast<double>(r.count)});
  }
  return out;
}

std::size_t Dataset::pair_count() const {
  return splits[0].size() + splits[1].size() + splits[2].size();
}

std::string graph_record(std::size_t id, const Graph& g) {
  json vs = json::array(), es = json::array();
  for (const Vertex& v : g.vertices()) vs.push_back({v.id, v.label});
  for (const Edge& e : g.edges()) es.push_back({e.src, e.dst, e.label});
  return json{{"id", id},
              {"vertex_labels", g.num_vertex_labels()},
              {"edge_labels", g.num_edge_labels()},
              {"vertices", std::move(vs)},
              {"edges", std::move(es)}}
      .dump();
}

std::pair<std::size_t, Graph> parse_graph_record(const std::string& line, const std::string& file,
                                                 std::size_t line_no) {
  const json j = parse_json_line(line, file, line_no);
  const auto id = field<std::size_t>(j, "id", file, line_no);
  const auto vl = field<Label>(j, "vertex_labels", file, line_no);
  const auto el = field<Label>(j, "edge_labels", file, line_no);
  const auto raw_v = field<std::vector<std::array<std::uint32_t, 2>>>(j, "vertices", file, line_no);
  const auto raw_e = field<std::vector<std::array<std::uint32_t, 3>>>(j, "edges", file, line_no);
  std::vector<Vertex> vs;
  for (const auto& v : raw_v) vs.push_back({v[0], v[1]});
  std::vector<Edge> es;
  for (const auto& e : raw_e) es.push_back({e[0], e[1], e[2]});
  try {
    return {id, Graph::build(std::move(vs), std::move(es), vl, el)};
  } catch (const GraphError& e) {
    throw ParseError(file, line_no, e.what());
  }
}

std::vector<Graph> read_graph_file(const fs::path& path) {
  std::vector<Graph> out;
  for_each_line(path, [&](const std::string& line, std::size_t n) {
    out.push_back(parse_graph_record(line, path.filename().string(), n).second);
  });
  return out;
}

void write_graph_file(const fs::path& path, const std::vector<Graph>& graphs) {
  std::ofstream out = open_out(path);
  for (std::size_t i = 0; i < graphs.size(); ++i) out << graph_record(i, graphs[i]) << '\n';
}

DatasetManifest save_dataset(const Dataset& d, const fs::path& root) {
  fs::create_directories(root);
  DatasetManifest m;
  m.name = d.name;
  m.encoding = d.encoding;
  m.pattern_count = d.patterns.size();
  m.graph_count = d.graphs.size();
  {
    std::ofstream out = open_out(root / "patterns.jsonl");
    for (const auto& [id, g] : d.patterns) out << graph_record(id, g) << '\n';
  }
  {
    std::ofstream out = open_out(root / "graphs.jsonl");
    for (const auto& [id, g] : d.graphs) out << graph_record(id, g) << '\n';
  }
  json splits = json::object();
  for (int s = 0; s < 3; ++s) {
    const std::string file = std::string(kSplitNames[s]) + ".jsonl";
    std::ofstream out = open_out(root / file);
    for (const PairRecord& r : d.splits[s]) {
      out << pair_json(r).dump() << '\n';
      m.max_count = std::max(m.max_count, r.count);
    }
    m.split_sizes[s] = d.splits[s].size();
    splits[kSplitNames[s]] = json{{"file", file}, {"pairs", d.splits[s].size()}};
  }
  const json manifest{{"format", "subcount-dataset-1"},
                      {"name", d.name},
                      {"encoding", spec_json(d.encoding)},
                      {"patterns", json{{"file", "patterns.jsonl"}, {"count", m.pattern_count}}},
                      {"graphs", json{{"file", "graphs.jsonl"}, {"count", m.graph_count}}},
                      {"splits", std::move(splits)},
                      {"max_count", m.max_count}};
  open_out(root / "manifest.json") << manifest.dump(2) << '\n';
  return m;
}

Dataset load_dataset(const fs::path& root) {
  const std::string text = read_file(root / "manifest.json");
  json manifest;
  try {
    manifest = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    throw ParseError("manifest.json", 1 + std::count(text.begin(), text.begin() + upto, '\n'), e.what());
  }
  Dataset d;
  d.name = field<std::string>(manifest, "name", "manifest.json", 1);
  d.encoding = spec_from_json(field<json>(manifest, "encoding", "manifest.json", 1), "manifest.json");

  auto read_graphs = [&](const char* key, std::map<std::size_t, Graph>& into) {
    const auto file = field<std::string>(field<json>(manifest, key, "manifest.json", 1), "file", "manifest.json", 1);
    for_each_line(root / file, [&](const std::string& line, std::size_t n) {
      auto [id, g] = parse_graph_record(line, file, n);
      if (!into.emplace(id, std::move(g)).second) throw ParseError(file, n, "duplicate id " + std::to_string(id));
    });
  };
  read_graphs("patterns", d.patterns);
  read_graphs("graphs", d.graphs);

  const json splits = field<json>(manifest, "splits", "manifest.json", 1);
  for (int s = 0; s < 3; ++s) {
    if (!splits.contains(kSplitNames[s])) continue;
    const auto file = field<std::string>(splits[kSplitNames[s]], "file", "manifest.json", 1);
    for_each_line(root / file, [&](const std::string& line, std::size_t n) {
      PairRecord r = parse_pair(line, file, n);
      if (!d.patterns.contains(r.pattern_id))
        throw IoError(IoErrc::kMissingReference,
                      file + ":" + std::to_string(n) + ": unknown pattern id " + std::to_string(r.pattern_id));
      if (!d.graphs.contains(r.graph_id))
        throw IoError(IoErrc::kMissingReference,
                      file + ":" + std::to_string(n) + ": unknown graph id " + std::to_string(r.graph_id));
      d.splits[s].push_back(std::move(r));
    });
  }
  return d;
}

std::vector<Graph> generate_patterns(const GridConfig& c, std::size_t count, std::uint64_t seed) {
  c.validate();
  Rng rng(seed);
  std::vector<Graph> out;
  const std::size_t budget = 1000 * count + 1000;
  for (std::size_t attempt = 0; attempt < budget && out.size() < count; ++attempt) {
    PatternParams pp;
    pp.vertices = pick(c.pattern_vertices, rng);
    pp.edges = pick(c.pattern_edges, rng);
    pp.vertex_labels = pick(c.pattern_vertex_labels, rng);
    pp.edge_labels = pick(c.pattern_edge_labels, rng);
    Graph p;
    try {
      Rng local = rng.split(attempt);
      p = generate_pattern(pp, local);
      Rng probe = rng.split(attempt);
      sample_graph_params(c, p, probe);
    } catch (const GenError&) {
      continue;
    } catch (const IoError&) {
      continue;
    }
    const bool seen = std::any_of(out.begin(), out.end(), [&](const Graph& q) { return isomorphic(p, q); });
    if (!seen) out.push_back(std::move(p));
  }
  if (out.size() < count)
    throw IoError(IoErrc::kBadConfig, "pattern grid yields only " + std::to_string(out.size()) +
                                          " distinct patterns, " + std::to_string(count) + " requested");
  return out;
}

GraphParams sample_graph_params(const GridConfig& c, const Graph& pattern, Rng& rng) {
  std::vector<std::pair<std::size_t, std::size_t>> sizes;
  for (std::size_t nv : c.graph_vertices) {
    if (nv < pattern.vertex_count()) continue;
    for (std::size_t ne : c.graph_edges)
      if (ne + 1 >= nv && static_cast<double>(ne) <= c.max_average_degree * static_cast<double>(nv))
        sizes.emplace_back(nv, ne);
  }
  std::vector<Label> vls, els;
  for (Label l : c.graph_vertex_labels)
    if (l >= pattern.num_vertex_labels()) vls.push_back(l);
  for (Label l : c.graph_edge_labels)
    if (l >= pattern.num_edge_labels()) els.push_back(l);
  if (sizes.empty() || vls.empty() || els.empty())
    throw IoError(IoErrc::kBadConfig, "no graph in the grid can host the pattern");
  // Vertex count first, then an edge count feasible for it.
  std::vector<std::size_t> nvs;
  for (const auto& s : sizes)
    if (nvs.empty() || nvs.back() != s.first) nvs.push_back(s.first);
  GraphParams gp;
  gp.vertices = pick(nvs, rng);
  std::vector<std::size_t> nes;
  for (const auto& s : sizes)
    if (s.first == gp.vertices) nes.push_back(s.second);
  gp.edges = pick(nes, rng);
  gp.vertex_labels = pick(vls, rng);
  gp.edge_labels = pick(els, rng);
  gp.alpha = pick(c.alpha, rng);
  gp.beta = c.beta;
  gp.max_count = c.max_count;
  gp.max_average_degree = c.max_average_degree;
  gp.max_retries = c.max_retries;
  return gp;
}

Dataset generate_dataset(const GridConfig& c, const std::vector<Graph>& patterns, const GenOptions& opts) {
  c.validate();
  if (patterns.empty()) throw IoError(IoErrc::kBadConfig, "no patterns");
  const std::size_t n = c.pairs;
  std::vector<std::optional<GeneratedExample>> made(n);
  std::atomic<std::size_t> done{0};
  std::mutex progress_mu;
  const Rng root(opts.seed);
  constexpr std::size_t kParamRedraws = 50;

  parallel_for(n, opts.jobs, [&](std::size_t i) {
    const Graph& p = patterns[i % patterns.size()];
    const Rng base = root.split(i);
    for (std::size_t k = 0; k < kParamRedraws && !made[i]; ++k) {
      Rng r = base.split(k);
      const GraphParams gp = sample_graph_params(c, p, r);
      try {
        made[i] = generate_graph(p, gp, r);
      } catch (const GenError&) {
      }
    }
    if (!made[i])
      throw IoError(IoErrc::kBadConfig, "pair " + std::to_string(i) + ": generation failed for every parameter draw");
    if (opts.verify && vf2_count(p, made[i]->graph).count != made[i]->count)
      throw IoError(IoErrc::kCountMismatch, "pair " + std::to_string(i) + ": recount disagrees");
    if (!opts.keep_mappings) made[i]->mappings.clear();
    const std::size_t d = ++done;
    if (opts.progress) {
      std::lock_guard lock(progress_mu);
      opts.progress(d, n);
    }
  });

  Dataset d;
  d.name = c.name;
  d.encoding = c.encoding;
  for (std::size_t i = 0; i < patterns.size(); ++i) d.patterns.emplace(i, patterns[i]);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng = root.split(~std::uint64_t{0});
  shuffle_rng.shuffle(order.begin(), order.end());
  const auto n_train = static_cast<std::size_t>(std::llround(c.train_fraction * static_cast<double>(n)));
  const auto n_dev = std::min(n - n_train,
                              static_cast<std::size_t>(std::llround(c.dev_fraction * static_cast<double>(n))));
  std::array<std::vector<std::size_t>, 3> parts;
  for (std::size_t k = 0; k < n; ++k) parts[k < n_train ? 0 : (k < n_train + n_dev ? 1 : 2)].push_back(order[k]);
  for (int s = 0; s < 3; ++s) {
    std::sort(parts[s].begin(), parts[s].end());
    for (std::size_t i : parts[s]) {
      GeneratedExample& ex = *made[i];
      PairRecord r;
      r.pattern_id = i % patterns.size();
      r.graph_id = i;
      r.count = ex.count;
      r.mappings = std::move(ex.mappings);
      r.seed = ex.provenance.seed;
      d.graphs.emplace(i, std::move(ex.graph));
      d.splits[s].push_back(std::move(r));
    }
  }
  return d;
}

std::vector<std::pair<Split, std::size_t>> verify_dataset(const Dataset& d, std::size_t jobs) {
  std::vector<std::pair<Split, std::size_t>> all;
  for (int s = 0; s < 3; ++s)
    for (std::size_t k = 0; k < d.splits[s].size(); ++k) all.emplace_back(static_cast<Split>(s), k);
  std::vector<char> bad(all.size(), 0);
  parallel_for(all.size(), jobs, [&](std::size_t i) {
    const PairRecord& r = d.split(all[i].first)[all[i].second];
    bad[i] = vf2_count(d.patterns.at(r.pattern_id), d.graphs.at(r.graph_id)).count != r.count;
  });
  std::vector<std::pair<Split, std::size_t>> out;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (bad[i]) out.push_back(all[i]);
  return out;
}

}  // namespace subcount
