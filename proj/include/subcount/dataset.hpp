//
// subcount - Copyright 2026 The subcount Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "subcount/codec.hpp"
#include "subcount/generator.hpp"
#include "subcount/trainer.hpp"

namespace subcount {

enum class IoErrc {
  kParseError,
  kMissingReference,
  kLayoutError,
  kInconsistentIndicator,
  kBadConfig,
  kFileError,
  kCountMismatch,
  kChecksumMismatch,
};
using IoError = Error<IoErrc>;

/// Malformed record; `line()` is 1-based.
class ParseError : public IoError {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : IoError(IoErrc::kParseError, file + ":" + std::to_string(line) + ": " + what),
        file_(file),
        line_(line) {}
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

/// Generator parameter grids plus dataset size. Every list is sampled
/// uniformly; infeasible combinations are redrawn.
struct GridConfig {
  std::string name = "custom";
  std::size_t patterns = 10;
  std::size_t pairs = 100;
  double train_fraction = 0.8;
  double dev_fraction = 0.1;

  std::vector<std::size_t> pattern_vertices{3};
  std::vector<std::size_t> pattern_edges{2};
  std::vector<Label> pattern_vertex_labels{1};
  std::vector<Label> pattern_edge_labels{1};

  std::vector<std::size_t> graph_vertices{8};
  std::vector<std::size_t> graph_edges{8};
  std::vector<Label> graph_vertex_labels{4};
  std::vector<Label> graph_edge_labels{4};
  std::vector<double> alpha{0.5};
  double beta = 512.0;
  std::uint64_t max_count = 1024;
  double max_average_degree = 4.0;
  std::size_t max_retries = 10;

  EncodingSpec encoding{2, 64, 16, 16};

  void validate() const;
};

/// key = value lines, lists comma separated, '#' comments.
GridConfig parse_grid_config(const std::string& text);
GridConfig load_grid_config(const std::filesystem::path& path);
std::string format_grid_config(const GridConfig& c);

enum class Split { kTrain = 0, kDev = 1, kTest = 2 };
inline constexpr std::array<const char*, 3> kSplitNames{"train", "dev", "test"};
Split parse_split(const std::string& s);

struct PairRecord {
  std::size_t pattern_id = 0;
  std::size_t graph_id = 0;
  std::uint64_t count = 0;
  std::vector<IsoMapping> mappings;
  std::uint64_t seed = 0;
  bool operator==(const PairRecord&) const = default;
};

struct Dataset {
  std::string name;
  EncodingSpec encoding;
  std::map<std::size_t, Graph> patterns;
  std::map<std::size_t, Graph> graphs;
  std::array<std::vector<PairRecord>, 3> splits;

  const std::vector<PairRecord>& split(Split s) const { return splits[static_cast<int>(s)]; }
  std::vector<PairRecord>& split(Split s) { return splits[static_cast<int>(s)]; }
  /// Views into this dataset; they dangle once it is destroyed or modified.
  std::vector<Example> examples(Split s) const;
  std::size_t pair_count() const;
  bool operator==(const Dataset&) const = default;
};

struct DatasetManifest {
  std::string name;
  EncodingSpec encoding;
  std::size_t pattern_count = 0;
  std::size_t graph_count = 0;
  std::array<std::size_t, 3> split_sizes{};
  std::uint64_t max_count = 0;
};

/// Writes manifest.json, patterns.jsonl, graphs.jsonl and one pair file per
/// split under `root`.
DatasetManifest save_dataset(const Dataset& d, const std::filesystem::path& root);
Dataset load_dataset(const std::filesystem::path& root);

/// One JSONL graph record.
std::string graph_record(std::size_t id, const Graph& g);
std::pair<std::size_t, Graph> parse_graph_record(const std::string& line, const std::string& file,
                                                 std::size_t line_no);

std::vector<Graph> read_graph_file(const std::filesystem::path& path);
void write_graph_file(const std::filesystem::path& path, const std::vector<Graph>& graphs);

struct GenOptions {
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  bool keep_mappings = true;
  /// Re-count every pair on the merged graph and throw kCountMismatch on any
  /// disagreement.
  bool verify = false;
  std::function<void(std::size_t done, std::size_t total)> progress;
};

/// Distinct patterns drawn from the pattern grid.
std::vector<Graph> generate_patterns(const GridConfig& c, std::size_t count, std::uint64_t seed);

/// Graph parameters compatible with `pattern`, drawn from the graph grid.
GraphParams sample_graph_params(const GridConfig& c, const Graph& pattern, Rng& rng);

/// `c.pairs` pairs cycling over `patterns`, split train/dev/test by pair.
/// Output does not depend on `jobs`.
Dataset generate_dataset(const GridConfig& c, const std::vector<Graph>& patterns,
                         const GenOptions& opts);

/// Re-counts every pair with VF2 and returns the indices (split, position)
/// of disagreements.
std::vector<std::pair<Split, std::size_t>> verify_dataset(const Dataset& d, std::size_t jobs = 1);

}  // namespace subcount
