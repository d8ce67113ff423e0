//
// subcount - Copyright 2026 The subcount Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "subcount/dataset.hpp"

namespace subcount {

/// Reads the TU benchmark layout: `<name>_A.txt` (1-based "i, j" node pairs),
/// `<name>_graph_indicator.txt`, `<name>_node_labels.txt` and, optionally,
/// `<name>_edge_labels.txt`. Every source edge yields both directions;
/// duplicates collapse. Labels keep their file values and the alphabets are
/// shared by all graphs (largest label + 1).
std::vector<Graph> read_tu_dataset(const std::filesystem::path& root, const std::string& name);

/// Small heterogeneous patterns over the MUTAG alphabets (7 atom labels,
/// 4 bond labels).
GridConfig mutag_grid();

struct RealDataOptions {
  std::uint64_t seed = 1;
  std::size_t patterns = 24;
  std::size_t jobs = 1;
  /// Pattern grid; the graph lists only need to admit the imported graphs.
  GridConfig grid = mutag_grid();
};

/// Splits `graphs` by graph into train/dev/test (dev and test get
/// ceil(n/3) each) and pairs every graph with every generated pattern.
/// Counts come from VF2.
Dataset build_real_dataset(std::vector<Graph> graphs, const RealDataOptions& opts);

}  // namespace subcount
