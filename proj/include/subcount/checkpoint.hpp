//
// subcount - Copyright 2026 The subcount Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "subcount/dataset.hpp"
#include "subcount/models.hpp"

namespace subcount {

/// Writes model.cfg, params.bin, params.manifest and lineage.txt into `dir`.
void save_model(const std::filesystem::path& dir, const Model& model,
                const std::vector<std::string>& lineage = {});

/// Loads a model directory. The manifest must match params.bin entry by
/// entry, otherwise kChecksumMismatch.
Model load_model(const std::filesystem::path& dir);

/// Lines of lineage.txt; empty when the file is absent.
std::vector<std::string> load_lineage(const std::filesystem::path& dir);

}  // namespace subcount
