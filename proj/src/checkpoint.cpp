//
// subcount - Copyright 2026 The subcount Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "subcount/checkpoint.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

namespace subcount {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError(IoErrc::kFileError, "cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(IoErrc::kFileError, "cannot write " + p.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

void save_model(const fs::path& dir, const Model& model, const std::vector<std::string>& lineage) {
  fs::create_directories(dir);
  const std::vector<std::uint8_t> blob = nk::serialize_params(model.params());
  spit(dir / "model.cfg", format_model_config(model.config()));
  spit(dir / "params.bin", std::string(blob.begin(), blob.end()));
  spit(dir / "params.manifest", nk::params_manifest(model.params()));
  std::string text;
  for (const std::string& l : lineage) text += l + "\n";
  spit(dir / "lineage.txt", text);
}

Model load_model(const fs::path& dir) {
  const ModelConfig cfg = parse_model_config(slurp(dir / "model.cfg"));
  const std::string raw = slurp(dir / "params.bin");
  const std::vector<std::uint8_t> blob(raw.begin(), raw.end());
  nk::ParamStore store = nk::deserialize_params(blob);
  if (fs::exists(dir / "params.manifest") && slurp(dir / "params.manifest") != nk::params_manifest(store))
    throw IoError(IoErrc::kChecksumMismatch, "params.bin does not match params.manifest in " + dir.string());
  return Model(cfg, std::move(store));
}

std::vector<std::string> load_lineage(const fs::path& dir) {
  std::vector<std::string> out;
  if (!fs::exists(dir / "lineage.txt")) return out;
  std::istringstream in(slurp(dir / "lineage.txt"));
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(line);
  return out;
}

}  // namespace subcount
