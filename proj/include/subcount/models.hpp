//
// subcount - Copyright 2026 The subcount Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "subcount/codec.hpp"
#include "subcount/graph.hpp"
#include "subcount/numkit.hpp"

namespace subcount {

enum class ModelErrc { kBadConfig, kUnknownRelationLabel, kShapeMismatch, kEmptySequence };
using ModelError = Error<ModelErrc>;

enum class Representation { kCnn, kRgcn, kRgin };
enum class Interaction { kSumPool, kMeanPool, kMaxPool, kMemAttn, kDiamNet };

struct ModelConfig {
  Representation representation = Representation::kRgin;
  Interaction interaction = Interaction::kDiamNet;
  std::size_t hidden = 128;
  std::size_t memory = 4;
  std::size_t steps = 3;
  std::size_t heads = 4;
  std::size_t layers = 3;
  std::size_t blocks = 4;
  double dropout = 0.2;
  bool shared = true;
  bool filter = true;
  nk::PoolMode mem_init = nk::PoolMode::kMean;
  EncodingSpec encoding;

  bool graph_view() const { return representation != Representation::kCnn; }
  /// Width of one input row (edge tuple or vertex label).
  std::size_t input_width() const {
    return graph_view() ? encoding.vertex_feature_width() : encoding.tuple_width();
  }
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

std::string to_string(Representation r);
std::string to_string(Interaction i);
Representation parse_representation(const std::string& s);
Interaction parse_interaction(const std::string& s);

/// key = value lines; '#' starts a comment.
std::string format_model_config(const ModelConfig& c);
ModelConfig parse_model_config(const std::string& text);

/// One side of a model input. Rows at index >= valid_rows are padding.
struct ModelInput {
  Matrix features;
  /// Graph view only: relations[y] lists (src row, dst row) pairs.
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> relations;
  std::size_t vertex_count = 0;
  std::size_t edge_count = 0;
  std::size_t valid_rows = 0;

  nk::Mask mask() const;
};

ModelInput encode_input(const Graph& g, const ModelConfig& config);
/// Appends zero rows up to `rows` without changing valid_rows.
ModelInput pad_input(ModelInput in, std::size_t rows);
/// Re-encodes an input made under `from` for a model using `to`.
ModelInput extend_input(const ModelInput& in, const EncodingSpec& from, const EncodingSpec& to,
                        EncodingLayout layout);

struct ForwardOptions {
  bool train = false;
  Rng* rng = nullptr;
  /// Overrides every DIAMNet / MemAttn gate with a constant.
  std::optional<double> force_gates;
};

// --- building blocks, exposed for testing ---------------------------------------

/// Scales each graph row by a learned gate computed from the pattern's
/// column-wise maximum.
nk::Var filter_net(nk::Tape& t, nk::ParamStore& s, nk::Var pattern, const nk::Mask& pattern_mask,
                   nk::Var graph, const nk::Mask& graph_mask);

/// Returns the representation and the number of valid leading rows.
struct Rep {
  nk::Var rows;
  std::size_t valid = 0;
};
Rep cnn_represent(nk::Tape& t, nk::ParamStore& s, const ModelConfig& c, const std::string& prefix,
                  nk::Var x, std::size_t valid, const ForwardOptions& o);
Rep rgcn_represent(nk::Tape& t, nk::ParamStore& s, const ModelConfig& c, const std::string& prefix,
                   nk::Var x, const ModelInput& in, const ForwardOptions& o);

/// M blocks pooled over windows of stride floor(L/M) and length L-(M-1)*stride.
nk::Var mem_init(nk::Var rows, std::size_t valid, std::size_t m, nk::PoolMode mode);

nk::Var size_features(nk::Tape& t, const ModelInput& pattern, const ModelInput& graph);
nk::Var pool_interact(nk::Tape& t, const Rep& graph, const Rep& pattern, nk::Var sizes,
                      nk::PoolMode mode);
nk::Var diamnet_interact(nk::Tape& t, nk::ParamStore& s, const ModelConfig& c, const Rep& pattern,
                         const Rep& graph, const ForwardOptions& o);
/// Returns the updated graph rows.
nk::Var memattn_interact(nk::Tape& t, nk::ParamStore& s, const ModelConfig& c, const Rep& pattern,
                         const Rep& graph, const ForwardOptions& o);
nk::Var predict_head(nk::Tape& t, nk::ParamStore& s, nk::Var features);

/// Width of the vector fed to the prediction head.
std::size_t head_input_width(const ModelConfig& c);

class Model {
 public:
  Model(ModelConfig config, std::uint64_t seed);
  Model(ModelConfig config, nk::ParamStore params);

  const ModelConfig& config() const { return config_; }
  nk::ParamStore& params() { return params_; }
  const nk::ParamStore& params() const { return params_; }

  /// 1 x 1 count estimate.
  nk::Var forward(nk::Tape& t, const ModelInput& pattern, const ModelInput& graph,
                  const ForwardOptions& o = {});
  double predict(const ModelInput& pattern, const ModelInput& graph);
  double predict(const Graph& pattern, const Graph& graph);

  /// Widens the input layers to `to`; new columns start at zero so outputs on
  /// re-encoded old inputs are unchanged.
  void extend_encoding(const EncodingSpec& to);

 private:
  ModelConfig config_;
  nk::ParamStore params_;
};

/// Names of the parameters a config creates, with their shapes.
std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> model_param_shapes(
    const ModelConfig& c);

}  // namespace subcount
