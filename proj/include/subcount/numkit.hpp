//
// subcount - Copyright 2026 The subcount Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "subcount/common.hpp"
#include "subcount/rng.hpp"

namespace subcount::nk {

enum class NumErrc {
  kShapeMismatch,
  kBadHeadCount,
  kEmptySequence,
  kDetachedGraph,
  kMissingGradients,
  kNonFinite,
  kUnknownParam,
  kBadCheckpoint,
};
using NumError = Error<NumErrc>;

/// Per-row (or per-key) validity flags; empty means every row is valid.
using Mask = std::vector<char>;

struct Param {
  Matrix value;
  Matrix grad;
  Matrix m;  // first moment
  Matrix v;  // second moment
  bool has_grad = false;
};

/// Named trainable tensors plus optimizer state.
class ParamStore {
 public:
  Param& add(const std::string& name, Matrix init);
  /// Glorot-uniform rows x cols matrix.
  Param& add_glorot(const std::string& name, std::size_t rows, std::size_t cols, Rng& rng);
  Param& add_zeros(const std::string& name, std::size_t rows, std::size_t cols);

  Param& at(const std::string& name);
  const Param& at(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.contains(name); }

  void zero_grad();
  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  std::uint64_t step = 0;

  std::map<std::string, Param>& params() { return params_; }
  const std::map<std::string, Param>& params() const { return params_; }

 private:
  std::map<std::string, Param> params_;
};

class Tape;

/// Handle to a value recorded on a tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Matrix& value() const;
  std::size_t rows() const { return value().rows; }
  std::size_t cols() const { return value().cols; }
};

/// Records operations for reverse-mode differentiation. Values are never
/// modified after being recorded.
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Matrix& grad)>;

  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  /// Leaf bound to a parameter; backward accumulates into param.grad.
  Var param(Param& p);
  Var param(ParamStore& store, const std::string& name) { return param(store.at(name)); }

  /// Records a value computed outside the built-in ops. `backward` receives
  /// the gradient of the new node and must accumulate into its inputs.
  Var custom(Matrix value, std::initializer_list<Var> inputs, Backward backward) {
    return custom(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                  std::move(backward));
  }
  Var custom(Matrix value, std::span<const Var> inputs, Backward backward);
  Var record(Matrix value, std::initializer_list<Var> inputs, Backward backward) {
    return custom(std::move(value), inputs, std::move(backward));
  }

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  bool needs_grad(Var v) const { return nodes_[v.id].requires_grad; }
  /// Gradient slot of v, zero-initialized on first use.
  Matrix& grad(Var v);
  bool grad_enabled() const { return grad_enabled_; }

  void backward(Var loss);
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Backward backward;
    Param* param = nullptr;
  };
  std::deque<Node> nodes_;
  bool grad_enabled_;
};

// --- dense kernels (C += ...) ----------------------------------------------

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c);  // c += a b
void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c);  // c += a b^T
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c);  // c += a^T b

// --- ops --------------------------------------------------------------------

Var matmul(Var a, Var b);
/// a b^T
Var matmul_nt(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
/// a + r for every row; r is 1 x cols.
Var add_row(Var a, Var r);
/// a * r for every row; r is 1 x cols.
Var mul_row(Var a, Var r);
/// Row i of a scaled by c(i, 0).
Var mul_col(Var a, Var c);
Var scale(Var a, double s);
Var one_minus(Var a);
Var leaky_relu(Var a, double slope = 0.01);
Var sigmoid(Var a);
/// Row softmax over columns whose mask entry is set; rows with no valid
/// column produce zeros.
Var softmax_rows(Var a, const Mask& col_mask = {});
Var slice_cols(Var a, std::size_t begin, std::size_t count);
Var slice_rows(Var a, std::size_t begin, std::size_t count);
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var gather_rows(Var a, std::vector<std::uint32_t> index);
/// out(index[i]) += a(i); out has out_rows rows.
Var scatter_add_rows(Var a, std::vector<std::uint32_t> index, std::size_t out_rows);

enum class PoolMode { kSum, kMean, kMax };
/// 1 x cols pooling over rows whose mask entry is set. An empty selection
/// pools to zeros.
Var pool_rows(Var a, PoolMode mode, const Mask& row_mask = {});
/// Rows i..i+k-1 concatenated for each window: (L-k+1) x (k*cols).
Var unfold_rows(Var a, std::size_t k);
/// Column-wise max over windows of k rows, stride 1.
Var maxpool_rows(Var a, std::size_t k);
/// Appends zero rows until a has at least `rows` rows.
Var pad_rows(Var a, std::size_t rows);
/// Inverted dropout; identity when !train or p == 0.
Var dropout(Var a, double p, Rng& rng, bool train);
/// Fused block-diagonal transform: x split into nb column blocks of width
/// bs; block b is multiplied by blocks[b*bs:(b+1)*bs, :]^T.
Var block_diag_nt(Var x, Var blocks, std::size_t nb);
Var sum(Var a);
Var mse(Var pred, Var target);

/// x W^T + b (b may be omitted).
Var dense(Var x, Var w);
Var dense(Var x, Var w, Var b);

// --- layers -----------------------------------------------------------------

/// Counts query x key score evaluations over every attention call.
std::uint64_t attention_score_count();
void reset_attention_score_count();

/// Multi-head scaled dot-product attention with input and output projections.
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(std::string prefix, std::size_t dim, std::size_t heads);

  void init(ParamStore& store, Rng& rng) const;

  struct Projected {
    Var k;
    Var v;
    Mask mask;
  };
  /// Key/value projections, reusable across queries.
  Projected project(Tape& t, ParamStore& store, Var keys, Var values, const Mask& key_mask = {}) const;
  Var attend(Tape& t, ParamStore& store, Var queries, const Projected& kv) const;
  Var forward(Tape& t, ParamStore& store, Var q, Var k, Var v, const Mask& key_mask = {}) const {
    return attend(t, store, q, project(t, store, k, v, key_mask));
  }

  std::size_t dim() const { return dim_; }
  std::size_t heads() const { return heads_; }

 private:
  std::string prefix_;
  std::size_t dim_ = 0;
  std::size_t heads_ = 1;
};

/// 1-D convolution (kernel k, stride 1) followed by max-pooling (kernel k,
/// stride 1). Inputs shorter than 2k-1 rows are zero-padded first.
Var conv_pool_block(Var x, Var w, Var b, std::size_t k);

// --- optimizer ---------------------------------------------------------------

struct AdamWHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-6;
  /// Global gradient norm threshold; <= 0 disables clipping.
  double clip_norm = 1.0;
};

/// One AdamW update over every parameter with a gradient. Returns the global
/// gradient norm before clipping.
double adamw_step(ParamStore& store, const AdamWHyper& hyper);

// --- gradient checking -------------------------------------------------------

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  bool pass = false;
};

/// Relative error used by the checks: |a - n| / max(1, |a|, |n|).
double grad_rel_error(double analytic, double numeric);

/// Checks d(sum(op(inputs) * R))/d(inputs) for a fixed random R against
/// central differences with step h.
GradCheckReport grad_check(const std::function<Var(Tape&, std::span<const Var>)>& op,
                           std::vector<Matrix> inputs, double tolerance = 1e-6, double h = 1e-5,
                           std::uint64_t seed = 1);

/// Checks the gradient of a scalar loss with respect to store parameters.
/// At most `per_param` entries of each parameter are probed.
GradCheckReport grad_check_params(const std::function<Var(Tape&)>& loss, ParamStore& store,
                                  double tolerance = 1e-6, double h = 1e-5,
                                  std::size_t per_param = 0, std::uint64_t seed = 1);

// --- checkpoints -------------------------------------------------------------

/// Binary container of (name, shape, little-endian f64) entries.
std::vector<std::uint8_t> serialize_params(const ParamStore& store);
ParamStore deserialize_params(std::span<const std::uint8_t> bytes);
/// One line per parameter: name, shape, and a checksum of the raw bytes.
std::string params_manifest(const ParamStore& store);

}  // namespace subcount::nk
