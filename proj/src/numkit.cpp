//
// subcount - Copyright 2026 The subcount Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "subcount/numkit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <sstream>

namespace subcount::nk {
namespace {

std::atomic<std::uint64_t> g_attention_scores{0};

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

void require(bool ok, const char* op, const Matrix& a, const Matrix& b) {
  if (!ok)
    throw NumError(NumErrc::kShapeMismatch,
                   std::string(op) + ": shapes " + shape_str(a) + " and " + shape_str(b));
}

Var make(Var like, Matrix value, std::initializer_list<Var> inputs, Tape::Backward bw) {
  return like.tape->custom(std::move(value), inputs, std::move(bw));
}

}  // namespace

// --- ParamStore ---------------------------------------------------------------

Param& ParamStore::add(const std::string& name, Matrix init) {
  Param p;
  p.grad = Matrix(init.rows, init.cols);
  p.m = Matrix(init.rows, init.cols);
  p.v = Matrix(init.rows, init.cols);
  p.value = std::move(init);
  return params_[name] = std::move(p);
}

Param& ParamStore::add_glorot(const std::string& name, std::size_t rows, std::size_t cols,
                              Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix w(rows, cols);
  for (double& x : w.data) x = (2.0 * rng.uniform() - 1.0) * limit;
  return add(name, std::move(w));
}

Param& ParamStore::add_zeros(const std::string& name, std::size_t rows, std::size_t cols) {
  return add(name, Matrix(rows, cols));
}

Param& ParamStore::at(const std::string& name) {
  const auto it = params_.find(name);
  if (it == params_.end()) throw NumError(NumErrc::kUnknownParam, "unknown parameter " + name);
  return it->second;
}

const Param& ParamStore::at(const std::string& name) const {
  const auto it = params_.find(name);
  if (it == params_.end()) throw NumError(NumErrc::kUnknownParam, "unknown parameter " + name);
  return it->second;
}

void ParamStore::zero_grad() {
  for (auto& [name, p] : params_) {
    std::fill(p.grad.data.begin(), p.grad.data.end(), 0.0);
    p.has_grad = false;
  }
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, p] : params_) n += p.value.size();
  return n;
}

// --- Tape ---------------------------------------------------------------------

const Matrix& Var::value() const { return tape->value(*this); }

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Tape::param(Param& p) {
  Node n;
  n.value = p.value;
  n.requires_grad = grad_enabled_;
  n.param = &p;
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Tape::custom(Matrix value, std::span<const Var> inputs, Backward backward) {
  for (double x : value.data)
    if (!std::isfinite(x)) throw NumError(NumErrc::kNonFinite, "operation produced a non-finite value");
  bool any_grad = false;
  for (Var in : inputs) {
    if (in.tape != this || in.id >= nodes_.size())
      throw NumError(NumErrc::kDetachedGraph, "input recorded on a different tape");
    any_grad = any_grad || nodes_[in.id].requires_grad;
  }
  Node n;
  n.value = std::move(value);
  n.requires_grad = grad_enabled_ && any_grad && static_cast<bool>(backward);
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Matrix& Tape::grad(Var v) {
  Node& n = nodes_[v.id];
  if (n.grad.size() == 0 && n.value.size() != 0) n.grad = Matrix(n.value.rows, n.value.cols);
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape != this || loss.id >= nodes_.size())
    throw NumError(NumErrc::kDetachedGraph, "loss was not recorded on this tape");
  if (nodes_[loss.id].value.size() != 1)
    throw NumError(NumErrc::kShapeMismatch, "backward needs a scalar loss");
  if (!nodes_[loss.id].requires_grad) return;
  grad(loss).data[0] += 1.0;
  for (std::size_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    if (n.param) {
      Param& p = *n.param;
      if (p.grad.rows != n.grad.rows || p.grad.cols != n.grad.cols)
        p.grad = Matrix(n.grad.rows, n.grad.cols);
      for (std::size_t i = 0; i < n.grad.size(); ++i) p.grad.data[i] += n.grad.data[i];
      p.has_grad = true;
    } else if (n.backward) {
      n.backward(*this, n.grad);
    }
  }
}

// --- kernels ------------------------------------------------------------------

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c) {
  const std::size_t n = a.rows, k = a.cols, m = b.cols;
  for (std::size_t i = 0; i < n; ++i) {
    double* ci = c.data.data() + i * m;
    const double* ai = a.data.data() + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double x = ai[p];
      if (x == 0.0) continue;
      const double* bp = b.data.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) ci[j] += x * bp[j];
    }
  }
}

void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c) {
  const std::size_t n = a.rows, k = a.cols, m = b.rows;
  for (std::size_t i = 0; i < n; ++i) {
    const double* ai = a.data.data() + i * k;
    double* ci = c.data.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) {
      const double* bj = b.data.data() + j * k;
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
      ci[j] += s;
    }
  }
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c) {
  const std::size_t k = a.rows, n = a.cols, m = b.cols;
  for (std::size_t p = 0; p < k; ++p) {
    const double* ap = a.data.data() + p * n;
    const double* bp = b.data.data() + p * m;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = ap[i];
      if (x == 0.0) continue;
      double* ci = c.data.data() + i * m;
      for (std::size_t j = 0; j < m; ++j) ci[j] += x * bp[j];
    }
  }
}

// --- ops ----------------------------------------------------------------------

Var matmul(Var a, Var b) {
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  require(x.cols == y.rows, "matmul", x, y);
  Matrix out(x.rows, y.cols);
  gemm_nn(x, y, out);
  return make(a, std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (t.needs_grad(a)) gemm_nt(g, t.value(b), t.grad(a));
    if (t.needs_grad(b)) gemm_tn(t.value(a), g, t.grad(b));
  });
}

Var matmul_nt(Var a, Var b) {
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  require(x.cols == y.cols, "matmul_nt", x, y);
  Matrix out(x.rows, y.rows);
  gemm_nt(x, y, out);
  return make(a, std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (t.needs_grad(a)) gemm_nn(g, t.value(b), t.grad(a));
    if (t.needs_grad(b)) gemm_tn(g, t.value(a), t.grad(b));
  });
}

Var add(Var a, Var b) {
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  require(x.rows == y.rows && x.cols == y.cols, "add", x, y);
  Matrix out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += y.data[i];
  return make(a, std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
    for (Var in : {a, b})
      if (t.needs_grad(in)) {
        Matrix& gi = t.grad(in);
        for (std::size_t i = 0; i < g.size(); ++i) gi.data[i] += g.data[i];
      }
  });
}

Var sub(Var a, Var b) {
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  require(x.rows == y.rows && x.cols == y.cols, "sub", x, y);
  Matrix out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= y.data[i];
  return make(a, std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (t.needs_grad(a)) {
      Matrix& ga = t.grad(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
    }
    if (t.needs_grad(b)) {
      Matrix& gb = t.grad(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb.data[i] -= g.data[i];
    }
  });
}

Var mul(Var a, Var b) {
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  require(x.rows == y.rows && x.cols == y.cols, "mul", x, y);
  Matrix out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= y.data[i];
  return make(a, std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (t.needs_grad(a)) {
      Matrix& ga = t.grad(a);
      const Matrix& y = t.value(b);
      for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] * y.data[i];
    }
    if (t.needs_grad(b)) {
      Matrix& gb = t.grad(b);
      const Matrix& x = t.value(a);
      for (std::size_t i = 0; i < g.size(); ++i) gb.data[i] += g.data[i] * x.data[i];
    }
  });
}

Var add_row(Var a, Var r) {
  const Matrix& x = a.value();
  const Matrix& y = r.value();
  require(y.rows == 1 && y.cols == x.cols, "add_row", x, y);
  Matrix out = x;
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 0; j < x.cols; ++j) out(i, j) += y.data[j];
  return make(a, std::move(out), {a, r}, [a, r](Tape& t, const Matrix& g) {
    if (t.needs_grad(a)) {
      Matrix& ga = t.grad(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
    }
    if (t.needs_grad(r)) {
      Matrix& gr = t.grad(r);
      for (std::size_t i = 0; i < g.rows; ++i)
        for (std::size_t j = 0; j < g.cols; ++j) gr.data[j] += g(i, j);
    }
  });
}

Var mul_row(Var a, Var r) {
  const Matrix& x = a.value();
  const Matrix& y = r.value();
  require(y.rows == 1 && y.cols == x.cols, "mul_row", x, y);
  Matrix out = x;
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 0; j < x.cols; ++j) out(i, j) *= y.data[j];
  return make(a, std::move(out), {a, r}, [a, r](Tape& t, const Matrix& g) {
    const Matrix& x = t.value(a);
    const Matrix& y = t.value(r);
    if (t.needs_grad(a)) {
      Matrix& ga = t.grad(a);
      for (std::size_t i = 0; i < g.rows; ++i)
        for (std::size_t j = 0; j < g.cols; ++j) ga(i, j) += g(i, j) * y.data[j];
    }
    if (t.needs_grad(r)) {
      Matrix& gr = t.grad(r);
      for (std::size_t i = 0; i < g.rows; ++i)
        for (std::size_t j = 0; j < g.cols; ++j) gr.data[j] += g(i, j) * x(i, j);
    }
  });
}

Var mul_col(Var a, Var c) {
  const Matrix& x = a.value();
  const Matrix& y = c.value();
  require(y.cols == 1 && y.rows == x.rows, "mul_col", x, y);
  Matrix out = x;
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 0; j < x.cols; ++j) out(i, j) *= y.data[i];
  return make(a, std::move(out), {a, c}, [a, c](Tape& t, const Matrix& g) {
    const Matrix& x = t.value(a);
    const Matrix& y = t.value(c);
    if (t.needs_grad(a)) {
      Matrix& ga = t.grad(a);
      for (std::size_t i = 0; i < g.rows; ++i)
        for (std::size_t j = 0; j < g.cols; ++j) ga(i, j) += g(i, j) * y.data[i];
    }
    if (t.needs_grad(c)) {
      Matrix& gc = t.grad(c);
      for (std::size_t i = 0; i < g.rows; ++i)
        for (std::size_t j = 0; j < g.cols; ++j) gc.data[i] += g(i, j) * x(i, j);
    }
  });
}

Var scale(Var a, double s) {
  Matrix out = a.value();
  for (double& x : out.data) x *= s;
  return make(a, std::move(out), {a}, [a, s](Tape& t, const Matrix& g) {
    Matrix& ga = t.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += s * g.data[i];
  });
}

Var one_minus(Var a) {
  Matrix out = a.value();
  for (double& x : out.data) x = 1.0 - x;
  return make(a, std::move(out), {a}, [a](Tape& t, const Matrix& g) {
    Matrix& ga = t.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] -= g.data[i];
  });
}

Var leaky_relu(Var a, double slope) {
  Matrix out = a.value();
  for (double& x : out.data)
    if (x < 0.0) x *= slope;
  return make(a, std::move(out), {a}, [a, slope](Tape& t, const Matrix& g) {
    const Matrix& x = t.value(a);
    Matrix& ga = t.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i)
      ga.data[i] += x.data[i] < 0.0 ? slope * g.data[i] : g.data[i];
  });
}

double sigmoid_of(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

Var sigmoid(Var a) {
  Matrix out = a.value();
  for (double& x : out.data) x = sigmoid_of(x);
  return make(a, std::move(out), {a}, [a](Tape& t, const Matrix& g) {
    const Matrix& x = t.value(a);
    Matrix& ga = t.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double y = sigmoid_of(x.data[i]);
      ga.data[i] += g.data[i] * y * (1.0 - y);
    }
  });
}

Matrix softmax_values(const Matrix& x, const Mask& col_mask) {
  auto valid = [&col_mask](std::size_t j) { return col_mask.empty() || col_mask[j] != 0; };
  Matrix out(x.rows, x.cols);
  for (std::size_t i = 0; i < x.rows; ++i) {
    double mx = -INFINITY;
    for (std::size_t j = 0; j < x.cols; ++j)
      if (valid(j)) mx = std::max(mx, x(i, j));
    if (mx == -INFINITY) continue;
    double z = 0.0;
    for (std::size_t j = 0; j < x.cols; ++j)
      if (valid(j)) z += out(i, j) = std::exp(x(i, j) - mx);
    for (std::size_t j = 0; j < x.cols; ++j) out(i, j) /= z;
  }
  return out;
}

Var softmax_rows(Var a, const Mask& col_mask) {
  const Matrix& x = a.value();
  if (!col_mask.empty() && col_mask.size() != x.cols)
    throw NumError(NumErrc::kShapeMismatch, "softmax mask width " + std::to_string(col_mask.size()) +
                                                " for " + shape_str(x));
  return make(a, softmax_values(x, col_mask), {a}, [a, col_mask](Tape& t, const Matrix& g) {
    const Matrix p = softmax_values(t.value(a), col_mask);
    Matrix& ga = t.grad(a);
    for (std::size_t i = 0; i < g.rows; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < g.cols; ++j) dot += g(i, j) * p(i, j);
      for (std::size_t j = 0; j < g.cols; ++j) ga(i, j) += p(i, j) * (g(i, j) - dot);
    }
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
  const Matrix& x = a.value();
  if (begin + count > x.cols)
    throw NumError(NumErrc::kShapeMismatch, "slice_cols beyond " + shape_str(x));
  Matrix out(x.rows, count);
  for (std::size_t i = 0; i < x.rows; ++i)
    std::copy_n(x.data.begin() + static_cast<std::ptrdiff_t>(i * x.cols + begin), count,
                out.data.begin() + static_cast<std::ptrdiff_t>(i * count));
  return make(a, std::move(out), {a}, [a, begin, count](Tape& t, const Matrix& g) {
    Matrix& ga = t.grad(a);
    for (std::size_t i = 0; i < g.rows; ++i)
      for (std::size_t j = 0; j < count; ++j) ga(i, begin + j) += g(i, j);
  });
}

Var slice_rows(Var a, std::size_t begin, std::size_t count) {
  const Matrix& x = a.value();
  if (begin + count > x.rows)
    throw NumError(NumErrc::kShapeMismatch, "slice_rows beyond " + shape_str(x));
  Matrix out(count, x.cols);
  std::copy_n(x.data.begin() + static_cast<std::ptrdiff_t>(begin * x.cols), count * x.cols,
              out.data.begin());
  return make(a, std::move(out), {a}, [a, begin](Tape& t, const Matrix& g) {
    Matrix& ga = t.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data[begin * g.cols + i] += g.data[i];
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw NumError(NumErrc::kShapeMismatch, "concat of nothing");
  const std::size_t rows = parts[0].rows();
  std::size_t cols = 0;
  for (Var p : parts) {
    require(p.rows() == rows, "concat_cols", parts[0].value(), p.value());
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::size_t at = 0;
  for (Var p : parts) {
    const Matrix& x = p.value();
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < x.cols; ++j) out(i, at + j) = x(i, j);
    at += x.cols;
  }
  Tape& t = *parts[0].tape;
  std::vector<Var> ins(parts.begin(), parts.end());
  return t.custom(std::move(out), parts, [ins](Tape& tt, const Matrix& g) {
    std::size_t at2 = 0;
    for (Var p : ins) {
      const std::size_t c = tt.value(p).cols;
      if (tt.needs_grad(p)) {
        Matrix& gp = tt.grad(p);
        for (std::size_t i = 0; i < g.rows; ++i)
          for (std::size_t j = 0; j < c; ++j) gp(i, j) += g(i, at2 + j);
      }
      at2 += c;
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw NumError(NumErrc::kShapeMismatch, "concat of nothing");
  const std::size_t cols = parts[0].cols();
  std::size_t rows = 0;
  for (Var p : parts) {
    require(p.cols() == cols, "concat_rows", parts[0].value(), p.value());
    rows += p.rows();
  }
  Matrix out(rows, cols);
  std::size_t at = 0;
  for (Var p : parts) {
    const Matrix& x = p.value();
    std::copy(x.data.begin(), x.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(at * cols));
    at += x.rows;
  }
  Tape& t = *parts[0].tape;
  std::vector<Var> ins(parts.begin(), parts.end());
  return t.custom(std::move(out), parts, [ins](Tape& tt, const Matrix& g) {
    std::size_t off = 0;
    for (Var p : ins) {
      const std::size_t n = tt.value(p).size();
      if (tt.needs_grad(p)) {
        Matrix& gp = tt.grad(p);
        for (std::size_t i = 0; i < n; ++i) gp.data[i] += g.data[off + i];
      }
      off += n;
    }
  });
}

Var gather_rows(Var a, std::vector<std::uint32_t> index) {
  const Matrix& x = a.value();
  Matrix out(index.size(), x.cols);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= x.rows) throw NumError(NumErrc::kShapeMismatch, "gather index out of range");
    std::copy_n(x.data.begin() + static_cast<std::ptrdiff_t>(index[i] * x.cols), x.cols,
                out.data.begin() + static_cast<std::ptrdiff_t>(i * x.cols));
  }
  return make(a, std::move(out), {a}, [a, index = std::move(index)](Tape& t, const Matrix& g) {
    Matrix& ga = t.grad(a);
    for (std::size_t i = 0; i < index.size(); ++i)
      for (std::size_t j = 0; j < g.cols; ++j) ga(index[i], j) += g(i, j);
  });
}

Var scatter_add_rows(Var a, std::vector<std::uint32_t> index, std::size_t out_rows) {
  const Matrix& x = a.value();
  if (index.size() != x.rows) throw NumError(NumErrc::kShapeMismatch, "scatter index length");
  Matrix out(out_rows, x.cols);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= out_rows) throw NumError(NumErrc::kShapeMismatch, "scatter index out of range");
    for (std::size_t j = 0; j < x.cols; ++j) out(index[i], j) += x(i, j);
  }
  return make(a, std::move(out), {a}, [a, index = std::move(index)](Tape& t, const Matrix& g) {
    Matrix& ga = t.grad(a);
    for (std::size_t i = 0; i < index.size(); ++i)
      for (std::size_t j = 0; j < g.cols; ++j) ga(i, j) += g(index[i], j);
  });
}

Var pool_rows(Var a, PoolMode mode, const Mask& row_mask) {
  const Matrix& x = a.value();
  if (!row_mask.empty() && row_mask.size() != x.rows)
    throw NumError(NumErrc::kShapeMismatch, "pool mask length for " + shape_str(x));
  auto valid = [&row_mask](std::size_t i) { return row_mask.empty() || row_mask[i] != 0; };
  Matrix out(1, x.cols);
  std::size_t n = 0;
  std::vector<std::size_t> arg(x.cols, 0);
  for (std::size_t i = 0; i < x.rows; ++i) {
    if (!valid(i)) continue;
    for (std::size_t j = 0; j < x.cols; ++j) {
      if (mode == PoolMode::kMax) {
        if (n == 0 || x(i, j) > out.data[j]) {
          out.data[j] = x(i, j);
          arg[j] = i;
        }
      } else {
        out.data[j] += x(i, j);
      }
    }
    ++n;
  }
  if (n == 0) return a.tape->constant(Matrix(1, x.cols));
  if (mode == PoolMode::kMean)
    for (double& v : out.data) v /= static_cast<double>(n);
  return make(a, std::move(out), {a},
              [a, mode, row_mask, n, arg = std::move(arg)](Tape& t, const Matrix& g) {
                Matrix& ga = t.grad(a);
                if (mode == PoolMode::kMax) {
                  for (std::size_t j = 0; j < g.cols; ++j) ga(arg[j], j) += g.data[j];
                  return;
                }
                const double w = mode == PoolMode::kMean ? 1.0 / static_cast<double>(n) : 1.0;
                for (std::size_t i = 0; i < ga.rows; ++i) {
                  if (!row_mask.empty() && row_mask[i] == 0) continue;
                  for (std::size_t j = 0; j < g.cols; ++j) ga(i, j) += w * g.data[j];
                }
              });
}

Var unfold_rows(Var a, std::size_t k) {
  const Matrix& x = a.value();
  if (k == 0 || x.rows < k)
    throw NumError(NumErrc::kEmptySequence,
                   "sequence of " + std::to_string(x.rows) + " rows is shorter than kernel " +
                       std::to_string(k));
  const std::size_t n = x.rows - k + 1;
  const std::size_t c = x.cols;
  Matrix out(n, k * c);
  for (std::size_t i = 0; i < n; ++i)
    std::copy_n(x.data.begin() + static_cast<std::ptrdiff_t>(i * c), k * c,
                out.data.begin() + static_cast<std::ptrdiff_t>(i * k * c));
  return make(a, std::move(out), {a}, [a, n, k, c](Tape& t, const Matrix& g) {
    Matrix& ga = t.grad(a);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t q = 0; q < k * c; ++q) ga.data[i * c + q] += g.data[i * k * c + q];
  });
}

Var maxpool_rows(Var a, std::size_t k) {
  const Matrix& x = a.value();
  if (k == 0 || x.rows < k)
    throw NumError(NumErrc::kEmptySequence,
                   "sequence of " + std::to_string(x.rows) + " rows is shorter than pool " +
                       std::to_string(k));
  const std::size_t n = x.rows - k + 1;
  Matrix out(n, x.cols);
  std::vector<std::uint32_t> arg(n * x.cols);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < x.cols; ++j) {
      std::size_t best = i;
      for (std::size_t r = i + 1; r < i + k; ++r)
        if (x(r, j) > x(best, j)) best = r;
      out(i, j) = x(best, j);
      arg[i * x.cols + j] = static_cast<std::uint32_t>(best);
    }
  return make(a, std::move(out), {a}, [a, arg = std::move(arg)](Tape& t, const Matrix& g) {
    Matrix& ga = t.grad(a);
    for (std::size_t i = 0; i < g.rows; ++i)
      for (std::size_t j = 0; j < g.cols; ++j) ga(arg[i * g.cols + j], j) += g(i, j);
  });
}

Var pad_rows(Var a, std::size_t rows) {
  const Matrix& x = a.value();
  if (x.rows >= rows) return a;
  Matrix out(rows, x.cols);
  std::copy(x.data.begin(), x.data.end(), out.data.begin());
  return make(a, std::move(out), {a}, [a](Tape& t, const Matrix& g) {
    Matrix& ga = t.grad(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga.data[i] += g.data[i];
  });
}

Var dropout(Var a, double p, Rng& rng, bool train) {
  if (!train || p <= 0.0) return a;
  const Matrix& x = a.value();
  Matrix keep(x.rows, x.cols);
  const double s = 1.0 / (1.0 - p);
  for (double& k : keep.data) k = rng.bernoulli(p) ? 0.0 : s;
  return mul(a, a.tape->constant(std::move(keep)));
}

Var block_diag_nt(Var x, Var blocks, std::size_t nb) {
  const Matrix& xv = x.value();
  const Matrix& bv = blocks.value();
  if (nb == 0 || xv.cols % nb != 0)
    throw NumError(NumErrc::kShapeMismatch, "block count does not divide " + shape_str(xv));
  const std::size_t bs = xv.cols / nb;
  require(bv.rows == xv.cols && bv.cols == bs, "block_diag_nt", xv, bv);
  Matrix out(xv.rows, xv.cols);
  for (std::size_t i = 0; i < xv.rows; ++i)
    for (std::size_t b = 0; b < nb; ++b)
      for (std::size_t o = 0; o < bs; ++o) {
        double s = 0.0;
        for (std::size_t q = 0; q < bs; ++q) s += xv(i, b * bs + q) * bv(b * bs + o, q);
        out(i, b * bs + o) = s;
      }
  return make(x, std::move(out), {x, blocks}, [x, blocks, nb, bs](Tape& t, const Matrix& g) {
    const Matrix& xv2 = t.value(x);
    const Matrix& bv2 = t.value(blocks);
    if (t.needs_grad(x)) {
      Matrix& gx = t.grad(x);
      for (std::size_t i = 0; i < g.rows; ++i)
        for (std::size_t b = 0; b < nb; ++b)
          for (std::size_t o = 0; o < bs; ++o) {
            const double gi = g(i, b * bs + o);
            if (gi == 0.0) continue;
            for (std::size_t q = 0; q < bs; ++q) gx(i, b * bs + q) += gi * bv2(b * bs + o, q);
          }
    }
    if (t.needs_grad(blocks)) {
      Matrix& gb = t.grad(blocks);
      for (std::size_t i = 0; i < g.rows; ++i)
        for (std::size_t b = 0; b < nb; ++b)
          for (std::size_t o = 0; o < bs; ++o) {
            const double gi = g(i, b * bs + o);
            if (gi == 0.0) continue;
            for (std::size_t q = 0; q < bs; ++q) gb(b * bs + o, q) += gi * xv2(i, b * bs + q);
          }
    }
  });
}

Var sum(Var a) {
  double s = 0.0;
  for (double x : a.value().data) s += x;
  return make(a, Matrix(1, 1, s), {a}, [a](Tape& t, const Matrix& g) {
    Matrix& ga = t.grad(a);
    for (double& x : ga.data) x += g.data[0];
  });
}

Var mse(Var pred, Var target) {
  const Matrix& p = pred.value();
  const Matrix& y = target.value();
  require(p.rows == y.rows && p.cols == y.cols, "mse", p, y);
  if (p.size() == 0) throw NumError(NumErrc::kShapeMismatch, "mse of empty tensors");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (p.data[i] - y.data[i]) * (p.data[i] - y.data[i]);
  const double n = static_cast<double>(p.size());
  return make(pred, Matrix(1, 1, s / n), {pred, target}, [pred, target, n](Tape& t, const Matrix& g) {
    const Matrix& p2 = t.value(pred);
    const Matrix& y2 = t.value(target);
    for (std::size_t i = 0; i < p2.size(); ++i) {
      const double d = 2.0 * (p2.data[i] - y2.data[i]) / n * g.data[0];
      if (t.needs_grad(pred)) t.grad(pred).data[i] += d;
      if (t.needs_grad(target)) t.grad(target).data[i] -= d;
    }
  });
}

Var dense(Var x, Var w) { return matmul_nt(x, w); }
Var dense(Var x, Var w, Var b) { return add_row(matmul_nt(x, w), b); }

// --- attention ------------------------------------------------------------------

std::uint64_t attention_score_count() { return g_attention_scores.load(); }
void reset_attention_score_count() { g_attention_scores.store(0); }

MultiHeadAttention::MultiHeadAttention(std::string prefix, std::size_t dim, std::size_t heads)
    : prefix_(std::move(prefix)), dim_(dim), heads_(heads) {
  if (heads == 0 || dim % heads != 0)
    throw NumError(NumErrc::kBadHeadCount,
                   std::to_string(heads) + " heads do not divide dimension " + std::to_string(dim));
}

void MultiHeadAttention::init(ParamStore& store, Rng& rng) const {
  for (const char* n : {"q", "k", "v", "o"}) {
    store.add_glorot(prefix_ + ".w" + n, dim_, dim_, rng);
    store.add_zeros(prefix_ + ".b" + n, 1, dim_);
  }
}

MultiHeadAttention::Projected MultiHeadAttention::project(Tape& t, ParamStore& store, Var keys,
                                                          Var values, const Mask& key_mask) const {
  if (keys.rows() != values.rows())
    throw NumError(NumErrc::kShapeMismatch, "keys and values differ in length");
  if (!key_mask.empty() && key_mask.size() != keys.rows())
    throw NumError(NumErrc::kShapeMismatch, "key mask length");
  Projected p;
  p.k = dense(keys, t.param(store, prefix_ + ".wk"), t.param(store, prefix_ + ".bk"));
  p.v = dense(values, t.param(store, prefix_ + ".wv"), t.param(store, prefix_ + ".bv"));
  p.mask = key_mask;
  return p;
}

Var MultiHeadAttention::attend(Tape& t, ParamStore& store, Var queries, const Projected& kv) const {
  if (queries.cols() != dim_ || kv.k.cols() != dim_)
    throw NumError(NumErrc::kShapeMismatch, "attention width " + std::to_string(dim_));
  std::size_t valid = kv.k.rows();
  if (!kv.mask.empty()) valid = static_cast<std::size_t>(std::count(kv.mask.begin(), kv.mask.end(), 1));
  if (valid == 0) return t.constant(Matrix(queries.rows(), dim_));
  g_attention_scores += heads_ * queries.rows() * valid;

  const Var q = dense(queries, t.param(store, prefix_ + ".wq"), t.param(store, prefix_ + ".bq"));
  const std::size_t dh = dim_ / heads_;
  const double s = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Var> outs;
  outs.reserve(heads_);
  for (std::size_t h = 0; h < heads_; ++h) {
    const Var qh = heads_ == 1 ? q : slice_cols(q, h * dh, dh);
    const Var kh = heads_ == 1 ? kv.k : slice_cols(kv.k, h * dh, dh);
    const Var vh = heads_ == 1 ? kv.v : slice_cols(kv.v, h * dh, dh);
    const Var w = softmax_rows(scale(matmul_nt(qh, kh), s), kv.mask);
    outs.push_back(matmul(w, vh));
  }
  const Var joined = heads_ == 1 ? outs[0] : concat_cols(outs);
  return dense(joined, t.param(store, prefix_ + ".wo"), t.param(store, prefix_ + ".bo"));
}

Var conv_pool_block(Var x, Var w, Var b, std::size_t k) {
  if (x.rows() == 0) throw NumError(NumErrc::kEmptySequence, "empty sequence");
  const Var padded = pad_rows(x, 2 * k - 1);
  const Var conv = dense(unfold_rows(padded, k), w, b);
  return maxpool_rows(conv, k);
}

// --- optimizer --------------------------------------------------------------------

double adamw_step(ParamStore& store, const AdamWHyper& h) {
  double sq = 0.0;
  bool any = false;
  for (auto& [name, p] : store.params()) {
    if (!p.has_grad) continue;
    any = true;
    for (double g : p.grad.data) sq += g * g;
  }
  if (!any) throw NumError(NumErrc::kMissingGradients, "no parameter has a gradient");
  const double norm = std::sqrt(sq);
  const double factor = h.clip_norm > 0.0 && norm > h.clip_norm ? h.clip_norm / norm : 1.0;
  ++store.step;
  const double t = static_cast<double>(store.step);
  const double c1 = 1.0 - std::pow(h.beta1, t);
  const double c2 = 1.0 - std::pow(h.beta2, t);
  for (auto& [name, p] : store.params()) {
    if (!p.has_grad) continue;
    if (p.m.size() != p.value.size()) p.m = Matrix(p.value.rows, p.value.cols);
    if (p.v.size() != p.value.size()) p.v = Matrix(p.value.rows, p.value.cols);
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad.data[i] * factor;
      p.m.data[i] = h.beta1 * p.m.data[i] + (1.0 - h.beta1) * g;
      p.v.data[i] = h.beta2 * p.v.data[i] + (1.0 - h.beta2) * g * g;
      const double mhat = p.m.data[i] / c1;
      const double vhat = p.v.data[i] / c2;
      p.value.data[i] -= h.lr * h.weight_decay * p.value.data[i];
      p.value.data[i] -= h.lr * mhat / (std::sqrt(vhat) + h.eps);
    }
  }
  return norm;
}

// --- gradient checking ---------------------------------------------------------------

double grad_rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({1.0, std::abs(analytic), std::abs(numeric)});
}

GradCheckReport grad_check(const std::function<Var(Tape&, std::span<const Var>)>& op,
                           std::vector<Matrix> inputs, double tolerance, double h,
                           std::uint64_t seed) {
  ParamStore store;
  for (std::size_t i = 0; i < inputs.size(); ++i) store.add("in" + std::to_string(i), inputs[i]);
  std::vector<Param*> ps;
  for (std::size_t i = 0; i < inputs.size(); ++i) ps.push_back(&store.at("in" + std::to_string(i)));

  Matrix weights;
  auto loss = [&](Tape& t) {
    std::vector<Var> vars;
    for (Param* p : ps) vars.push_back(t.param(*p));
    const Var out = op(t, vars);
    if (weights.size() == 0) {
      Rng rng(seed);
      weights = Matrix(out.rows(), out.cols());
      for (double& w : weights.data) w = 2.0 * rng.uniform() - 1.0;
    }
    return sum(mul(out, t.constant(weights)));
  };
  return grad_check_params(loss, store, tolerance, h, 0, seed);
}

GradCheckReport grad_check_params(const std::function<Var(Tape&)>& loss, ParamStore& store,
                                  double tolerance, double h, std::size_t per_param,
                                  std::uint64_t seed) {
  store.zero_grad();
  {
    Tape t;
    t.backward(loss(t));
  }
  auto eval = [&]() {
    Tape t(false);
    return loss(t).value().data[0];
  };
  GradCheckReport r;
  Rng rng(seed);
  for (auto& [name, p] : store.params()) {
    std::vector<std::size_t> probe(p.value.size());
    for (std::size_t i = 0; i < probe.size(); ++i) probe[i] = i;
    if (per_param > 0 && probe.size() > per_param) {
      rng.shuffle(probe.begin(), probe.end());
      probe.resize(per_param);
    }
    for (std::size_t i : probe) {
      const double keep = p.value.data[i];
      p.value.data[i] = keep + h;
      const double up = eval();
      p.value.data[i] = keep - h;
      const double down = eval();
      p.value.data[i] = keep;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = p.has_grad ? p.grad.data[i] : 0.0;
      r.max_rel_error = std::max(r.max_rel_error, grad_rel_error(analytic, numeric));
      ++r.checked;
    }
  }
  r.pass = r.max_rel_error <= tolerance;
  return r;
}

// --- checkpoints ------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'S', 'C', 'K', 'P', 'T', '0', '0', '1'};

void put_u(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}
  std::uint64_t u(int bytes) {
    need(static_cast<std::size_t>(bytes));
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(b_[at_ + static_cast<std::size_t>(i)]) << (8 * i);
    at_ += static_cast<std::size_t>(bytes);
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(b_.data() + at_), n);
    at_ += n;
    return s;
  }
  bool done() const { return at_ == b_.size(); }

 private:
  void need(std::size_t n) {
    if (at_ + n > b_.size()) throw NumError(NumErrc::kBadCheckpoint, "checkpoint truncated");
  }
  std::span<const std::uint8_t> b_;
  std::size_t at_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_params(const ParamStore& store) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u(out, store.size(), 8);
  for (const auto& [name, p] : store.params()) {
    put_u(out, name.size(), 4);
    out.insert(out.end(), name.begin(), name.end());
    put_u(out, 2, 4);
    put_u(out, p.value.rows, 8);
    put_u(out, p.value.cols, 8);
    for (double x : p.value.data) put_u(out, std::bit_cast<std::uint64_t>(x), 8);
  }
  return out;
}

ParamStore deserialize_params(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (r.str(8) != std::string(kMagic, 8)) throw NumError(NumErrc::kBadCheckpoint, "bad magic");
  const std::uint64_t n = r.u(8);
  ParamStore store;
  for (std::uint64_t e = 0; e < n; ++e) {
    const std::string name = r.str(r.u(4));
    if (r.u(4) != 2) throw NumError(NumErrc::kBadCheckpoint, "unsupported rank for " + name);
    const std::size_t rows = r.u(8);
    const std::size_t cols = r.u(8);
    if (rows != 0 && cols > bytes.size() / 8 / rows)
      throw NumError(NumErrc::kBadCheckpoint, "implausible shape for " + name);
    Matrix m(rows, cols);
    for (double& x : m.data) x = std::bit_cast<double>(r.u(8));
    store.add(name, std::move(m));
  }
  if (!r.done()) throw NumError(NumErrc::kBadCheckpoint, "trailing bytes");
  return store;
}

std::string params_manifest(const ParamStore& store) {
  std::ostringstream os;
  for (const auto& [name, p] : store.params()) {
    std::uint64_t hash = 1469598103934665603ull;
    for (double x : p.value.data) {
      const auto bits = std::bit_cast<std::uint64_t>(x);
      for (int i = 0; i < 8; ++i) {
        hash ^= (bits >> (8 * i)) & 0xff;
        hash *= 1099511628211ull;
      }
    }
    os << name << ' ' << p.value.rows << ' ' << p.value.cols << ' ' << std::hex << std::setw(16)
       << std::setfill('0') << hash << std::dec << '\n';
  }
  return os.str();
}

}  // namespace subcount::nk
