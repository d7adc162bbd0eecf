// Copyright 2026 OCN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ocn/errors.hpp"
#include "ocn/matrix.hpp"

namespace ocn {

// Primitive operations. Every model equation is composed from these; each one
// carries a local gradient rule exercised by the finite-difference suites.
enum class OpKind : uint8_t {
  kParameter,
  kConstant,
  kMatMul,
  kTranspose,
  kAdd,
  kSub,
  kMul,
  kTanh,
  kSigmoid,
  kRelu,
  kLog,
  kScale,
  kBroadcastCols,
  kSliceRows,
  kGatherCols,
  kSumAll,
  kMaskedColumnSoftmax,
  kRowwiseMaxPool,
  kHCat,  // [A|B]: parts share row count, widths add
  kVCat,  // [A;B]: parts share col count, heights add
};

/// Handle into a Tape. Only valid for the tape that produced it.
struct NodeId {
  int v = -1;
  bool valid() const { return v >= 0; }
};

/// Gradients keyed by parameter name, as produced by Tape::backward.
class Gradients {
 public:
  void set(const std::string& name, Matrix grad) { by_name_[name] = std::move(grad); }

  const Matrix& at(const std::string& name) const {
    auto it = by_name_.find(name);
    require(it != by_name_.end(), "Gradients: no entry for parameter '" + name + "'");
    return it->second;
  }

  Matrix& at(const std::string& name) {
    auto it = by_name_.find(name);
    require(it != by_name_.end(), "Gradients: no entry for parameter '" + name + "'");
    return it->second;
  }

  bool contains(const std::string& name) const { return by_name_.count(name) != 0; }
  const std::map<std::string, Matrix>& all() const { return by_name_; }
  std::map<std::string, Matrix>& all() { return by_name_; }

 private:
  std::map<std::string, Matrix> by_name_;
};

/// Recorded forward graph. Nodes are appended in topological order (inputs
/// always precede uses), values are computed eagerly, and replay() re-executes
/// the stored operations to reproduce every value bit-identically.
class Tape {
 public:
  static constexpr double kLogFloor = 1e-30;

  struct Node {
    OpKind kind;
    std::vector<NodeId> inputs;
    Matrix value;
    double scalar = 0.0;        // kScale factor
    int arg0 = 0;               // kBroadcastCols: cols; kSliceRows: start
    int arg1 = 0;               // kSliceRows: len
    std::vector<int> indices;   // kGatherCols: gather list; kRowwiseMaxPool: argmax
    MaskVector mask;            // kMaskedColumnSoftmax
    int param = -1;             // kParameter: caller-side registry index
  };

  // ---- leaves ----

  NodeId parameter(const std::string& name, const Matrix& value, int param_index = -1) {
    require(value.rows() >= 1, "parameter: empty matrix");
    Node n;
    n.kind = OpKind::kParameter;
    n.value = value;
    n.param = param_index;
    NodeId id = push(std::move(n));
    param_leaves_.push_back(id);
    param_names_.push_back(name);
    return id;
  }

  NodeId constant(Matrix value) {
    Node n;
    n.kind = OpKind::kConstant;
    n.value = std::move(value);
    return push(std::move(n));
  }

  // ---- primitives ----

  NodeId matmul(NodeId a, NodeId b) {
    const Matrix& A = value(a);
    const Matrix& B = value(b);
    require(A.cols() == B.rows(), "matmul: inner dimensions disagree (" + A.shape_str() +
                                      " x " + B.shape_str() + ")");
    Node n;
    n.kind = OpKind::kMatMul;
    n.inputs = {a, b};
    return emit(std::move(n));
  }

  NodeId transpose(NodeId a) {
    Node n;
    n.kind = OpKind::kTranspose;
    n.inputs = {a};
    return emit(std::move(n));
  }

  NodeId add(NodeId a, NodeId b) { return binary(OpKind::kAdd, a, b, "add"); }
  NodeId sub(NodeId a, NodeId b) { return binary(OpKind::kSub, a, b, "sub"); }
  NodeId mul(NodeId a, NodeId b) { return binary(OpKind::kMul, a, b, "mul"); }

  NodeId tanh(NodeId a) { return unary(OpKind::kTanh, a); }
  NodeId sigmoid(NodeId a) { return unary(OpKind::kSigmoid, a); }
  NodeId relu(NodeId a) { return unary(OpKind::kRelu, a); }

  /// Natural log with the argument clamped at kLogFloor. Clamping bumps
  /// the tape's numerical-warning counter; it is never silent.
  NodeId log(NodeId a) { return unary(OpKind::kLog, a); }

  NodeId scale(NodeId a, double factor) {
    Node n;
    n.kind = OpKind::kScale;
    n.inputs = {a};
    n.scalar = factor;
    return emit(std::move(n));
  }

  /// Repeat a column vector (d x 1) across `cols` columns.
  NodeId broadcast_cols(NodeId a, int cols) {
    const Matrix& A = value(a);
    require(A.cols() == 1, "broadcast_cols: input must be a column vector, got " + A.shape_str());
    require(cols >= 1, "broadcast_cols: cols must be >= 1");
    Node n;
    n.kind = OpKind::kBroadcastCols;
    n.inputs = {a};
    n.arg0 = cols;
    return emit(std::move(n));
  }

  NodeId slice_rows(NodeId a, int start, int len) {
    const Matrix& A = value(a);
    require(start >= 0 && len >= 1 && start + len <= A.rows(),
            "slice_rows: range [" + std::to_string(start) + ", " + std::to_string(start + len) +
                ") out of bounds for " + A.shape_str());
    Node n;
    n.kind = OpKind::kSliceRows;
    n.inputs = {a};
    n.arg0 = start;
    n.arg1 = len;
    return emit(std::move(n));
  }

  /// Select columns by index (duplicates allowed; gradient accumulates).
  NodeId gather_cols(NodeId a, std::vector<int> indices) {
    const Matrix& A = value(a);
    require(!indices.empty(), "gather_cols: empty index list");
    for (int idx : indices) {
      require(idx >= 0 && idx < A.cols(),
              "gather_cols: index " + std::to_string(idx) + " out of range for " + A.shape_str());
    }
    Node n;
    n.kind = OpKind::kGatherCols;
    n.inputs = {a};
    n.indices = std::move(indices);
    return emit(std::move(n));
  }

  NodeId slice_cols(NodeId a, int start, int len) {
    std::vector<int> idx(static_cast<size_t>(len));
    for (int j = 0; j < len; ++j) idx[static_cast<size_t>(j)] = start + j;
    return gather_cols(a, std::move(idx));
  }

  NodeId sum_all(NodeId a) { return unary(OpKind::kSumAll, a); }

  /// Column-stochastic softmax over rows: output column j is a distribution
  /// over the unmasked rows i. Masked rows are exactly zero. Stabilized by
  /// subtracting the per-column max over unmasked entries.
  NodeId masked_column_softmax(NodeId a, MaskVector mask) {
    const Matrix& A = value(a);
    require(mask.size() == A.rows(), "masked_column_softmax: mask length " +
                                         std::to_string(mask.size()) + " != rows of " +
                                         A.shape_str());
    require(mask.count_true() >= 1, "masked_column_softmax: all rows masked");
    Node n;
    n.kind = OpKind::kMaskedColumnSoftmax;
    n.inputs = {a};
    n.mask = std::move(mask);
    return emit(std::move(n));
  }

  /// Per-row max over columns -> d x 1. Gradient flows to the first
  /// (lowest-index) maximal column of each row.
  NodeId rowwise_max_pool(NodeId a) { return unary(OpKind::kRowwiseMaxPool, a); }

  /// [A|B|...]: concatenate side by side. Parts share the row count.
  NodeId hcat(std::vector<NodeId> parts) { return concat(OpKind::kHCat, std::move(parts)); }

  /// [A;B;...]: stack vertically. Parts share the column count.
  NodeId vcat(std::vector<NodeId> parts) { return concat(OpKind::kVCat, std::move(parts)); }

  // ---- access ----

  const Matrix& value(NodeId id) const {
    require(id.valid() && id.v < static_cast<int>(nodes_.size()), "Tape: invalid node id");
    return nodes_[static_cast<size_t>(id.v)].value;
  }

  const Node& node(NodeId id) const { return nodes_[static_cast<size_t>(id.v)]; }
  size_t size() const { return nodes_.size(); }

  /// Count of log-argument clamp events (zero-probability warnings).
  int clamp_events() const { return clamp_events_; }

  const std::vector<NodeId>& parameter_leaves() const { return param_leaves_; }
  const std::string& parameter_name(size_t i) const { return param_names_[i]; }

  // ---- execution ----

  /// Re-executes every recorded operation in order, overwriting node values.
  /// Leaves keep their stored values, so the result is bit-identical to the
  /// original forward pass.
  void replay() {
    for (Node& n : nodes_) {
      if (n.kind == OpKind::kParameter || n.kind == OpKind::kConstant) continue;
      eval(n);
    }
  }

  /// Reverse-mode sweep from a 1 x 1 seed node. Returns gradients for every
  /// parameter leaf on the tape; leaves the seed does not reach get zeros.
  Gradients backward(NodeId seed) const {
    const Matrix& seed_value = value(seed);
    require(seed_value.rows() == 1 && seed_value.cols() == 1,
            "backward: seed must be a 1x1 scalar, got " + seed_value.shape_str());

    std::vector<Matrix> grad(nodes_.size());
    std::vector<char> live(nodes_.size(), 0);
    grad[static_cast<size_t>(seed.v)] = Matrix::from_rows({{1.0}});
    live[static_cast<size_t>(seed.v)] = 1;

    for (int i = seed.v; i >= 0; --i) {
      if (!live[static_cast<size_t>(i)]) continue;
      accumulate_inputs(nodes_[static_cast<size_t>(i)], grad[static_cast<size_t>(i)], grad, live);
    }

    Gradients out;
    for (size_t p = 0; p < param_leaves_.size(); ++p) {
      const size_t idx = static_cast<size_t>(param_leaves_[p].v);
      if (live[idx]) {
        out.set(param_names_[p], std::move(grad[idx]));
      } else {
        const Matrix& v = nodes_[idx].value;
        out.set(param_names_[p], Matrix::zeros(v.rows(), v.cols()));
      }
    }
    return out;
  }

 private:
  NodeId push(Node n) {
    nodes_.push_back(std::move(n));
    return NodeId{static_cast<int>(nodes_.size()) - 1};
  }

  NodeId emit(Node n) {
    eval(n);
    return push(std::move(n));
  }

  NodeId unary(OpKind kind, NodeId a) {
    require(a.valid(), "unary op: invalid input node");
    Node n;
    n.kind = kind;
    n.inputs = {a};
    return emit(std::move(n));
  }

  NodeId binary(OpKind kind, NodeId a, NodeId b, const char* opname) {
    const Matrix& A = value(a);
    const Matrix& B = value(b);
    require(A.same_shape(B), std::string(opname) + ": shape mismatch (" + A.shape_str() + " vs " +
                                 B.shape_str() + ")");
    Node n;
    n.kind = kind;
    n.inputs = {a, b};
    return emit(std::move(n));
  }

  NodeId concat(OpKind kind, std::vector<NodeId> parts) {
    require(!parts.empty(), "concat: no parts");
    const Matrix& first = value(parts[0]);
    for (const NodeId& p : parts) {
      const Matrix& M = value(p);
      if (kind == OpKind::kHCat) {
        require(M.rows() == first.rows(),
                "hcat: parts disagree on row count (" + first.shape_str() + " vs " +
                    M.shape_str() + ")");
      } else {
        require(M.cols() == first.cols(),
                "vcat: parts disagree on column count (" + first.shape_str() + " vs " +
                    M.shape_str() + ")");
      }
    }
    Node n;
    n.kind = kind;
    n.inputs = std::move(parts);
    return emit(std::move(n));
  }

  const Matrix& in(const Node& n, size_t i) const {
    return nodes_[static_cast<size_t>(n.inputs[i].v)].value;
  }

  // Forward kernels. Builders and replay() share this code path, which is
  // what makes replay bit-identical.
  void eval(Node& n) {
    switch (n.kind) {
      case OpKind::kParameter:
      case OpKind::kConstant:
        break;
      case OpKind::kMatMul: {
        const Matrix& A = in(n, 0);
        const Matrix& B = in(n, 1);
        Matrix out(A.rows(), B.cols());
        for (int i = 0; i < A.rows(); ++i) {
          for (int k = 0; k < A.cols(); ++k) {
            const double a = A.at(i, k);
            if (a == 0.0) continue;
            for (int j = 0; j < B.cols(); ++j) {
              out.at(i, j) += a * B.at(k, j);
            }
          }
        }
        n.value = std::move(out);
        break;
      }
      case OpKind::kTranspose: {
        const Matrix& A = in(n, 0);
        Matrix out(A.cols(), A.rows());
        for (int i = 0; i < A.rows(); ++i)
          for (int j = 0; j < A.cols(); ++j) out.at(j, i) = A.at(i, j);
        n.value = std::move(out);
        break;
      }
      case OpKind::kAdd:
      case OpKind::kSub:
      case OpKind::kMul: {
        const Matrix& A = in(n, 0);
        const Matrix& B = in(n, 1);
        Matrix out(A.rows(), A.cols());
        const size_t len = A.size();
        for (size_t i = 0; i < len; ++i) {
          out[i] = n.kind == OpKind::kAdd   ? A[i] + B[i]
                   : n.kind == OpKind::kSub ? A[i] - B[i]
                                            : A[i] * B[i];
        }
        n.value = std::move(out);
        break;
      }
      case OpKind::kTanh:
      case OpKind::kSigmoid:
      case OpKind::kRelu: {
        const Matrix& A = in(n, 0);
        Matrix out(A.rows(), A.cols());
        for (size_t i = 0; i < A.size(); ++i) {
          out[i] = n.kind == OpKind::kTanh      ? std::tanh(A[i])
                   : n.kind == OpKind::kSigmoid ? 1.0 / (1.0 + std::exp(-A[i]))
                                                : (A[i] > 0.0 ? A[i] : 0.0);
        }
        n.value = std::move(out);
        break;
      }
      case OpKind::kLog: {
        const Matrix& A = in(n, 0);
        Matrix out(A.rows(), A.cols());
        for (size_t i = 0; i < A.size(); ++i) {
          if (A[i] < kLogFloor) {
            ++clamp_events_;
            out[i] = std::log(kLogFloor);
          } else {
            out[i] = std::log(A[i]);
          }
        }
        n.value = std::move(out);
        break;
      }
      case OpKind::kScale: {
        const Matrix& A = in(n, 0);
        Matrix out(A.rows(), A.cols());
        for (size_t i = 0; i < A.size(); ++i) out[i] = n.scalar * A[i];
        n.value = std::move(out);
        break;
      }
      case OpKind::kBroadcastCols: {
        const Matrix& A = in(n, 0);
        Matrix out(A.rows(), n.arg0);
        for (int i = 0; i < A.rows(); ++i)
          for (int j = 0; j < n.arg0; ++j) out.at(i, j) = A.at(i, 0);
        n.value = std::move(out);
        break;
      }
      case OpKind::kSliceRows: {
        const Matrix& A = in(n, 0);
        Matrix out(n.arg1, A.cols());
        for (int i = 0; i < n.arg1; ++i)
          for (int j = 0; j < A.cols(); ++j) out.at(i, j) = A.at(n.arg0 + i, j);
        n.value = std::move(out);
        break;
      }
      case OpKind::kGatherCols: {
        const Matrix& A = in(n, 0);
        Matrix out(A.rows(), static_cast<int>(n.indices.size()));
        for (int j = 0; j < out.cols(); ++j) {
          const int src = n.indices[static_cast<size_t>(j)];
          for (int i = 0; i < A.rows(); ++i) out.at(i, j) = A.at(i, src);
        }
        n.value = std::move(out);
        break;
      }
      case OpKind::kSumAll: {
        const Matrix& A = in(n, 0);
        double s = 0.0;
        for (size_t i = 0; i < A.size(); ++i) s += A[i];
        n.value = Matrix::from_rows({{s}});
        break;
      }
      case OpKind::kMaskedColumnSoftmax: {
        const Matrix& A = in(n, 0);
        Matrix out(A.rows(), A.cols());
        for (int j = 0; j < A.cols(); ++j) {
          double mx = -std::numeric_limits<double>::infinity();
          for (int i = 0; i < A.rows(); ++i) {
            if (n.mask[i] && A.at(i, j) > mx) mx = A.at(i, j);
          }
          double denom = 0.0;
          for (int i = 0; i < A.rows(); ++i) {
            if (n.mask[i]) denom += std::exp(A.at(i, j) - mx);
          }
          for (int i = 0; i < A.rows(); ++i) {
            out.at(i, j) = n.mask[i] ? std::exp(A.at(i, j) - mx) / denom : 0.0;
          }
        }
        n.value = std::move(out);
        break;
      }
      case OpKind::kRowwiseMaxPool: {
        const Matrix& A = in(n, 0);
        Matrix out(A.rows(), 1);
        n.indices.assign(static_cast<size_t>(A.rows()), 0);
        for (int i = 0; i < A.rows(); ++i) {
          int best = 0;
          double mx = A.at(i, 0);
          for (int j = 1; j < A.cols(); ++j) {
            if (A.at(i, j) > mx) {  // strict: first maximal column wins
              mx = A.at(i, j);
              best = j;
            }
          }
          out.at(i, 0) = mx;
          n.indices[static_cast<size_t>(i)] = best;
        }
        n.value = std::move(out);
        break;
      }
      case OpKind::kHCat: {
        const Matrix& first = in(n, 0);
        int total = 0;
        for (size_t p = 0; p < n.inputs.size(); ++p) total += in(n, p).cols();
        Matrix out(first.rows(), total);
        int off = 0;
        for (size_t p = 0; p < n.inputs.size(); ++p) {
          const Matrix& M = in(n, p);
          for (int i = 0; i < M.rows(); ++i)
            for (int j = 0; j < M.cols(); ++j) out.at(i, off + j) = M.at(i, j);
          off += M.cols();
        }
        n.value = std::move(out);
        break;
      }
      case OpKind::kVCat: {
        const Matrix& first = in(n, 0);
        int total = 0;
        for (size_t p = 0; p < n.inputs.size(); ++p) total += in(n, p).rows();
        Matrix out(total, first.cols());
        int off = 0;
        for (size_t p = 0; p < n.inputs.size(); ++p) {
          const Matrix& M = in(n, p);
          for (int i = 0; i < M.rows(); ++i)
            for (int j = 0; j < M.cols(); ++j) out.at(off + i, j) = M.at(i, j);
          off += M.rows();
        }
        n.value = std::move(out);
        break;
      }
    }
  }

  static Matrix& buffer(std::vector<Matrix>& grad, std::vector<char>& live, NodeId id,
                        const Matrix& like) {
    Matrix& g = grad[static_cast<size_t>(id.v)];
    if (!live[static_cast<size_t>(id.v)]) {
      g = Matrix::zeros(like.rows(), like.cols());
      live[static_cast<size_t>(id.v)] = 1;
    }
    return g;
  }

  void accumulate_inputs(const Node& n, const Matrix& g, std::vector<Matrix>& grad,
                         std::vector<char>& live) const {
    switch (n.kind) {
      case OpKind::kParameter:
      case OpKind::kConstant:
        break;
      case OpKind::kMatMul: {
        const Matrix& A = in(n, 0);
        const Matrix& B = in(n, 1);
        Matrix& ga = buffer(grad, live, n.inputs[0], A);
        // dA += g * B^T
        for (int i = 0; i < A.rows(); ++i)
          for (int j = 0; j < B.cols(); ++j) {
            const double gij = g.at(i, j);
            if (gij == 0.0) continue;
            for (int k = 0; k < A.cols(); ++k) ga.at(i, k) += gij * B.at(k, j);
          }
        Matrix& gb = buffer(grad, live, n.inputs[1], B);
        // dB += A^T * g
        for (int i = 0; i < A.rows(); ++i)
          for (int k = 0; k < A.cols(); ++k) {
            const double aik = A.at(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < B.cols(); ++j) gb.at(k, j) += aik * g.at(i, j);
          }
        break;
      }
      case OpKind::kTranspose: {
        const Matrix& A = in(n, 0);
        Matrix& ga = buffer(grad, live, n.inputs[0], A);
        for (int i = 0; i < A.rows(); ++i)
          for (int j = 0; j < A.cols(); ++j) ga.at(i, j) += g.at(j, i);
        break;
      }
      case OpKind::kAdd: {
        for (int s = 0; s < 2; ++s) {
          Matrix& gi = buffer(grad, live, n.inputs[static_cast<size_t>(s)], in(n, static_cast<size_t>(s)));
          for (size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
        }
        break;
      }
      case OpKind::kSub: {
        Matrix& ga = buffer(grad, live, n.inputs[0], in(n, 0));
        Matrix& gb = buffer(grad, live, n.inputs[1], in(n, 1));
        for (size_t i = 0; i < g.size(); ++i) {
          ga[i] += g[i];
          gb[i] -= g[i];
        }
        break;
      }
      case OpKind::kMul: {
        const Matrix& A = in(n, 0);
        const Matrix& B = in(n, 1);
        Matrix& ga = buffer(grad, live, n.inputs[0], A);
        Matrix& gb = buffer(grad, live, n.inputs[1], B);
        for (size_t i = 0; i < g.size(); ++i) {
          ga[i] += g[i] * B[i];
          gb[i] += g[i] * A[i];
        }
        break;
      }
      case OpKind::kTanh: {
        Matrix& ga = buffer(grad, live, n.inputs[0], in(n, 0));
        for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - n.value[i] * n.value[i]);
        break;
      }
      case OpKind::kSigmoid: {
        Matrix& ga = buffer(grad, live, n.inputs[0], in(n, 0));
        for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * n.value[i] * (1.0 - n.value[i]);
        break;
      }
      case OpKind::kRelu: {
        const Matrix& A = in(n, 0);
        Matrix& ga = buffer(grad, live, n.inputs[0], A);
        // subgradient at exactly 0 is 0
        for (size_t i = 0; i < g.size(); ++i) ga[i] += A[i] > 0.0 ? g[i] : 0.0;
        break;
      }
      case OpKind::kLog: {
        const Matrix& A = in(n, 0);
        Matrix& ga = buffer(grad, live, n.inputs[0], A);
        for (size_t i = 0; i < g.size(); ++i) {
          if (A[i] >= kLogFloor) ga[i] += g[i] / A[i];
        }
        break;
      }
      case OpKind::kScale: {
        Matrix& ga = buffer(grad, live, n.inputs[0], in(n, 0));
        for (size_t i = 0; i < g.size(); ++i) ga[i] += n.scalar * g[i];
        break;
      }
      case OpKind::kBroadcastCols: {
        Matrix& ga = buffer(grad, live, n.inputs[0], in(n, 0));
        for (int i = 0; i < g.rows(); ++i) {
          double s = 0.0;
          for (int j = 0; j < g.cols(); ++j) s += g.at(i, j);
          ga.at(i, 0) += s;
        }
        break;
      }
      case OpKind::kSliceRows: {
        Matrix& ga = buffer(grad, live, n.inputs[0], in(n, 0));
        for (int i = 0; i < n.arg1; ++i)
          for (int j = 0; j < g.cols(); ++j) ga.at(n.arg0 + i, j) += g.at(i, j);
        break;
      }
      case OpKind::kGatherCols: {
        Matrix& ga = buffer(grad, live, n.inputs[0], in(n, 0));
        for (int j = 0; j < g.cols(); ++j) {
          const int src = n.indices[static_cast<size_t>(j)];
          for (int i = 0; i < g.rows(); ++i) ga.at(i, src) += g.at(i, j);
        }
        break;
      }
      case OpKind::kSumAll: {
        Matrix& ga = buffer(grad, live, n.inputs[0], in(n, 0));
        const double s = g.at(0, 0);
        for (size_t i = 0; i < ga.size(); ++i) ga[i] += s;
        break;
      }
      case OpKind::kMaskedColumnSoftmax: {
        const Matrix& Y = n.value;
        Matrix& ga = buffer(grad, live, n.inputs[0], in(n, 0));
        for (int j = 0; j < Y.cols(); ++j) {
          double dot = 0.0;
          for (int i = 0; i < Y.rows(); ++i) {
            if (n.mask[i]) dot += g.at(i, j) * Y.at(i, j);
          }
          for (int i = 0; i < Y.rows(); ++i) {
            if (n.mask[i]) ga.at(i, j) += Y.at(i, j) * (g.at(i, j) - dot);
          }
        }
        break;
      }
      case OpKind::kRowwiseMaxPool: {
        Matrix& ga = buffer(grad, live, n.inputs[0], in(n, 0));
        for (int i = 0; i < g.rows(); ++i) {
          ga.at(i, n.indices[static_cast<size_t>(i)]) += g.at(i, 0);
        }
        break;
      }
      case OpKind::kHCat: {
        int off = 0;
        for (size_t p = 0; p < n.inputs.size(); ++p) {
          const Matrix& M = in(n, p);
          Matrix& gp = buffer(grad, live, n.inputs[p], M);
          for (int i = 0; i < M.rows(); ++i)
            for (int j = 0; j < M.cols(); ++j) gp.at(i, j) += g.at(i, off + j);
          off += M.cols();
        }
        break;
      }
      case OpKind::kVCat: {
        int off = 0;
        for (size_t p = 0; p < n.inputs.size(); ++p) {
          const Matrix& M = in(n, p);
          Matrix& gp = buffer(grad, live, n.inputs[p], M);
          for (int i = 0; i < M.rows(); ++i)
            for (int j = 0; j < M.cols(); ++j) gp.at(i, j) += g.at(off + i, j);
          off += M.rows();
        }
        break;
      }
    }
  }

  std::vector<Node> nodes_;
  std::vector<NodeId> param_leaves_;
  std::vector<std::string> param_names_;
  int clamp_events_ = 0;
};

}  // namespace ocn
