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

#include <cstdint>
#include <string>
#include <vector>

#include "ocn/attention.hpp"
#include "ocn/data.hpp"
#include "ocn/errors.hpp"
#include "ocn/matrix.hpp"
#include "ocn/params.hpp"
#include "ocn/rng.hpp"
#include "ocn/skimmer.hpp"
#include "ocn/tape.hpp"

namespace ocn {

enum class DecayMode {
  kDecoupled,    // optimizer shrinks decaying parameters after each step
  kLossPenalty,  // lambda * sum(theta^2) added to the loss instead
};

inline DecayMode decay_mode_from_string(const std::string& s) {
  if (s == "decoupled") return DecayMode::kDecoupled;
  if (s == "loss_penalty") return DecayMode::kLossPenalty;
  throw DataError("unknown decay_mode '" + s + "'");
}

inline std::string to_string(DecayMode m) {
  return m == DecayMode::kDecoupled ? "decoupled" : "loss_penalty";
}

struct ModelConfig {
  int d = 16;
  int options = 4;
  int vocab_size = 0;  // fixed after the training vocabulary is built
  TruncationLimits limits;
  double init_scale = 0.02;
  bool ablate_comparison = false;
  DecayMode decay_mode = DecayMode::kDecoupled;
  uint64_t seed = 0;

  int max_len() const { return limits.max_packed_length(); }
};

/// Creates the full named parameter set. Weight matrices, embeddings, and the
/// attention vectors draw from uniform[-init_scale, init_scale]; biases start
/// at zero. The decay flag marks which parameters weight decay touches:
/// biases and the attention/pooling vectors are exempt.
inline ParameterSet init_parameters(const ModelConfig& cfg) {
  require(cfg.d >= 1, "init_parameters: d must be positive");
  require(cfg.options >= 2, "init_parameters: need at least two options");
  require(cfg.vocab_size >= Vocabulary::kReservedCount,
          "init_parameters: vocab_size smaller than the reserved ids");
  require(cfg.init_scale > 0.0, "init_parameters: init_scale must be positive");

  Rng rng(cfg.seed);
  const auto uniform_matrix = [&](int r, int c) {
    Matrix m(r, c);
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < c; ++j) m.at(i, j) = rng.uniform(-cfg.init_scale, cfg.init_scale);
    }
    return m;
  };

  const int d = cfg.d;
  const int k = cfg.options;
  ParameterSet params;
  params.add("embedding", uniform_matrix(d, cfg.vocab_size), true);
  params.add("position", uniform_matrix(d, cfg.max_len()), true);
  params.add("w_m", uniform_matrix(d, 3 * d), true);
  params.add("b_m", Matrix::zeros(d, 1), false);
  params.add("v_o", uniform_matrix(3 * d, 1), false);
  params.add("v_a", uniform_matrix(d, 1), false);
  params.add("v_p", uniform_matrix(3 * d, 1), false);
  params.add("v_r", uniform_matrix(3 * d, 1), false);
  params.add("v_s", uniform_matrix(d, 1), true);
  params.add("w_c", uniform_matrix(d, d + 2 * d * (k - 1)), true);
  params.add("b_c", Matrix::zeros(d, 1), false);
  params.add("w_g", uniform_matrix(d, 3 * d), true);
  params.add("b_g", Matrix::zeros(d, 1), false);
  params.add("w_p", uniform_matrix(d, 3 * d), true);
  params.add("b_p", Matrix::zeros(d, 1), false);
  params.add("w_f", uniform_matrix(d, 4 * d), true);
  params.add("b_f", Matrix::zeros(d, 1), false);
  return params;
}

/// Tape bindings for every model parameter, by role.
struct ModelNodes {
  SkimmerNodes skim;
  NodeId v_o, v_a, v_p, v_r, v_s;
  NodeId w_c, b_c, w_g, b_g, w_p, b_p, w_f, b_f;
  std::vector<NodeId> all;  // in ParameterSet order
};

inline ModelNodes bind_model(Tape& tape, const ParameterSet& params) {
  const BoundParams bound = bind_parameters(tape, params);
  ModelNodes n;
  n.skim.embedding = bound.of(params, "embedding");
  n.skim.position = bound.of(params, "position");
  n.skim.w_m = bound.of(params, "w_m");
  n.skim.b_m = bound.of(params, "b_m");
  n.v_o = bound.of(params, "v_o");
  n.v_a = bound.of(params, "v_a");
  n.v_p = bound.of(params, "v_p");
  n.v_r = bound.of(params, "v_r");
  n.v_s = bound.of(params, "v_s");
  n.w_c = bound.of(params, "w_c");
  n.b_c = bound.of(params, "b_c");
  n.w_g = bound.of(params, "w_g");
  n.b_g = bound.of(params, "b_g");
  n.w_p = bound.of(params, "w_p");
  n.b_p = bound.of(params, "b_p");
  n.w_f = bound.of(params, "w_f");
  n.b_f = bound.of(params, "b_f");
  n.all = bound.ids;
  return n;
}

// ---------------------------------------------------------------------------
// Pipeline stages
// ---------------------------------------------------------------------------

/// Option features: question columns first, then option columns (d x (n + n_k)).
inline NodeId option_features(Tape& tape, NodeId q_enc, NodeId o_enc) {
  require(tape.value(q_enc).rows() == tape.value(o_enc).rows(),
          "option_features: feature sizes differ");
  return tape.hcat({q_enc, o_enc});
}

/// Word-level comparison of option k against option l. Each column of O^q_k
/// attends over O^q_l's columns; the attended summary is combined by
/// difference and product, stacked to 2d x n'_k.
inline NodeId pairwise_compare(Tape& tape, int k, int l, NodeId o_q_k, NodeId o_q_l, NodeId v_o,
                               const MaskVector& mask_l) {
  require(k != l, "pairwise_compare: an option is never compared with itself");
  const NodeId att = att_weights(tape, o_q_l, o_q_k, v_o, mask_l);  // n'_l x n'_k
  const NodeId o_bar = tape.matmul(o_q_l, att);                     // d x n'_k
  return tape.vcat({tape.sub(o_q_k, o_bar), tape.mul(o_q_k, o_bar)});
}

/// Fuses the K-1 pairwise blocks (ascending l, skipping k) with the raw
/// features through one tanh layer.
inline NodeId fuse_correlations(Tape& tape, NodeId o_q_k, const std::vector<NodeId>& pairwise,
                                NodeId w_c, NodeId b_c) {
  const Matrix& wc = tape.value(w_c);
  const int d = tape.value(o_q_k).rows();
  require(static_cast<int>(pairwise.size()) >= 1, "fuse_correlations: no comparison blocks");
  require(wc.cols() == d + 2 * d * static_cast<int>(pairwise.size()),
          "fuse_correlations: W_c width disagrees with the block count");

  std::vector<NodeId> stack;
  stack.push_back(o_q_k);
  stack.insert(stack.end(), pairwise.begin(), pairwise.end());
  const NodeId stacked = tape.vcat(stack);
  const int cols = tape.value(o_q_k).cols();
  return tape.tanh(tape.add(tape.matmul(w_c, stacked), tape.broadcast_cols(b_c, cols)));
}

/// Element-wise gate between raw features and correlation features, with the
/// pooled question vector shared across columns.
inline NodeId gate_fuse(Tape& tape, NodeId o_q, NodeId o_tilde_c, NodeId q_tilde, NodeId w_g,
                        NodeId b_g) {
  const Matrix& mq = tape.value(o_q);
  require(tape.value(q_tilde).cols() == 1, "gate_fuse: pooled question must be d x 1");
  const int cols = mq.cols();
  const NodeId gate_in =
      tape.vcat({o_q, o_tilde_c, tape.broadcast_cols(q_tilde, cols)});  // 3d x n'
  const NodeId g =
      tape.sigmoid(tape.add(tape.matmul(w_g, gate_in), tape.broadcast_cols(b_g, cols)));
  const NodeId ones = tape.constant(Matrix::ones(mq.rows(), cols));
  return tape.add(tape.mul(g, o_q), tape.mul(tape.sub(ones, g), o_tilde_c));
}

struct RereadTrace {
  NodeId a_c;        // n' x m
  NodeId a_p;        // m x n'
  NodeId o_hat_p;    // 2d x n'
  NodeId o_tilde_p;  // d x n'
};

/// Co-attention rereading of the article: both directions share v_p.
inline RereadTrace coattend_reread(Tape& tape, NodeId p_enc, NodeId o_c, NodeId v_p, NodeId w_p,
                                   NodeId b_p, const MaskVector& mask_p,
                                   const MaskVector& mask_o) {
  RereadTrace t;
  t.a_c = att_weights(tape, o_c, p_enc, v_p, mask_o);
  t.a_p = att_weights(tape, p_enc, o_c, v_p, mask_p);
  const NodeId article_side = tape.vcat({p_enc, tape.matmul(o_c, t.a_c)});  // 2d x m
  t.o_hat_p = tape.matmul(article_side, t.a_p);
  const int cols = tape.value(o_c).cols();
  t.o_tilde_p = tape.relu(tape.add(tape.matmul(w_p, tape.vcat({o_c, t.o_hat_p})),
                                   tape.broadcast_cols(b_p, cols)));
  return t;
}

/// Self-attention plus the difference/product feature stack, projected back
/// to d rows.
inline NodeId self_attend_fuse(Tape& tape, NodeId o_tilde_p, NodeId v_r, NodeId w_f, NodeId b_f,
                               const MaskVector& mask_o) {
  const NodeId att = att_weights(tape, o_tilde_p, o_tilde_p, v_r, mask_o);
  const NodeId o_s = tape.matmul(o_tilde_p, att);
  const NodeId feats =
      tape.vcat({o_tilde_p, o_s, tape.sub(o_tilde_p, o_s), tape.mul(o_tilde_p, o_s)});
  const int cols = tape.value(o_tilde_p).cols();
  return tape.relu(
      tape.add(tape.matmul(w_f, feats), tape.broadcast_cols(b_f, cols)));
}

/// Row-wise max pool then dot with v_s; a 1 x 1 node.
inline NodeId score_option(Tape& tape, NodeId o_f, NodeId v_s) {
  return tape.matmul(tape.transpose(v_s), tape.rowwise_max_pool(o_f));
}

// ---------------------------------------------------------------------------
// Whole-example orchestration
// ---------------------------------------------------------------------------

struct OptionTrace {
  NodeId p_enc;                  // d x m
  NodeId q_enc;                  // d x n
  NodeId o_enc;                  // d x n_k
  NodeId o_q;                    // d x n'
  std::vector<NodeId> pairwise;  // K-1 blocks, 2d x n' (empty when ablated)
  NodeId q_tilde;                // d x 1 (unset when ablated)
  NodeId o_tilde_c;              // d x n' (unset when ablated)
  NodeId o_c;                    // d x n'
  RereadTrace reread;
  NodeId o_f;    // d x n'
  NodeId score;  // 1 x 1
  int m = 0;
  int n_prime = 0;
};

struct ForwardTrace {
  std::vector<OptionTrace> options;
  NodeId scores;  // K x 1
  NodeId probs;   // K x 1
};

/// Runs the full per-example pipeline on the tape: encode each (P, Q, O_k)
/// triple, compare options, gate, reread the article, score, and softmax.
/// With ablate_comparison the comparison and gating stages are skipped and
/// the raw option features feed the rereading stage directly.
inline ForwardTrace forward_example(Tape& tape, const ModelNodes& nodes, const ModelConfig& cfg,
                                    const Example& ex) {
  require(ex.option_count() == cfg.options, "forward_example: option count mismatch");
  const int k_count = cfg.options;

  ForwardTrace trace;
  trace.options.resize(static_cast<size_t>(k_count));

  // Stage 1: one skimmer pass per option triple.
  for (int k = 0; k < k_count; ++k) {
    OptionTrace& t = trace.options[static_cast<size_t>(k)];
    const PackedTriple packed = truncate_and_pack(ex, cfg.limits, k);
    const EncodedTriple enc = encode_triple(tape, nodes.skim, packed);
    t.p_enc = enc.article;
    t.q_enc = enc.question;
    t.o_enc = enc.option;
    t.m = packed.article.length();
    t.n_prime = packed.question.length() + packed.option.length();
    t.o_q = option_features(tape, t.q_enc, t.o_enc);
  }

  // Stage 2: option comparison and gated fusion (skipped when ablated).
  for (int k = 0; k < k_count; ++k) {
    OptionTrace& t = trace.options[static_cast<size_t>(k)];
    if (cfg.ablate_comparison) {
      t.o_c = t.o_q;
      continue;
    }
    for (int l = 0; l < k_count; ++l) {
      if (l == k) continue;
      const OptionTrace& other = trace.options[static_cast<size_t>(l)];
      t.pairwise.push_back(pairwise_compare(tape, k, l, t.o_q, other.o_q, nodes.v_o,
                                            MaskVector::all_true(other.n_prime)));
    }
    t.o_tilde_c = fuse_correlations(tape, t.o_q, t.pairwise, nodes.w_c, nodes.b_c);
    t.q_tilde = attentive_pool(tape, t.q_enc, nodes.v_a,
                               MaskVector::all_true(tape.value(t.q_enc).cols()));
    t.o_c = gate_fuse(tape, t.o_q, t.o_tilde_c, t.q_tilde, nodes.w_g, nodes.b_g);
  }

  // Stages 3-4: reread the article, self-attend, score.
  std::vector<NodeId> score_nodes;
  for (int k = 0; k < k_count; ++k) {
    OptionTrace& t = trace.options[static_cast<size_t>(k)];
    t.reread = coattend_reread(tape, t.p_enc, t.o_c, nodes.v_p, nodes.w_p, nodes.b_p,
                               MaskVector::all_true(t.m), MaskVector::all_true(t.n_prime));
    t.o_f = self_attend_fuse(tape, t.reread.o_tilde_p, nodes.v_r, nodes.w_f, nodes.b_f,
                             MaskVector::all_true(t.n_prime));
    t.score = score_option(tape, t.o_f, nodes.v_s);
    score_nodes.push_back(t.score);
  }

  trace.scores = tape.vcat(score_nodes);  // K x 1
  trace.probs = tape.masked_column_softmax(trace.scores, MaskVector::all_true(k_count));
  return trace;
}

/// Negative log-likelihood of the gold option for one forward trace.
inline NodeId example_nll(Tape& tape, const ForwardTrace& trace, int gold) {
  const int k_count = tape.value(trace.probs).rows();
  require(gold >= 0 && gold < k_count, "example_nll: gold index out of range");
  return tape.scale(tape.log(tape.slice_rows(trace.probs, gold, 1)), -1.0);
}

struct BatchLoss {
  NodeId loss;  // 1 x 1
  std::vector<ForwardTrace> traces;
};

/// Mean NLL over the batch, plus lambda * sum(theta^2) when the loss-penalty
/// decay mode is active (l2_penalty is 0 in decoupled mode).
inline BatchLoss batch_loss(Tape& tape, const ModelNodes& nodes, const ModelConfig& cfg,
                            const std::vector<const Example*>& batch, double l2_penalty) {
  require(!batch.empty(), "batch_loss: empty batch");
  BatchLoss out;
  std::vector<NodeId> nlls;
  for (const Example* ex : batch) {
    require(ex->answer >= 0, "batch_loss: example lacks a gold answer");
    out.traces.push_back(forward_example(tape, nodes, cfg, *ex));
    nlls.push_back(example_nll(tape, out.traces.back(), ex->answer));
  }
  NodeId mean = tape.scale(tape.sum_all(tape.vcat(nlls)), 1.0 / static_cast<double>(nlls.size()));
  if (l2_penalty > 0.0) {
    NodeId sq_sum;
    for (const NodeId p : nodes.all) {
      const NodeId term = tape.sum_all(tape.mul(p, p));
      sq_sum = sq_sum.valid() ? tape.add(sq_sum, term) : term;
    }
    mean = tape.add(mean, tape.scale(sq_sum, l2_penalty));
  }
  out.loss = mean;
  return out;
}

/// Convenience forward pass: probabilities for one example on a fresh tape.
inline std::vector<double> predict_probs(const ParameterSet& params, const ModelConfig& cfg,
                                         const Example& ex) {
  Tape tape;
  const ModelNodes nodes = bind_model(tape, params);
  const ForwardTrace trace = forward_example(tape, nodes, cfg, ex);
  const Matrix& p = tape.value(trace.probs);
  std::vector<double> probs(static_cast<size_t>(p.rows()));
  for (int i = 0; i < p.rows(); ++i) probs[static_cast<size_t>(i)] = p.at(i, 0);
  return probs;
}

/// Lowest index wins exact ties.
inline int argmax_index(const std::vector<double>& xs) {
  require(!xs.empty(), "argmax_index: empty input");
  int best = 0;
  for (int i = 1; i < static_cast<int>(xs.size()); ++i) {
    if (xs[static_cast<size_t>(i)] > xs[static_cast<size_t>(best)]) best = i;
  }
  return best;
}

}  // namespace ocn
