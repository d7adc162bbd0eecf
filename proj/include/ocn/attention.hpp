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

#include "ocn/errors.hpp"
#include "ocn/matrix.hpp"
#include "ocn/tape.hpp"

namespace ocn {

/// Trilinear similarity scores: S[i][j] = v^T [U_:i; V_:j; U_:i o V_:j].
/// Split v = [v1; v2; v3]; then S = (U^T v1) 1^T + 1 (V^T v2)^T + (diag(v3) U)^T V,
/// which builds the N x M score matrix from a handful of matrix products
/// instead of one node per (i, j) pair.
inline NodeId trilinear_scores(Tape& tape, NodeId u, NodeId v_keys, NodeId v_param) {
  const Matrix& mu = tape.value(u);
  const Matrix& mv = tape.value(v_keys);
  const Matrix& mp = tape.value(v_param);
  const int d = mu.rows();
  require(mv.rows() == d, "trilinear_scores: U and V feature sizes differ");
  require(mp.rows() == 3 * d && mp.cols() == 1, "trilinear_scores: v must be a 3d vector");
  const int n = mu.cols();
  const int m = mv.cols();

  const NodeId v1 = tape.slice_rows(v_param, 0, d);
  const NodeId v2 = tape.slice_rows(v_param, d, d);
  const NodeId v3 = tape.slice_rows(v_param, 2 * d, d);

  const NodeId u_term = tape.broadcast_cols(tape.matmul(tape.transpose(u), v1), m);  // N x M
  const NodeId v_term =
      tape.transpose(tape.broadcast_cols(tape.matmul(tape.transpose(v_keys), v2), n));  // N x M
  const NodeId cross =
      tape.matmul(tape.transpose(tape.mul(u, tape.broadcast_cols(v3, n))), v_keys);  // N x M
  return tape.add(tape.add(u_term, v_term), cross);
}

/// Attention weights over U positions, one distribution per V column.
/// Output is N x M and column-stochastic; masked U positions are exactly 0.
inline NodeId att_weights(Tape& tape, NodeId u, NodeId v_keys, NodeId v_param,
                          const MaskVector& mask_u) {
  const NodeId scores = trilinear_scores(tape, u, v_keys, v_param);
  require(mask_u.size() == tape.value(u).cols(), "att_weights: mask length mismatch");
  return tape.masked_column_softmax(scores, mask_u);
}

/// Attentive pooling: softmax(v_a^T Q_enc) over positions, then the weighted
/// column sum. Returns a d x 1 convex combination of unmasked columns.
inline NodeId attentive_pool(Tape& tape, NodeId q_enc, NodeId v_a, const MaskVector& mask) {
  const Matrix& mq = tape.value(q_enc);
  const Matrix& ma = tape.value(v_a);
  require(ma.rows() == mq.rows() && ma.cols() == 1, "attentive_pool: v_a must be a d vector");
  require(mask.size() == mq.cols(), "attentive_pool: mask length mismatch");

  const NodeId scores = tape.matmul(tape.transpose(q_enc), v_a);  // n x 1
  const NodeId weights = tape.masked_column_softmax(scores, mask);
  return tape.matmul(q_enc, weights);  // d x 1
}

}  // namespace ocn
