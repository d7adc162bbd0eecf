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

#include <vector>

#include "ocn/data.hpp"
#include "ocn/errors.hpp"
#include "ocn/matrix.hpp"
#include "ocn/tape.hpp"

namespace ocn {

/// Tape nodes for the toy skimmer's parameters.
struct SkimmerNodes {
  NodeId embedding;  // d x vocab
  NodeId position;   // d x L_max
  NodeId w_m;        // d x 3d
  NodeId b_m;        // d x 1
};

/// Contextual toy encoder. Column j mixes the local embedding with the
/// mask-weighted mean embedding of the whole sequence:
///   e_j = embedding[:, ids_j] + position[:, j]
///   out_j = relu(W_m [e_j; mean; e_j o mean] + b_m)
/// Masked columns are exactly zero. The mean couples every position to every
/// other, so the encoding is contextual despite having no attention inside.
inline NodeId toy_skim(Tape& tape, const SkimmerNodes& p, const std::vector<int>& ids,
                       const MaskVector& mask) {
  const int len = static_cast<int>(ids.size());
  require(len >= 1, "toy_skim: empty sequence");
  require(mask.size() == len, "toy_skim: mask length mismatch");
  require(mask.count_true() >= 1, "toy_skim: fully masked sequence");

  const Matrix& embed = tape.value(p.embedding);
  const Matrix& pos = tape.value(p.position);
  const int vocab = embed.cols();
  require(len <= pos.cols(), "toy_skim: sequence longer than position table");
  for (int id : ids) {
    require(id >= 0 && id < vocab, "toy_skim: token id outside embedding table");
  }

  const NodeId tok = tape.gather_cols(p.embedding, ids);
  const NodeId pos_slice = tape.slice_cols(p.position, 0, len);
  const NodeId e = tape.add(tok, pos_slice);

  // Mask-weighted mean over positions as a matrix-vector product.
  const double inv = 1.0 / static_cast<double>(mask.count_true());
  Matrix weights(len, 1);
  for (int j = 0; j < len; ++j) weights.at(j, 0) = mask[j] ? inv : 0.0;
  const NodeId mean = tape.matmul(e, tape.constant(weights));
  const NodeId mean_b = tape.broadcast_cols(mean, len);

  const NodeId mixed = tape.vcat({e, mean_b, tape.mul(e, mean_b)});
  const NodeId pre = tape.add(tape.matmul(p.w_m, mixed), tape.broadcast_cols(p.b_m, len));
  NodeId out = tape.relu(pre);

  if (mask.count_true() < len) {
    const int d = embed.rows();
    Matrix col_mask(d, len);
    for (int r = 0; r < d; ++r) {
      for (int j = 0; j < len; ++j) col_mask.at(r, j) = mask[j] ? 1.0 : 0.0;
    }
    out = tape.mul(out, tape.constant(col_mask));
  }
  return out;
}

/// The three segment encodings sliced from one skimmer pass.
struct EncodedTriple {
  NodeId article;   // d x m
  NodeId question;  // d x n
  NodeId option;    // d x n_k
};

/// Runs the skimmer over the packed sequence and slices out the article,
/// question, and option spans. Separator columns are computed but dropped.
inline EncodedTriple encode_triple(Tape& tape, const SkimmerNodes& p, const PackedTriple& packed) {
  require(packed.article.length() >= 1 && packed.question.length() >= 1 &&
              packed.option.length() >= 1,
          "encode_triple: empty segment span");
  require(packed.option.end <= packed.length(), "encode_triple: span out of range");

  const NodeId h = toy_skim(tape, p, packed.ids, packed.mask);
  EncodedTriple enc;
  enc.article = tape.slice_cols(h, packed.article.begin, packed.article.length());
  enc.question = tape.slice_cols(h, packed.question.begin, packed.question.length());
  enc.option = tape.slice_cols(h, packed.option.begin, packed.option.length());
  return enc;
}

}  // namespace ocn
