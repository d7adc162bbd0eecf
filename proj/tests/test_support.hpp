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
//
// Shared helpers for the model tests and the acceptance checks: random tiny
// instances and the expected-shape ledger for every pipeline stage.

#pragma once

#include <string>
#include <vector>

#include "ocn/data.hpp"
#include "ocn/model.hpp"
#include "ocn/rng.hpp"
#include "ocn/tape.hpp"

namespace testsup {

inline int rand_in(ocn::Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.next_u64() % static_cast<uint64_t>(hi - lo + 1));
}

/// A random example whose segments fit inside the given limits.
inline ocn::Example random_example(ocn::Rng& rng, int vocab_size, const ocn::TruncationLimits& lim,
                                   int options) {
  const auto random_ids = [&](int len) {
    std::vector<int> ids(static_cast<size_t>(len));
    for (int& id : ids) id = rand_in(rng, ocn::Vocabulary::kReservedCount, vocab_size - 1);
    return ids;
  };
  ocn::Example ex;
  ex.article = random_ids(rand_in(rng, 3, lim.article));
  ex.question = random_ids(rand_in(rng, 1, lim.question));
  for (int k = 0; k < options; ++k) {
    ex.options.push_back(random_ids(rand_in(rng, 1, lim.option)));
  }
  ex.answer = rand_in(rng, 0, options - 1);
  ex.id = "random";
  return ex;
}

/// Checks every stage of one forward trace against the dimension ledger.
/// Returns an empty string when all shapes agree, else a description of the
/// first mismatch.
inline std::string check_trace_shapes(const ocn::Tape& tape, const ocn::ForwardTrace& trace,
                                      const ocn::ModelConfig& cfg, const ocn::Example& ex) {
  const int d = cfg.d;
  const int k_count = cfg.options;
  const auto bad = [](const std::string& what) { return what; };
  const auto shape_is = [&](ocn::NodeId id, int r, int c, const std::string& what) {
    const ocn::Matrix& m = tape.value(id);
    if (m.rows() != r || m.cols() != c) {
      return what + ": got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
             ", want " + std::to_string(r) + "x" + std::to_string(c);
    }
    return std::string();
  };

  if (static_cast<int>(trace.options.size()) != k_count) return bad("option trace count");
  for (int k = 0; k < k_count; ++k) {
    const ocn::OptionTrace& t = trace.options[static_cast<size_t>(k)];
    const ocn::PackedTriple packed = ocn::truncate_and_pack(ex, cfg.limits, k);
    const int m = packed.article.length();
    const int n = packed.question.length();
    const int n_prime = n + packed.option.length();
    if (t.m != m || t.n_prime != n_prime) return bad("recorded segment lengths");

    const std::string tag = "option " + std::to_string(k) + " ";
    std::string err;
    if (!(err = shape_is(t.p_enc, d, m, tag + "article encoding")).empty()) return err;
    if (!(err = shape_is(t.q_enc, d, n, tag + "question encoding")).empty()) return err;
    if (!(err = shape_is(t.o_enc, d, n_prime - n, tag + "option encoding")).empty()) return err;
    if (!(err = shape_is(t.o_q, d, n_prime, tag + "raw features")).empty()) return err;

    if (cfg.ablate_comparison) {
      if (!t.pairwise.empty()) return bad(tag + "ablated trace has comparison blocks");
    } else {
      if (static_cast<int>(t.pairwise.size()) != k_count - 1) {
        return bad(tag + "comparison block count");
      }
      for (size_t b = 0; b < t.pairwise.size(); ++b) {
        if (!(err = shape_is(t.pairwise[b], 2 * d, n_prime, tag + "comparison block")).empty()) {
          return err;
        }
      }
      if (!(err = shape_is(t.o_tilde_c, d, n_prime, tag + "fused correlations")).empty()) return err;
      if (!(err = shape_is(t.q_tilde, d, 1, tag + "pooled question")).empty()) return err;
    }
    if (!(err = shape_is(t.o_c, d, n_prime, tag + "gated features")).empty()) return err;

    if (!(err = shape_is(t.reread.a_c, n_prime, m, tag + "option-to-article attention")).empty()) {
      return err;
    }
    if (!(err = shape_is(t.reread.a_p, m, n_prime, tag + "article-to-option attention")).empty()) {
      return err;
    }
    if (!(err = shape_is(t.reread.o_hat_p, 2 * d, n_prime, tag + "reread stack")).empty()) return err;
    if (!(err = shape_is(t.reread.o_tilde_p, d, n_prime, tag + "reread features")).empty()) return err;
    if (!(err = shape_is(t.o_f, d, n_prime, tag + "final features")).empty()) return err;
    if (!(err = shape_is(t.score, 1, 1, tag + "score")).empty()) return err;
  }

  std::string err;
  if (!(err = shape_is(trace.scores, k_count, 1, "score stack")).empty()) return err;
  if (!(err = shape_is(trace.probs, k_count, 1, "probabilities")).empty()) return err;
  return std::string();
}

}  // namespace testsup
