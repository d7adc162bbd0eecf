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

#include <cmath>
#include <vector>

#include "catch_amalgamated.hpp"
#include "ocn/data.hpp"
#include "ocn/gradcheck.hpp"
#include "ocn/params.hpp"
#include "ocn/rng.hpp"
#include "ocn/skimmer.hpp"
#include "ocn/tape.hpp"

using ocn::BoundParams;
using ocn::ContractViolation;
using ocn::Matrix;
using ocn::MaskVector;
using ocn::NodeId;
using ocn::ParameterSet;
using ocn::Rng;
using ocn::SkimmerNodes;
using ocn::Tape;

namespace {

constexpr int kD = 4;
constexpr int kVocab = 12;
constexpr int kMaxLen = 32;

Matrix random_matrix(Rng& rng, int rows, int cols, double scale) {
  Matrix m(rows, cols);
  for (size_t i = 0; i < m.size(); ++i) m[i] = rng.uniform(-scale, scale);
  return m;
}

ParameterSet make_params(uint64_t seed, double scale) {
  Rng rng(seed);
  ParameterSet params;
  params.add("embedding", random_matrix(rng, kD, kVocab, scale), true);
  params.add("position", random_matrix(rng, kD, kMaxLen, scale), true);
  params.add("w_m", random_matrix(rng, kD, 3 * kD, scale), true);
  params.add("b_m", random_matrix(rng, kD, 1, scale), false);
  return params;
}

SkimmerNodes bind_skimmer(Tape& tape, const ParameterSet& params) {
  const BoundParams bound = ocn::bind_parameters(tape, params);
  SkimmerNodes nodes;
  nodes.embedding = bound.of(params, "embedding");
  nodes.position = bound.of(params, "position");
  nodes.w_m = bound.of(params, "w_m");
  nodes.b_m = bound.of(params, "b_m");
  return nodes;
}

Matrix run_skim(const ParameterSet& params, const std::vector<int>& ids, const MaskVector& mask) {
  Tape tape;
  const SkimmerNodes nodes = bind_skimmer(tape, params);
  return tape.value(ocn::toy_skim(tape, nodes, ids, mask));
}

}  // namespace

TEST_CASE("skimmer output and triple slices have the expected shapes") {
  const ParameterSet params = make_params(3, 0.3);

  ocn::Example ex;
  ex.article = {3, 4, 5, 6, 7};
  ex.question = {8, 9, 10};
  ex.options = {{11, 3}, {4, 5}, {6, 7}, {8, 9}};
  ex.answer = 0;
  const ocn::TruncationLimits limits{16, 8, 4};
  const ocn::PackedTriple packed = ocn::truncate_and_pack(ex, limits, 0);

  Tape tape;
  const SkimmerNodes nodes = bind_skimmer(tape, params);
  const ocn::EncodedTriple enc = ocn::encode_triple(tape, nodes, packed);

  REQUIRE(tape.value(enc.article).rows() == kD);
  REQUIRE(tape.value(enc.article).cols() == 5);
  REQUIRE(tape.value(enc.question).rows() == kD);
  REQUIRE(tape.value(enc.question).cols() == 3);
  REQUIRE(tape.value(enc.option).rows() == kD);
  REQUIRE(tape.value(enc.option).cols() == 2);

  // Slices match the corresponding columns of a direct full-sequence pass.
  const Matrix full = tape.value(ocn::toy_skim(tape, nodes, packed.ids, packed.mask));
  const Matrix& q = tape.value(enc.question);
  for (int r = 0; r < kD; ++r) {
    for (int j = 0; j < 3; ++j) {
      REQUIRE(q.at(r, j) == full.at(r, packed.question.begin + j));
    }
  }
}

TEST_CASE("skimmer is deterministic across tapes") {
  const ParameterSet params = make_params(11, 0.4);
  const std::vector<int> ids = {3, 7, 5, 3, 9};
  const MaskVector mask = MaskVector::all_true(5);

  const Matrix a = run_skim(params, ids, mask);
  const Matrix b = run_skim(params, ids, mask);
  REQUIRE(a.rows() == b.rows());
  for (size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
}

TEST_CASE("skimmer is contextual: a distant token changes the local encoding") {
  const ParameterSet params = make_params(17, 0.4);
  const MaskVector mask = MaskVector::all_true(4);

  const Matrix base = run_skim(params, {3, 4, 5, 6}, mask);
  const Matrix other = run_skim(params, {3, 4, 5, 7}, mask);

  // Column 0 sees only its own token plus the sequence mean, and only the
  // mean differs here.
  double diff = 0.0;
  for (int r = 0; r < kD; ++r) diff += std::fabs(base.at(r, 0) - other.at(r, 0));
  REQUIRE(diff > 1e-12);
}

TEST_CASE("skimmer is positional: the same token encodes differently by slot") {
  const ParameterSet params = make_params(19, 0.4);
  const Matrix out = run_skim(params, {5, 5}, MaskVector::all_true(2));
  double diff = 0.0;
  for (int r = 0; r < kD; ++r) diff += std::fabs(out.at(r, 0) - out.at(r, 1));
  REQUIRE(diff > 1e-12);
}

TEST_CASE("zero mixing weight reduces the skimmer to its bias") {
  ParameterSet params = make_params(23, 0.4);
  params.value("w_m") = Matrix::zeros(kD, 3 * kD);
  Matrix b(kD, 1);
  b.at(0, 0) = 0.5;
  b.at(1, 0) = -0.25;
  b.at(2, 0) = 1.5;
  b.at(3, 0) = 0.0;
  params.value("b_m") = b;

  const Matrix out = run_skim(params, {3, 4, 5}, MaskVector::all_true(3));
  for (int j = 0; j < 3; ++j) {
    REQUIRE(out.at(0, j) == 0.5);
    REQUIRE(out.at(1, j) == 0.0);  // relu of a negative bias
    REQUIRE(out.at(2, j) == 1.5);
    REQUIRE(out.at(3, j) == 0.0);
  }
}

TEST_CASE("masked columns are zero and pass no gradient") {
  const ParameterSet params = make_params(29, 0.4);
  const std::vector<int> ids = {3, 4, 5, 6};
  const MaskVector mask = MaskVector::from_bools({true, true, false, true});

  Tape tape;
  const SkimmerNodes nodes = bind_skimmer(tape, params);
  const NodeId out = ocn::toy_skim(tape, nodes, ids, mask);
  const Matrix& v = tape.value(out);
  for (int r = 0; r < kD; ++r) REQUIRE(v.at(r, 2) == 0.0);

  // Token 5 appears only at the masked slot, so its embedding column gets no
  // gradient: the mean skips it and its own output column is zeroed.
  const ocn::Gradients grads = tape.backward(tape.sum_all(out));
  const Matrix& ge = grads.at("embedding");
  for (int r = 0; r < kD; ++r) REQUIRE(ge.at(r, 5) == 0.0);

  // An unmasked token's embedding column does receive gradient somewhere.
  double mass = 0.0;
  for (int r = 0; r < kD; ++r) mass += std::fabs(ge.at(r, 3));
  REQUIRE(mass > 0.0);
}

TEST_CASE("skimmer rejects malformed inputs") {
  const ParameterSet params = make_params(31, 0.4);
  Tape tape;
  const SkimmerNodes nodes = bind_skimmer(tape, params);

  REQUIRE_THROWS_AS(ocn::toy_skim(tape, nodes, {}, MaskVector::all_true(0)), ContractViolation);
  REQUIRE_THROWS_AS(ocn::toy_skim(tape, nodes, {3, 4}, MaskVector::all_true(3)),
                    ContractViolation);
  REQUIRE_THROWS_AS(ocn::toy_skim(tape, nodes, {3, kVocab}, MaskVector::all_true(2)),
                    ContractViolation);
  REQUIRE_THROWS_AS(
      ocn::toy_skim(tape, nodes, {3, 4}, MaskVector::from_bools({false, false})),
      ContractViolation);
  const std::vector<int> too_long(kMaxLen + 1, 3);
  REQUIRE_THROWS_AS(ocn::toy_skim(tape, nodes, too_long, MaskVector::all_true(kMaxLen + 1)),
                    ContractViolation);
}

TEST_CASE("skimmer gradients match finite differences") {
  const ParameterSet params = make_params(37, 0.6);
  const std::vector<int> ids = {3, 7, 5, 3};  // repeated token exercises scatter-add
  const MaskVector mask = MaskVector::from_bools({true, true, false, true});
  Rng probe_rng(101);
  const Matrix probe = random_matrix(probe_rng, kD, 4, 1.0);

  const auto loss_fn = [&](const ParameterSet& p) {
    Tape tape;
    const SkimmerNodes nodes = bind_skimmer(tape, p);
    const NodeId out = ocn::toy_skim(tape, nodes, ids, mask);
    return tape.value(tape.sum_all(tape.mul(out, tape.constant(probe)))).at(0, 0);
  };

  Tape tape;
  const SkimmerNodes nodes = bind_skimmer(tape, params);
  const NodeId out = ocn::toy_skim(tape, nodes, ids, mask);
  const ocn::Gradients grads =
      tape.backward(tape.sum_all(tape.mul(out, tape.constant(probe))));

  const double worst = ocn::finite_difference_check(loss_fn, params, grads, 1e-5);
  REQUIRE(worst < 1e-4);
}
