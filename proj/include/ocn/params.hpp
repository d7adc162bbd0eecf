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

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ocn/errors.hpp"
#include "ocn/matrix.hpp"
#include "ocn/tape.hpp"

namespace ocn {

/// Ordered collection of named trainable matrices. Registration order is the
/// canonical order for initialization, checkpoints and optimizer state.
class ParameterSet {
 public:
  int add(const std::string& name, Matrix value, bool decays) {
    require(index_.count(name) == 0, "ParameterSet: duplicate parameter '" + name + "'");
    const int idx = static_cast<int>(names_.size());
    names_.push_back(name);
    values_.push_back(std::move(value));
    decays_.push_back(decays);
    index_[name] = idx;
    return idx;
  }

  int count() const { return static_cast<int>(names_.size()); }

  const std::string& name(int i) const { return names_[static_cast<size_t>(i)]; }
  Matrix& value(int i) { return values_[static_cast<size_t>(i)]; }
  const Matrix& value(int i) const { return values_[static_cast<size_t>(i)]; }
  bool decays(int i) const { return decays_[static_cast<size_t>(i)]; }

  int index_of(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  Matrix& value(const std::string& name) {
    const int i = index_of(name);
    require(i >= 0, "ParameterSet: unknown parameter '" + name + "'");
    return values_[static_cast<size_t>(i)];
  }

  const Matrix& value(const std::string& name) const {
    const int i = index_of(name);
    require(i >= 0, "ParameterSet: unknown parameter '" + name + "'");
    return values_[static_cast<size_t>(i)];
  }

  size_t total_elements() const {
    size_t n = 0;
    for (const Matrix& m : values_) n += m.size();
    return n;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Matrix> values_;
  std::vector<bool> decays_;
  std::unordered_map<std::string, int> index_;
};

/// Per-parameter node ids after binding a ParameterSet onto a tape.
struct BoundParams {
  std::vector<NodeId> ids;

  NodeId of(const ParameterSet& params, const std::string& name) const {
    const int i = params.index_of(name);
    require(i >= 0, "BoundParams: unknown parameter '" + name + "'");
    return ids[static_cast<size_t>(i)];
  }
};

/// Binds every parameter as a leaf on the tape (values copied; the tape owns
/// its snapshot). Unreached leaves get zero gradients from backward().
inline BoundParams bind_parameters(Tape& tape, const ParameterSet& params) {
  BoundParams bound;
  bound.ids.reserve(static_cast<size_t>(params.count()));
  for (int i = 0; i < params.count(); ++i) {
    bound.ids.push_back(tape.parameter(params.name(i), params.value(i), i));
  }
  return bound;
}

}  // namespace ocn
