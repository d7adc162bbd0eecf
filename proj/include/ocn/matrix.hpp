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
#include <cstddef>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "ocn/errors.hpp"

namespace ocn {

/// Dense row-major matrix of doubles. Column vectors are d x 1 matrices,
/// scalars are 1 x 1. Values are immutable once handed to a Tape.
class Matrix {
 public:
  Matrix() = default;

  Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
    require(rows >= 1 && cols >= 1, "Matrix: rows and cols must be >= 1");
    data_.assign(static_cast<size_t>(rows) * static_cast<size_t>(cols), 0.0);
  }

  Matrix(int rows, int cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    require(rows >= 1 && cols >= 1, "Matrix: rows and cols must be >= 1");
    require(data_.size() == static_cast<size_t>(rows) * static_cast<size_t>(cols),
            "Matrix: data length must equal rows * cols");
  }

  /// Row-major literal, e.g. Matrix::from_rows({{1, 2}, {3, 4}}).
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    require(rows.size() > 0, "Matrix::from_rows: empty");
    const int r = static_cast<int>(rows.size());
    const int c = static_cast<int>(rows.begin()->size());
    Matrix out(r, c);
    int i = 0;
    for (const auto& row : rows) {
      require(static_cast<int>(row.size()) == c, "Matrix::from_rows: ragged rows");
      int j = 0;
      for (double v : row) {
        out.at(i, j) = v;
        ++j;
      }
      ++i;
    }
    return out;
  }

  static Matrix zeros(int rows, int cols) { return Matrix(rows, cols); }

  static Matrix ones(int rows, int cols) {
    Matrix out(rows, cols);
    for (double& v : out.data_) v = 1.0;
    return out;
  }

  static Matrix identity(int n) {
    Matrix out(n, n);
    for (int i = 0; i < n; ++i) out.at(i, i) = 1.0;
    return out;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }

  double& at(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  double at(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool all_finite() const {
    for (double v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  bool operator==(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
  }

  std::string shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

/// Per-position padding mask: true = real token, false = padding.
/// Emptiness checks happen at the consuming operation, so an all-false
/// mask is representable but rejected wherever it would be normalized over.
class MaskVector {
 public:
  MaskVector() = default;

  explicit MaskVector(std::vector<char> bits) : bits_(std::move(bits)) {}

  static MaskVector all_true(int n) {
    require(n >= 1, "MaskVector: length must be >= 1");
    return MaskVector(std::vector<char>(static_cast<size_t>(n), 1));
  }

  static MaskVector from_bools(const std::vector<bool>& bits) {
    std::vector<char> out(bits.size());
    for (size_t i = 0; i < bits.size(); ++i) out[i] = bits[i] ? 1 : 0;
    return MaskVector(std::move(out));
  }

  int size() const { return static_cast<int>(bits_.size()); }
  bool operator[](int i) const { return bits_[static_cast<size_t>(i)] != 0; }

  int count_true() const {
    int n = 0;
    for (char b : bits_) n += (b != 0);
    return n;
  }

  bool operator==(const MaskVector& other) const { return bits_ == other.bits_; }

 private:
  std::vector<char> bits_;
};

}  // namespace ocn
