// Copyright 2026 The S2I Authors.
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

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "s2i/core/rng.hpp"
#include "s2i/core/types.hpp"

namespace s2i::nn {

/// Location of one parameter matrix inside a flat buffer.
struct ParamSlot {
  std::size_t offset = 0;
  int rows = 0;
  int cols = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
};

/// Parameter and gradient storage. The aligned allocator keeps the base
/// address fixed modulo the SIMD width, so vectorised reductions split the
/// same way on every run.
using Buffer = std::vector<double, Eigen::aligned_allocator<double>>;

using ConstMatrixMap = Eigen::Map<const Matrix>;
using MatrixMap = Eigen::Map<Matrix>;

/// Flat, named parameter buffer. Layers hold slots, not pointers, so the
/// same layer description can read values from one buffer and accumulate
/// gradients into another of identical layout.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    ParamSlot slot;
  };

  ParamSlot add(std::string name, int rows, int cols);

  std::size_t size() const { return values_.size(); }
  Buffer& values() { return values_; }
  const Buffer& values() const { return values_; }
  const std::vector<Entry>& entries() const { return entries_; }
  const Entry* find(std::string_view name) const;

  ConstMatrixMap operator()(ParamSlot s) const {
    return ConstMatrixMap(values_.data() + s.offset, s.rows, s.cols);
  }
  MatrixMap mut(ParamSlot s) { return MatrixMap(values_.data() + s.offset, s.rows, s.cols); }

  void init_uniform(ParamSlot s, double bound, Rng& rng);
  void fill(ParamSlot s, double value);

  /// Zero-filled buffer with this store's layout.
  Buffer zeros_like() const { return Buffer(values_.size(), 0.0); }

 private:
  Buffer values_;
  std::vector<Entry> entries_;
};

using Grads = Buffer;

inline MatrixMap grad_view(Grads& g, ParamSlot s) {
  return MatrixMap(g.data() + s.offset, s.rows, s.cols);
}

}  // namespace s2i::nn
