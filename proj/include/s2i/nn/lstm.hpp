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

#include <string>

#include "s2i/nn/params.hpp"

namespace s2i::nn {

/// One LSTM direction. Gate column order in the 4h-wide matrices: i, f, g, o.
struct LstmDirection {
  int in = 0;
  int hidden = 0;
  bool reverse = false;
  ParamSlot wx, wh, b;

  // Rows are indexed by processing step, not by time.
  struct Cache {
    Matrix gates;  // post-activation i, f, g, o
    Matrix cell;
    Matrix tanh_cell;
    Matrix hidden;
  };

  static LstmDirection create(ParamStore& ps, const std::string& name, int in, int hidden,
                              bool reverse, Rng& rng);

  /// Returns T × hidden outputs in time order.
  Matrix forward(const ParamStore& ps, const Matrix& x, Cache& cache) const;
  /// `dy` is T × hidden in time order; `d_final_cell` flows into the cell
  /// state of the last processing step. Returns dx.
  Matrix backward(const ParamStore& ps, const Matrix& x, const Cache& cache, const Matrix& dy,
                  const RowVector& d_final_cell, Grads& g) const;
};

struct BiLstm {
  int in = 0;
  int hidden = 0;
  LstmDirection fwd, bwd;

  struct Cache {
    LstmDirection::Cache f, b;
  };

  struct Output {
    Matrix y;              // T × 2h, forward half first
    RowVector final_cell;  // forward cell at T−1 ‖ backward cell at 0
  };

  static BiLstm create(ParamStore& ps, const std::string& name, int in, int hidden, Rng& rng);

  int out_dim() const { return 2 * hidden; }
  Output forward(const ParamStore& ps, const Matrix& x, Cache& cache) const;
  Matrix backward(const ParamStore& ps, const Matrix& x, const Cache& cache, const Matrix& dy,
                  const RowVector& d_final_cell, Grads& g) const;
};

}  // namespace s2i::nn
