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
#include <vector>

#include "s2i/nn/attention.hpp"
#include "s2i/nn/lstm.hpp"

namespace s2i::nn {

/// N stacked BiLSTM layers followed by one residual self-attention sublayer:
///   y = H + MHA(H, H, H),  H = BiLSTM_N(... BiLSTM_1(x)).
/// With `use_attention` off the block is the plain BiLSTM stack.
struct BiLstmAttentionBlock {
  std::vector<BiLstm> layers;
  MultiHeadAttention attention;
  bool use_attention = true;

  struct Cache {
    std::vector<Matrix> inputs;  // input of each BiLSTM layer
    std::vector<BiLstm::Cache> lstm;
    Matrix lstm_out;
    MultiHeadAttention::Cache attn;
  };

  struct Output {
    Matrix y;
    RowVector final_cell;  // of the last BiLSTM layer
  };

  static BiLstmAttentionBlock create(ParamStore& ps, const std::string& name, int in,
                                     int hidden, int n_layers, int heads, bool use_attention,
                                     Rng& rng);

  int out_dim() const { return layers.back().out_dim(); }
  Output forward(const ParamStore& ps, const Matrix& x, Cache& cache) const;
  Matrix backward(const ParamStore& ps, const Cache& cache, const Matrix& dy,
                  const RowVector& d_final_cell, Grads& g) const;
};

}  // namespace s2i::nn
