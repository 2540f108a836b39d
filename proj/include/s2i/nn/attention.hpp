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

#include "s2i/nn/params.hpp"

namespace s2i::nn {

/// Scaled dot-product multi-head attention with learned projections.
struct MultiHeadAttention {
  int dim = 0;
  int heads = 1;
  ParamSlot wq, bq, wk, bk, wv, bv, wo, bo;

  struct Cache {
    Matrix q, k, v;                // projected, Tq×dim / Tk×dim
    std::vector<Matrix> weights;   // per head, Tq×Tk
    Matrix context;                // concatenated head outputs, Tq×dim
  };

  static MultiHeadAttention create(ParamStore& ps, const std::string& name, int dim, int heads,
                                   Rng& rng);

  int head_dim() const { return dim / heads; }

  /// `causal` masks key positions later than the query position.
  Matrix forward(const ParamStore& ps, const Matrix& query_in, const Matrix& kv_in, bool causal,
                 Cache& cache) const;
  void backward(const ParamStore& ps, const Matrix& query_in, const Matrix& kv_in,
                const Cache& cache, const Matrix& dout, Matrix& d_query_in, Matrix& d_kv_in,
                Grads& g) const;
};

}  // namespace s2i::nn
