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

#include "s2i/nn/block.hpp"

#include "s2i/core/error.hpp"

namespace s2i::nn {

BiLstmAttentionBlock BiLstmAttentionBlock::create(ParamStore& ps, const std::string& name, int in,
                                                  int hidden, int n_layers, int heads,
                                                  bool use_attention, Rng& rng) {
  if (n_layers < 1) throw ConfigError("block needs at least one BiLSTM layer");
  BiLstmAttentionBlock blk;
  blk.use_attention = use_attention;
  int width = in;
  for (int l = 0; l < n_layers; ++l) {
    blk.layers.push_back(BiLstm::create(ps, name + ".lstm" + std::to_string(l), width, hidden, rng));
    width = 2 * hidden;
  }
  if (use_attention)
    blk.attention = MultiHeadAttention::create(ps, name + ".attn", 2 * hidden, heads, rng);
  return blk;
}

BiLstmAttentionBlock::Output BiLstmAttentionBlock::forward(const ParamStore& ps, const Matrix& x,
                                                           Cache& cache) const {
  cache.inputs.resize(layers.size());
  cache.lstm.resize(layers.size());
  Output out;
  Matrix h = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    cache.inputs[l] = std::move(h);
    auto o = layers[l].forward(ps, cache.inputs[l], cache.lstm[l]);
    h = std::move(o.y);
    out.final_cell = std::move(o.final_cell);
  }
  if (use_attention) {
    cache.lstm_out = h;
    out.y = h + attention.forward(ps, cache.lstm_out, cache.lstm_out, false, cache.attn);
  } else {
    out.y = std::move(h);
  }
  return out;
}

Matrix BiLstmAttentionBlock::backward(const ParamStore& ps, const Cache& cache, const Matrix& dy,
                                      const RowVector& d_final_cell, Grads& g) const {
  Matrix dh = dy;
  if (use_attention) {
    Matrix dq, dkv;
    attention.backward(ps, cache.lstm_out, cache.lstm_out, cache.attn, dy, dq, dkv, g);
    dh += dq + dkv;
  }
  for (int l = static_cast<int>(layers.size()) - 1; l >= 0; --l) {
    const RowVector dfc =
        l == static_cast<int>(layers.size()) - 1 ? d_final_cell : RowVector();
    dh = layers[l].backward(ps, cache.inputs[l], cache.lstm[l], dh, dfc, g);
  }
  return dh;
}

}  // namespace s2i::nn
