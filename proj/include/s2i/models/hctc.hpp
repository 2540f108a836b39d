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

#include <array>
#include <cstdint>

#include "s2i/core/json_io.hpp"
#include "s2i/dsp/features.hpp"
#include "s2i/nn/block.hpp"
#include "s2i/nn/layers.hpp"

namespace s2i::models {

inline constexpr int kLevels = 3;

struct HctcConfig {
  int feature_dim = 400;
  std::array<int, kLevels> block_layers{2, 2, 1};
  int hidden = 64;  // per direction; model width is 2·hidden
  int heads = 4;
  bool use_attention = true;
  std::array<int, kLevels> vocab_sizes{30, 100, 300};  // pieces incl. <unk>, excl. blank

  int model_dim() const { return 2 * hidden; }
  void validate() const;
  Json to_json() const;
  static HctcConfig from_json(const Json& j);
};

/// Three stacked BiLSTM-attention blocks, each followed by a CTC head
/// (linear + log-softmax over vocab + blank).
struct HctcNet {
  HctcConfig config;
  std::array<nn::BiLstmAttentionBlock, kLevels> blocks;
  std::array<nn::Linear, kLevels> heads;

  struct Cache {
    std::array<nn::BiLstmAttentionBlock::Cache, kLevels> blocks;
    std::array<Matrix, kLevels> outputs;
    std::array<Matrix, kLevels> logprobs;  // empty when heads were skipped
    RowVector final_cell;
  };

  static HctcNet create(nn::ParamStore& ps, const HctcConfig& cfg, Rng& rng);

  void forward(const nn::ParamStore& ps, const Matrix& x, Cache& cache, bool with_heads) const;
  /// Any of the gradient inputs may be empty (size 0) to mean "no gradient".
  void backward(const nn::ParamStore& ps, const Cache& cache,
                const std::array<Matrix, kLevels>& d_logprobs, const Matrix& d_last_output,
                const RowVector& d_final_cell, nn::Grads& g) const;
};

struct AsrOutput {
  std::array<Matrix, kLevels> logprobs;
  Matrix last_hidden;
  RowVector final_cell;
};

/// Hierarchical-CTC acoustic model with its feature front end settings and
/// input normalisation.
struct HctcModel {
  HctcNet net;
  nn::ParamStore params;
  dsp::FeatureConfig features;
  dsp::FeatureStats stats;
  std::array<std::uint64_t, kLevels> vocab_hashes{};

  static HctcModel create(const HctcConfig& cfg, const dsp::FeatureConfig& features,
                          std::uint64_t seed);

  /// Normalised network input for one utterance.
  Matrix prepare(const Matrix& frames) const;
};

AsrOutput asr_forward(const dsp::FeatureMatrix& f, const HctcModel& m);

Json feature_config_to_json(const dsp::FeatureConfig& cfg);
dsp::FeatureConfig feature_config_from_json(const Json& j);

}  // namespace s2i::models
