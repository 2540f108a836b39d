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

#include <string_view>

#include "s2i/models/hctc.hpp"
#include "s2i/models/intents.hpp"
#include "s2i/nn/attention.hpp"

namespace s2i::models {

enum class PoolKind { kMha, kTimeAverage };

const char* pool_name(PoolKind kind);
PoolKind parse_pool(std::string_view name);

struct S2IConfig {
  HctcConfig trunk;
  PoolKind pool = PoolKind::kMha;
};

/// HCTC trunk + sequence pooling + linear intent classifier. The CTC heads
/// stay in the parameter set but are not evaluated on the intent path.
struct S2INet {
  HctcNet trunk;
  PoolKind pool = PoolKind::kMha;
  // Per-feature affine standardisation, y = (x - center) * scale, of the
  // trunk output rows and of the final cell state (MHA pooling only).
  nn::ParamSlot seq_center, seq_scale, cell_center, cell_scale;
  nn::Linear query;  // final cell state → model_dim (MHA pooling only)
  nn::MultiHeadAttention attention;
  nn::Linear classifier;

  struct Cache {
    HctcNet::Cache trunk;
    Matrix seq;
    Matrix query_in, query;
    nn::MultiHeadAttention::Cache attention;
    Matrix pooled;
    Matrix logits;
  };

  static S2INet create(nn::ParamStore& ps, const S2IConfig& cfg, Rng& rng);

  /// Returns 1 × 28 logits.
  Matrix forward(const nn::ParamStore& ps, const Matrix& x, Cache& cache) const;
  /// `trainable_from` is the first trunk block receiving gradients; blocks
  /// below it are treated as frozen.
  void backward(const nn::ParamStore& ps, const Cache& cache, const Matrix& d_logits, nn::Grads& g,
                int trainable_from = 0) const;
};

struct IntentPrediction {
  int intent = kBlankIntent;
  double confidence = 0.0;
  RowVector distribution;
};

struct S2IModel {
  S2INet net;
  nn::ParamStore params;
  dsp::FeatureConfig features;
  dsp::FeatureStats stats;
  std::array<std::uint64_t, kLevels> vocab_hashes{};

  static S2IModel create(const S2IConfig& cfg, const dsp::FeatureConfig& features,
                         std::uint64_t seed);
  S2IConfig config() const { return {net.trunk.config, net.pool}; }

  /// Copies the donor's trunk parameters, feature settings, normalisation
  /// and vocab hashes. The pooling and classifier parameters are untouched.
  void attach_trunk(const HctcModel& asr);
  /// Number of leading parameters owned by the trunk.
  std::size_t trunk_size() const;

  /// Sets the pooling standardisation from the trunk's outputs on `frames`
  /// (un-normalised features, one matrix per utterance).
  void calibrate_pooling(const std::vector<Matrix>& frames);

  Matrix prepare(const Matrix& frames) const;
};

IntentPrediction predict_intent(const dsp::FeatureMatrix& f, const S2IModel& m);
IntentPrediction predict_intent(const dsp::AudioBuffer& audio, const S2IModel& m);

}  // namespace s2i::models
