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

#include "s2i/models/hctc.hpp"

#include "s2i/core/error.hpp"

namespace s2i::models {

void HctcConfig::validate() const {
  if (feature_dim < 1 || hidden < 1 || heads < 1) throw ConfigError("model dims must be positive");
  if (model_dim() % heads != 0) throw ConfigError("model_dim must be divisible by heads");
  for (int i = 0; i < kLevels; ++i) {
    if (block_layers[i] < 1) throw ConfigError("each block needs at least one BiLSTM layer");
    if (vocab_sizes[i] < 1) throw ConfigError("vocab sizes must be positive");
  }
}

Json HctcConfig::to_json() const {
  return Json{{"feature_dim", feature_dim},   {"block_layers", block_layers},
              {"hidden", hidden},             {"heads", heads},
              {"use_attention", use_attention}, {"vocab_sizes", vocab_sizes}};
}

HctcConfig HctcConfig::from_json(const Json& j) {
  HctcConfig c;
  c.feature_dim = j.value("feature_dim", c.feature_dim);
  c.block_layers = j.value("block_layers", c.block_layers);
  c.hidden = j.value("hidden", c.hidden);
  c.heads = j.value("heads", c.heads);
  c.use_attention = j.value("use_attention", c.use_attention);
  c.vocab_sizes = j.value("vocab_sizes", c.vocab_sizes);
  c.validate();
  return c;
}

HctcNet HctcNet::create(nn::ParamStore& ps, const HctcConfig& cfg, Rng& rng) {
  cfg.validate();
  HctcNet net;
  net.config = cfg;
  int width = cfg.feature_dim;
  for (int i = 0; i < kLevels; ++i) {
    const std::string name = "block" + std::to_string(i);
    net.blocks[i] = nn::BiLstmAttentionBlock::create(ps, name, width, cfg.hidden, cfg.block_layers[i],
                                                     cfg.heads, cfg.use_attention, rng);
    width = net.blocks[i].out_dim();
  }
  for (int i = 0; i < kLevels; ++i)
    net.heads[i] = nn::Linear::create(ps, "head" + std::to_string(i), cfg.model_dim(),
                                      cfg.vocab_sizes[i] + 1, rng);
  return net;
}

void HctcNet::forward(const nn::ParamStore& ps, const Matrix& x, Cache& cache,
                      bool with_heads) const {
  const Matrix* input = &x;
  for (int i = 0; i < kLevels; ++i) {
    auto out = blocks[i].forward(ps, *input, cache.blocks[i]);
    cache.outputs[i] = std::move(out.y);
    if (i == kLevels - 1) cache.final_cell = std::move(out.final_cell);
    input = &cache.outputs[i];
    if (with_heads)
      cache.logprobs[i] = nn::log_softmax_rows(heads[i].forward(ps, cache.outputs[i]));
    else
      cache.logprobs[i].resize(0, 0);
  }
}

void HctcNet::backward(const nn::ParamStore& ps, const Cache& cache,
                       const std::array<Matrix, kLevels>& d_logprobs, const Matrix& d_last_output,
                       const RowVector& d_final_cell, nn::Grads& g) const {
  Matrix d_out;
  for (int i = kLevels - 1; i >= 0; --i) {
    const Matrix& y = cache.outputs[i];
    if (d_out.size() == 0) d_out = Matrix::Zero(y.rows(), y.cols());
    if (i == kLevels - 1 && d_last_output.size() > 0) d_out += d_last_output;
    if (d_logprobs[i].size() > 0) {
      Matrix d_logits = nn::log_softmax_backward(cache.logprobs[i], d_logprobs[i]);
      d_out += heads[i].backward(ps, y, d_logits, g);
    }
    const RowVector dfc = i == kLevels - 1 ? d_final_cell : RowVector();
    Matrix d_in = blocks[i].backward(ps, cache.blocks[i], d_out, dfc, g);
    d_out = i > 0 ? std::move(d_in) : Matrix();
  }
}

HctcModel HctcModel::create(const HctcConfig& cfg, const dsp::FeatureConfig& features,
                            std::uint64_t seed) {
  features.validate();
  if (features.stacked_dim() != cfg.feature_dim)
    throw ConfigError("feature_dim does not match the stacked feature width");
  HctcModel m;
  Rng rng(seed);
  m.net = HctcNet::create(m.params, cfg, rng);
  m.features = features;
  return m;
}

Matrix HctcModel::prepare(const Matrix& frames) const {
  if (frames.cols() != net.config.feature_dim) throw InputError("feature width mismatch");
  Matrix x = frames;
  if (!stats.empty()) stats.apply(x);
  return x;
}

AsrOutput asr_forward(const dsp::FeatureMatrix& f, const HctcModel& m) {
  HctcNet::Cache cache;
  m.net.forward(m.params, m.prepare(f.frames), cache, true);
  AsrOutput out;
  out.logprobs = std::move(cache.logprobs);
  out.last_hidden = std::move(cache.outputs[kLevels - 1]);
  out.final_cell = std::move(cache.final_cell);
  return out;
}

Json feature_config_to_json(const dsp::FeatureConfig& c) {
  return Json{{"sample_rate_hz", c.sample_rate_hz}, {"window_ms", c.window_ms},
              {"hop_ms", c.hop_ms},                 {"fft_size", c.fft_size},
              {"n_mels", c.n_mels},                 {"stack", c.stack},
              {"stack_stride", c.stack_stride},     {"log_floor", c.log_floor},
              {"low_freq_hz", c.low_freq_hz},       {"high_freq_hz", c.high_freq_hz}};
}

dsp::FeatureConfig feature_config_from_json(const Json& j) {
  dsp::FeatureConfig c;
  c.sample_rate_hz = j.value("sample_rate_hz", c.sample_rate_hz);
  c.window_ms = j.value("window_ms", c.window_ms);
  c.hop_ms = j.value("hop_ms", c.hop_ms);
  c.fft_size = j.value("fft_size", c.fft_size);
  c.n_mels = j.value("n_mels", c.n_mels);
  c.stack = j.value("stack", c.stack);
  c.stack_stride = j.value("stack_stride", c.stack_stride);
  c.log_floor = j.value("log_floor", c.log_floor);
  c.low_freq_hz = j.value("low_freq_hz", c.low_freq_hz);
  c.high_freq_hz = j.value("high_freq_hz", c.high_freq_hz);
  c.validate();
  return c;
}

}  // namespace s2i::models
