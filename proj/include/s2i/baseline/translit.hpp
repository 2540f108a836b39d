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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "s2i/core/json_io.hpp"
#include "s2i/nn/attention.hpp"
#include "s2i/nn/layers.hpp"

namespace s2i::baseline {

/// Exact whole-token mapping, stored as a two-column tab-separated file.
class TranslitTable {
 public:
  void add(const std::string& source, const std::string& target);
  std::optional<std::string> lookup(const std::string& source) const;
  std::size_t size() const { return map_.size(); }
  const std::map<std::string, std::string>& entries() const { return map_; }

  void save(const std::string& path) const;
  static TranslitTable load(const std::string& path);

 private:
  std::map<std::string, std::string> map_;
};

struct TranslitConfig {
  int dim = 64;
  int heads = 4;
  int ffn = 128;
  int max_positions = 64;
  Json to_json() const;
  static TranslitConfig from_json(const Json& j);
};

struct DecodeResult {
  std::string text;
  bool truncated = false;
};

/// Byte-level transformer with one encoder and one decoder layer. Inputs
/// are the sum of symbol and learned position embeddings.
class Seq2SeqTranslit {
 public:
  static constexpr int kBos = 256;
  static constexpr int kEos = 257;
  static constexpr int kSymbols = 258;

  static Seq2SeqTranslit create(const TranslitConfig& cfg, std::uint64_t seed);

  /// Teacher-forced cross-entropy summed over target symbols (incl. end).
  /// Accumulates gradients into `g` when non-null.
  double loss(const std::string& source, const std::string& target, nn::Grads* g) const;

  /// Greedy decode, capped at 4 × source length symbols.
  DecodeResult decode(const std::string& source) const;

  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }
  const TranslitConfig& config() const { return cfg_; }

  void save(const std::string& path) const;
  static Seq2SeqTranslit load(const std::string& path);

 private:
  struct EncoderCache;
  struct DecoderCache;
  Matrix encode(const std::vector<int>& src, EncoderCache& c) const;
  Matrix decode_logits(const std::vector<int>& tgt_in, const Matrix& memory, DecoderCache& c) const;

  TranslitConfig cfg_;
  nn::ParamStore params_;
  nn::Embedding src_emb_, src_pos_, tgt_emb_, tgt_pos_;
  nn::MultiHeadAttention enc_self_, dec_self_, dec_cross_;
  nn::LayerNorm enc_ln1_, enc_ln2_, dec_ln1_, dec_ln2_, dec_ln3_;
  nn::FeedForward enc_ffn_, dec_ffn_;
  nn::Linear out_;
};

struct TranslitTrainConfig {
  int epochs = 12;
  int batch_size = 16;
  double lr = 2e-3;
  std::uint64_t seed = 0;
};

/// Returns the mean loss of each epoch.
std::vector<double> train_translit(Seq2SeqTranslit& model,
                                   const std::vector<std::pair<std::string, std::string>>& pairs,
                                   const TranslitTrainConfig& cfg);

struct TranslitResult {
  std::string text;
  bool from_table = false;
  bool truncated = false;
};

/// Table first; the model runs only on a miss. Throws InputError on an
/// empty token.
TranslitResult transliterate(const std::string& token, const TranslitTable& table,
                             const Seq2SeqTranslit* model);

/// Transliterates each whitespace-separated token.
std::string transliterate_text(const std::string& text, const TranslitTable& table,
                               const Seq2SeqTranslit* model, bool* any_truncated = nullptr);

/// Synthetic second script: a fixed letter permutation rendered in upper
/// case, plus irregular whole-token exceptions.
struct ScriptMap {
  std::map<char, char> chars;
  std::map<std::string, std::string> exceptions;

  static ScriptMap synthetic(std::uint64_t seed, const std::vector<std::string>& exception_tokens);
  std::string apply(const std::string& token) const;
};

}  // namespace s2i::baseline
