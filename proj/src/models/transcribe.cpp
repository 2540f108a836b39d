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

#include "s2i/models/transcribe.hpp"

#include <sstream>

#include "s2i/core/error.hpp"

namespace s2i::models {

Json DecodeConfig::to_json() const {
  return {{"beam_width", beam_width}, {"n_best", n_best}, {"alpha", alpha}, {"beta", beta}};
}

DecodeConfig DecodeConfig::from_json(const Json& j) {
  DecodeConfig c;
  c.beam_width = j.value("beam_width", c.beam_width);
  c.n_best = j.value("n_best", c.n_best);
  c.alpha = j.value("alpha", c.alpha);
  c.beta = j.value("beta", c.beta);
  return c;
}

std::string normalize_text(const std::string& s) {
  std::istringstream in(s);
  std::string word, out;
  while (in >> word) {
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

Transcription transcribe(const dsp::FeatureMatrix& f, const HctcModel& m,
                         const text::SubwordVocab& vocab, const text::NgramLm* lm,
                         const DecodeConfig& cfg) {
  const int level = kLevels - 1;
  if (vocab.size() != m.net.config.vocab_sizes[level])
    throw ConfigError("vocab size does not match the model's last CTC head");
  if (m.vocab_hashes[level] != 0 && m.vocab_hashes[level] != vocab.hash())
    throw ConfigError("vocab does not match the one the model was trained with");
  HctcNet::Cache cache;
  m.net.forward(m.params, m.prepare(f.frames), cache, false);
  Matrix logprobs =
      nn::log_softmax_rows(m.net.heads[level].forward(m.params, cache.outputs[level]));

  auto hyps = ctc::prefix_beam_search(logprobs, {cfg.beam_width, cfg.n_best});
  Transcription t;
  if (hyps.empty()) return t;
  t.best = lm ? ctc::rerank(hyps, *lm, cfg.alpha, cfg.beta) : hyps.front();
  t.text = normalize_text(text::detokenize(t.best.ids, vocab));
  return t;
}

Transcription transcribe(const dsp::AudioBuffer& audio, const HctcModel& m,
                         const text::SubwordVocab& vocab, const text::NgramLm* lm,
                         const DecodeConfig& cfg) {
  return transcribe(dsp::featurize(audio, m.features), m, vocab, lm, cfg);
}

}  // namespace s2i::models
