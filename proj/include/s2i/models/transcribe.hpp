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

#include "s2i/ctc/ctc.hpp"
#include "s2i/models/hctc.hpp"
#include "s2i/text/ngram.hpp"
#include "s2i/text/vocab.hpp"

namespace s2i::models {

struct DecodeConfig {
  int beam_width = 100;
  int n_best = 100;
  double alpha = 0.5;  // LM weight
  double beta = 0.0;   // length bonus
  Json to_json() const;
  static DecodeConfig from_json(const Json& j);
};

struct Transcription {
  std::string text;
  ctc::Hypothesis best;
};

/// Beam search on the long-subword head, optional LM rerank, detokenise.
/// `lm` may be null to take the acoustic best.
Transcription transcribe(const dsp::FeatureMatrix& f, const HctcModel& m,
                         const text::SubwordVocab& vocab, const text::NgramLm* lm,
                         const DecodeConfig& cfg);
Transcription transcribe(const dsp::AudioBuffer& audio, const HctcModel& m,
                         const text::SubwordVocab& vocab, const text::NgramLm* lm,
                         const DecodeConfig& cfg);

/// Whitespace-normalised text: single spaces, no leading/trailing space.
std::string normalize_text(const std::string& s);

}  // namespace s2i::models
