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

#include "s2i/baseline/tfidf.hpp"
#include "s2i/baseline/translit.hpp"
#include "s2i/core/error.hpp"
#include "s2i/models/transcribe.hpp"

namespace s2i::baseline {

/// Error raised inside one pipeline stage; `stage()` names it.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// The text-based comparison system: ASR → transliteration → TF-IDF intent.
struct PipelineSystem {
  const models::HctcModel* asr = nullptr;
  const text::SubwordVocab* vocab = nullptr;  // long-subword level
  const text::NgramLm* lm = nullptr;          // optional reranker
  models::DecodeConfig decode;
  const TranslitTable* table = nullptr;
  const Seq2SeqTranslit* translit = nullptr;  // optional fallback
  const TfidfIntentModel* intent = nullptr;
};

struct PipelineResult {
  int intent = models::kBlankIntent;
  double confidence = 0.0;
  std::string transcript;
  std::string transliterated;
  bool translit_truncated = false;
  double featurize_ms = 0.0;
  double asr_ms = 0.0;
  double translit_ms = 0.0;
  double classify_ms = 0.0;
  double total_ms = 0.0;
};

PipelineResult pipeline_predict(const dsp::AudioBuffer& audio, const PipelineSystem& sys);
/// Same, starting from features already computed with the ASR front end.
PipelineResult pipeline_predict(const dsp::FeatureMatrix& features, const PipelineSystem& sys);

/// Transliterate + classify a transcript (the text half of the pipeline).
TfidfIntentModel::Prediction classify_transcript(const std::string& transcript, const PipelineSystem& sys);

}  // namespace s2i::baseline
