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

#include "s2i/baseline/pipeline.hpp"

#include <chrono>

namespace s2i::baseline {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

template <class F>
auto run_stage(const char* stage, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

void check(const PipelineSystem& sys) {
  if (!sys.asr || !sys.vocab || !sys.table || !sys.intent)
    throw ConfigError("pipeline needs an ASR model, vocab, transliteration table and intent model");
}

PipelineResult text_stages(PipelineResult r, const PipelineSystem& sys) {
  auto t0 = Clock::now();
  r.transliterated = run_stage("transliterate", [&] {
    return transliterate_text(r.transcript, *sys.table, sys.translit, &r.translit_truncated);
  });
  r.translit_ms = ms_since(t0);
  t0 = Clock::now();
  auto p = run_stage("classify", [&] { return sys.intent->classify(r.transliterated); });
  r.classify_ms = ms_since(t0);
  r.intent = p.intent;
  r.confidence = p.confidence;
  return r;
}

}  // namespace

PipelineResult pipeline_predict(const dsp::FeatureMatrix& features, const PipelineSystem& sys) {
  check(sys);
  const auto start = Clock::now();
  PipelineResult r;
  auto t0 = Clock::now();
  r.transcript = run_stage("asr", [&] {
    return models::transcribe(features, *sys.asr, *sys.vocab, sys.lm, sys.decode).text;
  });
  r.asr_ms = ms_since(t0);
  r = text_stages(std::move(r), sys);
  r.total_ms = ms_since(start);
  return r;
}

PipelineResult pipeline_predict(const dsp::AudioBuffer& audio, const PipelineSystem& sys) {
  check(sys);
  const auto start = Clock::now();
  auto t0 = Clock::now();
  auto features = run_stage("featurize", [&] { return dsp::featurize(audio, sys.asr->features); });
  const double featurize_ms = ms_since(t0);
  PipelineResult r;
  t0 = Clock::now();
  r.transcript = run_stage("asr", [&] {
    return models::transcribe(features, *sys.asr, *sys.vocab, sys.lm, sys.decode).text;
  });
  r.asr_ms = ms_since(t0);
  r.featurize_ms = featurize_ms;
  r = text_stages(std::move(r), sys);
  r.total_ms = ms_since(start);
  return r;
}

TfidfIntentModel::Prediction classify_transcript(const std::string& transcript, const PipelineSystem& sys) {
  if (!sys.table || !sys.intent) throw ConfigError("pipeline needs a transliteration table and intent model");
  return sys.intent->classify(transliterate_text(transcript, *sys.table, sys.translit));
}

}  // namespace s2i::baseline
