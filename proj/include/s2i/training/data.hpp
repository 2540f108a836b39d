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
#include <string>
#include <vector>

#include "s2i/dsp/features.hpp"
#include "s2i/harness/synth.hpp"
#include "s2i/models/hctc.hpp"
#include "s2i/text/vocab.hpp"

namespace s2i::training {

/// One featurised utterance ready for training or evaluation.
struct Example {
  std::string id;
  MatrixF frames;  // stacked log-mel, un-normalised
  double duration_s = 0.0;
  std::string transcript;
  std::array<std::vector<int>, models::kLevels> targets;  // filled by attach_targets
  int intent = -1;
  double noise_level = 0.0;

  dsp::FeatureMatrix features() const;
};

using Vocabs = std::array<text::SubwordVocab, models::kLevels>;

/// Renders (or reads) and featurises each record. Records are repeated
/// `upsample_factor` times.
std::vector<Example> featurize_records(const harness::SynthSpec& spec,
                                       const std::vector<harness::ManifestRecord>& records,
                                       const dsp::FeatureConfig& cfg, bool expand_upsampling = true);

/// Segments every transcript at the three levels.
void attach_targets(std::vector<Example>& examples, const Vocabs& vocabs);

/// Builds the char / short / long vocabularies from transcripts.
Vocabs build_vocabs(const std::vector<std::string>& transcripts, const std::array<int, models::kLevels>& sizes,
                    bool frequency_fallback = false);

dsp::FeatureStats feature_stats(const std::vector<Example>& examples);

/// Feature cache: a magic line, a one-line JSON index, then the frames of
/// every example as little-endian float32. Targets are not stored.
void save_examples(const std::string& path, const std::vector<Example>& examples, const Json& meta = Json::object());
std::vector<Example> load_examples(const std::string& path, Json* meta = nullptr);

}  // namespace s2i::training
