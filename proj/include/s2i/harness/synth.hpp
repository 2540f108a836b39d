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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "s2i/core/json_io.hpp"
#include "s2i/dsp/features.hpp"

namespace s2i::harness {

/// Two-tone signature of one character.
struct ToneRecipe {
  double f1 = 0.0;
  double f2 = 0.0;
};

struct IntentKeywords {
  std::vector<std::string> family_a;
  std::vector<std::string> family_b;
};

/// Everything needed to render transcripts as audio. Words from family B
/// carry an extra harmonic so the two lexicon halves sound different.
struct SynthSpec {
  int sample_rate_hz = 16000;
  double char_ms_min = 60.0;
  double char_ms_max = 80.0;
  double space_ms = 40.0;
  double edge_ms_min = 60.0;
  double edge_ms_max = 120.0;
  double amplitude = 0.3;
  double pitch_jitter = 0.03;  // per-utterance relative pitch shift bound

  std::map<char, ToneRecipe> recipes;
  std::array<IntentKeywords, 26> keywords;
  std::vector<std::string> fillers_a, fillers_b;
  std::vector<std::pair<std::string, std::string>> confusable_pairs;

  static SynthSpec desk_default();
  /// Throws ConfigError when a template cannot be realised.
  void validate() const;
  bool is_family_b(const std::string& word) const;
  /// RMS of a nominal character segment; noise σ = noise_level · this.
  double nominal_rms() const;

  Json to_json() const;
  static SynthSpec from_json(const Json& j);
};

struct ManifestRecord {
  std::string utterance_id;
  std::string audio;  // WAV path; empty for in-memory corpora
  std::string transcript;
  std::optional<int> intent;
  std::string split = "train";
  int upsample_factor = 1;
  double noise_level = 0.0;
  std::uint64_t seed = 0;  // drives the rendering of this record

  Json to_json() const;
  static ManifestRecord from_json(const Json& j);
};

struct CorpusOptions {
  int n = 0;
  std::uint64_t seed = 0;
  std::string split = "train";
  std::string id_prefix = "utt";
  std::vector<double> noise_levels{0.0};  // drawn uniformly per record
  bool labeled = true;
};

/// Transcripts, intents and per-record seeds. Intents are stratified so all
/// 28 classes appear equally often (up to rounding).
std::vector<ManifestRecord> make_records(const SynthSpec& spec, const CorpusOptions& opt);

/// Deterministic audio for a record (depends only on spec and record).
dsp::AudioBuffer synthesize(const SynthSpec& spec, const ManifestRecord& record);

/// Intent implied by a transcript: a keyword decides it, fillers only mean
/// "others", empty means "blank".
int derive_intent(const SynthSpec& spec, const std::string& transcript);

/// Writes WAVs under out_dir/audio and returns records pointing at them.
std::vector<ManifestRecord> generate_corpus(const SynthSpec& spec, const CorpusOptions& opt,
                                            const std::string& out_dir);

std::vector<ManifestRecord> read_manifest(const std::string& path);
void write_manifest(const std::string& path, const std::vector<ManifestRecord>& records);

/// Loads a record's audio: from its WAV when present, else by rendering.
dsp::AudioBuffer load_audio(const SynthSpec& spec, const ManifestRecord& record);

}  // namespace s2i::harness
