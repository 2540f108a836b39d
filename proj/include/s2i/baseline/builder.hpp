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

#include <set>
#include <string>
#include <vector>

#include "s2i/baseline/tfidf.hpp"
#include "s2i/baseline/translit.hpp"
#include "s2i/harness/synth.hpp"

namespace s2i::baseline {

struct BaselineConfig {
  std::uint64_t seed = 0;
  int text_corpus = 3000;      // labeled transcripts for the text classifier
  int translit_pairs = 3000;   // random tokens for the fallback model
  int translit_heldout = 1000;  // unseen random tokens for evaluation
  int exceptions = 50;         // lexicon words with an irregular spelling
  TranslitConfig translit;
  TranslitTrainConfig translit_train;
  TfidfTrainConfig tfidf;

  Json to_json() const;
  static BaselineConfig from_json(const Json& j);
};

struct BaselineModels {
  ScriptMap script;
  TranslitTable table;
  Seq2SeqTranslit translit;
  TfidfIntentModel intent;
  std::vector<double> translit_curve;
};

/// Every keyword and filler of the corpus spec.
std::vector<std::string> lexicon(const harness::SynthSpec& spec);

/// `n` distinct random lower-case tokens of length 2..9 outside `exclude`.
std::vector<std::string> random_tokens(int n, std::uint64_t seed, const std::set<std::string>& exclude);

/// Maps every word of a transcript into the second script.
std::string to_script(const ScriptMap& script, const std::string& text);

/// Second script with irregular lexicon words, a lookup table covering the
/// lexicon, the fallback model trained on random tokens, and the text
/// classifier trained on a separate labeled text corpus in the second script.
BaselineModels train_baseline(const harness::SynthSpec& spec, const BaselineConfig& cfg);

/// Fraction of tokens whose transliteration differs from the reference.
double token_error_rate(const std::vector<std::string>& tokens, const ScriptMap& script, const TranslitTable& table,
                        const Seq2SeqTranslit* model);

/// Held-out tokens for `token_error_rate`: unseen random tokens plus the
/// irregular lexicon words.
std::vector<std::string> heldout_tokens(const harness::SynthSpec& spec, const BaselineConfig& cfg);

}  // namespace s2i::baseline
