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

#include "s2i/baseline/builder.hpp"

#include <algorithm>
#include <sstream>

#include "s2i/core/error.hpp"
#include "s2i/core/rng.hpp"

namespace s2i::baseline {

Json BaselineConfig::to_json() const {
  return {{"seed", seed},
          {"text_corpus", text_corpus},
          {"translit_pairs", translit_pairs},
          {"translit_heldout", translit_heldout},
          {"exceptions", exceptions},
          {"translit", translit.to_json()},
          {"translit_train",
           {{"epochs", translit_train.epochs}, {"batch_size", translit_train.batch_size}, {"lr", translit_train.lr}}},
          {"tfidf", {{"iterations", tfidf.iterations}, {"lr", tfidf.lr}, {"l2", tfidf.l2}}}};
}

BaselineConfig BaselineConfig::from_json(const Json& j) {
  BaselineConfig c;
  c.seed = j.value("seed", c.seed);
  c.text_corpus = j.value("text_corpus", c.text_corpus);
  c.translit_pairs = j.value("translit_pairs", c.translit_pairs);
  c.translit_heldout = j.value("translit_heldout", c.translit_heldout);
  c.exceptions = j.value("exceptions", c.exceptions);
  if (j.contains("translit")) c.translit = TranslitConfig::from_json(j.at("translit"));
  if (j.contains("translit_train")) {
    const auto& t = j.at("translit_train");
    c.translit_train.epochs = t.value("epochs", c.translit_train.epochs);
    c.translit_train.batch_size = t.value("batch_size", c.translit_train.batch_size);
    c.translit_train.lr = t.value("lr", c.translit_train.lr);
  }
  if (j.contains("tfidf")) {
    const auto& t = j.at("tfidf");
    c.tfidf.iterations = t.value("iterations", c.tfidf.iterations);
    c.tfidf.lr = t.value("lr", c.tfidf.lr);
    c.tfidf.l2 = t.value("l2", c.tfidf.l2);
  }
  if (c.text_corpus < 1 || c.translit_pairs < 1 || c.translit_heldout < 0 || c.exceptions < 0)
    throw ConfigError("bad baseline config");
  return c;
}

std::vector<std::string> lexicon(const harness::SynthSpec& spec) {
  std::set<std::string> words;
  for (const auto& k : spec.keywords) {
    words.insert(k.family_a.begin(), k.family_a.end());
    words.insert(k.family_b.begin(), k.family_b.end());
  }
  words.insert(spec.fillers_a.begin(), spec.fillers_a.end());
  words.insert(spec.fillers_b.begin(), spec.fillers_b.end());
  return {words.begin(), words.end()};
}

std::vector<std::string> random_tokens(int n, std::uint64_t seed, const std::set<std::string>& exclude) {
  Rng rng(mix_seed(seed, 41));
  std::set<std::string> seen;
  std::vector<std::string> out;
  while (static_cast<int>(out.size()) < n) {
    std::string t;
    const int len = uniform_int(rng, 2, 9);
    for (int i = 0; i < len; ++i) t.push_back(static_cast<char>('a' + uniform_int(rng, 0, 25)));
    if (exclude.count(t) || !seen.insert(t).second) continue;
    out.push_back(std::move(t));
  }
  return out;
}

std::string to_script(const ScriptMap& script, const std::string& text) {
  std::istringstream in(text);
  std::string w, out;
  while (in >> w) {
    if (!out.empty()) out += ' ';
    out += script.apply(w);
  }
  return out;
}

namespace {

// A seeded choice of lexicon words with irregular spellings.
std::vector<std::string> exception_words(const harness::SynthSpec& spec, const BaselineConfig& cfg) {
  auto words = lexicon(spec);
  Rng rng(mix_seed(cfg.seed, 42));
  std::shuffle(words.begin(), words.end(), rng);
  words.resize(std::min<std::size_t>(words.size(), cfg.exceptions));
  return words;
}

}  // namespace

std::vector<std::string> heldout_tokens(const harness::SynthSpec& spec, const BaselineConfig& cfg) {
  const auto words = lexicon(spec);
  std::set<std::string> exclude(words.begin(), words.end());
  const auto train = random_tokens(cfg.translit_pairs + cfg.translit_heldout, cfg.seed, exclude);
  std::vector<std::string> out(train.begin() + cfg.translit_pairs, train.end());
  for (const auto& w : exception_words(spec, cfg)) out.push_back(w);
  return out;
}

BaselineModels train_baseline(const harness::SynthSpec& spec, const BaselineConfig& cfg) {
  const auto words = lexicon(spec);
  BaselineModels m{ScriptMap::synthetic(cfg.seed, exception_words(spec, cfg)), {},
                   Seq2SeqTranslit::create(cfg.translit, mix_seed(cfg.seed, 1)), {}, {}};
  for (const auto& w : words) m.table.add(w, m.script.apply(w));

  // The first translit_pairs tokens train the model; the rest are held out.
  std::set<std::string> exclude(words.begin(), words.end());
  const auto tokens = random_tokens(cfg.translit_pairs + cfg.translit_heldout, cfg.seed, exclude);
  std::vector<std::pair<std::string, std::string>> pairs;
  for (int i = 0; i < cfg.translit_pairs; ++i) pairs.emplace_back(tokens[i], m.script.apply(tokens[i]));
  auto train_cfg = cfg.translit_train;
  train_cfg.seed = mix_seed(cfg.seed, 2);
  m.translit_curve = train_translit(m.translit, pairs, train_cfg);

  harness::CorpusOptions o;
  o.n = cfg.text_corpus;
  o.seed = mix_seed(cfg.seed, 3);
  o.id_prefix = "text";
  auto records = harness::make_records(spec, o);
  std::vector<std::string> texts;
  std::vector<int> labels;
  for (const auto& r : records) {
    texts.push_back(to_script(m.script, r.transcript));
    labels.push_back(*r.intent);
  }
  auto tfidf_cfg = cfg.tfidf;
  tfidf_cfg.seed = mix_seed(cfg.seed, 4);
  m.intent = TfidfIntentModel::train(texts, labels, tfidf_cfg);
  return m;
}

double token_error_rate(const std::vector<std::string>& tokens, const ScriptMap& script, const TranslitTable& table,
                        const Seq2SeqTranslit* model) {
  if (tokens.empty()) return 0.0;
  int wrong = 0;
  for (const auto& t : tokens) wrong += transliterate(t, table, model).text != script.apply(t);
  return static_cast<double>(wrong) / tokens.size();
}

}  // namespace s2i::baseline
