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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "../support/gradcheck.hpp"
#include "s2i/baseline/pipeline.hpp"
#include "s2i/core/error.hpp"
#include "s2i/core/instrumentation.hpp"
#include "s2i/core/rng.hpp"

using namespace s2i;
using namespace s2i::baseline;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

TranslitConfig small_translit() {
  TranslitConfig c;
  c.dim = 16;
  c.heads = 2;
  c.ffn = 24;
  c.max_positions = 16;
  return c;
}

}  // namespace

TEST_CASE("table entries take precedence over the model") {
  TranslitTable table;
  table.add("kab", "when");
  auto model = Seq2SeqTranslit::create(small_translit(), 1);
  counters().reset();
  auto hit = transliterate("kab", table, &model);
  CHECK(hit.text == "when");
  CHECK(hit.from_table);
  CHECK(counters().translit_model_calls.load() == 0);
  auto miss = transliterate("zz", table, &model);
  CHECK_FALSE(miss.from_table);
  CHECK(counters().translit_model_calls.load() == 1);
  CHECK(transliterate("zz", table, nullptr).text == "zz");
  CHECK_THROWS_AS(transliterate("", table, &model), InputError);
  CHECK(transliterate_text("kab  kab", table, nullptr) == "when when");
}

TEST_CASE("table save and load round trip") {
  TranslitTable table;
  table.add("paisa", "refund");
  table.add("kab", "when");
  const auto path = temp_path("s2i_table.tsv");
  table.save(path);
  auto back = TranslitTable::load(path);
  CHECK(back.entries() == table.entries());
  CHECK_THROWS_AS(table.add("a\tb", "x"), InputError);
}

TEST_CASE("transliteration loss gradient matches finite differences") {
  auto model = Seq2SeqTranslit::create(small_translit(), 3);
  auto g = model.params().zeros_like();
  const double l = model.loss("abc", "xy", &g);
  CHECK(std::isfinite(l));
  auto& values = model.params().values();
  auto r = testing::grad_check(values, g, [&] { return model.loss("abc", "xy", nullptr); }, 1e-5, 7);
  CHECK(r.checked > 100);
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("decode cap and truncation flag") {
  auto model = Seq2SeqTranslit::create(small_translit(), 4);
  auto d = model.decode("ab");
  CHECK(d.text.size() <= 8);
  if (!d.truncated) CHECK(d.text.size() < 8);
  CHECK_THROWS_AS(model.decode(""), InputError);
  CHECK_THROWS_AS(model.decode(std::string(40, 'a')), InputError);
}

TEST_CASE("model learns a toy letter substitution") {
  const std::string from = "abcd", to = "WXYZ";
  std::vector<std::pair<std::string, std::string>> pairs;
  Rng rng(9);
  std::set<std::string> seen;
  while (pairs.size() < 48) {
    std::string s;
    const int n = uniform_int(rng, 1, 3);
    for (int i = 0; i < n; ++i) s.push_back(from[uniform_int(rng, 0, 3)]);
    if (!seen.insert(s).second) continue;
    std::string t;
    for (char c : s) t.push_back(to[from.find(c)]);
    pairs.emplace_back(s, t);
  }
  auto model = Seq2SeqTranslit::create(small_translit(), 5);
  TranslitTrainConfig cfg;
  cfg.epochs = 60;
  cfg.batch_size = 8;
  cfg.lr = 5e-3;
  auto curve = train_translit(model, pairs, cfg);
  CHECK(curve.back() < 0.2 * curve.front());
  int correct = 0;
  for (const auto& [s, t] : pairs) correct += model.decode(s).text == t;
  CHECK(correct >= 43);

  const auto path = temp_path("s2i_translit.ckpt");
  model.save(path);
  auto back = Seq2SeqTranslit::load(path);
  CHECK(back.params().values() == model.params().values());
}

TEST_CASE("synthetic script map") {
  auto m = ScriptMap::synthetic(2, {"kab"});
  std::set<char> image;
  for (const auto& [k, v] : m.chars) image.insert(v);
  CHECK(image.size() == 26);
  const std::string regular = m.apply("bak");
  const std::string exception = m.apply("kab");
  CHECK(exception == std::string(regular) + "H");
  CHECK(m.apply("a b") .size() == 3);
  CHECK(ScriptMap::synthetic(2, {}).chars == m.chars);
}

TEST_CASE("tf-idf features on a two document corpus") {
  auto m = TfidfIntentModel::train({"a b", "a c"}, {0, 1}, {.iterations = 0});
  REQUIRE(m.terms() == std::vector<std::string>{"a", "b", "c"});
  const double idf_b = std::log(3.0 / 2.0) + 1.0;
  CHECK(m.idf()[0] == doctest::Approx(1.0));
  CHECK(m.idf()[1] == doctest::Approx(idf_b));
  auto f = m.features("A b");
  REQUIRE(f.size() == 2);
  const double norm = std::sqrt(1.0 + idf_b * idf_b);
  CHECK(f[0].second == doctest::Approx(1.0 / norm));
  CHECK(f[1].second == doctest::Approx(idf_b / norm));
  auto single = m.features("c");
  REQUIRE(single.size() == 1);
  CHECK(single[0].second == doctest::Approx(1.0));
  CHECK(m.features("").empty());
  CHECK(m.features("unknown words").empty());
  CHECK_THROWS_AS(TfidfIntentModel::train({"a"}, {28}), InputError);
  CHECK_THROWS_AS(TfidfIntentModel::train({}, {}), InputError);
}

TEST_CASE("empty text short-circuits to blank") {
  auto m = TfidfIntentModel::train({"wapas", "paisa"}, {0, 1}, {.iterations = 50});
  auto p = m.classify("   ");
  CHECK(p.intent == models::kBlankIntent);
  CHECK(p.confidence == 1.0);
  CHECK(m.classify("wapas").intent == 0);
  CHECK(m.classify("paisa").intent == 1);
  CHECK(m.distribution("wapas").sum() == doctest::Approx(1.0));
}

TEST_CASE("classifier is equivariant under label permutation") {
  std::vector<std::string> texts{"wapas karna", "paisa mera", "kahan hai", "wapas do", "paisa kab", "kahan order"};
  std::vector<int> labels{0, 1, 2, 0, 1, 2};
  std::vector<int> perm(models::kNumIntents);
  for (int k = 0; k < models::kNumIntents; ++k) perm[k] = (k * 5 + 3) % models::kNumIntents;
  std::vector<int> permuted;
  for (int l : labels) permuted.push_back(perm[l]);
  auto a = TfidfIntentModel::train(texts, labels, {.iterations = 80});
  auto b = TfidfIntentModel::train(texts, permuted, {.iterations = 80});
  for (const auto& t : {"wapas", "paisa", "kahan hai", "mera order"}) {
    auto da = a.distribution(t);
    auto db = b.distribution(t);
    for (int k = 0; k < models::kNumIntents; ++k) CHECK(db[perm[k]] == doctest::Approx(da[k]).epsilon(1e-12));
  }
}

TEST_CASE("tf-idf checkpoint round trip") {
  auto m = TfidfIntentModel::train({"wapas", "paisa"}, {0, 1}, {.iterations = 20});
  const auto path = temp_path("s2i_tfidf.ckpt");
  m.save(path);
  auto back = TfidfIntentModel::load(path);
  CHECK(back.terms() == m.terms());
  CHECK(back.distribution("paisa") == m.distribution("paisa"));
}

TEST_CASE("pipeline stages are timed and errors name the stage") {
  models::HctcConfig c;
  c.feature_dim = 10;
  c.block_layers = {1, 1, 1};
  c.hidden = 4;
  c.heads = 2;
  c.vocab_sizes = {3, 4, 3};
  dsp::FeatureConfig fc;
  fc.n_mels = 2;
  auto asr = models::HctcModel::create(c, fc, 2);
  text::SubwordVocab vocab(text::Level::kLong, {{"wapas", std::log(0.5)}, {" paisa", std::log(0.5)}});
  TranslitTable table;
  auto clf = TfidfIntentModel::train({"wapas", "paisa"}, {0, 1}, {.iterations = 30});
  PipelineSystem sys;
  sys.asr = &asr;
  sys.vocab = &vocab;
  sys.table = &table;
  sys.intent = &clf;
  sys.decode.beam_width = 4;
  sys.decode.n_best = 4;

  dsp::FeatureMatrix f;
  Rng rng(3);
  f.frames = Matrix::NullaryExpr(6, 10, [&] { return uniform(rng, -2.0, 2.0); });
  auto r = pipeline_predict(f, sys);
  CHECK(r.asr_ms >= 0.0);
  CHECK(r.total_ms >= r.asr_ms);
  CHECK(r.transliterated == r.transcript);
  CHECK(r.intent == classify_transcript(r.transcript, sys).intent);

  text::SubwordVocab wrong(text::Level::kLong, {{"a", 0.0}});
  sys.vocab = &wrong;
  try {
    pipeline_predict(f, sys);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "asr");
  }
  sys.intent = nullptr;
  CHECK_THROWS_AS(pipeline_predict(f, sys), ConfigError);
}
