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

#include "s2i/harness/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <set>

#include "s2i/core/error.hpp"
#include "s2i/core/rng.hpp"
#include "s2i/dsp/wav.hpp"
#include "s2i/harness/metrics.hpp"
#include "s2i/models/intents.hpp"

namespace s2i::harness {

namespace {

template <class T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[uniform_int(rng, 0, static_cast<int>(v.size()) - 1)];
}

}  // namespace

SynthSpec SynthSpec::desk_default() {
  SynthSpec s;
  const std::array<double, 6> low{350, 500, 650, 800, 950, 1100};
  const std::array<double, 5> high{1500, 1900, 2400, 3000, 3700};
  for (int i = 0; i < 26; ++i) s.recipes['a' + i] = {low[i / 5], high[i % 5]};
  // Near-identical pairs: same low tone, high tone 4% apart.
  s.recipes['n'] = {s.recipes['m'].f1, s.recipes['m'].f2 * 1.04};
  s.recipes['p'] = {s.recipes['b'].f1, s.recipes['b'].f2 * 1.04};

  const std::array<std::pair<const char*, const char*>, 26> kw{{
      {"wapas", "return"},  {"paisa", "refund"},    {"kahan", "status"},   {"radd", "cancel"},
      {"kab", "delivery"},  {"bhugtan", "payment"}, {"badal", "exchange"}, {"galat", "wrong"},
      {"toota", "damaged"}, {"gayab", "missing"},   {"pata", "address"},   {"khata", "login"},
      {"makad", "coupon"},  {"nakad", "cash"},      {"kisht", "emi"},      {"bima", "warranty"},
      {"paat", "install"},  {"dhoondh", "track"},   {"dukandar", "seller"}, {"sasta", "price"},
      {"khatam", "stock"},  {"parchi", "invoice"},  {"tohfa", "gift"},     {"bina", "member"},
      {"bhasha", "language"}, {"baat", "agent"}}};
  for (int i = 0; i < 26; ++i) s.keywords[i] = {{kw[i].first}, {kw[i].second}};
  s.fillers_a = {"mera", "mujhe", "hai", "karna", "kya", "ji", "aap", "yeh"};
  s.fillers_b = {"my", "order", "please", "want", "sir", "help", "the", "it"};
  s.confusable_pairs = {{"bima", "bina"}, {"baat", "paat"}, {"nakad", "makad"}};
  return s;
}

void SynthSpec::validate() const {
  if (sample_rate_hz <= 0 || char_ms_min <= 0 || char_ms_max < char_ms_min || space_ms < 0 ||
      edge_ms_min < 0 || edge_ms_max < edge_ms_min || amplitude <= 0)
    throw ConfigError("synth timing and amplitude must be positive and ordered");
  std::set<std::string> seen;
  auto check_word = [&](const std::string& w) {
    if (w.empty()) throw ConfigError("unsatisfiable template: empty word");
    for (char c : w)
      if (!recipes.count(c)) throw ConfigError("unsatisfiable template: no recipe for '" + std::string(1, c) + "' in " + w);
  };
  for (int i = 0; i < 26; ++i) {
    const auto& k = keywords[i];
    if (k.family_a.empty() && k.family_b.empty())
      throw ConfigError("unsatisfiable template: intent " + models::intent_name(i) + " has no keyword");
    for (const auto* fam : {&k.family_a, &k.family_b})
      for (const auto& w : *fam) {
        check_word(w);
        if (!seen.insert(w).second) throw ConfigError("keyword used by two intents: " + w);
      }
  }
  if (fillers_a.empty() && fillers_b.empty()) throw ConfigError("unsatisfiable template: no filler words");
  for (const auto* fam : {&fillers_a, &fillers_b})
    for (const auto& w : *fam) {
      check_word(w);
      if (seen.count(w)) throw ConfigError("filler doubles as a keyword: " + w);
    }
}

bool SynthSpec::is_family_b(const std::string& word) const {
  if (std::find(fillers_b.begin(), fillers_b.end(), word) != fillers_b.end()) return true;
  for (const auto& k : keywords)
    if (std::find(k.family_b.begin(), k.family_b.end(), word) != k.family_b.end()) return true;
  return false;
}

double SynthSpec::nominal_rms() const { return amplitude * std::sqrt((0.6 * 0.6 + 0.4 * 0.4) / 2.0); }

Json SynthSpec::to_json() const {
  Json r = Json::object();
  for (const auto& [c, t] : recipes) r[std::string(1, c)] = {t.f1, t.f2};
  Json kw = Json::array();
  for (int i = 0; i < 26; ++i)
    kw.push_back({{"intent", models::intent_name(i)}, {"a", keywords[i].family_a}, {"b", keywords[i].family_b}});
  return {{"sample_rate_hz", sample_rate_hz}, {"char_ms_min", char_ms_min},
          {"char_ms_max", char_ms_max},       {"space_ms", space_ms},
          {"edge_ms_min", edge_ms_min},       {"edge_ms_max", edge_ms_max},
          {"amplitude", amplitude},           {"pitch_jitter", pitch_jitter},
          {"recipes", r},                     {"keywords", kw},
          {"fillers_a", fillers_a},           {"fillers_b", fillers_b},
          {"confusable_pairs", confusable_pairs}};
}

SynthSpec SynthSpec::from_json(const Json& j) {
  SynthSpec s = desk_default();
  s.sample_rate_hz = j.value("sample_rate_hz", s.sample_rate_hz);
  s.char_ms_min = j.value("char_ms_min", s.char_ms_min);
  s.char_ms_max = j.value("char_ms_max", s.char_ms_max);
  s.space_ms = j.value("space_ms", s.space_ms);
  s.edge_ms_min = j.value("edge_ms_min", s.edge_ms_min);
  s.edge_ms_max = j.value("edge_ms_max", s.edge_ms_max);
  s.amplitude = j.value("amplitude", s.amplitude);
  s.pitch_jitter = j.value("pitch_jitter", s.pitch_jitter);
  if (j.contains("recipes")) {
    s.recipes.clear();
    for (const auto& [k, v] : j.at("recipes").items()) {
      if (k.size() != 1) throw ConfigError("recipe keys must be single characters");
      s.recipes[k[0]] = {v.at(0).get<double>(), v.at(1).get<double>()};
    }
  }
  if (j.contains("keywords")) {
    const auto& kw = j.at("keywords");
    if (kw.size() != 26) throw ConfigError("keywords must list all 26 intents");
    for (const auto& e : kw) {
      const int id = models::intent_id(e.at("intent").get<std::string>());
      if (id >= 26) throw ConfigError("keywords cover intents only, not others/blank");
      s.keywords[id] = {e.value("a", std::vector<std::string>{}), e.value("b", std::vector<std::string>{})};
    }
  }
  s.fillers_a = j.value("fillers_a", s.fillers_a);
  s.fillers_b = j.value("fillers_b", s.fillers_b);
  s.confusable_pairs = j.value("confusable_pairs", s.confusable_pairs);
  s.validate();
  return s;
}

Json ManifestRecord::to_json() const {
  Json j{{"utterance_id", utterance_id}, {"audio", audio},          {"transcript", transcript},
         {"split", split},               {"upsample_factor", upsample_factor},
         {"noise_level", noise_level},   {"seed", seed}};
  j["intent"] = intent ? Json(models::intent_name(*intent)) : Json(nullptr);
  return j;
}

ManifestRecord ManifestRecord::from_json(const Json& j) {
  ManifestRecord r;
  try {
    r.utterance_id = j.at("utterance_id").get<std::string>();
    r.audio = j.value("audio", std::string());
    r.transcript = j.at("transcript").get<std::string>();
    if (j.contains("intent") && !j.at("intent").is_null())
      r.intent = models::intent_id(j.at("intent").get<std::string>());
    r.split = j.value("split", r.split);
    r.upsample_factor = j.value("upsample_factor", 1);
    r.noise_level = j.value("noise_level", 0.0);
    r.seed = j.value("seed", std::uint64_t{0});
  } catch (const Json::exception& e) {
    throw FormatError(std::string("bad manifest record: ") + e.what());
  }
  if (r.upsample_factor < 1) throw FormatError("upsample_factor must be positive");
  if (r.noise_level < 0) throw FormatError("noise_level must be non-negative");
  if (r.split == "test" && !r.intent) throw FormatError("test record without intent: " + r.utterance_id);
  return r;
}

std::vector<ManifestRecord> make_records(const SynthSpec& spec, const CorpusOptions& opt) {
  spec.validate();
  if (opt.n < 0) throw ConfigError("corpus size must be non-negative");
  if (opt.noise_levels.empty()) throw ConfigError("at least one noise level is required");
  Rng rng(mix_seed(opt.seed, 0x5eed));
  std::vector<int> labels(opt.n);
  for (int i = 0; i < opt.n; ++i) labels[i] = i % models::kNumIntents;
  std::shuffle(labels.begin(), labels.end(), rng);

  std::vector<std::string> fillers = spec.fillers_a;
  fillers.insert(fillers.end(), spec.fillers_b.begin(), spec.fillers_b.end());

  std::vector<ManifestRecord> out;
  out.reserve(opt.n);
  for (int i = 0; i < opt.n; ++i) {
    ManifestRecord r;
    char id[32];
    std::snprintf(id, sizeof id, "%06d", i);
    r.utterance_id = opt.id_prefix + "-" + id;
    r.split = opt.split;
    r.seed = mix_seed(opt.seed, static_cast<std::uint64_t>(i) + 1);
    r.noise_level = pick(opt.noise_levels, rng);
    const int label = labels[i];
    std::vector<std::string> words;
    if (label < 26) {
      const auto& k = spec.keywords[label];
      const bool use_b = k.family_a.empty() || (!k.family_b.empty() && uniform_int(rng, 0, 1) == 1);
      const int before = uniform_int(rng, 0, 1), after = uniform_int(rng, 0, 2 - before);
      for (int w = 0; w < before; ++w) words.push_back(pick(fillers, rng));
      words.push_back(pick(use_b ? k.family_b : k.family_a, rng));
      for (int w = 0; w < after; ++w) words.push_back(pick(fillers, rng));
    } else if (label == models::kOthersIntent) {
      const int n = uniform_int(rng, 1, 3);
      for (int w = 0; w < n; ++w) words.push_back(pick(fillers, rng));
    }
    for (std::size_t w = 0; w < words.size(); ++w) r.transcript += (w ? " " : "") + words[w];
    if (opt.labeled || opt.split == "test") r.intent = label;
    out.push_back(std::move(r));
  }
  return out;
}

dsp::AudioBuffer synthesize(const SynthSpec& spec, const ManifestRecord& record) {
  Rng rng(record.seed);
  const double sr = spec.sample_rate_hz;
  const double pitch = 1.0 + uniform(rng, -spec.pitch_jitter, spec.pitch_jitter);
  const double gain = spec.amplitude * uniform(rng, 0.75, 1.0);
  auto ms = [sr](double v) { return static_cast<int>(std::lround(v * sr / 1000.0)); };

  dsp::AudioBuffer a;
  a.sample_rate_hz = spec.sample_rate_hz;
  auto& x = a.samples;
  x.assign(ms(uniform(rng, spec.edge_ms_min, spec.edge_ms_max)), 0.0);
  const auto words = split_words(record.transcript);
  const int ramp = ms(8.0);
  for (std::size_t w = 0; w < words.size(); ++w) {
    if (w > 0) x.resize(x.size() + ms(spec.space_ms), 0.0);
    const bool harmonic = spec.is_family_b(words[w]);
    for (char c : words[w]) {
      auto it = spec.recipes.find(c);
      if (it == spec.recipes.end()) throw InputError("no tone recipe for '" + std::string(1, c) + "'");
      const double f1 = it->second.f1 * pitch, f2 = it->second.f2 * pitch;
      const int len = ms(uniform(rng, spec.char_ms_min, spec.char_ms_max));
      const double phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
      for (int n = 0; n < len; ++n) {
        const double t = n / sr;
        double v = 0.6 * std::sin(2 * std::numbers::pi * f1 * t + phase) +
                   0.4 * std::sin(2 * std::numbers::pi * f2 * t);
        if (harmonic) v += 0.25 * std::sin(2 * std::numbers::pi * 2.0 * f1 * t);
        double env = 1.0;
        if (n < ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * n / ramp);
        else if (n >= len - ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * (len - 1 - n) / ramp);
        x.push_back(gain * env * v);
      }
    }
  }
  x.resize(x.size() + ms(uniform(rng, spec.edge_ms_min, spec.edge_ms_max)), 0.0);
  if (words.empty()) x.resize(x.size() + ms(uniform(rng, 200.0, 600.0)), 0.0);
  if (record.noise_level > 0.0) {
    std::normal_distribution<double> noise(0.0, record.noise_level * spec.nominal_rms());
    for (auto& s : x) s += noise(rng);
  }
  return a;
}

int derive_intent(const SynthSpec& spec, const std::string& transcript) {
  const auto words = split_words(transcript);
  if (words.empty()) return models::kBlankIntent;
  for (const auto& w : words)
    for (int i = 0; i < 26; ++i) {
      const auto& k = spec.keywords[i];
      if (std::find(k.family_a.begin(), k.family_a.end(), w) != k.family_a.end() ||
          std::find(k.family_b.begin(), k.family_b.end(), w) != k.family_b.end())
        return i;
    }
  return models::kOthersIntent;
}

std::vector<ManifestRecord> generate_corpus(const SynthSpec& spec, const CorpusOptions& opt,
                                            const std::string& out_dir) {
  auto records = make_records(spec, opt);
  const auto audio_dir = std::filesystem::path(out_dir) / "audio";
  std::filesystem::create_directories(audio_dir);
  for (auto& r : records) {
    const auto path = (audio_dir / (r.utterance_id + ".wav")).string();
    dsp::write_wav(path, synthesize(spec, r));
    r.audio = path;
  }
  return records;
}

std::vector<ManifestRecord> read_manifest(const std::string& path) {
  std::vector<ManifestRecord> out;
  std::set<std::string> ids;
  for (const auto& j : read_jsonl(path)) {
    out.push_back(ManifestRecord::from_json(j));
    if (!ids.insert(out.back().utterance_id).second)
      throw FormatError("duplicate utterance id: " + out.back().utterance_id);
  }
  return out;
}

void write_manifest(const std::string& path, const std::vector<ManifestRecord>& records) {
  std::vector<Json> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(r.to_json());
  write_jsonl(path, rows);
}

dsp::AudioBuffer load_audio(const SynthSpec& spec, const ManifestRecord& record) {
  if (!record.audio.empty()) return dsp::read_wav(record.audio);
  return synthesize(spec, record);
}

}  // namespace s2i::harness
