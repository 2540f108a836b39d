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

#include "s2i/training/data.hpp"

#include <fstream>

#include "s2i/core/error.hpp"

namespace s2i::training {

dsp::FeatureMatrix Example::features() const {
  dsp::FeatureMatrix f;
  f.frames = frames.cast<double>();
  return f;
}

std::vector<Example> featurize_records(const harness::SynthSpec& spec,
                                       const std::vector<harness::ManifestRecord>& records,
                                       const dsp::FeatureConfig& cfg, bool expand_upsampling) {
  std::vector<Example> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    auto audio = harness::load_audio(spec, r);
    Example e;
    e.id = r.utterance_id;
    e.frames = dsp::featurize(audio, cfg).frames.cast<float>();
    e.duration_s = audio.duration_s();
    e.transcript = r.transcript;
    e.intent = r.intent.value_or(-1);
    e.noise_level = r.noise_level;
    const int copies = expand_upsampling ? r.upsample_factor : 1;
    for (int c = 1; c < copies; ++c) out.push_back(e);
    out.push_back(std::move(e));
  }
  return out;
}

void attach_targets(std::vector<Example>& examples, const Vocabs& vocabs) {
  for (auto& e : examples)
    for (int l = 0; l < models::kLevels; ++l) e.targets[l] = text::segment(e.transcript, vocabs[l]).ids;
}

Vocabs build_vocabs(const std::vector<std::string>& transcripts, const std::array<int, models::kLevels>& sizes,
                    bool frequency_fallback) {
  std::vector<std::string> corpus;
  for (const auto& t : transcripts)
    if (!t.empty()) corpus.push_back(t);
  text::VocabTrainerConfig cfg;
  cfg.frequency_fallback = frequency_fallback;
  return {text::build_vocab(corpus, sizes[0], text::Level::kChar, cfg),
          text::build_vocab(corpus, sizes[1], text::Level::kShort, cfg),
          text::build_vocab(corpus, sizes[2], text::Level::kLong, cfg)};
}

dsp::FeatureStats feature_stats(const std::vector<Example>& examples) {
  if (examples.empty()) throw InputError("feature_stats needs at least one example");
  const Eigen::Index d = examples.front().frames.cols();
  Vector sum = Vector::Zero(d), sq = Vector::Zero(d);
  double n = 0;
  for (const auto& e : examples) {
    for (Eigen::Index t = 0; t < e.frames.rows(); ++t) {
      const Vector row = e.frames.row(t).cast<double>().transpose();
      sum += row;
      sq += row.cwiseProduct(row);
    }
    n += static_cast<double>(e.frames.rows());
  }
  dsp::FeatureStats s;
  s.mean = sum / n;
  const Vector var = (sq / n - s.mean.cwiseProduct(s.mean)).cwiseMax(1e-8);
  s.inv_std = var.cwiseSqrt().cwiseInverse();
  return s;
}

namespace {

constexpr const char* kFeatureMagic = "S2I-FEATURES v1";

}  // namespace

void save_examples(const std::string& path, const std::vector<Example>& examples, const Json& meta) {
  Json index = Json::array();
  for (const auto& e : examples)
    index.push_back({{"id", e.id},
                     {"rows", e.frames.rows()},
                     {"cols", e.frames.cols()},
                     {"duration_s", e.duration_s},
                     {"transcript", e.transcript},
                     {"intent", e.intent},
                     {"noise_level", e.noise_level}});
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  out << kFeatureMagic << '\n' << Json{{"meta", meta}, {"examples", index}}.dump() << '\n';
  for (const auto& e : examples)
    out.write(reinterpret_cast<const char*>(e.frames.data()),
              static_cast<std::streamsize>(e.frames.size() * sizeof(float)));
  if (!out) throw FormatError("write failed: " + path);
}

std::vector<Example> load_examples(const std::string& path, Json* meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::string magic, line;
  std::getline(in, magic);
  if (magic != kFeatureMagic) throw FormatError(path + ": not a feature cache");
  std::getline(in, line);
  std::vector<Example> out;
  try {
    const Json header = Json::parse(line);
    if (meta) *meta = header.at("meta");
    for (const auto& j : header.at("examples")) {
      Example e;
      e.id = j.at("id").get<std::string>();
      e.duration_s = j.at("duration_s").get<double>();
      e.transcript = j.at("transcript").get<std::string>();
      e.intent = j.at("intent").get<int>();
      e.noise_level = j.at("noise_level").get<double>();
      e.frames.resize(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
      const auto bytes = static_cast<std::streamsize>(e.frames.size() * sizeof(float));
      in.read(reinterpret_cast<char*>(e.frames.data()), bytes);
      if (in.gcount() != bytes) throw FormatError(path + ": truncated payload");
      out.push_back(std::move(e));
    }
  } catch (const Json::exception& e) {
    throw FormatError(path + ": corrupted index: " + e.what());
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError(path + ": trailing bytes after payload");
  return out;
}

}  // namespace s2i::training
