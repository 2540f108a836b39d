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

#include "s2i/models/checkpoint.hpp"

#include <bit>
#include <fstream>

#include "s2i/core/error.hpp"

namespace s2i::models {

static_assert(std::endian::native == std::endian::little, "checkpoint payload assumes little-endian");

namespace {

Json param_table(const nn::ParamStore& ps) {
  Json t = Json::array();
  for (const auto& e : ps.entries()) t.push_back({{"name", e.name}, {"rows", e.slot.rows}, {"cols", e.slot.cols}});
  return t;
}

Json stats_json(const dsp::FeatureStats& s) {
  return {{"mean", std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size())},
          {"inv_std", std::vector<double>(s.inv_std.data(), s.inv_std.data() + s.inv_std.size())}};
}

dsp::FeatureStats stats_from_json(const Json& j) {
  dsp::FeatureStats s;
  auto mean = j.at("mean").get<std::vector<double>>();
  auto inv = j.at("inv_std").get<std::vector<double>>();
  if (mean.size() != inv.size()) throw FormatError("normalisation vectors differ in length");
  s.mean = Eigen::Map<Vector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  s.inv_std = Eigen::Map<Vector>(inv.data(), static_cast<Eigen::Index>(inv.size()));
  return s;
}

}  // namespace

void write_checkpoint(const std::string& path, Json header, const nn::ParamStore& ps) {
  header["params"] = param_table(ps);
  header["dtype"] = "f64le";
  header["payload_bytes"] = ps.size() * sizeof(double);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  out << kCheckpointMagic << '\n' << header.dump() << '\n';
  out.write(reinterpret_cast<const char*>(ps.values().data()),
            static_cast<std::streamsize>(ps.size() * sizeof(double)));
  if (!out) throw FormatError("write failed: " + path);
}

RawCheckpoint read_checkpoint(const std::string& path, bool with_payload) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::string magic, line;
  std::getline(in, magic);
  if (magic.rfind("S2I-CHECKPOINT", 0) != 0) throw FormatError(path + ": not a checkpoint");
  if (magic != kCheckpointMagic) throw FormatError(path + ": unsupported checkpoint version '" + magic + "'");
  std::getline(in, line);
  RawCheckpoint l;
  try {
    l.header = Json::parse(line);
    if (l.header.at("dtype") != "f64le") throw FormatError(path + ": unsupported dtype");
    const auto bytes = l.header.at("payload_bytes").get<std::size_t>();
    if (bytes % sizeof(double) != 0) throw FormatError(path + ": bad payload size");
    if (with_payload) {
      l.payload.resize(bytes / sizeof(double));
      in.read(reinterpret_cast<char*>(l.payload.data()), static_cast<std::streamsize>(bytes));
      if (in.gcount() != static_cast<std::streamsize>(bytes)) throw FormatError(path + ": truncated payload");
      if (in.peek() != std::char_traits<char>::eof()) throw FormatError(path + ": trailing bytes after payload");
    }
  } catch (const Json::exception& e) {
    throw FormatError(path + ": corrupted header: " + e.what());
  }
  return l;
}

void load_params(nn::ParamStore& ps, const RawCheckpoint& l, const std::string& path) {
  const auto& table = l.header.at("params");
  const auto& entries = ps.entries();
  if (table.size() != entries.size()) throw FormatError(path + ": parameter table does not match the model config");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& t = table[i];
    if (t.at("name") != entries[i].name || t.at("rows") != entries[i].slot.rows ||
        t.at("cols") != entries[i].slot.cols)
      throw FormatError(path + ": shape mismatch at parameter '" + entries[i].name + "'");
  }
  if (l.payload.size() != ps.size()) throw FormatError(path + ": payload size mismatch");
  ps.values().assign(l.payload.begin(), l.payload.end());
}

namespace {

Json common_header(const char* kind, const dsp::FeatureConfig& f, const dsp::FeatureStats& s,
                   const std::array<std::uint64_t, kLevels>& hashes) {
  return {{"kind", kind}, {"features", feature_config_to_json(f)}, {"stats", stats_json(s)},
          {"vocab_hashes", hashes}};
}

template <class Model>
void read_common(Model& m, const Json& h) {
  m.stats = stats_from_json(h.at("stats"));
  m.vocab_hashes = h.at("vocab_hashes").get<std::array<std::uint64_t, kLevels>>();
}

}  // namespace

void save_checkpoint(const HctcModel& m, const std::string& path) {
  Json h = common_header("hctc", m.features, m.stats, m.vocab_hashes);
  h["config"] = m.net.config.to_json();
  write_checkpoint(path, std::move(h), m.params);
}

void save_checkpoint(const S2IModel& m, const std::string& path) {
  Json h = common_header("s2i", m.features, m.stats, m.vocab_hashes);
  h["config"] = m.net.trunk.config.to_json();
  h["pool"] = pool_name(m.net.pool);
  write_checkpoint(path, std::move(h), m.params);
}

std::string checkpoint_kind(const std::string& path) {
  try {
    return read_checkpoint(path, false).header.at("kind").get<std::string>();
  } catch (const Json::exception& e) {
    throw FormatError(path + ": corrupted header: " + e.what());
  }
}

HctcModel load_hctc(const std::string& path) {
  auto l = read_checkpoint(path, true);
  try {
    if (l.header.at("kind") != "hctc") throw FormatError(path + ": not an ASR checkpoint");
    auto m = HctcModel::create(HctcConfig::from_json(l.header.at("config")),
                               feature_config_from_json(l.header.at("features")), 0);
    read_common(m, l.header);
    load_params(m.params, l, path);
    return m;
  } catch (const Json::exception& e) {
    throw FormatError(path + ": corrupted header: " + e.what());
  }
}

S2IModel load_s2i(const std::string& path) {
  auto l = read_checkpoint(path, true);
  try {
    if (l.header.at("kind") != "s2i") throw FormatError(path + ": not an S2I checkpoint");
    S2IConfig cfg{HctcConfig::from_json(l.header.at("config")),
                  parse_pool(l.header.at("pool").get<std::string>())};
    auto m = S2IModel::create(cfg, feature_config_from_json(l.header.at("features")), 0);
    read_common(m, l.header);
    load_params(m.params, l, path);
    return m;
  } catch (const Json::exception& e) {
    throw FormatError(path + ": corrupted header: " + e.what());
  }
}

}  // namespace s2i::models
