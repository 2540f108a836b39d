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

#include "s2i/models/hctc.hpp"
#include "s2i/models/s2i_model.hpp"

namespace s2i::models {

/// Checkpoint layout: a magic line, one line of JSON header (kind, configs,
/// normalisation, vocab hashes, parameter table, payload size) and a raw
/// little-endian float64 payload in parameter-table order.
inline constexpr const char* kCheckpointMagic = "S2I-CHECKPOINT v1";

struct RawCheckpoint {
  Json header;
  std::vector<double> payload;
};

/// Generic writer/reader for any parameter store; `header` gains the
/// parameter table, dtype and payload size.
void write_checkpoint(const std::string& path, Json header, const nn::ParamStore& ps);
RawCheckpoint read_checkpoint(const std::string& path, bool with_payload = true);
/// Checks the stored parameter table against `ps` and copies the payload.
void load_params(nn::ParamStore& ps, const RawCheckpoint& raw, const std::string& path);

void save_checkpoint(const HctcModel& m, const std::string& path);
void save_checkpoint(const S2IModel& m, const std::string& path);

/// "hctc" or "s2i". Throws FormatError on a malformed file.
std::string checkpoint_kind(const std::string& path);

HctcModel load_hctc(const std::string& path);
S2IModel load_s2i(const std::string& path);

}  // namespace s2i::models
