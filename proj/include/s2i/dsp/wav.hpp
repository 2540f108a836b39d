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

#include "s2i/dsp/features.hpp"

namespace s2i::dsp {

/// Reads a mono 16-bit PCM RIFF/WAVE file. Throws FormatError otherwise.
AudioBuffer read_wav(const std::string& path);

/// Writes samples clamped to [-1, 1] as mono 16-bit PCM.
void write_wav(const std::string& path, const AudioBuffer& audio);

}  // namespace s2i::dsp
