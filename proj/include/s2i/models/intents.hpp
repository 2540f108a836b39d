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
#include <string_view>

namespace s2i::models {

inline constexpr int kNumIntents = 28;
inline constexpr int kOthersIntent = 26;
inline constexpr int kBlankIntent = 27;

/// Display name of an intent id. Throws InputError outside [0, 28).
const std::string& intent_name(int id);
/// Inverse of intent_name (case-insensitive). Throws InputError if unknown.
int intent_id(std::string_view name);

}  // namespace s2i::models
