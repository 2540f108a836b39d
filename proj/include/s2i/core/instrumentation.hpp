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

#include <atomic>
#include <cstdint>

namespace s2i {

/// Process-wide event counters used to assert which code paths ran.
struct Counters {
  std::atomic<std::uint64_t> beam_expansions{0};
  std::atomic<std::uint64_t> lm_queries{0};
  std::atomic<std::uint64_t> tokenizer_calls{0};
  std::atomic<std::uint64_t> translit_model_calls{0};

  void reset() {
    beam_expansions = 0;
    lm_queries = 0;
    tokenizer_calls = 0;
    translit_model_calls = 0;
  }
};

Counters& counters();

}  // namespace s2i
