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

#include "s2i/nn/params.hpp"

#include "s2i/core/error.hpp"

namespace s2i::nn {

ParamSlot ParamStore::add(std::string name, int rows, int cols) {
  if (rows <= 0 || cols <= 0) throw ConfigError("parameter " + name + " has empty shape");
  if (find(name)) throw ConfigError("duplicate parameter name: " + name);
  ParamSlot slot{values_.size(), rows, cols};
  values_.resize(values_.size() + slot.size(), 0.0);
  entries_.push_back({std::move(name), slot});
  return slot;
}

const ParamStore::Entry* ParamStore::find(std::string_view name) const {
  for (const auto& e : entries_)
    if (e.name == name) return &e;
  return nullptr;
}

void ParamStore::init_uniform(ParamSlot s, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (std::size_t i = 0; i < s.size(); ++i) values_[s.offset + i] = dist(rng);
}

void ParamStore::fill(ParamSlot s, double value) {
  for (std::size_t i = 0; i < s.size(); ++i) values_[s.offset + i] = value;
}

}  // namespace s2i::nn
