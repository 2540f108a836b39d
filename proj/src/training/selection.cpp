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

#include "s2i/training/selection.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>

#include "s2i/core/error.hpp"
#include "s2i/core/rng.hpp"

namespace s2i::training {

SelectionResult select_by_confidence(const std::vector<double>& confidence, const std::vector<std::string>& ids,
                                     int k, std::optional<double> threshold, std::uint64_t seed,
                                     const std::set<std::string>& labeled_ids) {
  if (confidence.size() != ids.size()) throw InputError("confidence and id lists differ in length");
  if (k < 0) throw ConfigError("selection size must be non-negative");
  SelectionResult r;
  r.confidence = confidence;
  std::vector<int> eligible;
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (!labeled_ids.count(ids[i])) eligible.push_back(static_cast<int>(i));

  Rng rng(mix_seed(seed, 31));
  std::vector<int> candidates;
  if (threshold) {
    for (int i : eligible)
      if (confidence[i] < *threshold) candidates.push_back(i);
  } else {
    // Ties at the cut are broken at random.
    candidates = eligible;
    std::shuffle(candidates.begin(), candidates.end(), rng);
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](int a, int b) { return confidence[a] < confidence[b]; });
    if (static_cast<int>(candidates.size()) > k) candidates.resize(k);
  }
  if (k > static_cast<int>(candidates.size())) {
    std::cerr << "warning: requested " << k << " items but only " << candidates.size()
              << " are eligible; returning all of them\n";
    r.clipped = true;
    r.indices = candidates;
  } else {
    std::sort(candidates.begin(), candidates.end());
    std::shuffle(candidates.begin(), candidates.end(), rng);
    r.indices.assign(candidates.begin(), candidates.begin() + k);
  }
  std::sort(r.indices.begin(), r.indices.end());
  return r;
}

SelectionResult select_low_confidence(const models::S2IModel& model, const std::vector<Example>& pool, int k,
                                      std::optional<double> threshold, std::uint64_t seed,
                                      const std::set<std::string>& labeled_ids) {
  std::vector<double> conf;
  std::vector<std::string> ids;
  conf.reserve(pool.size());
  for (const auto& e : pool) {
    conf.push_back(models::predict_intent(e.features(), model).confidence);
    ids.push_back(e.id);
  }
  return select_by_confidence(conf, ids, k, threshold, seed, labeled_ids);
}

PseudoLabelResult pseudo_label(const models::S2IModel& model, const std::vector<Example>& pool,
                               double min_confidence) {
  PseudoLabelResult r;
  for (const auto& e : pool) {
    auto p = models::predict_intent(e.features(), model);
    if (p.confidence < min_confidence) continue;
    Example kept = e;
    kept.intent = p.intent;
    r.labeled.push_back(std::move(kept));
  }
  r.kept_fraction = pool.empty() ? 0.0 : static_cast<double>(r.labeled.size()) / pool.size();
  return r;
}

}  // namespace s2i::training
