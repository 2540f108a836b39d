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
#include <unordered_map>
#include <vector>

#include "s2i/models/intents.hpp"
#include "s2i/nn/params.hpp"

namespace s2i::baseline {

/// Sparse bag-of-words vector: (term index, weight) sorted by index.
using SparseVector = std::vector<std::pair<int, double>>;

struct TfidfTrainConfig {
  int iterations = 300;
  double lr = 0.05;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
};

/// TF-IDF features (lower-cased whitespace tokens, idf = ln((1+N)/(1+df)) + 1,
/// L2-normalised) feeding a multinomial logistic regression over 28 intents.
class TfidfIntentModel {
 public:
  static TfidfIntentModel train(const std::vector<std::string>& texts, const std::vector<int>& labels,
                                const TfidfTrainConfig& cfg = {});

  SparseVector features(const std::string& text) const;
  /// Softmax over the 28 classes.
  RowVector distribution(const std::string& text) const;

  struct Prediction {
    int intent = models::kBlankIntent;
    double confidence = 1.0;
  };
  /// Empty text short-circuits to "blank" with confidence 1.
  Prediction classify(const std::string& text) const;

  int vocab_size() const { return static_cast<int>(terms_.size()); }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<double>& idf() const { return idf_; }

  void save(const std::string& path) const;
  static TfidfIntentModel load(const std::string& path);

 private:
  void index_terms();

  std::vector<std::string> terms_;
  std::unordered_map<std::string, int> index_;
  std::vector<double> idf_;
  nn::ParamStore params_;
  nn::ParamSlot w_, b_;
};

std::vector<std::string> tokenize_lower(const std::string& text);

}  // namespace s2i::baseline
