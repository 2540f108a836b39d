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

#include <map>
#include <span>
#include <string>
#include <vector>

namespace s2i::text {

/// Raw n-gram counts for orders 1..order.
class NgramCounts {
 public:
  NgramCounts(int vocab_size, int order);

  /// Adds one sentence; with boundaries it is wrapped in <s> ... </s>.
  void add_sentence(std::span<const int> ids, bool sentence_boundaries = true);

  double count(std::span<const int> ngram) const;
  /// Σ_w count(context + w).
  double context_total(std::span<const int> context) const;
  /// Unsmoothed count(context + w) / context_total(context); 0 for unseen contexts.
  double mle(int word, std::span<const int> context) const;

  int order() const { return order_; }
  int vocab_size() const { return vocab_size_; }
  int bos() const { return vocab_size_; }
  int eos() const { return vocab_size_ + 1; }

  const std::map<std::vector<int>, double>& grams(int n) const { return counts_[n - 1]; }
  const std::map<std::vector<int>, std::map<int, double>>& followers(int n) const {
    return followers_[n - 1];
  }

 private:
  int vocab_size_;
  int order_;
  std::vector<std::map<std::vector<int>, double>> counts_;
  // context (length n-1) → word → count, for n-grams of order n
  std::vector<std::map<std::vector<int>, std::map<int, double>>> followers_;
};

/// Backoff n-gram model over token ids [0, vocab_size) plus </s>.
/// Internally stores natural-log probabilities in ARPA backoff form.
class NgramLm {
 public:
  struct Entry {
    double log_prob = 0.0;
    double backoff = 0.0;
  };

  NgramLm(int vocab_size, int order);

  int vocab_size() const { return vocab_size_; }
  int order() const { return order_; }
  int bos() const { return vocab_size_; }
  int eos() const { return vocab_size_ + 1; }

  /// ln P(word | context); only the last order-1 context tokens matter.
  double log_prob(int word, std::span<const int> context) const;

  void set_entry(std::vector<int> ngram, Entry entry);
  void set_backoff(const std::vector<int>& context, double backoff);
  const std::map<std::vector<int>, Entry>& entries(int n) const { return grams_[n - 1]; }

  void write_arpa(const std::string& path) const;
  static NgramLm read_arpa(const std::string& path);

 private:
  int vocab_size_;
  int order_;
  std::vector<std::map<std::vector<int>, Entry>> grams_;
};

/// Interpolated absolute-discount model converted to backoff form.
NgramLm train_ngram(const std::vector<std::vector<int>>& corpus, int vocab_size,
                    int order = 3, double discount = 0.75);

/// Σ ln P over the tokens, starting from <s>. With `close_sentence` the
/// closing </s> term is included.
double lm_score(const NgramLm& lm, std::span<const int> ids, bool close_sentence = true);

double perplexity(const NgramLm& lm, const std::vector<std::vector<int>>& corpus);

}  // namespace s2i::text
