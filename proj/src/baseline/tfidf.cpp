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

#include "s2i/baseline/tfidf.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "s2i/core/error.hpp"
#include "s2i/models/checkpoint.hpp"
#include "s2i/nn/adam.hpp"
#include "s2i/nn/layers.hpp"

namespace s2i::baseline {

std::vector<std::string> tokenize_lower(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) {
    std::transform(w.begin(), w.end(), w.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    out.push_back(w);
  }
  return out;
}

void TfidfIntentModel::index_terms() {
  index_.clear();
  for (std::size_t i = 0; i < terms_.size(); ++i) index_[terms_[i]] = static_cast<int>(i);
}

SparseVector TfidfIntentModel::features(const std::string& text) const {
  std::map<int, double> tf;
  for (const auto& w : tokenize_lower(text))
    if (auto it = index_.find(w); it != index_.end()) tf[it->second] += 1.0;
  SparseVector v;
  double norm = 0.0;
  for (const auto& [i, c] : tf) {
    v.emplace_back(i, c * idf_[i]);
    norm += v.back().second * v.back().second;
  }
  if (norm > 0)
    for (auto& [i, x] : v) x /= std::sqrt(norm);
  return v;
}

namespace {

RowVector logits_of(const SparseVector& x, const nn::ParamStore& ps, nn::ParamSlot w, nn::ParamSlot b) {
  RowVector z = ps(b).row(0);
  const auto W = ps(w);
  for (const auto& [i, v] : x) z += v * W.row(i);
  return z;
}

}  // namespace

RowVector TfidfIntentModel::distribution(const std::string& text) const {
  Matrix z = logits_of(features(text), params_, w_, b_);
  return nn::softmax_rows(z).row(0);
}

TfidfIntentModel::Prediction TfidfIntentModel::classify(const std::string& text) const {
  Prediction p;
  if (tokenize_lower(text).empty()) return p;
  RowVector d = distribution(text);
  Eigen::Index best = 0;
  p.confidence = d.maxCoeff(&best);
  p.intent = static_cast<int>(best);
  return p;
}

TfidfIntentModel TfidfIntentModel::train(const std::vector<std::string>& texts, const std::vector<int>& labels,
                                         const TfidfTrainConfig& cfg) {
  if (texts.size() != labels.size()) throw InputError("texts and labels differ in length");
  if (texts.empty()) throw InputError("TF-IDF training set is empty");
  for (int l : labels)
    if (l < 0 || l >= models::kNumIntents) throw InputError("intent label outside the 28-class set");

  TfidfIntentModel m;
  std::map<std::string, int> df;
  for (const auto& t : texts) {
    const auto toks = tokenize_lower(t);
    for (const auto& w : std::set<std::string>(toks.begin(), toks.end())) ++df[w];
  }
  const double n = static_cast<double>(texts.size());
  for (const auto& [w, d] : df) {
    m.terms_.push_back(w);
    m.idf_.push_back(std::log((1.0 + n) / (1.0 + d)) + 1.0);
  }
  m.index_terms();
  m.w_ = m.params_.add("w", std::max(1, m.vocab_size()), models::kNumIntents);
  m.b_ = m.params_.add("b", 1, models::kNumIntents);

  std::vector<SparseVector> xs;
  xs.reserve(texts.size());
  for (const auto& t : texts) xs.push_back(m.features(t));

  nn::Adam adam(m.params_.size(), {0.9, 0.999, 1e-8, 0.0});
  nn::Grads g = m.params_.zeros_like();
  for (int it = 0; it < cfg.iterations; ++it) {
    std::fill(g.begin(), g.end(), 0.0);
    auto gw = nn::grad_view(g, m.w_);
    auto gb = nn::grad_view(g, m.b_);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      Matrix z = logits_of(xs[i], m.params_, m.w_, m.b_);
      RowVector p = nn::softmax_rows(z).row(0);
      p[labels[i]] -= 1.0;
      p /= n;
      gb.row(0) += p;
      for (const auto& [j, v] : xs[i]) gw.row(j) += v * p;
    }
    gw += cfg.l2 * m.params_(m.w_);
    adam.step(m.params_.values(), g, cfg.lr);
  }
  return m;
}

void TfidfIntentModel::save(const std::string& path) const {
  models::write_checkpoint(path, {{"kind", "tfidf"}, {"terms", terms_}, {"idf", idf_}}, params_);
}

TfidfIntentModel TfidfIntentModel::load(const std::string& path) {
  auto raw = models::read_checkpoint(path);
  try {
    if (raw.header.at("kind") != "tfidf") throw FormatError(path + ": not a TF-IDF checkpoint");
    TfidfIntentModel m;
    m.terms_ = raw.header.at("terms").get<std::vector<std::string>>();
    m.idf_ = raw.header.at("idf").get<std::vector<double>>();
    if (m.terms_.size() != m.idf_.size()) throw FormatError(path + ": terms and idf differ in length");
    m.index_terms();
    m.w_ = m.params_.add("w", std::max(1, m.vocab_size()), models::kNumIntents);
    m.b_ = m.params_.add("b", 1, models::kNumIntents);
    models::load_params(m.params_, raw, path);
    return m;
  } catch (const Json::exception& e) {
    throw FormatError(path + ": corrupted header: " + e.what());
  }
}

}  // namespace s2i::baseline
