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

#include "s2i/harness/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "s2i/core/error.hpp"

namespace s2i::harness {

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

int word_edit_distance(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
  std::vector<int> prev(hyp.size() + 1), cur(hyp.size() + 1);
  for (std::size_t j = 0; j <= hyp.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= hyp.size(); ++j)
      cur[j] = std::min({prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1), prev[j] + 1, cur[j - 1] + 1});
    std::swap(prev, cur);
  }
  return prev[hyp.size()];
}

double wer(const std::string& ref, const std::string& hyp) {
  const auto r = split_words(ref), h = split_words(hyp);
  if (r.empty()) return static_cast<double>(h.size());
  return static_cast<double>(word_edit_distance(r, h)) / static_cast<double>(r.size());
}

double corpus_wer(const std::vector<std::string>& refs, const std::vector<std::string>& hyps) {
  if (refs.size() != hyps.size()) throw InputError("corpus_wer: length mismatch");
  long edits = 0, words = 0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto r = split_words(refs[i]), h = split_words(hyps[i]);
    edits += word_edit_distance(r, h);
    words += static_cast<long>(r.size());
  }
  if (words == 0) return static_cast<double>(edits);
  return static_cast<double>(edits) / static_cast<double>(words);
}

SliceMetrics slice_metrics(const std::vector<int>& preds, const std::vector<int>& golds) {
  SliceMetrics m;
  m.n = static_cast<int>(golds.size());
  int correct = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    auto& g = m.per_class[golds[i]];
    ++g.support;
    ++m.per_class[preds[i]].predicted;
    if (preds[i] == golds[i]) {
      ++g.correct;
      ++correct;
    }
  }
  if (m.n == 0) return m;
  m.accuracy = static_cast<double>(correct) / m.n;
  int seen = 0;
  for (auto& c : m.per_class) {
    c.precision = c.predicted ? static_cast<double>(c.correct) / c.predicted : 0.0;
    c.recall = c.support ? static_cast<double>(c.correct) / c.support : 0.0;
    c.f1 = c.precision + c.recall > 0 ? 2 * c.precision * c.recall / (c.precision + c.recall) : 0.0;
    if (c.support || c.predicted) {
      ++seen;
      m.f1_macro += c.f1;
    }
    m.f1_weighted += c.f1 * c.support;
  }
  m.f1_macro /= seen;
  m.f1_weighted /= m.n;
  // Single-label: micro precision = micro recall = accuracy.
  m.f1_micro = m.accuracy;
  return m;
}

MetricsReport intent_metrics(const std::vector<int>& preds, const std::vector<int>& golds) {
  if (preds.size() != golds.size()) throw InputError("intent_metrics: length mismatch");
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (preds[i] < 0 || preds[i] >= models::kNumIntents || golds[i] < 0 || golds[i] >= models::kNumIntents)
      throw InputError("intent label outside the 28-class set");
  MetricsReport r;
  r.all = slice_metrics(preds, golds);
  std::vector<int> p, g;
  for (std::size_t i = 0; i < golds.size(); ++i)
    if (golds[i] != models::kBlankIntent && golds[i] != models::kOthersIntent) {
      p.push_back(preds[i]);
      g.push_back(golds[i]);
    }
  r.excl = slice_metrics(p, g);
  return r;
}

namespace {

Json slice_json(const SliceMetrics& s) {
  Json per = Json::object();
  for (int i = 0; i < models::kNumIntents; ++i) {
    const auto& c = s.per_class[i];
    if (!c.support && !c.predicted) continue;
    per[models::intent_name(i)] = {{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}, {"support", c.support}};
  }
  return {{"n", s.n},
          {"accuracy", s.accuracy},
          {"f1_weighted", s.f1_weighted},
          {"f1_macro", s.f1_macro},
          {"f1_micro", s.f1_micro},
          {"per_class", per}};
}

}  // namespace

Json MetricsReport::to_json() const {
  Json j{{"all", slice_json(all)}, {"excl", slice_json(excl)}};
  if (wer >= 0) j["wer"] = wer;
  return j;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * (values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - lo) * (values[hi] - values[lo]);
}

Json LatencyReport::to_json() const {
  return {{"measured", measured}, {"p50_ms", p50_ms}, {"p95_ms", p95_ms}, {"mean_ms", mean_ms}, {"qps", qps}};
}

LatencyReport latency_bench(int n_items, const std::function<void(int)>& run, int warmup, int reps) {
  using Clock = std::chrono::steady_clock;
  for (int w = 0; w < warmup; ++w)
    for (int i = 0; i < n_items; ++i) run(i);
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(n_items) * std::max(reps, 0));
  double total = 0.0;
  for (int r = 0; r < reps; ++r)
    for (int i = 0; i < n_items; ++i) {
      const auto t0 = Clock::now();
      run(i);
      const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
      times.push_back(ms);
      total += ms;
    }
  LatencyReport rep;
  rep.measured = static_cast<int>(times.size());
  if (times.empty()) return rep;
  rep.p50_ms = percentile(times, 0.5);
  rep.p95_ms = percentile(times, 0.95);
  rep.mean_ms = total / times.size();
  rep.qps = total > 0 ? 1000.0 * times.size() / total : 0.0;
  return rep;
}

}  // namespace s2i::harness
