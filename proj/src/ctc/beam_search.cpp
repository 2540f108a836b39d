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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "s2i/core/error.hpp"
#include "s2i/core/instrumentation.hpp"
#include "s2i/ctc/ctc.hpp"

namespace s2i::ctc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

struct PrefixHash {
  std::size_t operator()(const std::vector<int>& v) const {
    std::size_t h = 1469598103934665603ULL;
    for (int x : v) {
      h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }
};

struct Beam {
  double blank = kNegInf;
  double non_blank = kNegInf;
  double total() const { return log_add(blank, non_blank); }
};

using BeamEntry = std::pair<std::vector<int>, Beam>;

bool better(const BeamEntry& a, const BeamEntry& b) {
  const double ta = a.second.total(), tb = b.second.total();
  if (ta != tb) return ta > tb;
  return a.first < b.first;
}

}  // namespace

std::vector<Hypothesis> prefix_beam_search(const Matrix& logprobs, const BeamConfig& cfg) {
  if (cfg.n_best < 1 || cfg.beam_width < cfg.n_best)
    throw ConfigError("prefix_beam_search requires beam_width >= n_best >= 1");
  const int T = static_cast<int>(logprobs.rows());
  const int n_labels = static_cast<int>(logprobs.cols());
  const int blank = n_labels - 1;
  if (n_labels < 1) throw InputError("prefix_beam_search needs at least the blank column");

  std::vector<BeamEntry> beams{{{}, Beam{0.0, kNegInf}}};
  std::vector<int> order(n_labels);
  const int label_limit = std::min(cfg.beam_width, n_labels);
  std::uint64_t expansions = 0;

  for (int t = 0; t < T; ++t) {
    const auto row = logprobs.row(t);
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + label_limit, order.end(),
                      [&row](int a, int b) { return row[a] != row[b] ? row[a] > row[b] : a < b; });

    std::unordered_map<std::vector<int>, Beam, PrefixHash> next;
    next.reserve(beams.size() * (label_limit + 1));
    for (const auto& [prefix, beam] : beams) {
      const double total = beam.total();
      auto& stay = next[prefix];
      stay.blank = log_add(stay.blank, total + row[blank]);
      for (int r = 0; r < label_limit; ++r) {
        const int c = order[r];
        if (c == blank) continue;
        ++expansions;
        const double p = row[c];
        if (!prefix.empty() && prefix.back() == c) {
          auto& same = next[prefix];
          same.non_blank = log_add(same.non_blank, beam.non_blank + p);
          std::vector<int> extended = prefix;
          extended.push_back(c);
          auto& ext = next[extended];
          ext.non_blank = log_add(ext.non_blank, beam.blank + p);
        } else {
          std::vector<int> extended = prefix;
          extended.push_back(c);
          auto& ext = next[extended];
          ext.non_blank = log_add(ext.non_blank, total + p);
        }
      }
    }
    std::vector<BeamEntry> candidates;
    candidates.reserve(next.size());
    for (auto& e : next)
      if (e.second.total() != kNegInf) candidates.push_back(std::move(e));
    const std::size_t keep = std::min<std::size_t>(cfg.beam_width, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + keep, candidates.end(), better);
    candidates.resize(keep);
    beams = std::move(candidates);
  }
  counters().beam_expansions += expansions;

  std::sort(beams.begin(), beams.end(), better);
  std::vector<Hypothesis> out;
  for (std::size_t i = 0; i < beams.size() && static_cast<int>(i) < cfg.n_best; ++i) {
    Hypothesis h;
    h.ids = beams[i].first;
    h.acoustic_logp = beams[i].second.total();
    h.combined = h.acoustic_logp;
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<int> greedy_decode(const Matrix& logprobs) {
  const int blank = static_cast<int>(logprobs.cols()) - 1;
  std::vector<int> out;
  int prev = -1;
  for (Eigen::Index t = 0; t < logprobs.rows(); ++t) {
    Eigen::Index best = 0;
    logprobs.row(t).maxCoeff(&best);
    const int k = static_cast<int>(best);
    if (k != blank && k != prev) out.push_back(k);
    prev = k;
  }
  return out;
}

std::vector<Hypothesis> rescore(std::span<const Hypothesis> hyps, const text::NgramLm& lm,
                                double alpha, double beta) {
  std::vector<Hypothesis> out(hyps.begin(), hyps.end());
  for (auto& h : out) {
    h.lm_logp = text::lm_score(lm, h.ids);
    h.combined = h.acoustic_logp + alpha * *h.lm_logp + beta * static_cast<double>(h.ids.size());
  }
  std::stable_sort(out.begin(), out.end(), [](const Hypothesis& a, const Hypothesis& b) {
    if (a.combined != b.combined) return a.combined > b.combined;
    if (a.ids.size() != b.ids.size()) return a.ids.size() < b.ids.size();
    return a.ids < b.ids;
  });
  return out;
}

Hypothesis rerank(std::span<const Hypothesis> hyps, const text::NgramLm& lm, double alpha,
                  double beta) {
  if (hyps.empty()) throw InputError("rerank needs at least one hypothesis");
  return rescore(hyps, lm, alpha, beta).front();
}

}  // namespace s2i::ctc
