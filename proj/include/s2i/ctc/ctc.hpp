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

#include <optional>
#include <span>
#include <vector>

#include "s2i/core/types.hpp"
#include "s2i/text/ngram.hpp"

namespace s2i::ctc {

/// Minimum number of frames needed to emit `target`: one per label plus one
/// blank between each pair of identical neighbours.
int min_frames(std::span<const int> target);

struct CtcResult {
  double loss = 0.0;
  Matrix grad;  // d loss / d logprobs, same shape as the input
};

/// Negative log-likelihood of `target` under T × (V+1) log-probabilities,
/// blank in the last column. Throws InputError("target too long for T")
/// when no alignment exists.
CtcResult ctc_loss(const Matrix& logprobs, std::span<const int> target);

struct Hypothesis {
  std::vector<int> ids;
  double acoustic_logp = 0.0;
  std::optional<double> lm_logp;
  double combined = 0.0;
};

struct BeamConfig {
  int beam_width = 100;
  int n_best = 100;
};

/// Prefix beam search over T × (V+1) log-probabilities (blank last).
/// At most beam_width prefixes and the beam_width most likely labels per
/// frame are kept. Result is sorted by acoustic_logp, ties by ids.
std::vector<Hypothesis> prefix_beam_search(const Matrix& logprobs, const BeamConfig& cfg);

/// Argmax path with repeats merged and blanks removed.
std::vector<int> greedy_decode(const Matrix& logprobs);

/// Fills lm_logp and combined = acoustic + alpha·lm + beta·|ids| for every
/// hypothesis and returns them best-first (ties: shorter, then ids).
std::vector<Hypothesis> rescore(std::span<const Hypothesis> hyps, const text::NgramLm& lm,
                                double alpha, double beta);

/// Best hypothesis after rescoring. Throws InputError on an empty list.
Hypothesis rerank(std::span<const Hypothesis> hyps, const text::NgramLm& lm, double alpha,
                  double beta);

}  // namespace s2i::ctc
