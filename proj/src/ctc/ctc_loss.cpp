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

#include "s2i/core/error.hpp"
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

}  // namespace

int min_frames(std::span<const int> target) {
  int n = static_cast<int>(target.size());
  for (std::size_t i = 1; i < target.size(); ++i)
    if (target[i] == target[i - 1]) ++n;
  return n;
}

CtcResult ctc_loss(const Matrix& logprobs, std::span<const int> target) {
  const int T = static_cast<int>(logprobs.rows());
  const int blank = static_cast<int>(logprobs.cols()) - 1;
  if (T < 1 || blank < 0) throw InputError("ctc_loss needs a non-empty T × (V+1) matrix");
  for (int id : target)
    if (id < 0 || id >= blank) throw InputError("ctc target id out of range");
  if (T < min_frames(target)) throw InputError("target too long for T");

  const int L = static_cast<int>(target.size());
  const int S = 2 * L + 1;
  std::vector<int> ext(S, blank);
  for (int i = 0; i < L; ++i) ext[2 * i + 1] = target[i];

  Matrix alpha = Matrix::Constant(T, S, kNegInf);
  Matrix beta = Matrix::Constant(T, S, kNegInf);
  alpha(0, 0) = logprobs(0, blank);
  if (S > 1) alpha(0, 1) = logprobs(0, ext[1]);
  for (int t = 1; t < T; ++t)
    for (int s = 0; s < S; ++s) {
      double a = alpha(t - 1, s);
      if (s > 0) a = log_add(a, alpha(t - 1, s - 1));
      if (s > 1 && ext[s] != blank && ext[s] != ext[s - 2]) a = log_add(a, alpha(t - 1, s - 2));
      if (a != kNegInf) alpha(t, s) = a + logprobs(t, ext[s]);
    }

  // beta(t, s): mass of completing from state s at t, excluding frame t.
  beta(T - 1, S - 1) = 0.0;
  if (S > 1) beta(T - 1, S - 2) = 0.0;
  for (int t = T - 2; t >= 0; --t)
    for (int s = 0; s < S; ++s) {
      double b = beta(t + 1, s) + logprobs(t + 1, ext[s]);
      if (s + 1 < S) b = log_add(b, beta(t + 1, s + 1) + logprobs(t + 1, ext[s + 1]));
      if (s + 2 < S && ext[s] != blank && ext[s + 2] != ext[s])
        b = log_add(b, beta(t + 1, s + 2) + logprobs(t + 1, ext[s + 2]));
      beta(t, s) = b;
    }

  double log_likelihood = alpha(T - 1, S - 1);
  if (S > 1) log_likelihood = log_add(log_likelihood, alpha(T - 1, S - 2));

  CtcResult result;
  result.loss = -log_likelihood;
  result.grad = Matrix::Zero(T, logprobs.cols());
  if (log_likelihood == kNegInf) {
    // Probability underflow: no usable gradient direction.
    result.loss = std::numeric_limits<double>::infinity();
    return result;
  }
  for (int t = 0; t < T; ++t) {
    std::vector<double> occ(logprobs.cols(), kNegInf);
    for (int s = 0; s < S; ++s) occ[ext[s]] = log_add(occ[ext[s]], alpha(t, s) + beta(t, s));
    for (int k = 0; k <= blank; ++k)
      if (occ[k] != kNegInf) result.grad(t, k) = -std::exp(occ[k] - log_likelihood);
  }
  return result;
}

}  // namespace s2i::ctc
