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

#include <cstdint>
#include <vector>

#include "s2i/core/types.hpp"

namespace s2i::dsp {

struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate_hz = 16000;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

struct FeatureConfig {
  int sample_rate_hz = 16000;
  double window_ms = 20.0;
  double hop_ms = 10.0;
  int fft_size = 512;
  int n_mels = 80;
  int stack = 5;
  int stack_stride = 3;
  double log_floor = 1e-10;
  double low_freq_hz = 0.0;
  double high_freq_hz = 0.0;  // 0 means Nyquist

  int window_samples() const;
  int hop_samples() const;
  double upper_freq_hz() const;
  int stacked_dim() const { return n_mels * stack; }

  /// Throws ConfigError when any invariant is violated.
  void validate() const;
};

/// Stacked log-mel frames. One row per output step.
struct FeatureMatrix {
  Matrix frames;
  double frame_stride_ms = 0.0;
  double receptive_field_ms = 0.0;

  int num_frames() const { return static_cast<int>(frames.rows()); }
  int dim() const { return static_cast<int>(frames.cols()); }
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// n_mels × (fft_size/2 + 1) triangular filterbank, peak weight 1.
Matrix mel_filterbank(const FeatureConfig& cfg);

/// Center frequency (Hz) of each mel filter.
std::vector<double> mel_center_frequencies(const FeatureConfig& cfg);

/// T × n_mels natural-log mel energies of the power spectrum.
Matrix log_mel(const AudioBuffer& audio, const FeatureConfig& cfg);

/// Concatenate `stack` consecutive rows every `stride` rows.
FeatureMatrix stack_frames(const Matrix& mel, int stack, int stride,
                           double hop_ms = 10.0, double window_ms = 20.0);

/// log_mel followed by stack_frames.
FeatureMatrix featurize(const AudioBuffer& audio, const FeatureConfig& cfg);

struct MaskingConfig {
  int n_time_masks = 2;
  int max_time_width = 6;
  int n_freq_masks = 2;
  int max_freq_width = 10;
};

/// Replaces random time and feature-dimension bands with the utterance mean.
/// Widths larger than the matrix are clamped.
FeatureMatrix apply_masking(const FeatureMatrix& features,
                            const MaskingConfig& cfg, std::uint64_t seed);

/// Per-dimension mean / inverse-stddev estimated over a set of utterances.
struct FeatureStats {
  Vector mean;
  Vector inv_std;

  bool empty() const { return mean.size() == 0; }
  void apply(Matrix& frames) const;
};

FeatureStats compute_feature_stats(const std::vector<const Matrix*>& utterances);

/// Keeps every `factor`-th sample after a boxcar anti-alias average.
AudioBuffer decimate(const AudioBuffer& audio, int factor);

}  // namespace s2i::dsp
