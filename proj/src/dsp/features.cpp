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

#include "s2i/dsp/features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include <unsupported/Eigen/FFT>

#include "s2i/core/error.hpp"
#include "s2i/core/rng.hpp"

namespace s2i::dsp {

int FeatureConfig::window_samples() const {
  return static_cast<int>(std::lround(sample_rate_hz * window_ms / 1000.0));
}

int FeatureConfig::hop_samples() const {
  return static_cast<int>(std::lround(sample_rate_hz * hop_ms / 1000.0));
}

double FeatureConfig::upper_freq_hz() const {
  return high_freq_hz > 0.0 ? high_freq_hz : sample_rate_hz / 2.0;
}

void FeatureConfig::validate() const {
  if (sample_rate_hz <= 0) throw ConfigError("sample_rate_hz must be positive");
  if (window_samples() < 1 || hop_samples() < 1)
    throw ConfigError("window and hop must cover at least one sample");
  if (fft_size < window_samples())
    throw ConfigError("fft_size must be >= window samples");
  if (n_mels < 1) throw ConfigError("n_mels must be >= 1");
  if (stack < 1 || stack_stride < 1)
    throw ConfigError("stack and stack_stride must be >= 1");
  if (!(log_floor > 0.0)) throw ConfigError("log_floor must be positive");
  if (low_freq_hz < 0.0 || upper_freq_hz() <= low_freq_hz ||
      upper_freq_hz() > sample_rate_hz / 2.0)
    throw ConfigError("invalid mel frequency range");
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

namespace {

std::vector<double> mel_edges(const FeatureConfig& cfg) {
  const double lo = hz_to_mel(cfg.low_freq_hz);
  const double hi = hz_to_mel(cfg.upper_freq_hz());
  std::vector<double> edges(cfg.n_mels + 2);
  for (int i = 0; i < cfg.n_mels + 2; ++i)
    edges[i] = mel_to_hz(lo + (hi - lo) * i / (cfg.n_mels + 1));
  return edges;
}

}  // namespace

std::vector<double> mel_center_frequencies(const FeatureConfig& cfg) {
  auto edges = mel_edges(cfg);
  return {edges.begin() + 1, edges.end() - 1};
}

Matrix mel_filterbank(const FeatureConfig& cfg) {
  const int n_bins = cfg.fft_size / 2 + 1;
  const auto edges = mel_edges(cfg);
  Matrix bank = Matrix::Zero(cfg.n_mels, n_bins);
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * cfg.sample_rate_hz / cfg.fft_size;
      double w = 0.0;
      if (f > left && f <= center)
        w = (f - left) / (center - left);
      else if (f > center && f < right)
        w = (right - f) / (right - center);
      bank(m, k) = w;
    }
  }
  return bank;
}

Matrix log_mel(const AudioBuffer& audio, const FeatureConfig& cfg) {
  cfg.validate();
  if (audio.sample_rate_hz != cfg.sample_rate_hz)
    throw InputError("sample rate " + std::to_string(audio.sample_rate_hz) +
                     " does not match feature config " +
                     std::to_string(cfg.sample_rate_hz));
  for (double s : audio.samples)
    if (!std::isfinite(s)) throw InputError("non-finite audio sample");

  const int win = cfg.window_samples();
  const int hop = cfg.hop_samples();
  const int len = static_cast<int>(audio.samples.size());
  if (len < win) throw InputError("utterance too short");
  const int n_frames = 1 + (len - win) / hop;
  const int n_bins = cfg.fft_size / 2 + 1;

  // Periodic Hann.
  std::vector<double> window(win);
  for (int n = 0; n < win; ++n)
    window[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / win);

  const Matrix bank = mel_filterbank(cfg);
  Eigen::FFT<double> fft;
  std::vector<double> frame(cfg.fft_size, 0.0);
  std::vector<std::complex<double>> spectrum;
  Vector power(n_bins);
  Matrix out(n_frames, cfg.n_mels);

  for (int t = 0; t < n_frames; ++t) {
    std::fill(frame.begin(), frame.end(), 0.0);
    const double* src = audio.samples.data() + static_cast<std::size_t>(t) * hop;
    for (int n = 0; n < win; ++n) frame[n] = src[n] * window[n];
    fft.fwd(spectrum, frame);
    for (int k = 0; k < n_bins; ++k) power[k] = std::norm(spectrum[k]);
    const Vector energies = bank * power;
    for (int m = 0; m < cfg.n_mels; ++m)
      out(t, m) = std::log(std::max(energies[m], cfg.log_floor));
  }
  return out;
}

FeatureMatrix stack_frames(const Matrix& mel, int stack, int stride,
                           double hop_ms, double window_ms) {
  if (stack < 1 || stride < 1)
    throw ConfigError("stack and stride must be >= 1");
  const int rows = static_cast<int>(mel.rows());
  if (rows < stack) throw InputError("utterance too short");
  const int dim = static_cast<int>(mel.cols());
  const int out_rows = 1 + (rows - stack) / stride;

  FeatureMatrix f;
  f.frames.resize(out_rows, static_cast<Eigen::Index>(dim) * stack);
  for (int t = 0; t < out_rows; ++t)
    for (int s = 0; s < stack; ++s)
      f.frames.block(t, s * dim, 1, dim) = mel.row(t * stride + s);
  f.frame_stride_ms = stride * hop_ms;
  f.receptive_field_ms = (stack - 1) * hop_ms + window_ms;
  return f;
}

FeatureMatrix featurize(const AudioBuffer& audio, const FeatureConfig& cfg) {
  return stack_frames(log_mel(audio, cfg), cfg.stack, cfg.stack_stride,
                      cfg.hop_ms, cfg.window_ms);
}

FeatureMatrix apply_masking(const FeatureMatrix& features,
                            const MaskingConfig& cfg, std::uint64_t seed) {
  if (cfg.n_time_masks < 0 || cfg.n_freq_masks < 0 || cfg.max_time_width < 0 ||
      cfg.max_freq_width < 0)
    throw ConfigError("mask counts and widths must be >= 0");
  FeatureMatrix out = features;
  const int rows = features.num_frames();
  const int cols = features.dim();
  if (rows == 0 || cols == 0) return out;
  const double fill = features.frames.mean();

  Rng rng(seed);
  for (int i = 0; i < cfg.n_time_masks; ++i) {
    const int width = std::min(uniform_int(rng, 0, cfg.max_time_width), rows);
    const int start = uniform_int(rng, 0, rows - width);
    out.frames.middleRows(start, width).setConstant(fill);
  }
  for (int i = 0; i < cfg.n_freq_masks; ++i) {
    const int width = std::min(uniform_int(rng, 0, cfg.max_freq_width), cols);
    const int start = uniform_int(rng, 0, cols - width);
    out.frames.middleCols(start, width).setConstant(fill);
  }
  return out;
}

void FeatureStats::apply(Matrix& frames) const {
  if (empty()) return;
  if (frames.cols() != mean.size())
    throw InputError("feature stats dimension mismatch");
  frames.rowwise() -= mean.transpose();
  frames.array().rowwise() *= inv_std.transpose().array();
}

FeatureStats compute_feature_stats(
    const std::vector<const Matrix*>& utterances) {
  FeatureStats stats;
  if (utterances.empty()) return stats;
  const auto dim = utterances.front()->cols();
  Vector sum = Vector::Zero(dim), sq = Vector::Zero(dim);
  double count = 0;
  for (const Matrix* m : utterances) {
    if (m->cols() != dim) throw InputError("feature stats dimension mismatch");
    sum += m->colwise().sum().transpose();
    sq += m->array().square().matrix().colwise().sum().transpose();
    count += static_cast<double>(m->rows());
  }
  stats.mean = sum / count;
  Vector var = sq / count - stats.mean.array().square().matrix();
  stats.inv_std = var.unaryExpr([](double v) { return 1.0 / std::sqrt(std::max(v, 1e-8)); });
  return stats;
}

AudioBuffer decimate(const AudioBuffer& audio, int factor) {
  if (factor < 1) throw ConfigError("decimation factor must be >= 1");
  if (factor == 1) return audio;
  AudioBuffer out;
  out.sample_rate_hz = audio.sample_rate_hz / factor;
  const std::size_t n = audio.samples.size() / factor;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < factor; ++j) acc += audio.samples[i * factor + j];
    out.samples[i] = acc / factor;
  }
  return out;
}

}  // namespace s2i::dsp
