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

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "s2i/core/error.hpp"
#include "s2i/core/rng.hpp"
#include "s2i/dsp/features.hpp"
#include "s2i/dsp/wav.hpp"

using namespace s2i;
using namespace s2i::dsp;

namespace {

AudioBuffer sine(double freq, double seconds, double amp = 0.5, int rate = 16000) {
  AudioBuffer a;
  a.sample_rate_hz = rate;
  const int n = static_cast<int>(seconds * rate);
  a.samples.resize(n);
  for (int i = 0; i < n; ++i) a.samples[i] = amp * std::sin(2.0 * std::numbers::pi * freq * i / rate);
  return a;
}

}  // namespace

TEST_CASE("log_mel frame count for one second of audio") {
  FeatureConfig cfg;
  auto a = sine(440.0, 1.0);
  CHECK(cfg.window_samples() == 320);
  CHECK(cfg.hop_samples() == 160);
  Matrix m = log_mel(a, cfg);
  CHECK(m.rows() == 99);  // 1 + (16000 − 320) / 160
  CHECK(m.cols() == 80);
}

TEST_CASE("log_mel of silence is the constant log floor") {
  FeatureConfig cfg;
  AudioBuffer a;
  a.samples.assign(8000, 0.0);
  Matrix m = log_mel(a, cfg);
  CHECK(m.minCoeff() == doctest::Approx(std::log(1e-10)));
  CHECK(m.maxCoeff() == m.minCoeff());
}

TEST_CASE("a 1 kHz tone peaks in the filter centred nearest 1 kHz") {
  FeatureConfig cfg;
  // Independent centre computation: n_mels+2 points evenly spaced on the
  // 2595·log10(1 + f/700) scale between 0 Hz and Nyquist.
  const double top = 2595.0 * std::log10(1.0 + 8000.0 / 700.0);
  int nearest = -1;
  double best = 1e9;
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double mel = top * (m + 1) / (cfg.n_mels + 1);
    const double hz = 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
    if (std::abs(hz - 1000.0) < best) {
      best = std::abs(hz - 1000.0);
      nearest = m;
    }
  }
  Matrix m = log_mel(sine(1000.0, 0.5), cfg);
  for (Eigen::Index t = 0; t < m.rows(); ++t) {
    Eigen::Index arg = 0;
    m.row(t).maxCoeff(&arg);
    CHECK(arg == nearest);
  }
}

TEST_CASE("log_mel rejects short and non-finite audio") {
  FeatureConfig cfg;
  AudioBuffer a;
  a.samples.assign(319, 0.1);
  CHECK_THROWS_WITH_AS(log_mel(a, cfg), "utterance too short", InputError);
  a.samples.assign(1000, 0.1);
  a.samples[10] = std::nan("");
  CHECK_THROWS_AS(log_mel(a, cfg), InputError);
}

TEST_CASE("feature config validation") {
  FeatureConfig cfg;
  cfg.fft_size = 256;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = FeatureConfig{};
  cfg.n_mels = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("shape law holds for random lengths") {
  FeatureConfig cfg;
  Rng rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const int len = uniform_int(rng, 320, 24000);
    AudioBuffer a;
    a.samples.resize(len);
    for (auto& s : a.samples) s = uniform(rng, -0.5, 0.5);
    const int T = 1 + (len - 320) / 160;
    Matrix m = log_mel(a, cfg);
    REQUIRE(m.rows() == T);
    if (T >= cfg.stack) {
      auto f = stack_frames(m, cfg.stack, cfg.stack_stride);
      CHECK(f.num_frames() == 1 + (T - 5) / 3);
      CHECK(f.dim() == 400);
    } else {
      CHECK_THROWS_AS(stack_frames(m, cfg.stack, cfg.stack_stride), InputError);
    }
  }
}

TEST_CASE("stack_frames layout and timing") {
  Matrix mel(99, 80);
  for (int t = 0; t < 99; ++t) mel.row(t).setConstant(t);
  auto f = stack_frames(mel, 5, 3);
  CHECK(f.num_frames() == 32);
  CHECK(f.dim() == 400);
  CHECK(f.frame_stride_ms == 30.0);
  CHECK(f.receptive_field_ms == 60.0);
  for (int t = 0; t < 32; ++t)
    for (int s = 0; s < 5; ++s) CHECK(f.frames(t, s * 80 + 7) == t * 3 + s);

  Matrix five(5, 2);
  five << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10;
  auto g = stack_frames(five, 5, 3);
  REQUIRE(g.num_frames() == 1);
  for (int i = 0; i < 10; ++i) CHECK(g.frames(0, i) == i + 1);
}

TEST_CASE("masking") {
  FeatureConfig cfg;
  auto f = featurize(sine(700.0, 1.0), cfg);

  SUBCASE("zero masks are a no-op") {
    auto out = apply_masking(f, {0, 6, 0, 10}, 3);
    CHECK(out.frames == f.frames);
  }
  SUBCASE("fixed seed is deterministic") {
    auto a = apply_masking(f, {}, 11);
    auto b = apply_masking(f, {}, 11);
    CHECK(a.frames == b.frames);
    CHECK(a.frames != f.frames);
  }
  SUBCASE("oversized widths clamp and keep the shape") {
    const int T = f.num_frames();
    auto out = apply_masking(f, {1, T * 4, 0, 0}, 5);
    CHECK(out.frames.rows() == f.frames.rows());
    CHECK(out.frames.cols() == f.frames.cols());
    const double fill = f.frames.mean();
    int masked = 0;
    for (Eigen::Index r = 0; r < out.frames.rows(); ++r)
      for (Eigen::Index c = 0; c < out.frames.cols(); ++c)
        if (out.frames(r, c) != f.frames(r, c) || out.frames(r, c) == fill) ++masked;
    CHECK(masked <= T * f.dim());
    auto big = apply_masking(f, {3, 1000, 3, 100000}, 9);
    CHECK(big.frames.allFinite());
  }
}

TEST_CASE("louder audio never lowers a log-mel entry") {
  FeatureConfig cfg;
  Rng rng(3);
  AudioBuffer a;
  a.samples.resize(6000);
  for (auto& s : a.samples) s = uniform(rng, -0.2, 0.2);
  Matrix base = log_mel(a, cfg);
  for (double c : {1.5, 3.0}) {
    AudioBuffer b = a;
    for (auto& s : b.samples) s *= c;
    Matrix louder = log_mel(b, cfg);
    CHECK((louder.array() >= base.array()).all());
  }
}

TEST_CASE("feature stats normalise to zero mean and unit variance") {
  FeatureConfig cfg;
  auto f1 = featurize(sine(500.0, 1.0), cfg);
  auto f2 = featurize(sine(1500.0, 0.8, 0.2), cfg);
  auto stats = compute_feature_stats({&f1.frames, &f2.frames});
  Matrix all(f1.frames.rows() + f2.frames.rows(), f1.dim());
  all << f1.frames, f2.frames;
  stats.apply(all);
  CHECK(std::abs(all.colwise().mean().maxCoeff()) < 1e-8);
}

TEST_CASE("wav round trip within 16-bit quantisation") {
  auto a = sine(300.0, 0.25, 0.7);
  const auto path = (std::filesystem::temp_directory_path() / "s2i_test_roundtrip.wav").string();
  write_wav(path, a);
  auto b = read_wav(path);
  REQUIRE(b.samples.size() == a.samples.size());
  CHECK(b.sample_rate_hz == 16000);
  for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(std::abs(a.samples[i] - b.samples[i]) < 1e-4);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_wav(path), FormatError);
}

TEST_CASE("decimation halves the rate") {
  auto a = sine(300.0, 0.5, 0.5, 32000);
  auto d = decimate(a, 2);
  CHECK(d.sample_rate_hz == 16000);
  CHECK(d.samples.size() == a.samples.size() / 2);
}
