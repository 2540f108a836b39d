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

#include "../support/gradcheck.hpp"
#include "../support/oracles.hpp"
#include "s2i/core/error.hpp"
#include "s2i/nn/adam.hpp"
#include "s2i/nn/block.hpp"
#include "s2i/nn/layers.hpp"

using namespace s2i;
using namespace s2i::nn;

namespace {

Matrix random_matrix(int r, int c, Rng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, -scale, scale);
  return m;
}

double weighted_sum(const Matrix& y, const Matrix& w) { return (y.array() * w.array()).sum(); }

constexpr double kGradTol = 1e-4;

}  // namespace

TEST_CASE("softmax, cross entropy and linear identities") {
  Matrix z = Matrix::Constant(2, 28, 3.7);
  Matrix p = softmax_rows(z);
  for (int k = 0; k < 28; ++k) CHECK(p(0, k) == doctest::Approx(1.0 / 28));
  RowVector dist = p.row(0);
  CHECK(cross_entropy(dist, 5) == doctest::Approx(std::log(28.0)).epsilon(1e-12));
  CHECK(std::abs(std::log(28.0) - 3.3322) < 1e-4);
  CHECK_THROWS_AS(cross_entropy(dist, 28), InputError);
  CHECK_THROWS_AS(cross_entropy(dist, -1), InputError);

  ParamStore ps;
  Rng rng(1);
  auto lin = Linear::create(ps, "lin", 4, 4, rng);
  ps.mut(lin.w).setIdentity();
  ps.fill(lin.b, 0.0);
  Matrix x = random_matrix(3, 4, rng);
  CHECK(lin.forward(ps, x) == x);
}

TEST_CASE("softmax is stable for extreme logits") {
  Rng rng(2);
  Matrix z = random_matrix(20, 30, rng, 1e4);
  z(0, 0) = 1e4;
  z(0, 1) = -1e4;
  Matrix p = softmax_rows(z);
  Matrix lp = log_softmax_rows(z);
  CHECK(p.allFinite());
  CHECK(lp.allFinite());
  for (int r = 0; r < 20; ++r) CHECK(p.row(r).sum() == doctest::Approx(1.0));
}

TEST_CASE("cross entropy gradient through softmax is p minus onehot") {
  Rng rng(3);
  Matrix z = random_matrix(1, 7, rng, 2.0);
  const int label = 4;
  Matrix lp = log_softmax_rows(z);
  Matrix d_lp = Matrix::Zero(1, 7);
  d_lp(0, label) = -1.0;
  Matrix analytic = log_softmax_backward(lp, d_lp);
  Matrix expected = softmax_rows(z);
  expected(0, label) -= 1.0;
  CHECK((analytic - expected).cwiseAbs().maxCoeff() < 1e-12);

  // and numerically
  for (int k = 0; k < 7; ++k) {
    Matrix up = z, down = z;
    up(0, k) += 1e-6;
    down(0, k) -= 1e-6;
    const double num = (-log_softmax_rows(up)(0, label) + log_softmax_rows(down)(0, label)) / 2e-6;
    CHECK(num == doctest::Approx(expected(0, k)).epsilon(1e-6));
  }

  // softmax_backward agrees with the log-space version
  Matrix p = softmax_rows(z);
  Matrix d_p = random_matrix(1, 7, rng);
  Matrix via_log = log_softmax_backward(lp, d_p.cwiseProduct(p));
  CHECK((softmax_backward(p, d_p) - via_log).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("BiLSTM with zero parameters and input is zero") {
  ParamStore ps;
  Rng rng(4);
  auto layer = BiLstm::create(ps, "l", 3, 5, rng);
  std::fill(ps.values().begin(), ps.values().end(), 0.0);
  BiLstm::Cache cache;
  auto out = layer.forward(ps, Matrix::Zero(6, 3), cache);
  CHECK(out.y.rows() == 6);
  CHECK(out.y.cols() == 10);
  CHECK(out.y.isZero(0.0));
  CHECK(out.final_cell.isZero(0.0));
}

TEST_CASE("BiLSTM with one frame is direction-symmetric") {
  ParamStore ps;
  Rng rng(5);
  auto layer = BiLstm::create(ps, "l", 3, 4, rng);
  // Give both directions the same weights.
  ps.mut(layer.bwd.wx) = ps(layer.fwd.wx);
  ps.mut(layer.bwd.wh) = ps(layer.fwd.wh);
  ps.mut(layer.bwd.b) = ps(layer.fwd.b);
  BiLstm::Cache cache;
  auto out = layer.forward(ps, random_matrix(1, 3, rng), cache);
  CHECK(out.y.leftCols(4) == out.y.rightCols(4));
  CHECK(out.final_cell.head(4) == out.final_cell.tail(4));
}

TEST_CASE("BiLSTM matches a scalar-loop recurrence") {
  const int T = 3, d = 2, h = 2;
  ParamStore ps;
  Rng rng(6);
  auto layer = BiLstm::create(ps, "l", d, h, rng);
  for (auto& v : ps.values()) v = uniform(rng, -0.8, 0.8);
  Matrix x = random_matrix(T, d, rng);
  BiLstm::Cache cache;
  auto out = layer.forward(ps, x, cache);

  std::vector<std::vector<double>> xs(T, std::vector<double>(d));
  for (int t = 0; t < T; ++t)
    for (int k = 0; k < d; ++k) xs[t][k] = x(t, k);
  auto to_oracle = [&](const LstmDirection& dir) {
    oracle::ScalarLstm o{d, h, {}, {}, {}};
    o.wx.assign(d, std::vector<double>(4 * h));
    o.wh.assign(h, std::vector<double>(4 * h));
    o.b.assign(4 * h, 0.0);
    for (int j = 0; j < 4 * h; ++j) {
      for (int k = 0; k < d; ++k) o.wx[k][j] = ps.values()[dir.wx.offset + k * 4 * h + j];
      for (int k = 0; k < h; ++k) o.wh[k][j] = ps.values()[dir.wh.offset + k * 4 * h + j];
      o.b[j] = ps.values()[dir.b.offset + j];
    }
    return o;
  };
  std::vector<std::vector<double>> hf, hb;
  std::vector<double> cf, cb;
  to_oracle(layer.fwd).run(xs, false, hf, cf);
  to_oracle(layer.bwd).run(xs, true, hb, cb);
  for (int t = 0; t < T; ++t)
    for (int k = 0; k < h; ++k) {
      CHECK(std::abs(out.y(t, k) - hf[t][k]) < 1e-10);
      CHECK(std::abs(out.y(t, h + k) - hb[t][k]) < 1e-10);
    }
  for (int k = 0; k < h; ++k) {
    CHECK(std::abs(out.final_cell[k] - cf[k]) < 1e-10);
    CHECK(std::abs(out.final_cell[h + k] - cb[k]) < 1e-10);
  }
}

TEST_CASE("attention special cases") {
  Rng rng(7);
  ParamStore ps;
  auto mha = MultiHeadAttention::create(ps, "a", 8, 2, rng);
  MultiHeadAttention::Cache cache;

  SUBCASE("identical keys give uniform weights") {
    Matrix q = random_matrix(1, 8, rng);
    Matrix kv = random_matrix(1, 8, rng).replicate(5, 1);
    Matrix out = mha.forward(ps, q, kv, false, cache);
    for (const auto& w : cache.weights)
      for (int t = 0; t < 5; ++t) CHECK(w(0, t) == doctest::Approx(0.2).epsilon(1e-12));
    // context = mean of projected values (which are all equal)
    CHECK((cache.context.row(0) - cache.v.colwise().mean()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(out.allFinite());
  }
  SUBCASE("single key gets weight one") {
    Matrix q = random_matrix(1, 8, rng);
    Matrix kv = random_matrix(1, 8, rng);
    Matrix out = mha.forward(ps, q, kv, false, cache);
    for (const auto& w : cache.weights) CHECK(w(0, 0) == 1.0);
    Matrix expected = cache.v * ps(mha.wo);
    expected.row(0) += ps(mha.bo).row(0);
    CHECK((out - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("rejects indivisible heads") {
    ParamStore other;
    CHECK_THROWS_AS(MultiHeadAttention::create(other, "b", 6, 4, rng), ConfigError);
  }
}

TEST_CASE("attention weights match a hand-computed 3x3 case") {
  Rng rng(8);
  ParamStore ps;
  auto mha = MultiHeadAttention::create(ps, "a", 3, 1, rng);
  for (auto w : {mha.wq, mha.wk, mha.wv, mha.wo}) ps.mut(w).setIdentity();
  for (auto b : {mha.bq, mha.bk, mha.bv, mha.bo}) ps.fill(b, 0.0);
  Matrix q(1, 3);
  q << 2, 0, 0;
  Matrix keys = Matrix::Identity(3, 3);
  MultiHeadAttention::Cache cache;
  Matrix out = mha.forward(ps, q, keys, false, cache);
  // scores: 2/√3, 0, 0
  const double e = std::exp(2.0 / std::sqrt(3.0));
  const double w0 = e / (e + 2.0), w1 = 1.0 / (e + 2.0);
  CHECK(cache.weights[0](0, 0) == doctest::Approx(w0).epsilon(1e-12));
  CHECK(cache.weights[0](0, 1) == doctest::Approx(w1).epsilon(1e-12));
  CHECK(cache.weights[0](0, 2) == doctest::Approx(w1).epsilon(1e-12));
  CHECK(out(0, 0) == doctest::Approx(w0).epsilon(1e-12));
  CHECK(out(0, 1) == doctest::Approx(w1).epsilon(1e-12));
}

TEST_CASE("gradients agree with central finite differences") {
  Rng rng(9);

  SUBCASE("two-layer toy net") {
    ParamStore ps;
    auto l1 = Linear::create(ps, "l1", 4, 6, rng);
    auto l2 = Linear::create(ps, "l2", 6, 5, rng);
    Matrix x = random_matrix(3, 4, rng);
    std::vector<int> labels{1, 4, 0};
    auto loss = [&](Grads* g) {
      Matrix h1 = l1.forward(ps, x);
      Matrix a = h1.array().tanh().matrix();
      Matrix lp = log_softmax_rows(l2.forward(ps, a));
      double total = 0.0;
      Matrix d_lp = Matrix::Zero(lp.rows(), lp.cols());
      for (int r = 0; r < 3; ++r) {
        total -= lp(r, labels[r]);
        d_lp(r, labels[r]) = -1.0;
      }
      if (g) {
        Matrix d_logits = log_softmax_backward(lp, d_lp);
        Matrix da = l2.backward(ps, a, d_logits, *g);
        Matrix dh1 = da.array() * (1.0 - a.array().square());
        l1.backward(ps, x, dh1, *g);
      }
      return total;
    };
    Grads g = ps.zeros_like();
    loss(&g);
    auto r = s2i::testing::grad_check(ps.values(), g, [&] { return loss(nullptr); });
    CHECK(r.max_rel_error < kGradTol);
  }

  SUBCASE("bilstm") {
    ParamStore ps;
    auto layer = BiLstm::create(ps, "l", 3, 4, rng);
    Matrix x = random_matrix(5, 3, rng);
    Matrix wy = random_matrix(5, 8, rng);
    RowVector wc = random_matrix(1, 8, rng).row(0);
    auto loss = [&](Grads* g, Matrix* dx) {
      BiLstm::Cache cache;
      auto out = layer.forward(ps, x, cache);
      if (g) *dx = layer.backward(ps, x, cache, wy, wc, *g);
      return weighted_sum(out.y, wy) + out.final_cell.dot(wc);
    };
    Grads g = ps.zeros_like();
    Matrix dx;
    loss(&g, &dx);
    auto r = s2i::testing::grad_check(ps.values(), g, [&] { return loss(nullptr, nullptr); });
    CHECK(r.max_rel_error < kGradTol);
    // input gradient
    std::vector<double> xv(x.data(), x.data() + x.size());
    std::vector<double> dxv(x.size());
    Eigen::Map<Matrix>(dxv.data(), x.rows(), x.cols()) = dx;
    auto rx = s2i::testing::grad_check(xv, dxv, [&] {
      x = Eigen::Map<Matrix>(xv.data(), x.rows(), x.cols());
      return loss(nullptr, nullptr);
    });
    CHECK(rx.max_rel_error < kGradTol);
  }

  SUBCASE("attention, including the causal mask") {
    for (bool causal : {false, true}) {
      ParamStore ps;
      auto mha = MultiHeadAttention::create(ps, "a", 6, 2, rng);
      Matrix q = random_matrix(4, 6, rng), kv = random_matrix(4, 6, rng);
      Matrix w = random_matrix(4, 6, rng);
      auto loss = [&](Grads* g, Matrix* dq, Matrix* dkv) {
        MultiHeadAttention::Cache cache;
        Matrix out = mha.forward(ps, q, kv, causal, cache);
        if (g) mha.backward(ps, q, kv, cache, w, *dq, *dkv, *g);
        return weighted_sum(out, w);
      };
      Grads g = ps.zeros_like();
      Matrix dq, dkv;
      loss(&g, &dq, &dkv);
      auto r = s2i::testing::grad_check(ps.values(), g, [&] { return loss(nullptr, nullptr, nullptr); });
      CHECK(r.max_rel_error < kGradTol);
      for (auto [mat, grad] : {std::pair{&q, &dq}, std::pair{&kv, &dkv}}) {
        std::vector<double> v(mat->data(), mat->data() + mat->size());
        std::vector<double> dv(grad->data(), grad->data() + grad->size());
        auto rin = s2i::testing::grad_check(v, dv, [&] {
          *mat = Eigen::Map<Matrix>(v.data(), mat->rows(), mat->cols());
          return loss(nullptr, nullptr, nullptr);
        });
        CHECK(rin.max_rel_error < kGradTol);
      }
    }
  }

  SUBCASE("layer norm, feed-forward, embedding") {
    ParamStore ps;
    auto ln = LayerNorm::create(ps, "ln", 5);
    auto ff = FeedForward::create(ps, "ff", 5, 7, rng);
    auto emb = Embedding::create(ps, "emb", 6, 5, rng);
    for (auto& v : ps.values()) v += uniform(rng, -0.3, 0.3);
    std::vector<int> ids{2, 0, 5, 2};
    Matrix w = random_matrix(4, 5, rng);
    auto loss = [&](Grads* g) {
      Matrix e = emb.forward(ps, ids);
      LayerNorm::Cache lc;
      Matrix n = ln.forward(ps, e, &lc);
      FeedForward::Cache fc;
      Matrix y = ff.forward(ps, n, &fc);
      if (g) {
        Matrix dn = ff.backward(ps, n, fc, w, *g);
        Matrix de = ln.backward(ps, lc, dn, *g);
        emb.backward(ids, de, *g);
      }
      return weighted_sum(y, w);
    };
    Grads g = ps.zeros_like();
    loss(&g);
    auto r = s2i::testing::grad_check(ps.values(), g, [&] { return loss(nullptr); });
    CHECK(r.max_rel_error < kGradTol);
  }

  SUBCASE("bilstm-attention block") {
    ParamStore ps;
    auto block = BiLstmAttentionBlock::create(ps, "blk", 3, 4, 2, 2, true, rng);
    Matrix x = random_matrix(4, 3, rng);
    Matrix wy = random_matrix(4, 8, rng);
    RowVector wc = random_matrix(1, 8, rng).row(0);
    auto loss = [&](Grads* g) {
      BiLstmAttentionBlock::Cache cache;
      auto out = block.forward(ps, x, cache);
      if (g) block.backward(ps, cache, wy, wc, *g);
      return weighted_sum(out.y, wy) + out.final_cell.dot(wc);
    };
    Grads g = ps.zeros_like();
    loss(&g);
    auto r = s2i::testing::grad_check(ps.values(), g, [&] { return loss(nullptr); });
    CHECK(r.max_rel_error < kGradTol);
  }
}

TEST_CASE("constant loss gives zero gradients") {
  Rng rng(10);
  ParamStore ps;
  auto block = BiLstmAttentionBlock::create(ps, "blk", 3, 4, 1, 2, true, rng);
  BiLstmAttentionBlock::Cache cache;
  auto out = block.forward(ps, random_matrix(4, 3, rng), cache);
  Grads g = ps.zeros_like();
  block.backward(ps, cache, Matrix::Zero(out.y.rows(), out.y.cols()), RowVector::Zero(8), g);
  for (double v : g) CHECK(v == 0.0);
}

TEST_CASE("initialisation is deterministic per seed") {
  auto build = [](std::uint64_t seed) {
    ParamStore ps;
    Rng rng(seed);
    BiLstmAttentionBlock::create(ps, "blk", 5, 4, 2, 2, true, rng);
    return ps.values();
  };
  CHECK(build(42) == build(42));
  CHECK(build(42) != build(43));

  ParamStore ps;
  Rng rng(1);
  auto lstm = LstmDirection::create(ps, "d", 10, 6, false, rng);
  auto b = ps(lstm.b);
  for (int k = 0; k < 6; ++k) CHECK(b(0, 6 + k) == 1.0);
  const double bound = 1.0 / std::sqrt(16.0);
  CHECK(ps(lstm.wx).cwiseAbs().maxCoeff() <= bound);
}

TEST_CASE("adam minimises a quadratic and clips the gradient norm") {
  Buffer p{3.0, -2.0};
  Adam opt(2);
  for (int i = 0; i < 2000; ++i) {
    Buffer g{2.0 * p[0], 8.0 * p[1]};
    opt.step(p, g, 0.05);
  }
  CHECK(std::abs(p[0]) < 1e-3);
  CHECK(std::abs(p[1]) < 1e-3);

  Buffer q{0.0}, big{100.0};
  Adam clipped(1);
  CHECK(clipped.step(q, big, 0.1) == 100.0);
  // First Adam step moves by lr regardless of scale.
  CHECK(q[0] == doctest::Approx(-0.1));
}
