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

#include "s2i/nn/attention.hpp"

#include <cmath>
#include <limits>

#include "s2i/core/error.hpp"
#include "s2i/nn/layers.hpp"

namespace s2i::nn {

MultiHeadAttention MultiHeadAttention::create(ParamStore& ps, const std::string& name, int dim,
                                              int heads, Rng& rng) {
  if (heads < 1 || dim % heads != 0)
    throw ConfigError("attention dim must be divisible by the head count");
  MultiHeadAttention a;
  a.dim = dim;
  a.heads = heads;
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  auto proj = [&](const char* tag, ParamSlot& w, ParamSlot& b) {
    w = ps.add(name + "." + tag + ".w", dim, dim);
    b = ps.add(name + "." + tag + ".b", 1, dim);
    ps.init_uniform(w, bound, rng);
    ps.init_uniform(b, bound, rng);
  };
  proj("q", a.wq, a.bq);
  proj("k", a.wk, a.bk);
  proj("v", a.wv, a.bv);
  proj("o", a.wo, a.bo);
  return a;
}

namespace {

Matrix affine(const ParamStore& ps, const Matrix& x, ParamSlot w, ParamSlot b) {
  Matrix y = x * ps(w);
  y.rowwise() += ps(b).row(0);
  return y;
}

}  // namespace

Matrix MultiHeadAttention::forward(const ParamStore& ps, const Matrix& query_in,
                                   const Matrix& kv_in, bool causal, Cache& cache) const {
  if (query_in.cols() != dim || kv_in.cols() != dim)
    throw InputError("attention input width mismatch");
  if (kv_in.rows() < 1) throw InputError("attention needs at least one key");
  const int dh = head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  cache.q = affine(ps, query_in, wq, bq);
  cache.k = affine(ps, kv_in, wk, bk);
  cache.v = affine(ps, kv_in, wv, bv);
  cache.weights.resize(heads);
  cache.context.resize(query_in.rows(), dim);
  for (int h = 0; h < heads; ++h) {
    Matrix scores = cache.q.middleCols(h * dh, dh) * cache.k.middleCols(h * dh, dh).transpose();
    scores *= scale;
    if (causal)
      for (Eigen::Index i = 0; i < scores.rows(); ++i)
        for (Eigen::Index j = i + 1; j < scores.cols(); ++j)
          scores(i, j) = -std::numeric_limits<double>::infinity();
    cache.weights[h] = softmax_rows(scores);
    cache.context.middleCols(h * dh, dh) = cache.weights[h] * cache.v.middleCols(h * dh, dh);
  }
  return affine(ps, cache.context, wo, bo);
}

void MultiHeadAttention::backward(const ParamStore& ps, const Matrix& query_in,
                                  const Matrix& kv_in, const Cache& cache, const Matrix& dout,
                                  Matrix& d_query_in, Matrix& d_kv_in, Grads& g) const {
  const int dh = head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  grad_view(g, wo).noalias() += cache.context.transpose() * dout;
  grad_view(g, bo).row(0) += dout.colwise().sum();
  const Matrix d_context = dout * ps(wo).transpose();

  Matrix dq(cache.q.rows(), dim), dk(cache.k.rows(), dim), dv(cache.v.rows(), dim);
  for (int h = 0; h < heads; ++h) {
    const Matrix& a = cache.weights[h];
    const auto dc = d_context.middleCols(h * dh, dh);
    dv.middleCols(h * dh, dh) = a.transpose() * dc;
    const Matrix da = dc * cache.v.middleCols(h * dh, dh).transpose();
    const Matrix ds = softmax_backward(a, da) * scale;
    dq.middleCols(h * dh, dh) = ds * cache.k.middleCols(h * dh, dh);
    dk.middleCols(h * dh, dh) = ds.transpose() * cache.q.middleCols(h * dh, dh);
  }
  auto project_back = [&](const Matrix& x, const Matrix& d, ParamSlot w, ParamSlot b) {
    grad_view(g, w).noalias() += x.transpose() * d;
    grad_view(g, b).row(0) += d.colwise().sum();
    return Matrix(d * ps(w).transpose());
  };
  d_query_in = project_back(query_in, dq, wq, bq);
  d_kv_in = project_back(kv_in, dk, wk, bk);
  d_kv_in += project_back(kv_in, dv, wv, bv);
}

}  // namespace s2i::nn
