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

#include "s2i/nn/layers.hpp"

#include <cmath>

#include "s2i/core/error.hpp"

namespace s2i::nn {

Linear Linear::create(ParamStore& ps, const std::string& name, int in, int out, Rng& rng) {
  Linear l;
  l.in = in;
  l.out = out;
  l.w = ps.add(name + ".w", in, out);
  l.b = ps.add(name + ".b", 1, out);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  ps.init_uniform(l.w, bound, rng);
  ps.init_uniform(l.b, bound, rng);
  return l;
}

Matrix Linear::forward(const ParamStore& ps, const Matrix& x) const {
  if (x.cols() != in) throw InputError("linear input width mismatch");
  Matrix y = x * ps(w);
  y.rowwise() += ps(b).row(0);
  return y;
}

Matrix Linear::backward(const ParamStore& ps, const Matrix& x, const Matrix& dy, Grads& g) const {
  grad_view(g, w).noalias() += x.transpose() * dy;
  grad_view(g, b).row(0) += dy.colwise().sum();
  return dy * ps(w).transpose();
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - m).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

Matrix log_softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    const double lse = m + std::log((logits.row(r).array() - m).exp().sum());
    out.row(r) = logits.row(r).array() - lse;
  }
  return out;
}

Matrix log_softmax_backward(const Matrix& log_probs, const Matrix& d_log_probs) {
  Matrix probs = log_probs.array().exp();
  Matrix d = d_log_probs;
  const Vector row_sums = d_log_probs.rowwise().sum();
  for (Eigen::Index r = 0; r < d.rows(); ++r) d.row(r) -= probs.row(r) * row_sums[r];
  return d;
}

Matrix softmax_backward(const Matrix& probs, const Matrix& d_probs) {
  Matrix d(probs.rows(), probs.cols());
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    const double dot = probs.row(r).dot(d_probs.row(r));
    d.row(r) = probs.row(r).array() * (d_probs.row(r).array() - dot);
  }
  return d;
}

double cross_entropy(const RowVector& dist, int label) {
  if (label < 0 || label >= dist.size())
    throw InputError("label " + std::to_string(label) + " out of range");
  return -std::log(std::max(dist[label], 1e-300));
}

LayerNorm LayerNorm::create(ParamStore& ps, const std::string& name, int dim) {
  LayerNorm ln;
  ln.dim = dim;
  ln.gamma = ps.add(name + ".gamma", 1, dim);
  ln.beta = ps.add(name + ".beta", 1, dim);
  ps.fill(ln.gamma, 1.0);
  return ln;
}

Matrix LayerNorm::forward(const ParamStore& ps, const Matrix& x, Cache* cache) const {
  Matrix normalized(x.rows(), x.cols());
  Vector inv_std(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().mean();
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    normalized.row(r) = (x.row(r).array() - mean) * inv_std[r];
  }
  Matrix y = normalized.array().rowwise() * ps(gamma).row(0).array();
  y.rowwise() += ps(beta).row(0);
  if (cache) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

Matrix LayerNorm::backward(const ParamStore& ps, const Cache& cache, const Matrix& dy,
                           Grads& g) const {
  grad_view(g, gamma).row(0) += (dy.array() * cache.normalized.array()).matrix().colwise().sum();
  grad_view(g, beta).row(0) += dy.colwise().sum();
  const Matrix dn = dy.array().rowwise() * ps(gamma).row(0).array();
  Matrix dx(dy.rows(), dy.cols());
  const double n = static_cast<double>(dim);
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double mean_dn = dn.row(r).mean();
    const double mean_dn_n = dn.row(r).dot(cache.normalized.row(r)) / n;
    dx.row(r) = cache.inv_std[r] *
                (dn.row(r).array() - mean_dn - cache.normalized.row(r).array() * mean_dn_n);
  }
  return dx;
}

Embedding Embedding::create(ParamStore& ps, const std::string& name, int count, int dim, Rng& rng) {
  Embedding e;
  e.count = count;
  e.dim = dim;
  e.table = ps.add(name + ".table", count, dim);
  ps.init_uniform(e.table, 1.0 / std::sqrt(static_cast<double>(dim)), rng);
  return e;
}

Matrix Embedding::forward(const ParamStore& ps, const std::vector<int>& ids) const {
  Matrix out(static_cast<Eigen::Index>(ids.size()), dim);
  const auto t = ps(table);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= count) throw InputError("embedding id out of range");
    out.row(static_cast<Eigen::Index>(i)) = t.row(ids[i]);
  }
  return out;
}

void Embedding::backward(const std::vector<int>& ids, const Matrix& dy, Grads& g) const {
  auto gt = grad_view(g, table);
  for (std::size_t i = 0; i < ids.size(); ++i) gt.row(ids[i]) += dy.row(static_cast<Eigen::Index>(i));
}

FeedForward FeedForward::create(ParamStore& ps, const std::string& name, int dim, int hidden,
                                Rng& rng) {
  FeedForward f;
  f.up = Linear::create(ps, name + ".up", dim, hidden, rng);
  f.down = Linear::create(ps, name + ".down", hidden, dim, rng);
  return f;
}

Matrix FeedForward::forward(const ParamStore& ps, const Matrix& x, Cache* cache) const {
  Matrix h = up.forward(ps, x).cwiseMax(0.0);
  Matrix y = down.forward(ps, h);
  if (cache) cache->hidden = std::move(h);
  return y;
}

Matrix FeedForward::backward(const ParamStore& ps, const Matrix& x, const Cache& cache,
                             const Matrix& dy, Grads& g) const {
  Matrix dh = down.backward(ps, cache.hidden, dy, g);
  dh = (cache.hidden.array() > 0.0).select(dh, 0.0);
  return up.backward(ps, x, dh, g);
}

}  // namespace s2i::nn
