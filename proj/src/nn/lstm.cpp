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

#include "s2i/nn/lstm.hpp"

#include <cmath>

#include "s2i/core/error.hpp"

namespace s2i::nn {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

LstmDirection LstmDirection::create(ParamStore& ps, const std::string& name, int in, int hidden,
                                    bool reverse, Rng& rng) {
  LstmDirection d;
  d.in = in;
  d.hidden = hidden;
  d.reverse = reverse;
  d.wx = ps.add(name + ".wx", in, 4 * hidden);
  d.wh = ps.add(name + ".wh", hidden, 4 * hidden);
  d.b = ps.add(name + ".b", 1, 4 * hidden);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in + hidden));
  ps.init_uniform(d.wx, bound, rng);
  ps.init_uniform(d.wh, bound, rng);
  ps.init_uniform(d.b, bound, rng);
  ps.mut(d.b).middleCols(hidden, hidden).setConstant(1.0);
  return d;
}

Matrix LstmDirection::forward(const ParamStore& ps, const Matrix& x, Cache& cache) const {
  if (x.cols() != in) throw InputError("lstm input width mismatch");
  const int steps = static_cast<int>(x.rows());
  const int h = hidden;
  Matrix pre = x * ps(wx);
  pre.rowwise() += ps(b).row(0);
  const auto w_h = ps(wh);

  cache.gates.resize(steps, 4 * h);
  cache.cell.resize(steps, h);
  cache.tanh_cell.resize(steps, h);
  cache.hidden.resize(steps, h);
  Matrix out(steps, h);
  RowVector h_prev = RowVector::Zero(h), c_prev = RowVector::Zero(h);
  RowVector z(4 * h);
  for (int s = 0; s < steps; ++s) {
    const int t = reverse ? steps - 1 - s : s;
    z.noalias() = pre.row(t) + h_prev * w_h;
    auto gates = cache.gates.row(s);
    for (int k = 0; k < h; ++k) {
      gates[k] = sigmoid(z[k]);
      gates[h + k] = sigmoid(z[h + k]);
      gates[2 * h + k] = std::tanh(z[2 * h + k]);
      gates[3 * h + k] = sigmoid(z[3 * h + k]);
    }
    for (int k = 0; k < h; ++k) {
      const double c = gates[h + k] * c_prev[k] + gates[k] * gates[2 * h + k];
      const double tc = std::tanh(c);
      cache.cell(s, k) = c;
      cache.tanh_cell(s, k) = tc;
      cache.hidden(s, k) = gates[3 * h + k] * tc;
    }
    h_prev = cache.hidden.row(s);
    c_prev = cache.cell.row(s);
    out.row(t) = h_prev;
  }
  return out;
}

Matrix LstmDirection::backward(const ParamStore& ps, const Matrix& x, const Cache& cache,
                               const Matrix& dy, const RowVector& d_final_cell, Grads& g) const {
  const int steps = static_cast<int>(x.rows());
  const int h = hidden;
  const auto w_h = ps(wh);
  Matrix dz_all(steps, 4 * h);
  RowVector dh_next = RowVector::Zero(h);
  RowVector dc_next = d_final_cell.size() ? d_final_cell : RowVector::Zero(h);
  RowVector dz(4 * h);
  auto g_wh = grad_view(g, wh);

  for (int s = steps - 1; s >= 0; --s) {
    const int t = reverse ? steps - 1 - s : s;
    const auto gates = cache.gates.row(s);
    RowVector dc_prev(h);
    for (int k = 0; k < h; ++k) {
      const double i = gates[k], f = gates[h + k], gg = gates[2 * h + k], o = gates[3 * h + k];
      const double tc = cache.tanh_cell(s, k);
      const double c_prev = s > 0 ? cache.cell(s - 1, k) : 0.0;
      const double dh = dy(t, k) + dh_next[k];
      const double dc = dc_next[k] + dh * o * (1.0 - tc * tc);
      dz[k] = dc * gg * i * (1.0 - i);
      dz[h + k] = dc * c_prev * f * (1.0 - f);
      dz[2 * h + k] = dc * i * (1.0 - gg * gg);
      dz[3 * h + k] = dh * tc * o * (1.0 - o);
      dc_prev[k] = dc * f;
    }
    if (s > 0) g_wh.noalias() += cache.hidden.row(s - 1).transpose() * dz;
    dh_next.noalias() = dz * w_h.transpose();
    dc_next = dc_prev;
    dz_all.row(t) = dz;
  }
  grad_view(g, wx).noalias() += x.transpose() * dz_all;
  grad_view(g, b).row(0) += dz_all.colwise().sum();
  return dz_all * ps(wx).transpose();
}

BiLstm BiLstm::create(ParamStore& ps, const std::string& name, int in, int hidden, Rng& rng) {
  BiLstm l;
  l.in = in;
  l.hidden = hidden;
  l.fwd = LstmDirection::create(ps, name + ".fwd", in, hidden, false, rng);
  l.bwd = LstmDirection::create(ps, name + ".bwd", in, hidden, true, rng);
  return l;
}

BiLstm::Output BiLstm::forward(const ParamStore& ps, const Matrix& x, Cache& cache) const {
  if (x.rows() < 1) throw InputError("bilstm needs at least one frame");
  Output out;
  out.y.resize(x.rows(), 2 * hidden);
  out.y.leftCols(hidden) = fwd.forward(ps, x, cache.f);
  out.y.rightCols(hidden) = bwd.forward(ps, x, cache.b);
  out.final_cell.resize(2 * hidden);
  out.final_cell.head(hidden) = cache.f.cell.row(x.rows() - 1);
  out.final_cell.tail(hidden) = cache.b.cell.row(x.rows() - 1);
  return out;
}

Matrix BiLstm::backward(const ParamStore& ps, const Matrix& x, const Cache& cache,
                        const Matrix& dy, const RowVector& d_final_cell, Grads& g) const {
  RowVector df, db;
  if (d_final_cell.size()) {
    df = d_final_cell.head(hidden);
    db = d_final_cell.tail(hidden);
  }
  Matrix dx = fwd.backward(ps, x, cache.f, dy.leftCols(hidden), df, g);
  dx += bwd.backward(ps, x, cache.b, dy.rightCols(hidden), db, g);
  return dx;
}

}  // namespace s2i::nn
