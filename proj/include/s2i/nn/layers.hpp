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

#include <string>
#include <vector>

#include "s2i/nn/params.hpp"

namespace s2i::nn {

/// y = x W + b, one row per time step. W is in × out.
struct Linear {
  int in = 0;
  int out = 0;
  ParamSlot w, b;

  static Linear create(ParamStore& ps, const std::string& name, int in, int out, Rng& rng);

  Matrix forward(const ParamStore& ps, const Matrix& x) const;
  /// Accumulates dW, db; returns dx.
  Matrix backward(const ParamStore& ps, const Matrix& x, const Matrix& dy, Grads& g) const;
};

Matrix softmax_rows(const Matrix& logits);
Matrix log_softmax_rows(const Matrix& logits);
/// Gradient wrt logits given the gradient wrt log_softmax outputs.
Matrix log_softmax_backward(const Matrix& log_probs, const Matrix& d_log_probs);
/// Gradient wrt logits given the gradient wrt softmax outputs.
Matrix softmax_backward(const Matrix& probs, const Matrix& d_probs);

/// −log dist[label]. Throws InputError for an out-of-range label.
double cross_entropy(const RowVector& dist, int label);

struct LayerNorm {
  int dim = 0;
  ParamSlot gamma, beta;
  double eps = 1e-5;

  struct Cache {
    Matrix normalized;
    Vector inv_std;
  };

  static LayerNorm create(ParamStore& ps, const std::string& name, int dim);
  Matrix forward(const ParamStore& ps, const Matrix& x, Cache* cache) const;
  Matrix backward(const ParamStore& ps, const Cache& cache, const Matrix& dy, Grads& g) const;
};

struct Embedding {
  int count = 0;
  int dim = 0;
  ParamSlot table;

  static Embedding create(ParamStore& ps, const std::string& name, int count, int dim, Rng& rng);
  Matrix forward(const ParamStore& ps, const std::vector<int>& ids) const;
  void backward(const std::vector<int>& ids, const Matrix& dy, Grads& g) const;
};

/// Linear → ReLU → Linear.
struct FeedForward {
  Linear up, down;

  struct Cache {
    Matrix hidden;
  };

  static FeedForward create(ParamStore& ps, const std::string& name, int dim, int hidden, Rng& rng);
  Matrix forward(const ParamStore& ps, const Matrix& x, Cache* cache) const;
  Matrix backward(const ParamStore& ps, const Matrix& x, const Cache& cache, const Matrix& dy,
                  Grads& g) const;
};

}  // namespace s2i::nn
