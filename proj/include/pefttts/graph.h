// Copyright (c) 2026 The pefttts Authors
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

#ifndef PEFTTTS_GRAPH_H_
#define PEFTTTS_GRAPH_H_

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pefttts/autograd.h"
#include "pefttts/registry.h"
#include "pefttts/tensor.h"

namespace pefttts {

// A registry together with concrete values for its tensors: a base model, or
// a base model with a delta applied on top.
template <typename Real>
struct Model {
  Registry registry;
  ParamStore<Real> params;
};

struct ForwardOptions {
  bool train = false;  // enables adapter dropout
  uint64_t dropout_seed = 0;
};

// One forward pass worth of tape plus the parameter bindings it uses.
// Parameters named in `trainable` become gradient-requiring leaves; all others
// are constants, so gradients never flow into frozen tensors.
template <typename Real>
class ModelGraph {
 public:
  using Mat = Matrix<Real>;

  ModelGraph(const Model<Real>& model,
             const std::set<std::string>* trainable = nullptr,
             ForwardOptions options = {});

  Tape<Real>& tape() { return tape_; }
  const ModelConfig& config() const { return model_.registry.model(); }
  const PeftConfig& peft() const { return model_.registry.peft(); }
  const ForwardOptions& options() const { return options_; }
  const Model<Real>& model() const { return model_; }

  bool Has(const std::string& name) const {
    return model_.params.Contains(name);
  }
  // Leaf for a stored tensor, created once per graph.
  Var P(const std::string& name);
  Var Constant(Mat value) { return tape_.Constant(std::move(value)); }
  const Mat& value(Var v) const { return tape_.value(v); }

  // x * W + b for prefix.weight / prefix.bias.
  Var Linear(const std::string& prefix, Var x);
  // Same-padded 1-D convolution over rows; weight is (kernel * in) x out.
  Var Conv(const std::string& prefix, Var x, int stride = 1);
  // Inverted-dropout mask multiply; identity outside training.
  Var Dropout(Var x, double p);

  // Gradients of every trainable leaf that was touched by this graph.
  std::map<std::string, Mat> Gradients() const;

 private:
  const Model<Real>& model_;
  const std::set<std::string>* trainable_;
  ForwardOptions options_;
  Tape<Real> tape_;
  std::map<std::string, Var> leaves_;
  std::mt19937_64 dropout_rng_;
};

// Fixed sinusoidal position encodings, rows x width.
template <typename Real>
Matrix<Real> PositionalEncoding(int rows, int width);

extern template class ModelGraph<float>;
extern template class ModelGraph<double>;

}  // namespace pefttts

#endif  // PEFTTTS_GRAPH_H_
