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

#include "pefttts/graph.h"

#include <cmath>

namespace pefttts {

template <typename Real>
ModelGraph<Real>::ModelGraph(const Model<Real>& model,
                             const std::set<std::string>* trainable,
                             ForwardOptions options)
    : model_(model),
      trainable_(trainable),
      options_(options),
      dropout_rng_(options.dropout_seed) {}

template <typename Real>
Var ModelGraph<Real>::P(const std::string& name) {
  auto it = leaves_.find(name);
  if (it != leaves_.end()) return it->second;
  const Mat& value = model_.params.Value(name);
  bool rg = trainable_ != nullptr && trainable_->count(name) != 0;
  Var v = tape_.Leaf(&value, rg);
  leaves_.emplace(name, v);
  return v;
}

template <typename Real>
Var ModelGraph<Real>::Linear(const std::string& prefix, Var x) {
  return tape_.AddRow(tape_.MatMul(x, P(prefix + ".weight")),
                      P(prefix + ".bias"));
}

template <typename Real>
Var ModelGraph<Real>::Conv(const std::string& prefix, Var x, int stride) {
  const Mat& w = model_.params.Value(prefix + ".weight");
  const Eigen::Index in = value(x).cols();
  if (in == 0 || w.rows() % in != 0) {
    throw ConfigError("conv input width mismatch at " + prefix);
  }
  const int kernel = static_cast<int>(w.rows() / in);
  Var cols = tape_.Unfold(x, kernel, stride);
  return tape_.AddRow(tape_.MatMul(cols, P(prefix + ".weight")),
                      P(prefix + ".bias"));
}

template <typename Real>
Var ModelGraph<Real>::Dropout(Var x, double p) {
  if (!options_.train || p <= 0) return x;
  const Mat& v = value(x);
  Mat mask(v.rows(), v.cols());
  std::bernoulli_distribution keep(1.0 - p);
  const Real scale = static_cast<Real>(1.0 / (1.0 - p));
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = keep(dropout_rng_) ? scale : Real(0);
  }
  return tape_.Mul(x, tape_.Constant(std::move(mask)));
}

template <typename Real>
std::map<std::string, typename ModelGraph<Real>::Mat>
ModelGraph<Real>::Gradients() const {
  std::map<std::string, Mat> out;
  for (const auto& [name, v] : leaves_) {
    if (!tape_.requires_grad(v)) continue;
    const Mat& g = tape_.grad(v);
    if (g.size() == 0) {
      const Mat& value = model_.params.Value(name);
      out.emplace(name, Mat::Zero(value.rows(), value.cols()));
    } else {
      out.emplace(name, g);
    }
  }
  return out;
}

template <typename Real>
Matrix<Real> PositionalEncoding(int rows, int width) {
  Matrix<Real> pe(rows, width);
  for (int pos = 0; pos < rows; ++pos) {
    for (int i = 0; i < width; ++i) {
      const int pair = i / 2;
      const double freq = std::pow(10000.0, -2.0 * pair / width);
      const double angle = pos * freq;
      pe(pos, i) = static_cast<Real>(i % 2 == 0 ? std::sin(angle)
                                                : std::cos(angle));
    }
  }
  return pe;
}

template class ModelGraph<float>;
template class ModelGraph<double>;
template Matrix<float> PositionalEncoding<float>(int, int);
template Matrix<double> PositionalEncoding<double>(int, int);

}  // namespace pefttts
