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

#ifndef PEFTTTS_AUTOGRAD_H_
#define PEFTTTS_AUTOGRAD_H_

#include <deque>
#include <functional>
#include <vector>

#include "pefttts/tensor.h"

namespace pefttts {

// Handle to a node on a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode automatic differentiation over row-major matrices.
//
// Every op appends a node holding its value and a closure that pushes the
// node's gradient into its inputs. Nodes that do not depend on any
// gradient-requiring leaf carry no closure and are skipped by Backward, so
// frozen sub-graphs cost forward time only.
template <typename Real>
class Tape {
 public:
  using Mat = Matrix<Real>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaves.
  Var Constant(Mat value);
  // References external storage, which must outlive the tape.
  Var Leaf(const Mat* value, bool requires_grad);

  const Mat& value(Var v) const;
  // Empty matrix when no gradient reached v.
  const Mat& grad(Var v) const { return nodes_[v.id].grad; }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  // Op-specific saved state (attention probabilities per head).
  const std::vector<Mat>& aux(Var v) const { return nodes_[v.id].aux; }
  size_t size() const { return nodes_.size(); }

  // Seeds d(loss)/d(loss) = 1 for a 1x1 node and propagates.
  void Backward(Var loss);

  // Linear algebra.
  Var MatMul(Var a, Var b);    // a * b
  Var MatMulNT(Var a, Var b);  // a * b^T
  Var Add(Var a, Var b);
  Var Sub(Var a, Var b);
  Var Mul(Var a, Var b);  // elementwise
  Var Scale(Var a, Real s);
  Var AddRow(Var a, Var row);  // broadcast 1 x n over rows of a
  Var MulRow(Var a, Var row);
  Var BroadcastRows(Var row, int n);
  Var Sum(Var a);  // -> 1x1

  // Nonlinearities.
  Var Relu(Var a);
  Var Sigmoid(Var a);
  Var Tanh(Var a);
  Var SoftmaxRows(Var a);
  Var LogSoftmaxRows(Var a);
  // Zero-mean unit-variance over each row, no affine part.
  Var NormalizeRows(Var a, Real eps);

  // Shape plumbing.
  Var ConcatCols(Var a, Var b);
  Var ConcatRows(Var a, Var b);
  Var SliceCols(Var a, int start, int n);
  Var SliceRows(Var a, int start, int n);
  Var GatherRows(Var a, const std::vector<int>& index);
  // im2col for a 1-D convolution over rows with zero padding (k - 1) / 2.
  Var Unfold(Var a, int kernel, int stride);

  // Scaled dot-product attention, heads split over column blocks.
  // q: n x d, k and v: m x d. aux() holds the n x m probabilities per head.
  Var Attention(Var q, Var k, Var v, int n_heads);
  // out(t, n) = -||a_t - b_n||^2.
  Var NegSquaredDistance(Var a, Var b);
  // Sum of squared differences against a constant target -> 1x1.
  Var SquaredError(Var a, const Mat& target);

  // Op with a caller-provided value and vector-Jacobian product.
  using Vjp = std::function<void(const Mat& grad_out, Mat* grad_in)>;
  Var Custom(Var input, Mat value, Vjp vjp);

 private:
  struct Node {
    Mat value;
    const Mat* ref = nullptr;
    Mat grad;
    bool requires_grad = false;
    std::vector<Mat> aux;
    std::function<void(const Mat&)> backward;
  };

  Var Push(Mat value, bool requires_grad);
  Node& node(Var v) { return nodes_[v.id]; }
  const Mat& val(Var v) const { return value(v); }
  template <typename Expr>
  void Accumulate(Var v, const Expr& g);

  // deque keeps node addresses stable while ops append.
  std::deque<Node> nodes_;
};

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace pefttts

#endif  // PEFTTTS_AUTOGRAD_H_
