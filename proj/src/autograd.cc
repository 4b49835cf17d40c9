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

#include "pefttts/autograd.h"

#include <cmath>
#include <string>
#include <utility>

namespace pefttts {

namespace {

void CheckShape(bool ok, const char* op) {
  if (!ok) throw ConfigError(std::string("shape mismatch in ") + op);
}

}  // namespace

template <typename Real>
Var Tape<Real>::Push(Mat value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

template <typename Real>
const typename Tape<Real>::Mat& Tape<Real>::value(Var v) const {
  const Node& n = nodes_[v.id];
  return n.ref != nullptr ? *n.ref : n.value;
}

template <typename Real>
template <typename Expr>
void Tape<Real>::Accumulate(Var v, const Expr& g) {
  Node& n = nodes_[v.id];
  if (!n.requires_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

template <typename Real>
Var Tape<Real>::Constant(Mat value) {
  return Push(std::move(value), false);
}

template <typename Real>
Var Tape<Real>::Leaf(const Mat* value, bool requires_grad) {
  Node n;
  n.ref = value;
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

template <typename Real>
void Tape<Real>::Backward(Var loss) {
  CheckShape(val(loss).size() == 1, "Backward");
  Node& root = node(loss);
  if (!root.requires_grad) return;
  root.grad = Mat::Ones(1, 1);
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.size() == 0) continue;
    n.backward(n.grad);
  }
}

template <typename Real>
Var Tape<Real>::MatMul(Var a, Var b) {
  CheckShape(val(a).cols() == val(b).rows(), "MatMul");
  bool rg = requires_grad(a) || requires_grad(b);
  Var out = Push(val(a) * val(b), rg);
  if (rg) {
    node(out).backward = [this, a, b](const Mat& g) {
      if (requires_grad(a)) Accumulate(a, g * val(b).transpose());
      if (requires_grad(b)) Accumulate(b, val(a).transpose() * g);
    };
  }
  return out;
}

template <typename Real>
Var Tape<Real>::MatMulNT(Var a, Var b) {
  CheckShape(val(a).cols() == val(b).cols(), "MatMulNT");
  bool rg = requires_grad(a) || requires_grad(b);
  Var out = Push(val(a) * val(b).transpose(), rg);
  if (rg) {
    node(out).backward = [this, a, b](const Mat& g) {
      if (requires_grad(a)) Accumulate(a, g * val(b));
      if (requires_grad(b)) Accumulate(b, g.transpose() * val(a));
    };
  }
  return out;
}

template <typename Real>
Var Tape<Real>::Add(Var a, Var b) {
  CheckShape(val(a).rows() == val(b).rows() && val(a).cols() == val(b).cols(),
             "Add");
  bool rg = requires_grad(a) || requires_grad(b);
  Var out = Push(val(a) + val(b), rg);
  if (rg) {
    node(out).backward = [this, a, b](const Mat& g) {
      Accumulate(a, g);
      Accumulate(b, g);
    };
  }
  return out;
}

template <typename Real>
Var Tape<Real>::Sub(Var a, Var b) {
  CheckShape(val(a).rows() == val(b).rows() && val(a).cols() == val(b).cols(),
             "Sub");
  bool rg = requires_grad(a) || requires_grad(b);
  Var out = Push(val(a) - val(b), rg);
  if (rg) {
    node(out).backward = [this, a, b](const Mat& g) {
      Accumulate(a, g);
      Accumulate(b, -g);
    };
  }
  return out;
}

template <typename Real>
Var Tape<Real>::Mul(Var a, Var b) {
  CheckShape(val(a).rows() == val(b).rows() && val(a).cols() == val(b).cols(),
             "Mul");
  bool rg = requires_grad(a) || requires_grad(b);
  Var out = Push(val(a).cwiseProduct(val(b)), rg);
  if (rg) {
    node(out).backward = [this, a, b](const Mat& g) {
      if (requires_grad(a)) Accumulate(a, g.cwiseProduct(val(b)));
      if (requires_grad(b)) Accumulate(b, g.cwiseProduct(val(a)));
    };
  }
  return out;
}

template <typename Real>
Var Tape<Real>::Scale(Var a, Real s) {
  bool rg = requires_grad(a);
  Var out = Push(val(a) * s, rg);
  if (rg) {
    node(out).backward = [this, a, s](const Mat& g) { Accumulate(a, g * s); };
  }
  return out;
}

template <typename Real>
Var Tape<Real>::AddRow(Var a, Var row) {
  CheckShape(val(row).rows() == 1 && val(row).cols() == val(a).cols(),
             "AddRow");
  bool rg = requires_grad(a) || requires_grad(row);
  Mat v = val(a);
  v.rowwise() += val(row).row(0);
  Var out = Push(std::move(v), rg);
  if (rg) {
    node(out).backward = [this, a, row](const Mat& g) {
      Accumulate(a, g);
      if (requires_grad(row)) Accumulate(row, g.colwise().sum());
    };
  }
  return out;
}

template <typename Real>
Var Tape<Real>::MulRow(Var a, Var row) {
  CheckShape(val(row).rows() == 1 && val(row).cols() == val(a).cols(),
             "MulRow");
  bool rg = requires_grad(a) || requires_grad(row);
  Mat v = val(a).array().rowwise() * val(row).row(0).array();
  Var out = Push(std::move(v), rg);
  if (rg) {
    node(out).backward = [this, a, row](const Mat& g) {
      if (requires_grad(a)) {
        Mat ga = g.array().rowwise() * val(row).row(0).array();
        Accumulate(a, ga);
      }
      if (requires_grad(row)) {
        Accumulate(row, g.cwiseProduct(val(a)).colwise().sum());
      }
    };
  }
  return out;
}

template <typename Real>
Var Tape<Real>::BroadcastRows(Var row, int n) {
  CheckShape(val(row).rows() == 1 && n >= 1, "BroadcastRows");
  bool rg = requires_grad(row);
  Var out = Push(val(row).replicate(n, 1), rg);
  if (rg) {
    node(out).backward = [this, row](const Mat& g) {
      Accumulate(row, g.colwise().sum());
    };
  }
  return out;
}

template <typename Real>
Var Tape<Real>::Sum(Var a) {
  bool rg = requires_grad(a);
  Mat v(1, 1);
  v(0, 0) = val(a).sum();
  Var out = Push(std::move(v), rg);
  if (rg) {
    node(out).backward = [this, a](const Mat& g) {
      Accumulate(a, Mat::Constant(val(a).rows(), val(a).cols(), g(0, 0)));
    };
  }
  return out;
}

template <typename Real>
Var Tape<Real>::Relu(Var a) {
  bool rg = requires_grad(a);
  Var out = Push(val(a).cwiseMax(Real(0)), rg);
  if (rg) {
    node(out).backward = [this, a](const Mat& g) {
      Mat mask = (val(a).array() > Real(0)).template cast<Real>();
      Accumulate(a, g.cwiseProduct(mask));
    };
  }
  return out;
}

template <typename Real>
Var Tape<Real>::Sigmoid(Var a) {
  bool rg = requires_grad(a);
  Mat v = (Real(1) + (-val(a).array()).exp()).inverse().matrix();
  Var out = Push(std::move(v), rg);
  if (rg) {
    node(out).backward = [this, a, out](const Mat& g) {
      const Mat& y = val(out);
      Accumulate(a, (g.array() * y.array() * (Real(1) - y.array())).matrix());
    };
  }
  return out;
}

template <typename Real>
Var Tape<Real>::Tanh(Var a) {
  bool rg = requires_grad(a);
  Var out = Push(val(a).array().tanh().matrix(), rg);
  if (rg) {
    node(out).backward = [this, a, out](const Mat& g) {
      const Mat& y = val(out);
      Accumulate(a, (g.array() * (Real(1) - y.array().square())).matrix());
    };
  }
  return out;
}

template <typename Real>
Var Tape<Real>::SoftmaxRows(Var a) {
  bool rg = requires_grad(a);
  const Mat& x = val(a);
  Mat y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    Real mx = x.row(r).maxCoeff();
    y.row(r) = (x.row(r).array() - mx).exp().matrix();
    y.row(r) /= y.row(r).sum();
  }
  Var out = Push(std::move(y), rg);
  if (rg) {
    node(out).backward = [this, a, out](const Mat& g) {
      const Mat& p = val(out);
      Mat gp = g.cwiseProduct(p);
      Mat dot = gp.rowwise().sum();
      Mat ga = gp - (p.array().colwise() * dot.col(0).array()).matrix();
      Accumulate(a, ga);
    };
  }
  return out;
}

template <typename Real>
Var Tape<Real>::LogSoftmaxRows(Var a) {
  bool rg = requires_grad(a);
  const Mat& x = val(a);
  Mat y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    Real mx = x.row(r).maxCoeff();
    Real lse = mx + std::log((x.row(r).array() - mx).exp().sum());
    y.row(r) = x.row(r).array() - lse;
  }
  Var out = Push(std::move(y), rg);
  if (rg) {
    node(out).backward = [this, a, out](const Mat& g) {
      Mat p = val(out).array().exp().matrix();
      Mat gsum = g.rowwise().sum();
      Mat ga = g - (p.array().colwise() * gsum.col(0).array()).matrix();
      Accumulate(a, ga);
    };
  }
  return out;
}

template <typename Real>
Var Tape<Real>::NormalizeRows(Var a, Real eps) {
  bool rg = requires_grad(a);
  const Mat& x = val(a);
  const Eigen::Index d = x.cols();
  Mat y(x.rows(), d);
  Mat inv_std(x.rows(), 1);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    Real mean = x.row(r).sum() / Real(d);
    auto centered = x.row(r).array() - mean;
    Real var = centered.square().sum() / Real(d);
    inv_std(r, 0) = Real(1) / std::sqrt(var + eps);
    y.row(r) = centered * inv_std(r, 0);
  }
  Var out = Push(std::move(y), rg);
  if (rg) {
    node(out).backward = [this, a, out, inv_std, d](const Mat& g) {
      const Mat& yv = val(out);
      Mat ga(g.rows(), g.cols());
      for (Eigen::Index r = 0; r < g.rows(); ++r) {
        Real mean_g = g.row(r).sum() / Real(d);
        Real mean_gy = g.row(r).dot(yv.row(r)) / Real(d);
        ga.row(r) = inv_std(r, 0) *
                    (g.row(r).array() - mean_g - yv.row(r).array() * mean_gy);
      }
      Accumulate(a, ga);
    };
  }
  return out;
}

template <typename Real>
Var Tape<Real>::ConcatCols(Var a, Var b) {
  CheckShape(val(a).rows() == val(b).rows(), "ConcatCols");
  bool rg = requires_grad(a) || requires_grad(b);
  Mat v(val(a).rows(), val(a).cols() + val(b).cols());
  v << val(a), val(b);
  Var out = Push(std::move(v), rg);
  if (rg) {
    const Eigen::Index ca = val(a).cols(), cb = val(b).cols();
    node(out).backward = [this, a, b, ca, cb](const Mat& g) {
      if (requires_grad(a)) Accumulate(a, g.leftCols(ca));
      if (requires_grad(b)) Accumulate(b, g.rightCols(cb));
    };
  }
  return out;
}

template <typename Real>
Var Tape<Real>::ConcatRows(Var a, Var b) {
  CheckShape(val(a).cols() == val(b).cols(), "ConcatRows");
  bool rg = requires_grad(a) || requires_grad(b);
  Mat v(val(a).rows() + val(b).rows(), val(a).cols());
  v << val(a), val(b);
  Var out = Push(std::move(v), rg);
  if (rg) {
    const Eigen::Index ra = val(a).rows(), rb = val(b).rows();
    node(out).backward = [this, a, b, ra, rb](const Mat& g) {
      if (requires_grad(a)) Accumulate(a, g.topRows(ra));
      if (requires_grad(b)) Accumulate(b, g.bottomRows(rb));
    };
  }
  return out;
}

template <typename Real>
Var Tape<Real>::SliceCols(Var a, int start, int n) {
  CheckShape(start >= 0 && n >= 0 && start + n <= val(a).cols(), "SliceCols");
  bool rg = requires_grad(a);
  Var out = Push(val(a).middleCols(start, n), rg);
  if (rg) {
    node(out).backward = [this, a, start, n](const Mat& g) {
      Mat ga = Mat::Zero(val(a).rows(), val(a).cols());
      ga.middleCols(start, n) = g;
      Accumulate(a, ga);
    };
  }
  return out;
}

template <typename Real>
Var Tape<Real>::SliceRows(Var a, int start, int n) {
  CheckShape(start >= 0 && n >= 0 && start + n <= val(a).rows(), "SliceRows");
  bool rg = requires_grad(a);
  Var out = Push(val(a).middleRows(start, n), rg);
  if (rg) {
    node(out).backward = [this, a, start, n](const Mat& g) {
      Mat ga = Mat::Zero(val(a).rows(), val(a).cols());
      ga.middleRows(start, n) = g;
      Accumulate(a, ga);
    };
  }
  return out;
}

template <typename Real>
Var Tape<Real>::GatherRows(Var a, const std::vector<int>& index) {
  const Mat& x = val(a);
  Mat v(static_cast<Eigen::Index>(index.size()), x.cols());
  for (size_t i = 0; i < index.size(); ++i) {
    CheckShape(index[i] >= 0 && index[i] < x.rows(), "GatherRows");
    v.row(i) = x.row(index[i]);
  }
  bool rg = requires_grad(a);
  Var out = Push(std::move(v), rg);
  if (rg) {
    node(out).backward = [this, a, index](const Mat& g) {
      Mat ga = Mat::Zero(val(a).rows(), val(a).cols());
      for (size_t i = 0; i < index.size(); ++i) ga.row(index[i]) += g.row(i);
      Accumulate(a, ga);
    };
  }
  return out;
}

template <typename Real>
Var Tape<Real>::Unfold(Var a, int kernel, int stride) {
  CheckShape(kernel >= 1 && kernel % 2 == 1 && stride >= 1, "Unfold");
  const Mat& x = val(a);
  const int t_in = static_cast<int>(x.rows());
  const int c = static_cast<int>(x.cols());
  const int pad = (kernel - 1) / 2;
  const int t_out = (t_in + 2 * pad - kernel) / stride + 1;
  CheckShape(t_out >= 1, "Unfold");
  Mat v = Mat::Zero(t_out, static_cast<Eigen::Index>(kernel) * c);
  for (int o = 0; o < t_out; ++o) {
    for (int j = 0; j < kernel; ++j) {
      int src = o * stride + j - pad;
      if (src < 0 || src >= t_in) continue;
      v.block(o, j * c, 1, c) = x.row(src);
    }
  }
  bool rg = requires_grad(a);
  Var out = Push(std::move(v), rg);
  if (rg) {
    node(out).backward = [this, a, kernel, stride, pad, t_in, t_out,
                          c](const Mat& g) {
      Mat ga = Mat::Zero(t_in, c);
      for (int o = 0; o < t_out; ++o) {
        for (int j = 0; j < kernel; ++j) {
          int src = o * stride + j - pad;
          if (src < 0 || src >= t_in) continue;
          ga.row(src) += g.block(o, j * c, 1, c);
        }
      }
      Accumulate(a, ga);
    };
  }
  return out;
}

template <typename Real>
Var Tape<Real>::Attention(Var q, Var k, Var v, int n_heads) {
  const Mat& qv = val(q);
  const Mat& kv = val(k);
  const Mat& vv = val(v);
  const Eigen::Index d = qv.cols();
  CheckShape(n_heads >= 1 && d % n_heads == 0 && kv.cols() == d &&
                 vv.cols() == d && kv.rows() == vv.rows() && kv.rows() >= 1,
             "Attention");
  const Eigen::Index dh = d / n_heads;
  const Real scale = Real(1) / std::sqrt(static_cast<Real>(dh));
  Mat o(qv.rows(), d);
  std::vector<Mat> probs(n_heads);
  for (int h = 0; h < n_heads; ++h) {
    Mat s = (qv.middleCols(h * dh, dh) * kv.middleCols(h * dh, dh).transpose()) *
            scale;
    for (Eigen::Index r = 0; r < s.rows(); ++r) {
      Real mx = s.row(r).maxCoeff();
      s.row(r) = (s.row(r).array() - mx).exp().matrix();
      s.row(r) /= s.row(r).sum();
    }
    o.middleCols(h * dh, dh) = s * vv.middleCols(h * dh, dh);
    probs[h] = std::move(s);
  }
  bool rg = requires_grad(q) || requires_grad(k) || requires_grad(v);
  Var out = Push(std::move(o), rg);
  node(out).aux = std::move(probs);
  if (rg) {
    node(out).backward = [this, q, k, v, out, n_heads, dh, scale](const Mat& g) {
      const Mat& qv = val(q);
      const Mat& kv = val(k);
      const Mat& vv = val(v);
      Mat gq = Mat::Zero(qv.rows(), qv.cols());
      Mat gk = Mat::Zero(kv.rows(), kv.cols());
      Mat gv = Mat::Zero(vv.rows(), vv.cols());
      for (int h = 0; h < n_heads; ++h) {
        const Mat& p = nodes_[out.id].aux[h];
        Mat go = g.middleCols(h * dh, dh);
        Mat gp = go * vv.middleCols(h * dh, dh).transpose();
        gv.middleCols(h * dh, dh) += p.transpose() * go;
        Mat dot = gp.cwiseProduct(p).rowwise().sum();
        Mat gs = p.cwiseProduct(gp - dot.replicate(1, gp.cols())) * scale;
        gq.middleCols(h * dh, dh) += gs * kv.middleCols(h * dh, dh);
        gk.middleCols(h * dh, dh) += gs.transpose() * qv.middleCols(h * dh, dh);
      }
      Accumulate(q, gq);
      Accumulate(k, gk);
      Accumulate(v, gv);
    };
  }
  return out;
}

template <typename Real>
Var Tape<Real>::NegSquaredDistance(Var a, Var b) {
  const Mat& av = val(a);
  const Mat& bv = val(b);
  CheckShape(av.cols() == bv.cols(), "NegSquaredDistance");
  Mat an = av.rowwise().squaredNorm();
  Mat bn = bv.rowwise().squaredNorm();
  Mat v = Real(2) * av * bv.transpose();
  v.colwise() -= an.col(0);
  v.rowwise() -= bn.col(0).transpose();
  bool rg = requires_grad(a) || requires_grad(b);
  Var out = Push(std::move(v), rg);
  if (rg) {
    node(out).backward = [this, a, b](const Mat& g) {
      const Mat& av = val(a);
      const Mat& bv = val(b);
      // d/da_t = sum_n g(t,n) * 2 (b_n - a_t)
      if (requires_grad(a)) {
        Mat rs = g.rowwise().sum();
        Mat ga = Real(2) * (g * bv);
        ga -= Real(2) * (av.array().colwise() * rs.col(0).array()).matrix();
        Accumulate(a, ga);
      }
      if (requires_grad(b)) {
        Mat cs = g.colwise().sum();
        Mat gb = Real(2) * (g.transpose() * av);
        gb -= Real(2) *
              (bv.array().colwise() * cs.row(0).transpose().array()).matrix();
        Accumulate(b, gb);
      }
    };
  }
  return out;
}

template <typename Real>
Var Tape<Real>::SquaredError(Var a, const Mat& target) {
  CheckShape(val(a).rows() == target.rows() && val(a).cols() == target.cols(),
             "SquaredError");
  bool rg = requires_grad(a);
  Mat diff = val(a) - target;
  Mat v(1, 1);
  v(0, 0) = diff.squaredNorm();
  Var out = Push(std::move(v), rg);
  if (rg) {
    node(out).backward = [this, a, diff](const Mat& g) {
      Accumulate(a, diff * (Real(2) * g(0, 0)));
    };
  }
  return out;
}

template <typename Real>
Var Tape<Real>::Custom(Var input, Mat value, Vjp vjp) {
  bool rg = requires_grad(input);
  Var out = Push(std::move(value), rg);
  if (rg) {
    node(out).backward = [this, input, vjp](const Mat& g) {
      Mat gi;
      vjp(g, &gi);
      Accumulate(input, gi);
    };
  }
  return out;
}

template class Tape<float>;
template class Tape<double>;

}  // namespace pefttts
