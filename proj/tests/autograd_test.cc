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
#include <random>

#include "gtest/gtest.h"
#include "test_support.h"

namespace pefttts {
namespace {

using testing::CheckTapeGradients;
using testing::kGradRtol;
using testing::RandomMatrix;
using testing::RandomProjection;

using M = Matrix<double>;

void ExpectGrad(std::vector<M> inputs, const testing::TapeLoss& loss) {
  testing::GradCheckResult r = CheckTapeGradients(std::move(inputs), loss);
  EXPECT_GT(r.grad_norm, 0);
  EXPECT_LE(r.rel_error, kGradRtol);
}

class OpGradTest : public ::testing::Test {
 protected:
  std::mt19937_64 rng_{1234};
  M R(int r, int c) { return RandomMatrix(rng_, r, c); }
};

TEST_F(OpGradTest, MatMulFamily) {
  ExpectGrad({R(3, 4), R(4, 5)}, [](Tape<double>& t, const std::vector<Var>& v) {
    return RandomProjection(t, t.MatMul(v[0], v[1]), 1);
  });
  ExpectGrad({R(3, 4), R(5, 4)}, [](Tape<double>& t, const std::vector<Var>& v) {
    return RandomProjection(t, t.MatMulNT(v[0], v[1]), 2);
  });
}

TEST_F(OpGradTest, Elementwise) {
  ExpectGrad({R(3, 4), R(3, 4)}, [](Tape<double>& t, const std::vector<Var>& v) {
    Var a = t.Add(v[0], v[1]);
    Var b = t.Sub(v[0], t.Scale(v[1], 0.5));
    return RandomProjection(t, t.Mul(a, b), 3);
  });
  ExpectGrad({R(3, 4), R(1, 4)}, [](Tape<double>& t, const std::vector<Var>& v) {
    Var a = t.AddRow(v[0], v[1]);
    return RandomProjection(t, t.Add(a, t.BroadcastRows(v[1], 3)), 4);
  });
  ExpectGrad({R(3, 4), R(1, 4)}, [](Tape<double>& t, const std::vector<Var>& v) {
    return RandomProjection(t, t.MulRow(v[0], v[1]), 5);
  });
}

TEST_F(OpGradTest, Nonlinearities) {
  ExpectGrad({R(3, 5)}, [](Tape<double>& t, const std::vector<Var>& v) {
    return RandomProjection(t, t.Relu(v[0]), 6);
  });
  ExpectGrad({R(3, 5)}, [](Tape<double>& t, const std::vector<Var>& v) {
    return RandomProjection(t, t.Sigmoid(v[0]), 7);
  });
  ExpectGrad({R(3, 5)}, [](Tape<double>& t, const std::vector<Var>& v) {
    return RandomProjection(t, t.Tanh(v[0]), 8);
  });
  ExpectGrad({R(3, 5)}, [](Tape<double>& t, const std::vector<Var>& v) {
    return RandomProjection(t, t.SoftmaxRows(v[0]), 9);
  });
  ExpectGrad({R(3, 5)}, [](Tape<double>& t, const std::vector<Var>& v) {
    return RandomProjection(t, t.LogSoftmaxRows(v[0]), 10);
  });
  ExpectGrad({R(3, 5)}, [](Tape<double>& t, const std::vector<Var>& v) {
    return RandomProjection(t, t.NormalizeRows(v[0], 1e-5), 11);
  });
}

TEST_F(OpGradTest, ShapeOps) {
  ExpectGrad({R(3, 2), R(3, 4)}, [](Tape<double>& t, const std::vector<Var>& v) {
    Var c = t.ConcatCols(v[0], v[1]);
    return RandomProjection(t, t.SliceCols(c, 1, 4), 12);
  });
  ExpectGrad({R(2, 3), R(4, 3)}, [](Tape<double>& t, const std::vector<Var>& v) {
    Var c = t.ConcatRows(v[0], v[1]);
    return RandomProjection(t, t.SliceRows(c, 1, 4), 13);
  });
  ExpectGrad({R(4, 3)}, [](Tape<double>& t, const std::vector<Var>& v) {
    return RandomProjection(t, t.GatherRows(v[0], {3, 0, 0, 2, 3}), 14);
  });
  for (int stride : {1, 2}) {
    ExpectGrad({R(7, 3)}, [stride](Tape<double>& t, const std::vector<Var>& v) {
      return RandomProjection(t, t.Unfold(v[0], 3, stride), 15);
    });
  }
}

TEST_F(OpGradTest, AttentionAndDistance) {
  ExpectGrad({R(4, 6), R(5, 6), R(5, 6)},
             [](Tape<double>& t, const std::vector<Var>& v) {
               return RandomProjection(t, t.Attention(v[0], v[1], v[2], 2), 16);
             });
  ExpectGrad({R(5, 3), R(4, 3)}, [](Tape<double>& t, const std::vector<Var>& v) {
    return RandomProjection(t, t.NegSquaredDistance(v[0], v[1]), 17);
  });
  const M target = R(3, 4);
  ExpectGrad({R(3, 4)}, [&target](Tape<double>& t, const std::vector<Var>& v) {
    return t.SquaredError(v[0], target);
  });
}

TEST(AutogradValueTest, AttentionMatchesManualComputation) {
  std::mt19937_64 rng(5);
  const M q = RandomMatrix(rng, 3, 4), k = RandomMatrix(rng, 5, 4),
          v = RandomMatrix(rng, 5, 4);
  Tape<double> tape;
  Var out = tape.Attention(tape.Constant(q), tape.Constant(k),
                           tape.Constant(v), 2);
  M expected(3, 4);
  for (int h = 0; h < 2; ++h) {
    M s = q.middleCols(2 * h, 2) * k.middleCols(2 * h, 2).transpose() /
          std::sqrt(2.0);
    for (int i = 0; i < 3; ++i) {
      s.row(i) = (s.row(i).array() - s.row(i).maxCoeff()).exp().matrix();
      s.row(i) /= s.row(i).sum();
    }
    expected.middleCols(2 * h, 2) = s * v.middleCols(2 * h, 2);
    EXPECT_NEAR((tape.aux(out)[h] - s).norm(), 0, 1e-12);
  }
  EXPECT_NEAR((tape.value(out) - expected).norm(), 0, 1e-12);
}

TEST(AutogradValueTest, UnfoldPadsWithZeros) {
  M a(3, 1);
  a << 1, 2, 3;
  Tape<double> tape;
  Var u = tape.Unfold(tape.Constant(a), 3, 1);
  M expected(3, 3);
  expected << 0, 1, 2, 1, 2, 3, 2, 3, 0;
  EXPECT_EQ(tape.value(u), expected);
  Var s = tape.Unfold(tape.Constant(a), 3, 2);
  EXPECT_EQ(tape.value(s).rows(), 2);
}

TEST(AutogradValueTest, SoftmaxRowsSumToOne) {
  std::mt19937_64 rng(6);
  Tape<double> tape;
  Var s = tape.SoftmaxRows(tape.Constant(RandomMatrix(rng, 4, 7, 30.0)));
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(tape.value(s).row(i).sum(), 1.0, 1e-12);
  }
}

TEST(AutogradValueTest, FrozenLeavesReceiveNoGradient) {
  M w(2, 2);
  w << 1, 2, 3, 4;
  M x(1, 2);
  x << 1, 1;
  Tape<double> tape;
  Var frozen = tape.Leaf(&w, false);
  Var in = tape.Leaf(&x, true);
  Var loss = tape.Sum(tape.MatMul(in, frozen));
  tape.Backward(loss);
  EXPECT_EQ(tape.grad(frozen).size(), 0);
  M expected(1, 2);
  expected << 3, 7;
  EXPECT_EQ(tape.grad(in), expected);
}

TEST(AutogradValueTest, GradientsAccumulateOverReuse) {
  M x(1, 1);
  x << 3;
  Tape<double> tape;
  Var v = tape.Leaf(&x, true);
  Var loss = tape.Sum(tape.Mul(v, v));
  tape.Backward(loss);
  EXPECT_DOUBLE_EQ(tape.grad(v)(0, 0), 6.0);
}

}  // namespace
}  // namespace pefttts
