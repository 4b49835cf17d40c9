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

#include "pefttts/align.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pefttts {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double LogAddExp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double mx = std::max(a, b);
  return mx + std::log1p(std::exp(-std::abs(a - b)));
}

double LogBeta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

void CheckFeasible(Eigen::Index frames, Eigen::Index tokens) {
  if (tokens < 1 || frames < tokens) {
    throw InputError("alignment infeasible: need frames >= tokens >= 1");
  }
}

}  // namespace

Matrix<double> BetaBinomialPrior(int frames, int tokens, double omega) {
  CheckFeasible(frames, tokens);
  if (omega <= 0) throw InputError("prior scaling must be positive");
  const int trials = tokens - 1;
  Matrix<double> prior(frames, tokens);
  for (int t = 0; t < frames; ++t) {
    const double a = omega * (t + 1);
    const double b = omega * (frames - t);
    const double log_norm = LogBeta(a, b);
    for (int k = 0; k < tokens; ++k) {
      const double log_choose = std::lgamma(trials + 1.0) -
                                std::lgamma(k + 1.0) -
                                std::lgamma(trials - k + 1.0);
      prior(t, k) = log_choose + LogBeta(k + a, trials - k + b) - log_norm;
    }
  }
  return prior;
}

template <typename Real>
ForwardSumResult<Real> ForwardSum(const Matrix<Real>& scores) {
  const Eigen::Index frames = scores.rows();
  const Eigen::Index tokens = scores.cols();
  CheckFeasible(frames, tokens);
  const Matrix<double> m = scores.template cast<double>();

  Matrix<double> alpha = Matrix<double>::Constant(frames, tokens, kNegInf);
  alpha(0, 0) = m(0, 0);
  for (Eigen::Index t = 1; t < frames; ++t) {
    for (Eigen::Index n = 0; n < tokens; ++n) {
      double stay = alpha(t - 1, n);
      double advance = n > 0 ? alpha(t - 1, n - 1) : kNegInf;
      double s = LogAddExp(stay, advance);
      alpha(t, n) = s == kNegInf ? kNegInf : s + m(t, n);
    }
  }

  // beta(t, n): log-sum of scores strictly after frame t, starting from n.
  Matrix<double> beta = Matrix<double>::Constant(frames, tokens, kNegInf);
  beta(frames - 1, tokens - 1) = 0.0;
  for (Eigen::Index t = frames - 2; t >= 0; --t) {
    for (Eigen::Index n = 0; n < tokens; ++n) {
      double stay = beta(t + 1, n) == kNegInf ? kNegInf
                                               : beta(t + 1, n) + m(t + 1, n);
      double advance = kNegInf;
      if (n + 1 < tokens && beta(t + 1, n + 1) != kNegInf) {
        advance = beta(t + 1, n + 1) + m(t + 1, n + 1);
      }
      beta(t, n) = LogAddExp(stay, advance);
    }
  }

  const double log_z = alpha(frames - 1, tokens - 1);
  ForwardSumResult<Real> out;
  out.loss = static_cast<Real>(-log_z);
  out.gradient = Matrix<Real>::Zero(frames, tokens);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index n = 0; n < tokens; ++n) {
      double lp = alpha(t, n) + beta(t, n);
      if (lp == kNegInf) continue;
      out.gradient(t, n) = static_cast<Real>(-std::exp(lp - log_z));
    }
  }
  return out;
}

template <typename Real>
ViterbiResult<Real> ViterbiDurations(const Matrix<Real>& scores) {
  const Eigen::Index frames = scores.rows();
  const Eigen::Index tokens = scores.cols();
  CheckFeasible(frames, tokens);
  const Matrix<double> m = scores.template cast<double>();

  Matrix<double> delta = Matrix<double>::Constant(frames, tokens, kNegInf);
  // true when the best predecessor of (t, n) is (t - 1, n - 1).
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> advanced(frames, tokens);
  advanced.setConstant(false);
  delta(0, 0) = m(0, 0);
  for (Eigen::Index t = 1; t < frames; ++t) {
    for (Eigen::Index n = 0; n < tokens; ++n) {
      double stay = delta(t - 1, n);
      double advance = n > 0 ? delta(t - 1, n - 1) : kNegInf;
      if (stay == kNegInf && advance == kNegInf) continue;
      if (advance > stay) {
        delta(t, n) = advance + m(t, n);
        advanced(t, n) = true;
      } else {
        delta(t, n) = stay + m(t, n);
      }
    }
  }

  ViterbiResult<Real> out;
  out.score = static_cast<Real>(delta(frames - 1, tokens - 1));
  out.durations.assign(tokens, 0);
  Eigen::Index n = tokens - 1;
  for (Eigen::Index t = frames - 1; t >= 0; --t) {
    ++out.durations[n];
    if (t > 0 && advanced(t, n)) --n;
  }
  return out;
}

template ForwardSumResult<float> ForwardSum<float>(const Matrix<float>&);
template ForwardSumResult<double> ForwardSum<double>(const Matrix<double>&);
template ViterbiResult<float> ViterbiDurations<float>(const Matrix<float>&);
template ViterbiResult<double> ViterbiDurations<double>(const Matrix<double>&);

}  // namespace pefttts
