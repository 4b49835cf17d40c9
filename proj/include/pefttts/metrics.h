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

// Objective metrics. The speaker-similarity and distribution-distance scores
// are computed on mel-frame statistics instead of pretrained audio networks.

#ifndef PEFTTTS_METRICS_H_
#define PEFTTTS_METRICS_H_

#include <span>
#include <vector>

#include "pefttts/tensor.h"

namespace pefttts {

// Mean of (a - b)^2. Throws ConfigError on length mismatch or empty input.
double MeanSquaredError(std::span<const double> a, std::span<const double> b);

// Pitch in z-scored units.
inline double MsePitch(std::span<const double> predicted,
                       std::span<const double> target) {
  return MeanSquaredError(predicted, target);
}

// Durations in log-frames.
inline double MseDuration(std::span<const double> predicted_log,
                          std::span<const double> target_log) {
  return MeanSquaredError(predicted_log, target_log);
}

// [frame-mean mel | frame-std mel | mean pitch | pitch std].
RowVector<double> UtteranceSignature(const Matrix<double>& mel,
                                     std::span<const double> pitch);

// Cosine similarity between the mean signatures of two sets, in [-1, 1].
double SecsFromSignatures(const std::vector<RowVector<double>>& generated,
                          const std::vector<RowVector<double>>& reference);

struct Utterance {
  Matrix<double> mel;
  std::vector<double> pitch;
};

double SecsProxy(const std::vector<Utterance>& generated,
                 const std::vector<Utterance>& reference);

struct Gaussian {
  RowVector<double> mean;
  Matrix<double> cov;
};

// Frame statistics of the stacked mel frames. With fewer than mel_dim + 1
// frames the covariance is rank-deficient; a warning is logged and only the
// diagonal is kept. `diagonal` reports which mode was used.
Gaussian FitGaussian(const std::vector<const Matrix<double>*>& mels,
                     bool* diagonal = nullptr);

// ||mu1 - mu2||^2 + Tr(S1 + S2 - 2 (S1^1/2 S2 S1^1/2)^1/2). Inputs are
// symmetrized and negative eigenvalues clamped to zero.
double FrechetGaussian(const RowVector<double>& mu1, const Matrix<double>& s1,
                       const RowVector<double>& mu2, const Matrix<double>& s2);

// Principal square root of a symmetric PSD matrix.
Matrix<double> SymmetricSqrt(const Matrix<double>& m);

// Frechet distance per speaker between generated and reference frame
// Gaussians, averaged over speakers. Element s of each list holds the
// utterances of speaker s.
double CfsdProxy(const std::vector<std::vector<const Matrix<double>*>>& generated,
                 const std::vector<std::vector<const Matrix<double>*>>& reference);

}  // namespace pefttts

#endif  // PEFTTTS_METRICS_H_
