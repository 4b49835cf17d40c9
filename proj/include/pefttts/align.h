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

// Monotonic text-to-frame alignment over a T x N score matrix (frames by
// tokens). A path visits token 0 at frame 0, token N-1 at frame T-1 and at
// each frame either stays on its token or advances by one.

#ifndef PEFTTTS_ALIGN_H_
#define PEFTTTS_ALIGN_H_

#include <vector>

#include "pefttts/tensor.h"

namespace pefttts {

// log BetaBinomial(k = n; N - 1, omega * (t + 1), omega * (T - t)) per cell.
Matrix<double> BetaBinomialPrior(int frames, int tokens, double omega = 1.0);

template <typename Real>
struct ForwardSumResult {
  Real loss = 0;            // -log sum over paths of exp(path score)
  Matrix<Real> gradient;    // d loss / d score = -posterior occupancy
};

// Throws InputError when T < N (no monotonic path exists).
template <typename Real>
ForwardSumResult<Real> ForwardSum(const Matrix<Real>& scores);

template <typename Real>
struct ViterbiResult {
  Real score = 0;             // best path score
  std::vector<int> durations;  // frames per token, each >= 1, sum = T
};

template <typename Real>
ViterbiResult<Real> ViterbiDurations(const Matrix<Real>& scores);

}  // namespace pefttts

#endif  // PEFTTTS_ALIGN_H_
