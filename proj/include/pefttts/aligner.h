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

#ifndef PEFTTTS_ALIGNER_H_
#define PEFTTTS_ALIGNER_H_

#include <vector>

#include "pefttts/graph.h"

namespace pefttts {

// T x N log-probabilities: row t is a log-softmax over tokens of the negative
// squared distance between projected mel frame t and projected token n.
template <typename Real>
Var AlignLogits(ModelGraph<Real>& g, const std::vector<int>& tokens, Var mel,
                Var spk);

// Forward-sum loss of a T x N score matrix as a tape op (1 x 1).
template <typename Real>
Var ForwardSumLoss(Tape<Real>& tape, Var scores);

}  // namespace pefttts

#endif  // PEFTTTS_ALIGNER_H_
