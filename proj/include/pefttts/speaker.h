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

#ifndef PEFTTTS_SPEAKER_H_
#define PEFTTTS_SPEAKER_H_

#include <vector>

#include "pefttts/graph.h"

namespace pefttts {

// Who is speaking. A pre-trained speaker uses its lookup-table row; the
// adapted speaker (id -1) uses the softmax-weighted mean of all rows. The
// style embedding comes from `reference` when set, else from the reference
// mel stored with the model.
template <typename Real>
struct SpeakerSource {
  int speaker_id = -1;
  const Matrix<Real>* reference = nullptr;

  static SpeakerSource Pretrained(int id) { return SpeakerSource{id, nullptr}; }
  static SpeakerSource Adapted() { return SpeakerSource{-1, nullptr}; }
};

struct SpeakerVars {
  Var se1;
  Var se2;
  Var final;  // se1 + se2
};

// Row `id` of the lookup table. Throws InputError when out of range.
template <typename Real>
Var LookupSpeaker(ModelGraph<Real>& g, int id);

// softmax(mix_logits) * table.
template <typename Real>
Var MixedSpeaker(ModelGraph<Real>& g);

// Reference encoder (two strided convs, GRU) whose final state queries
// multi-head attention over the style tokens. `attention` receives the
// per-head 1 x K weights when non-null. Throws InputError on an empty
// reference.
template <typename Real>
Var StyleEmbedding(ModelGraph<Real>& g, Var reference_mel,
                   std::vector<Matrix<Real>>* attention = nullptr);

template <typename Real>
Var CombineSpeaker(ModelGraph<Real>& g, Var se1, Var se2);

template <typename Real>
SpeakerVars SpeakerEmbedding(ModelGraph<Real>& g,
                             const SpeakerSource<Real>& source);

// softmax(logits)^T table, evaluated directly.
template <typename Real>
RowVector<Real> WeightedMeanEmbedding(const RowVector<Real>& logits,
                                      const Matrix<Real>& table);

template <typename Real>
RowVector<Real> Softmax(const RowVector<Real>& logits);

}  // namespace pefttts

#endif  // PEFTTTS_SPEAKER_H_
