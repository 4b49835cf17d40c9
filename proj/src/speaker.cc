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

#include "pefttts/speaker.h"

#include <string>

namespace pefttts {

template <typename Real>
Var LookupSpeaker(ModelGraph<Real>& g, int id) {
  if (id < 0 || id >= g.config().n_speakers) {
    throw InputError("speaker id out of range: " + std::to_string(id));
  }
  return g.tape().GatherRows(g.P(kSpeakerTableName), {id});
}

template <typename Real>
Var MixedSpeaker(ModelGraph<Real>& g) {
  auto& tape = g.tape();
  Var weights = tape.SoftmaxRows(g.P(kMixLogitsName));
  return tape.MatMul(weights, g.P(kSpeakerTableName));
}

template <typename Real>
Var StyleEmbedding(ModelGraph<Real>& g, Var reference_mel,
                   std::vector<Matrix<Real>>* attention) {
  auto& tape = g.tape();
  const ModelConfig& c = g.config();
  if (g.value(reference_mel).rows() < 1) {
    throw InputError("empty reference spectrogram");
  }
  if (g.value(reference_mel).cols() != c.mel_dim) {
    throw ConfigError("reference spectrogram width != mel_dim");
  }
  Var x = tape.Relu(g.Conv("style.ref.conv1", reference_mel, 2));
  x = tape.Relu(g.Conv("style.ref.conv2", x, 2));

  // GRU, gates ordered [reset | update | candidate].
  const int h = c.ref_hidden;
  Var inputs = g.Linear("style.ref.gru.input", x);
  Var state = g.Constant(Matrix<Real>::Zero(1, h));
  const int steps = static_cast<int>(g.value(inputs).rows());
  for (int t = 0; t < steps; ++t) {
    Var xt = tape.SliceRows(inputs, t, 1);
    Var ht = g.Linear("style.ref.gru.hidden", state);
    Var reset = tape.Sigmoid(
        tape.Add(tape.SliceCols(xt, 0, h), tape.SliceCols(ht, 0, h)));
    Var update = tape.Sigmoid(
        tape.Add(tape.SliceCols(xt, h, h), tape.SliceCols(ht, h, h)));
    Var candidate = tape.Tanh(tape.Add(
        tape.SliceCols(xt, 2 * h, h),
        tape.Mul(reset, tape.SliceCols(ht, 2 * h, h))));
    state = tape.Add(candidate,
                     tape.Mul(update, tape.Sub(state, candidate)));
  }

  Var query = g.Linear("style.attn.query", state);
  Var tokens = tape.Tanh(g.P("style.tokens"));
  Var keys = g.Linear("style.attn.key", tokens);
  Var values = g.Linear("style.attn.value", tokens);
  Var attended = tape.Attention(query, keys, values, c.style_heads);
  if (attention != nullptr) *attention = tape.aux(attended);
  return g.Linear("style.attn.out", attended);
}

template <typename Real>
Var CombineSpeaker(ModelGraph<Real>& g, Var se1, Var se2) {
  return g.tape().Add(se1, se2);
}

template <typename Real>
SpeakerVars SpeakerEmbedding(ModelGraph<Real>& g,
                             const SpeakerSource<Real>& source) {
  SpeakerVars out;
  Var reference;
  if (source.speaker_id >= 0) {
    out.se1 = LookupSpeaker(g, source.speaker_id);
    reference = source.reference != nullptr
                    ? g.Constant(*source.reference)
                    : g.P(ReferenceBufferName(source.speaker_id));
  } else {
    if (!g.Has(kMixLogitsName)) {
      throw ConfigError("model has no adapted speaker");
    }
    out.se1 = MixedSpeaker(g);
    reference = source.reference != nullptr ? g.Constant(*source.reference)
                                            : g.P(kAdaptReferenceName);
  }
  out.se2 = StyleEmbedding(g, reference);
  out.final = CombineSpeaker(g, out.se1, out.se2);
  return out;
}

template <typename Real>
RowVector<Real> Softmax(const RowVector<Real>& logits) {
  const Real mx = logits.maxCoeff();
  RowVector<Real> e = (logits.array() - mx).exp().matrix();
  return e / e.sum();
}

template <typename Real>
RowVector<Real> WeightedMeanEmbedding(const RowVector<Real>& logits,
                                      const Matrix<Real>& table) {
  if (logits.size() != table.rows()) {
    throw ConfigError("mix logits length != speaker count");
  }
  return Softmax(logits) * table;
}

#define PEFTTTS_INSTANTIATE(R)                                               \
  template Var LookupSpeaker<R>(ModelGraph<R>&, int);                        \
  template Var MixedSpeaker<R>(ModelGraph<R>&);                              \
  template Var StyleEmbedding<R>(ModelGraph<R>&, Var,                        \
                                 std::vector<Matrix<R>>*);                   \
  template Var CombineSpeaker<R>(ModelGraph<R>&, Var, Var);                  \
  template SpeakerVars SpeakerEmbedding<R>(ModelGraph<R>&,                   \
                                           const SpeakerSource<R>&);         \
  template RowVector<R> Softmax<R>(const RowVector<R>&);                     \
  template RowVector<R> WeightedMeanEmbedding<R>(const RowVector<R>&,        \
                                                 const Matrix<R>&);

PEFTTTS_INSTANTIATE(float)
PEFTTTS_INSTANTIATE(double)

#undef PEFTTTS_INSTANTIATE

}  // namespace pefttts
