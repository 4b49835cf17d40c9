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

#include "pefttts/aligner.h"

#include "pefttts/align.h"
#include "pefttts/peft.h"

namespace pefttts {

template <typename Real>
Var AlignLogits(ModelGraph<Real>& g, const std::vector<int>& tokens, Var mel,
                Var spk) {
  auto& tape = g.tape();
  if (tokens.empty()) throw InputError("empty phoneme sequence");
  Var text = tape.GatherRows(g.P("encoder.embed"), tokens);
  text = tape.ConcatCols(
      text, tape.BroadcastRows(spk, static_cast<int>(tokens.size())));
  text = tape.Relu(g.Conv("aligner.text.conv1", text));
  text = g.Conv("aligner.text.conv2", text);
  text = MaybeAdapter(g, "aligner.text", text);

  const int frames = static_cast<int>(g.value(mel).rows());
  Var audio = tape.ConcatCols(mel, tape.BroadcastRows(spk, frames));
  audio = tape.Relu(g.Conv("aligner.mel.conv1", audio));
  audio = g.Conv("aligner.mel.conv2", audio);
  audio = MaybeAdapter(g, "aligner.mel", audio);

  return tape.LogSoftmaxRows(tape.NegSquaredDistance(audio, text));
}

template <typename Real>
Var ForwardSumLoss(Tape<Real>& tape, Var scores) {
  ForwardSumResult<Real> fs = ForwardSum(tape.value(scores));
  Matrix<Real> value(1, 1);
  value(0, 0) = fs.loss;
  Matrix<Real> grad = std::move(fs.gradient);
  return tape.Custom(scores, std::move(value),
                     [grad](const Matrix<Real>& g, Matrix<Real>* out) {
                       *out = grad * g(0, 0);
                     });
}

template Var AlignLogits<float>(ModelGraph<float>&, const std::vector<int>&,
                                Var, Var);
template Var AlignLogits<double>(ModelGraph<double>&, const std::vector<int>&,
                                 Var, Var);
template Var ForwardSumLoss<float>(Tape<float>&, Var);
template Var ForwardSumLoss<double>(Tape<double>&, Var);

}  // namespace pefttts
