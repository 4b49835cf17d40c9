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

// Multi-speaker non-autoregressive acoustic model: FFT encoder, pitch and
// duration predictors, length regulator and FFT decoder, every layer norm
// conditioned on the speaker embedding.

#ifndef PEFTTTS_ACOUSTIC_MODEL_H_
#define PEFTTTS_ACOUSTIC_MODEL_H_

#include <string>
#include <vector>

#include "pefttts/graph.h"
#include "pefttts/speaker.h"

namespace pefttts {

// gain(spk) * normalize(x) + shift(spk), row-wise.
template <typename Real>
Var ConditionalLayerNorm(ModelGraph<Real>& g, const std::string& prefix, Var x,
                         Var spk);

// Multi-head self-attention of one FFT layer, with LoRA on the projections
// and prefix keys/values when the model carries them.
template <typename Real>
Var SelfAttention(ModelGraph<Real>& g, const std::string& layer, Var x);

// attention -> add -> CLN -> conv FF -> add -> CLN -> optional adapter.
template <typename Real>
Var FftLayer(ModelGraph<Real>& g, const std::string& layer, Var x, Var spk);

// Token embedding + positions, speaker concat + projection, FFT stack.
// Throws InputError on an empty sequence or out-of-vocabulary id.
template <typename Real>
Var Encode(ModelGraph<Real>& g, const std::vector<int>& tokens, Var spk);

template <typename Real>
Var PredictPitch(ModelGraph<Real>& g, Var h, Var spk);
// Log-domain durations, N x 1.
template <typename Real>
Var PredictLogDuration(ModelGraph<Real>& g, Var h, Var spk);

// h + pitch embedding (width-1 conv of the per-token scalar).
template <typename Real>
Var AddPitch(ModelGraph<Real>& g, Var h, Var pitch);

// Row n repeated durations[n] times. Throws InputError on any duration < 1.
template <typename Real>
Var LengthRegulate(ModelGraph<Real>& g, Var x,
                   const std::vector<int>& durations);

// Throws CapacityError when the upsampled length exceeds max_frames.
template <typename Real>
Var Decode(ModelGraph<Real>& g, Var upsampled, Var spk);

// round(exp(log_d)) clamped to [1, max_frames].
template <typename Real>
std::vector<int> DurationsFromLog(const Matrix<Real>& log_durations,
                                  int max_frames);

template <typename Real>
struct SynthesisResult {
  Matrix<Real> mel;           // T x mel_dim
  Matrix<Real> pitch;         // N x 1, normalized units
  Matrix<Real> log_duration;  // N x 1
  std::vector<int> durations;
};

// Full inference path with predicted pitch and durations.
template <typename Real>
SynthesisResult<Real> Synthesize(const Model<Real>& model,
                                 const std::vector<int>& tokens,
                                 const SpeakerSource<Real>& speaker);

// Same, but length-regulated with the given durations so the output aligns
// frame-for-frame with a reference.
template <typename Real>
SynthesisResult<Real> SynthesizeWithDurations(
    const Model<Real>& model, const std::vector<int>& tokens,
    const SpeakerSource<Real>& speaker, const std::vector<int>& durations);

}  // namespace pefttts

#endif  // PEFTTTS_ACOUSTIC_MODEL_H_
