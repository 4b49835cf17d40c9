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

#include "pefttts/acoustic_model.h"

#include <algorithm>
#include <cmath>

#include "pefttts/peft.h"

namespace pefttts {

namespace {

template <typename Real>
Var ConcatSpeaker(ModelGraph<Real>& g, Var x, Var spk) {
  auto& tape = g.tape();
  const int rows = static_cast<int>(g.value(x).rows());
  return tape.ConcatCols(x, tape.BroadcastRows(spk, rows));
}

template <typename Real>
void CheckWidth(ModelGraph<Real>& g, Var v, int width, const char* what) {
  if (g.value(v).cols() != width) {
    throw ConfigError(std::string(what) + " width mismatch");
  }
}

template <typename Real>
Var Projection(ModelGraph<Real>& g, const std::string& p, Var x) {
  if (!g.Has(p + ".lora_a")) return g.Linear(p, x);
  const PeftConfig& pc = g.peft();
  const Real scale = static_cast<Real>(pc.lora_scale / pc.lora_rank);
  return LoraProject(g.tape(), x, g.P(p + ".weight"), g.P(p + ".bias"),
                     g.P(p + ".lora_a"), g.P(p + ".lora_b"), scale);
}

template <typename Real>
Var Predictor(ModelGraph<Real>& g, const std::string& p, Var h, Var spk) {
  auto& tape = g.tape();
  CheckWidth(g, h, g.config().d_model, "predictor input");
  Var x = g.Linear(p + ".input", ConcatSpeaker(g, h, spk));
  x = tape.Relu(g.Conv(p + ".conv1", x));
  x = ConditionalLayerNorm(g, p + ".norm1", x, spk);
  x = MaybeAdapter(g, p + ".block1", x);
  x = tape.Relu(g.Conv(p + ".conv2", x));
  x = ConditionalLayerNorm(g, p + ".norm2", x, spk);
  x = MaybeAdapter(g, p + ".block2", x);
  return g.Linear(p + ".head", x);
}

}  // namespace

template <typename Real>
Var ConditionalLayerNorm(ModelGraph<Real>& g, const std::string& prefix, Var x,
                         Var spk) {
  auto& tape = g.tape();
  CheckWidth(g, spk, g.config().d_spk, "speaker embedding");
  Var gain = g.Linear(prefix + ".gain", spk);
  Var shift = g.Linear(prefix + ".shift", spk);
  Var normed = tape.NormalizeRows(x, static_cast<Real>(g.config().ln_eps));
  return tape.AddRow(tape.MulRow(normed, gain), shift);
}

template <typename Real>
Var SelfAttention(ModelGraph<Real>& g, const std::string& layer, Var x) {
  const std::string p = layer + ".attn";
  Var q = Projection(g, p + ".query", x);
  Var k = Projection(g, p + ".key", x);
  Var v = Projection(g, p + ".value", x);
  Var pk, pv;
  if (g.Has(p + ".prefix_key")) {
    pk = g.P(p + ".prefix_key");
    pv = g.P(p + ".prefix_value");
  }
  Var attended = PrefixAttend(g.tape(), q, k, v, pk, pv, g.config().n_heads);
  return g.Linear(p + ".out", attended);
}

template <typename Real>
Var FftLayer(ModelGraph<Real>& g, const std::string& layer, Var x, Var spk) {
  auto& tape = g.tape();
  CheckWidth(g, x, g.config().d_model, "FFT input");
  Var a = SelfAttention(g, layer, x);
  x = ConditionalLayerNorm(g, layer + ".norm1", tape.Add(x, a), spk);
  Var f = tape.Relu(g.Conv(layer + ".ff.conv1", x));
  f = g.Conv(layer + ".ff.conv2", f);
  x = ConditionalLayerNorm(g, layer + ".norm2", tape.Add(x, f), spk);
  return MaybeAdapter(g, layer, x);
}

template <typename Real>
Var Encode(ModelGraph<Real>& g, const std::vector<int>& tokens, Var spk) {
  const ModelConfig& c = g.config();
  if (tokens.empty()) throw InputError("empty phoneme sequence");
  for (int t : tokens) {
    if (t < 0 || t >= c.vocab_size) {
      throw InputError("phoneme id out of range: " + std::to_string(t));
    }
  }
  auto& tape = g.tape();
  const int n = static_cast<int>(tokens.size());
  Var x = tape.GatherRows(g.P("encoder.embed"), tokens);
  x = tape.Add(x, g.Constant(PositionalEncoding<Real>(n, c.d_model)));
  x = g.Linear("encoder.input", ConcatSpeaker(g, x, spk));
  for (const auto& layer : EncoderLayerNames(c)) x = FftLayer(g, layer, x, spk);
  return x;
}

template <typename Real>
Var PredictPitch(ModelGraph<Real>& g, Var h, Var spk) {
  return Predictor(g, "pitch_predictor", h, spk);
}

template <typename Real>
Var PredictLogDuration(ModelGraph<Real>& g, Var h, Var spk) {
  return Predictor(g, "duration_predictor", h, spk);
}

template <typename Real>
Var AddPitch(ModelGraph<Real>& g, Var h, Var pitch) {
  return g.tape().Add(h, g.Linear("pitch_embed", pitch));
}

template <typename Real>
Var LengthRegulate(ModelGraph<Real>& g, Var x,
                   const std::vector<int>& durations) {
  if (static_cast<Eigen::Index>(durations.size()) != g.value(x).rows()) {
    throw InputError("durations length != token count");
  }
  std::vector<int> index;
  for (size_t n = 0; n < durations.size(); ++n) {
    if (durations[n] < 1) throw InputError("duration < 1");
    index.insert(index.end(), durations[n], static_cast<int>(n));
  }
  return g.tape().GatherRows(x, index);
}

template <typename Real>
Var Decode(ModelGraph<Real>& g, Var upsampled, Var spk) {
  const ModelConfig& c = g.config();
  const int frames = static_cast<int>(g.value(upsampled).rows());
  if (frames > c.max_frames) {
    throw CapacityError("decoded length " + std::to_string(frames) +
                        " exceeds max_frames");
  }
  CheckWidth(g, upsampled, c.d_model, "decoder input");
  auto& tape = g.tape();
  Var x = tape.Add(upsampled,
                   g.Constant(PositionalEncoding<Real>(frames, c.d_model)));
  x = g.Linear("decoder.input", ConcatSpeaker(g, x, spk));
  for (const auto& layer : DecoderLayerNames(c)) x = FftLayer(g, layer, x, spk);
  return g.Linear("decoder.out", x);
}

template <typename Real>
std::vector<int> DurationsFromLog(const Matrix<Real>& log_durations,
                                  int max_frames) {
  std::vector<int> d(log_durations.size());
  for (Eigen::Index i = 0; i < log_durations.size(); ++i) {
    double frames = std::round(std::exp(double(log_durations.data()[i])));
    if (!std::isfinite(frames)) frames = max_frames;
    d[i] = static_cast<int>(std::clamp(frames, 1.0, double(max_frames)));
  }
  return d;
}

namespace {

template <typename Real>
SynthesisResult<Real> Run(const Model<Real>& model,
                          const std::vector<int>& tokens,
                          const SpeakerSource<Real>& speaker,
                          const std::vector<int>* durations) {
  ModelGraph<Real> g(model);
  SpeakerVars spk = SpeakerEmbedding(g, speaker);
  Var h = Encode(g, tokens, spk.final);
  Var pitch = PredictPitch(g, h, spk.final);
  Var log_d = PredictLogDuration(g, h, spk.final);
  SynthesisResult<Real> out;
  out.pitch = g.value(pitch);
  out.log_duration = g.value(log_d);
  out.durations = durations != nullptr
                      ? *durations
                      : DurationsFromLog(out.log_duration,
                                         g.config().max_frames);
  Var up = LengthRegulate(g, AddPitch(g, h, pitch), out.durations);
  out.mel = g.value(Decode(g, up, spk.final));
  return out;
}

}  // namespace

template <typename Real>
SynthesisResult<Real> Synthesize(const Model<Real>& model,
                                 const std::vector<int>& tokens,
                                 const SpeakerSource<Real>& speaker) {
  return Run(model, tokens, speaker, nullptr);
}

template <typename Real>
SynthesisResult<Real> SynthesizeWithDurations(
    const Model<Real>& model, const std::vector<int>& tokens,
    const SpeakerSource<Real>& speaker, const std::vector<int>& durations) {
  return Run(model, tokens, speaker, &durations);
}

#define PEFTTTS_INSTANTIATE(R)                                                \
  template Var ConditionalLayerNorm<R>(ModelGraph<R>&, const std::string&,    \
                                       Var, Var);                             \
  template Var SelfAttention<R>(ModelGraph<R>&, const std::string&, Var);     \
  template Var FftLayer<R>(ModelGraph<R>&, const std::string&, Var, Var);     \
  template Var Encode<R>(ModelGraph<R>&, const std::vector<int>&, Var);       \
  template Var PredictPitch<R>(ModelGraph<R>&, Var, Var);                     \
  template Var PredictLogDuration<R>(ModelGraph<R>&, Var, Var);               \
  template Var AddPitch<R>(ModelGraph<R>&, Var, Var);                         \
  template Var LengthRegulate<R>(ModelGraph<R>&, Var,                         \
                                 const std::vector<int>&);                    \
  template Var Decode<R>(ModelGraph<R>&, Var, Var);                           \
  template std::vector<int> DurationsFromLog<R>(const Matrix<R>&, int);       \
  template SynthesisResult<R> Synthesize<R>(                                  \
      const Model<R>&, const std::vector<int>&, const SpeakerSource<R>&);     \
  template SynthesisResult<R> SynthesizeWithDurations<R>(                     \
      const Model<R>&, const std::vector<int>&, const SpeakerSource<R>&,      \
      const std::vector<int>&);

PEFTTTS_INSTANTIATE(float)
PEFTTTS_INSTANTIATE(double)

#undef PEFTTTS_INSTANTIATE

}  // namespace pefttts
