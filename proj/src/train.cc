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

#include "pefttts/train.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "glog/logging.h"
#include "pefttts/acoustic_model.h"
#include "pefttts/align.h"
#include "pefttts/aligner.h"
#include "pefttts/metrics.h"

namespace pefttts {
namespace {

uint64_t Mix(uint64_t a, uint64_t b) {
  uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

int64_t ElapsedMs(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now() - start)
      .count();
}

template <typename Real>
Matrix<Real> Column(const std::vector<double>& v) {
  Matrix<Real> m(v.size(), 1);
  for (size_t i = 0; i < v.size(); ++i) m(i, 0) = static_cast<Real>(v[i]);
  return m;
}

std::vector<double> Flatten(const Matrix<double>& m) {
  return std::vector<double>(m.data(), m.data() + m.size());
}

}  // namespace

template <typename Real>
TensorFile BaseToFile(const BaseCheckpoint<Real>& base) {
  TensorFile file;
  file.kind = FileKind::kBase;
  for (const auto& [name, t] : base.model.params.tensors()) {
    file.tensors.push_back(ToStored(name, t));
  }
  file.config = {{"model", base.model.registry.model()},
                 {"pitch", {{"mean", base.pitch.mean}, {"std", base.pitch.std}}},
                 {"meta", base.meta}};
  return file;
}

template <typename Real>
BaseCheckpoint<Real> BaseFromFile(const TensorFile& file) {
  if (file.kind != FileKind::kBase) throw InputError("not a base checkpoint");
  BaseCheckpoint<Real> base;
  ModelConfig config;
  try {
    config = file.config.at("model").get<ModelConfig>();
    base.pitch.mean = file.config.at("pitch").at("mean").get<double>();
    base.pitch.std = file.config.at("pitch").at("std").get<double>();
    base.meta = file.config.value("meta", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad base config: ") + e.what());
  }
  base.model.registry = Registry::Build(config, PeftConfig{});
  for (const auto& t : file.tensors) {
    const ParamSpec* spec = base.model.registry.Find(t.name);
    if (spec == nullptr) throw ConfigError("unknown base tensor " + t.name);
    if (spec->role != ParamRole::kBuffer && t.tensor.shape != spec->shape) {
      throw ConfigError("shape mismatch for base tensor " + t.name);
    }
    base.model.params.Set(t.name, FromStored<Real>(t));
  }
  for (const auto& s : base.model.registry.specs()) {
    if (s.role != ParamRole::kBuffer && !base.model.params.Contains(s.name)) {
      throw ConfigError("base checkpoint lacks tensor " + s.name);
    }
  }
  return base;
}

template <typename Real>
Example<Real> MakeExample(const CorpusEntry& entry, const PitchStats& stats) {
  const UtteranceSample& s = entry.sample;
  Example<Real> ex;
  ex.tokens = s.tokens;
  ex.durations = s.durations;
  ex.speaker = entry.speaker;
  ex.mel = s.mel.cast<Real>();
  std::vector<double> z(s.pitch.size()), logd(s.durations.size());
  for (size_t i = 0; i < z.size(); ++i) {
    z[i] = (s.pitch[i] - stats.mean) / stats.std;
  }
  for (size_t i = 0; i < logd.size(); ++i) logd[i] = std::log(s.durations[i]);
  ex.pitch = Column<Real>(z);
  ex.log_duration = Column<Real>(logd);
  ex.log_prior =
      BetaBinomialPrior(static_cast<int>(s.mel.rows()),
                        static_cast<int>(s.tokens.size()))
          .cast<Real>();
  return ex;
}

template <typename Real>
Var UtteranceLoss(Tape<Real>& tape, Var mel_pred, const Matrix<Real>& mel,
                  Var pitch_pred, const Matrix<Real>& pitch, Var log_dur_pred,
                  const Matrix<Real>& log_duration, Var align_scores,
                  const LossWeights& weights, const LossNormalizer& norm) {
  Var loss = tape.Scale(tape.SquaredError(mel_pred, mel),
                        static_cast<Real>(1.0 / norm.mel_elements));
  loss = tape.Add(
      loss, tape.Scale(tape.SquaredError(pitch_pred, pitch),
                       static_cast<Real>(weights.pitch / norm.tokens)));
  loss = tape.Add(
      loss, tape.Scale(tape.SquaredError(log_dur_pred, log_duration),
                       static_cast<Real>(weights.duration / norm.tokens)));
  if (align_scores.valid() && weights.align != 0) {
    const double frames = static_cast<double>(tape.value(align_scores).rows());
    loss = tape.Add(
        loss, tape.Scale(ForwardSumLoss(tape, align_scores),
                         static_cast<Real>(weights.align /
                                           (frames * norm.utterances))));
  }
  return loss;
}

template <typename Real>
double TotalLoss(const Matrix<Real>& mel_pred, const Matrix<Real>& mel,
                 const Matrix<Real>& pitch_pred, const Matrix<Real>& pitch,
                 const Matrix<Real>& log_dur_pred,
                 const std::vector<int>& durations,
                 const Matrix<Real>* align_scores, const LossWeights& weights) {
  if (mel_pred.rows() != mel.rows() || mel_pred.cols() != mel.cols() ||
      pitch_pred.size() != pitch.size() ||
      log_dur_pred.size() != static_cast<Eigen::Index>(durations.size())) {
    throw ConfigError("loss input shapes disagree");
  }
  Tape<Real> tape;
  Matrix<Real> logd(durations.size(), 1);
  for (size_t i = 0; i < durations.size(); ++i) {
    if (durations[i] < 1) throw InputError("durations must be >= 1");
    logd(i, 0) = static_cast<Real>(std::log(durations[i]));
  }
  LossNormalizer norm;
  norm.mel_elements = static_cast<double>(mel.size());
  norm.tokens = static_cast<double>(durations.size());
  norm.utterances = 1;
  Var scores;
  if (align_scores != nullptr) scores = tape.Constant(*align_scores);
  Var loss = UtteranceLoss(
      tape, tape.Constant(mel_pred), mel, tape.Constant(pitch_pred), pitch,
      tape.Constant(log_dur_pred), logd, scores, weights, norm);
  return static_cast<double>(tape.value(loss)(0, 0));
}

template <typename Real>
Adam<Real>::Adam(const OptimizerConfig& config, const TrainableSet& trainable,
                 const ParamStore<Real>& params)
    : config_(config) {
  for (const auto& name : trainable.names) {
    const Matrix<Real>& p = params.Value(name);
    m_.emplace(name, Matrix<Real>::Zero(p.rows(), p.cols()));
    v_.emplace(name, Matrix<Real>::Zero(p.rows(), p.cols()));
  }
}

template <typename Real>
void Adam<Real>::Step(ParamStore<Real>* params,
                      const std::map<std::string, Matrix<Real>>& grads) {
  ++step_;
  const double c1 = 1.0 - std::pow(config_.beta1, double(step_));
  const double c2 = 1.0 - std::pow(config_.beta2, double(step_));
  const Real b1 = static_cast<Real>(config_.beta1);
  const Real b2 = static_cast<Real>(config_.beta2);
  const Real step_size = static_cast<Real>(config_.lr / c1);
  const Real inv_c2 = static_cast<Real>(1.0 / c2);
  const Real eps = static_cast<Real>(config_.eps);
  for (const auto& [name, g] : grads) {
    auto mit = m_.find(name);
    if (mit == m_.end()) continue;
    Matrix<Real>& m = mit->second;
    Matrix<Real>& v = v_.at(name);
    m = b1 * m + (Real(1) - b1) * g;
    v = b2 * v + (Real(1) - b2) * g.cwiseProduct(g);
    Matrix<Real>& p = params->Mutable(name).data;
    p.array() -= step_size * m.array() /
                 ((v.array() * inv_c2).sqrt() + eps);
  }
}

template <typename Real>
BatchStats BatchGradients(const Model<Real>& model,
                          const std::set<std::string>& trainable,
                          const std::vector<const Example<Real>*>& batch,
                          const std::vector<SpeakerSource<Real>>& speakers,
                          const LossWeights& weights, bool use_align,
                          uint64_t dropout_seed,
                          std::map<std::string, Matrix<Real>>* grads) {
  if (batch.size() != speakers.size() || batch.empty()) {
    throw ConfigError("batch and speaker lists must be non-empty and aligned");
  }
  LossNormalizer norm;
  norm.mel_elements = 0;
  norm.tokens = 0;
  norm.utterances = static_cast<double>(batch.size());
  for (const auto* ex : batch) {
    norm.mel_elements += static_cast<double>(ex->mel.size());
    norm.tokens += static_cast<double>(ex->tokens.size());
  }
  grads->clear();
  BatchStats stats;
  double mel_sse = 0;
  for (size_t i = 0; i < batch.size(); ++i) {
    const Example<Real>& ex = *batch[i];
    ModelGraph<Real> g(model, &trainable,
                       ForwardOptions{true, Mix(dropout_seed, i)});
    auto& tape = g.tape();
    SpeakerVars spk = SpeakerEmbedding(g, speakers[i]);
    Var h = Encode(g, ex.tokens, spk.final);
    Var pitch = PredictPitch(g, h, spk.final);
    Var log_dur = PredictLogDuration(g, h, spk.final);
    Var x = AddPitch(g, h, g.Constant(ex.pitch));
    Var mel = Decode(g, LengthRegulate(g, x, ex.durations), spk.final);
    Var scores;
    if (use_align && weights.align != 0) {
      Var logits = AlignLogits(g, ex.tokens, g.Constant(ex.mel), spk.final);
      scores = tape.Add(logits, g.Constant(ex.log_prior));
    }
    Var loss = UtteranceLoss(tape, mel, ex.mel, pitch, ex.pitch, log_dur,
                             ex.log_duration, scores, weights, norm);
    tape.Backward(loss);
    stats.loss += static_cast<double>(tape.value(loss)(0, 0));
    mel_sse += static_cast<double>((g.value(mel) - ex.mel).squaredNorm());
    for (auto& [name, grad] : g.Gradients()) {
      auto it = grads->find(name);
      if (it == grads->end()) {
        grads->emplace(name, std::move(grad));
      } else {
        it->second += grad;
      }
    }
  }
  stats.mel_mse = mel_sse / norm.mel_elements;
  return stats;
}

template <typename Real>
PretrainResult<Real> Pretrain(const ModelConfig& config, const Corpus& corpus,
                              const PretrainOptions& options) {
  config.Validate();
  options.weights.Validate();
  if (config.n_speakers != corpus.options.n_speakers ||
      config.vocab_size != corpus.options.vocab_size ||
      config.mel_dim != corpus.options.mel_dim) {
    throw ConfigError("model config does not match the corpus");
  }
  if (options.epochs < 0 || options.batch_size < 1) {
    throw ConfigError("epochs must be >= 0 and batch size >= 1");
  }
  PretrainResult<Real> result;
  BaseCheckpoint<Real>& base = result.base;
  base.pitch = PitchStats{corpus.pitch_mean, corpus.pitch_std};
  base.model.registry = Registry::Build(config, PeftConfig{});
  base.model.params =
      InitializeParams<Real>(base.model.registry, ParamRole::kBase, options.seed);

  std::vector<Example<Real>> examples;
  std::vector<std::vector<size_t>> by_speaker(config.n_speakers);
  for (const auto& e : corpus.entries) {
    if (e.split != Split::kTrain || e.speaker >= config.n_speakers) continue;
    by_speaker[e.speaker].push_back(examples.size());
    examples.push_back(MakeExample<Real>(e, base.pitch));
  }
  if (examples.empty()) throw InputError("corpus has no training utterances");
  for (int s = 0; s < config.n_speakers; ++s) {
    if (by_speaker[s].empty()) {
      throw InputError("speaker " + std::to_string(s) + " has no utterances");
    }
  }

  std::set<std::string> trainable;
  TrainableSet all;
  for (const auto& s : base.model.registry.specs()) {
    if (s.role == ParamRole::kBase) {
      trainable.insert(s.name);
      all.names.insert(s.name);
    }
  }
  Adam<Real> adam(options.optim, all, base.model.params);
  std::mt19937_64 rng(Mix(options.seed, 0x7a11));
  std::vector<size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::map<std::string, Matrix<Real>> grads;
  std::vector<Matrix<Real>> references(examples.size());
  int64_t step = 0;
  const auto start = std::chrono::steady_clock::now();

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0;
    int batches = 0;
    for (size_t b = 0; b < order.size(); b += options.batch_size) {
      const size_t end = std::min(order.size(), b + options.batch_size);
      std::vector<const Example<Real>*> batch;
      std::vector<SpeakerSource<Real>> speakers;
      std::vector<Example<Real>> aligned;
      aligned.reserve(end - b);
      for (size_t i = b; i < end; ++i) {
        const Example<Real>& ex = examples[order[i]];
        const auto& pool = by_speaker[ex.speaker];
        std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
        const size_t ref = pool[pick(rng)];
        speakers.push_back(SpeakerSource<Real>{ex.speaker, &examples[ref].mel});
        if (options.aligner_durations) {
          ModelGraph<Real> g(base.model);
          SpeakerVars spk = SpeakerEmbedding(g, speakers.back());
          Var logits = AlignLogits(g, ex.tokens, g.Constant(ex.mel), spk.final);
          Matrix<Real> scores = g.value(logits) + ex.log_prior;
          Example<Real> copy = ex;
          copy.durations = ViterbiDurations(scores).durations;
          for (size_t k = 0; k < copy.durations.size(); ++k) {
            copy.log_duration(k, 0) =
                static_cast<Real>(std::log(copy.durations[k]));
          }
          aligned.push_back(std::move(copy));
          batch.push_back(&aligned.back());
        } else {
          batch.push_back(&ex);
        }
      }
      BatchStats st =
          BatchGradients(base.model, trainable, batch, speakers,
                         options.weights, true, Mix(options.seed, step), &grads);
      adam.Step(&base.model.params, grads);
      epoch_loss += st.loss;
      ++batches;
      ++step;
    }
    epoch_loss /= std::max(1, batches);
    result.epoch_loss.push_back(epoch_loss);
    LOG(INFO) << "pretrain epoch " << epoch + 1 << "/" << options.epochs
              << " loss " << epoch_loss;
    if (options.on_epoch) options.on_epoch(epoch + 1, epoch_loss);
  }

  for (int s = 0; s < config.n_speakers; ++s) {
    base.model.params.Set(
        ReferenceBufferName(s),
        Tensor<Real>::FromMatrix(examples[by_speaker[s].front()].mel));
  }
  base.meta = {{"epochs", options.epochs},
               {"batch_size", options.batch_size},
               {"steps", step},
               {"lr", options.optim.lr},
               {"seed", options.seed},
               {"weights", options.weights}};
  result.wall_ms = ElapsedMs(start);
  return result;
}

template <typename Real>
Model<Real> PrepareAdaptation(const BaseCheckpoint<Real>& base,
                              const std::vector<const CorpusEntry*>& utterances,
                              const PeftConfig& peft, uint64_t seed) {
  if (utterances.empty()) throw InputError("no adaptation utterances");
  return InjectPeft(base.model, peft,
                    Matrix<Real>(utterances.front()->sample.mel.cast<Real>()),
                    Mix(seed, 0xada7));
}

template <typename Real>
AdaptResult<Real> Adapt(const BaseCheckpoint<Real>& base,
                        const Sha256Digest& base_sha256,
                        const std::vector<const CorpusEntry*>& utterances,
                        const AdaptOptions& options) {
  options.peft.Validate();
  options.weights.Validate();
  if (options.steps < 0 || options.batch_size < 1) {
    throw ConfigError("steps must be >= 0 and batch size >= 1");
  }
  const auto start = std::chrono::steady_clock::now();
  AdaptResult<Real> result;
  result.model = PrepareAdaptation(base, utterances, options.peft, options.seed);
  result.trainable = BuildTrainableSet(result.model.registry);

  std::vector<Example<Real>> examples;
  for (const auto* e : utterances) {
    examples.push_back(MakeExample<Real>(*e, base.pitch));
  }
  Adam<Real> adam(options.optim, result.trainable, result.model.params);
  const size_t batch_size =
      std::min(static_cast<size_t>(options.batch_size), examples.size());
  std::mt19937_64 rng(Mix(options.seed, 0x5eed));
  std::vector<size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  size_t cursor = order.size();
  std::map<std::string, Matrix<Real>> grads;
  const SpeakerSource<Real> adapted = SpeakerSource<Real>::Adapted();

  for (int step = 0; step < options.steps; ++step) {
    std::vector<const Example<Real>*> batch;
    while (batch.size() < batch_size) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      batch.push_back(&examples[order[cursor++]]);
    }
    std::vector<SpeakerSource<Real>> speakers(batch.size(), adapted);
    BatchStats st = BatchGradients(result.model, result.trainable.names, batch,
                                   speakers, options.weights,
                                   options.align_loss,
                                   Mix(options.seed, 0x100000 + step), &grads);
    adam.Step(&result.model.params, grads);
    result.step_loss.push_back(st.loss);
    if (options.on_step) options.on_step(step + 1, st.loss);
  }
  result.wall_ms = ElapsedMs(start);
  result.delta = ExportDelta(result.model, base_sha256, result.trainable);
  result.delta.meta = {{"strategy", StrategyName(options.peft.strategy)},
                       {"steps", options.steps},
                       {"batch_size", static_cast<int64_t>(batch_size)},
                       {"lr", options.optim.lr},
                       {"seed", options.seed},
                       {"utterances", static_cast<int64_t>(examples.size())},
                       {"align_loss", options.align_loss},
                       {"weights", options.weights}};
  return result;
}

void EvalReport::Summarize() {
  secs = cfsd = mse_p = mse_d = mel_mse = 0;
  if (speakers.empty()) return;
  for (const auto& s : speakers) {
    secs += s.secs;
    cfsd += s.cfsd;
    mse_p += s.mse_p;
    mse_d += s.mse_d;
    mel_mse += s.mel_mse;
  }
  const double n = static_cast<double>(speakers.size());
  secs /= n;
  cfsd /= n;
  mse_p /= n;
  mse_d /= n;
  mel_mse /= n;
}

nlohmann::json EvalReport::ToJson() const {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& s : speakers) {
    per.push_back({{"speaker", s.speaker},
                   {"utterances", s.utterances},
                   {"secs", s.secs},
                   {"cfsd", s.cfsd},
                   {"mse_p", s.mse_p},
                   {"mse_d", s.mse_d},
                   {"mel_mse", s.mel_mse}});
  }
  return {{"strategy", strategy},
          {"secs", secs},
          {"cfsd", cfsd},
          {"mse_p", mse_p},
          {"mse_d", mse_d},
          {"mel_mse", mel_mse},
          {"params_total", params_total},
          {"params_trainable", params_trainable},
          {"steps", steps},
          {"wall_ms", wall_ms},
          {"loss_curve", loss_curve},
          {"speakers", per}};
}

template <typename Real>
SpeakerReport EvaluateSpeaker(const Model<Real>& model,
                              const SpeakerSource<Real>& speaker,
                              const PitchStats& stats,
                              const std::vector<const CorpusEntry*>& test) {
  if (test.empty()) throw InputError("no test utterances");
  SpeakerReport report;
  report.speaker = test.front()->speaker;
  report.utterances = static_cast<int>(test.size());
  std::vector<double> p_pred, p_true, d_pred, d_true;
  std::vector<Utterance> generated, reference;
  double mel_sse = 0;
  double mel_count = 0;
  for (const auto* e : test) {
    const Example<double> ex = MakeExample<double>(*e, stats);
    SynthesisResult<Real> free = Synthesize(model, ex.tokens, speaker);
    SynthesisResult<Real> forced =
        SynthesizeWithDurations(model, ex.tokens, speaker, ex.durations);
    const Matrix<double> pitch = free.pitch.template cast<double>();
    const Matrix<double> logd = free.log_duration.template cast<double>();
    for (Eigen::Index i = 0; i < pitch.rows(); ++i) {
      p_pred.push_back(pitch(i, 0));
      p_true.push_back(ex.pitch(i, 0));
      d_pred.push_back(logd(i, 0));
      d_true.push_back(ex.log_duration(i, 0));
    }
    mel_sse += (forced.mel.template cast<double>() - ex.mel).squaredNorm();
    mel_count += static_cast<double>(ex.mel.size());
    generated.push_back(
        Utterance{free.mel.template cast<double>(), Flatten(pitch)});
    reference.push_back(Utterance{ex.mel, Flatten(ex.pitch)});
  }
  report.mse_p = MsePitch(p_pred, p_true);
  report.mse_d = MseDuration(d_pred, d_true);
  report.mel_mse = mel_sse / mel_count;
  report.secs = SecsProxy(generated, reference);
  std::vector<const Matrix<double>*> gen_mels, ref_mels;
  for (const auto& u : generated) gen_mels.push_back(&u.mel);
  for (const auto& u : reference) ref_mels.push_back(&u.mel);
  report.cfsd = CfsdProxy({gen_mels}, {ref_mels});
  return report;
}

#define PEFTTTS_INSTANTIATE(R)                                                 \
  template TensorFile BaseToFile<R>(const BaseCheckpoint<R>&);                 \
  template BaseCheckpoint<R> BaseFromFile<R>(const TensorFile&);               \
  template Example<R> MakeExample<R>(const CorpusEntry&, const PitchStats&);   \
  template Var UtteranceLoss<R>(Tape<R>&, Var, const Matrix<R>&, Var,          \
                                const Matrix<R>&, Var, const Matrix<R>&, Var,  \
                                const LossWeights&, const LossNormalizer&);    \
  template double TotalLoss<R>(const Matrix<R>&, const Matrix<R>&,             \
                               const Matrix<R>&, const Matrix<R>&,             \
                               const Matrix<R>&, const std::vector<int>&,      \
                               const Matrix<R>*, const LossWeights&);          \
  template class Adam<R>;                                                      \
  template BatchStats BatchGradients<R>(                                       \
      const Model<R>&, const std::set<std::string>&,                           \
      const std::vector<const Example<R>*>&,                                   \
      const std::vector<SpeakerSource<R>>&, const LossWeights&, bool,          \
      uint64_t, std::map<std::string, Matrix<R>>*);                            \
  template PretrainResult<R> Pretrain<R>(const ModelConfig&, const Corpus&,    \
                                         const PretrainOptions&);              \
  template Model<R> PrepareAdaptation<R>(                                      \
      const BaseCheckpoint<R>&, const std::vector<const CorpusEntry*>&,        \
      const PeftConfig&, uint64_t);                                            \
  template AdaptResult<R> Adapt<R>(const BaseCheckpoint<R>&,                   \
                                   const Sha256Digest&,                        \
                                   const std::vector<const CorpusEntry*>&,     \
                                   const AdaptOptions&);                       \
  template SpeakerReport EvaluateSpeaker<R>(                                   \
      const Model<R>&, const SpeakerSource<R>&, const PitchStats&,             \
      const std::vector<const CorpusEntry*>&);

PEFTTTS_INSTANTIATE(float)
PEFTTTS_INSTANTIATE(double)

#undef PEFTTTS_INSTANTIATE

}  // namespace pefttts
