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

#ifndef PEFTTTS_TRAIN_H_
#define PEFTTTS_TRAIN_H_

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "pefttts/checkpoint.h"
#include "pefttts/graph.h"
#include "pefttts/peft.h"
#include "pefttts/speaker.h"
#include "pefttts/synth_data.h"

namespace pefttts {

struct PitchStats {
  double mean = 0;
  double std = 1;
};

// A pretrained model plus the pitch normalization it was trained with.
template <typename Real>
struct BaseCheckpoint {
  Model<Real> model;
  PitchStats pitch;
  nlohmann::json meta = nlohmann::json::object();
};

template <typename Real>
TensorFile BaseToFile(const BaseCheckpoint<Real>& base);
template <typename Real>
BaseCheckpoint<Real> BaseFromFile(const TensorFile& file);

// Training targets for one utterance in model units.
template <typename Real>
struct Example {
  std::vector<int> tokens;
  std::vector<int> durations;
  Matrix<Real> mel;           // T x mel_dim
  Matrix<Real> pitch;         // N x 1, z-scored
  Matrix<Real> log_duration;  // N x 1
  Matrix<Real> log_prior;     // T x N alignment prior
  int speaker = 0;
};

template <typename Real>
Example<Real> MakeExample(const CorpusEntry& entry, const PitchStats& stats);

// Sums over a batch used to turn per-utterance squared errors into masked
// means over the whole batch.
struct LossNormalizer {
  double mel_elements = 1;
  double tokens = 1;
  double utterances = 1;
};

// Contribution of one utterance to
//   mean (mel) + w.pitch mean (pitch) + w.duration mean (log duration)
//   + w.align forward_sum / T
// An invalid `align_scores` drops the alignment term.
template <typename Real>
Var UtteranceLoss(Tape<Real>& tape, Var mel_pred, const Matrix<Real>& mel,
                  Var pitch_pred, const Matrix<Real>& pitch, Var log_dur_pred,
                  const Matrix<Real>& log_duration, Var align_scores,
                  const LossWeights& weights, const LossNormalizer& norm);

// Single-utterance total loss on plain values.
template <typename Real>
double TotalLoss(const Matrix<Real>& mel_pred, const Matrix<Real>& mel,
                 const Matrix<Real>& pitch_pred, const Matrix<Real>& pitch,
                 const Matrix<Real>& log_dur_pred,
                 const std::vector<int>& durations,
                 const Matrix<Real>* align_scores, const LossWeights& weights);

// Adam restricted to a trainable set. Tensors outside the set are never
// read or written.
template <typename Real>
class Adam {
 public:
  Adam(const OptimizerConfig& config, const TrainableSet& trainable,
       const ParamStore<Real>& params);

  void Step(ParamStore<Real>* params,
            const std::map<std::string, Matrix<Real>>& grads);

  int64_t steps() const { return step_; }
  bool HasState(const std::string& name) const { return m_.count(name) != 0; }

 private:
  OptimizerConfig config_;
  std::map<std::string, Matrix<Real>> m_;
  std::map<std::string, Matrix<Real>> v_;
  int64_t step_ = 0;
};

struct BatchStats {
  double loss = 0;
  double mel_mse = 0;
};

// Forward and backward over a batch; returns the gradient of the batch loss
// for every trainable tensor touched.
template <typename Real>
BatchStats BatchGradients(const Model<Real>& model,
                          const std::set<std::string>& trainable,
                          const std::vector<const Example<Real>*>& batch,
                          const std::vector<SpeakerSource<Real>>& speakers,
                          const LossWeights& weights, bool use_align,
                          uint64_t dropout_seed,
                          std::map<std::string, Matrix<Real>>* grads);

struct PretrainOptions {
  LossWeights weights;
  OptimizerConfig optim;
  int epochs = 30;
  int batch_size = 16;
  uint64_t seed = 1;
  // Duration targets from Viterbi over the aligner instead of the corpus.
  bool aligner_durations = false;
  std::function<void(int epoch, double loss)> on_epoch;
};

template <typename Real>
struct PretrainResult {
  BaseCheckpoint<Real> base;
  std::vector<double> epoch_loss;
  int64_t wall_ms = 0;  // not stored in the checkpoint
};

// Trains every base tensor on the train split. n_speakers in `config` must
// match the corpus.
template <typename Real>
PretrainResult<Real> Pretrain(const ModelConfig& config, const Corpus& corpus,
                              const PretrainOptions& options);

struct AdaptOptions {
  PeftConfig peft;
  LossWeights weights;
  OptimizerConfig optim{2e-4, 0.9, 0.98, 1e-9};
  int steps = 1500;
  int batch_size = 8;
  uint64_t seed = 1;
  // Forward-sum term during adaptation. Off by default: adaptation trains on
  // the corpus durations.
  bool align_loss = false;
  std::function<void(int step, double loss)> on_step;
};

template <typename Real>
struct AdaptResult {
  Model<Real> model;
  TrainableSet trainable;
  DeltaCheckpoint<Real> delta;
  std::vector<double> step_loss;
  int64_t wall_ms = 0;
};

// Model before any adaptation step: fresh PEFT state and the first
// adaptation utterance as the style reference.
template <typename Real>
Model<Real> PrepareAdaptation(const BaseCheckpoint<Real>& base,
                              const std::vector<const CorpusEntry*>& utterances,
                              const PeftConfig& peft, uint64_t seed);

template <typename Real>
AdaptResult<Real> Adapt(const BaseCheckpoint<Real>& base,
                        const Sha256Digest& base_sha256,
                        const std::vector<const CorpusEntry*>& utterances,
                        const AdaptOptions& options);

struct SpeakerReport {
  int speaker = 0;
  int utterances = 0;
  double secs = 0;
  double cfsd = 0;
  double mse_p = 0;
  double mse_d = 0;
  double mel_mse = 0;  // with ground-truth durations
};

struct EvalReport {
  std::string strategy;
  std::vector<SpeakerReport> speakers;
  double secs = 0;
  double cfsd = 0;
  double mse_p = 0;
  double mse_d = 0;
  double mel_mse = 0;
  int64_t params_total = 0;
  int64_t params_trainable = 0;
  int64_t steps = 0;
  int64_t wall_ms = 0;
  std::vector<double> loss_curve;

  // Averages the per-speaker rows into the summary fields.
  void Summarize();
  nlohmann::json ToJson() const;
};

template <typename Real>
SpeakerReport EvaluateSpeaker(const Model<Real>& model,
                              const SpeakerSource<Real>& speaker,
                              const PitchStats& stats,
                              const std::vector<const CorpusEntry*>& test);

}  // namespace pefttts

#endif  // PEFTTTS_TRAIN_H_
