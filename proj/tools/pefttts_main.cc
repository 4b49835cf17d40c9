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

// pefttts: corpus generation, pretraining, speaker adaptation, synthesis and
// evaluation from the command line.
//
// Exit codes: 0 ok, 1 runtime error, 2 usage or configuration error,
// 3 incompatible delta.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "glog/logging.h"
#include "json.hpp"
#include "pefttts/acoustic_model.h"
#include "pefttts/checkpoint.h"
#include "pefttts/config.h"
#include "pefttts/peft.h"
#include "pefttts/synth_data.h"
#include "pefttts/train.h"

namespace pefttts {
namespace {

using nlohmann::json;

class UsageError : public Error {
 public:
  using Error::Error;
};

void PrintSummary(const json& j) { std::cout << j.dump() << std::endl; }

void WriteJson(const std::string& path, const json& j) {
  WriteFileAtomic(path, j.dump(2) + "\n");
}

Corpus LoadCorpus(const std::string& path) {
  return CorpusFromFile(ParseTensorFile(ReadFileBytes(path)));
}

struct RawBase {
  std::string bytes;
  TensorFile file;
  Sha256Digest sha{};
  Precision precision = Precision::kFloat32;
};

RawBase LoadRawBase(const std::string& path) {
  RawBase raw;
  raw.bytes = ReadFileBytes(path);
  raw.file = ParseTensorFile(raw.bytes);
  raw.sha = Sha256(raw.bytes);
  try {
    raw.precision =
        raw.file.config.at("model").get<ModelConfig>().precision;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad base config: ") + e.what());
  }
  return raw;
}

std::vector<int> ParseIds(const std::string& text) {
  std::vector<int> ids;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      size_t used = 0;
      ids.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad phoneme id: " + item);
    }
  }
  return ids;
}

int FirstHeldOut(const Corpus& corpus) {
  for (size_t s = 0; s < corpus.held_out.size(); ++s) {
    if (corpus.held_out[s]) return static_cast<int>(s);
  }
  throw UsageError("corpus has no held-out speaker; pass --speaker");
}

// Pretraining run configuration. Every section is optional; unknown keys are
// rejected.
struct RunConfig {
  ModelConfig model;
  LossWeights weights;
  OptimizerConfig optim;
  int epochs = 30;
  int batch_size = 16;
  bool aligner_durations = false;
};

RunConfig LoadRunConfig(const std::string& path) {
  RunConfig rc;
  if (path.empty()) return rc;
  json j;
  try {
    j = json::parse(ReadFileBytes(path));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "model") {
        rc.model = value.get<ModelConfig>();
      } else if (key == "weights") {
        rc.weights = value.get<LossWeights>();
      } else if (key == "optim") {
        rc.optim = value.get<OptimizerConfig>();
      } else if (key == "epochs") {
        rc.epochs = value.get<int>();
      } else if (key == "batch_size") {
        rc.batch_size = value.get<int>();
      } else if (key == "aligner_durations") {
        rc.aligner_durations = value.get<bool>();
      } else {
        throw ConfigError("unknown config key: " + key);
      }
    } catch (const json::exception& e) {
      throw ConfigError("bad config value for " + key + ": " + e.what());
    }
  }
  return rc;
}

template <typename Real>
int RunPretrain(const RunConfig& rc, const Corpus& corpus, uint64_t seed,
                const std::string& out) {
  PretrainOptions opt;
  opt.weights = rc.weights;
  opt.optim = rc.optim;
  opt.epochs = rc.epochs;
  opt.batch_size = rc.batch_size;
  opt.seed = seed;
  opt.aligner_durations = rc.aligner_durations;
  PretrainResult<Real> result = Pretrain<Real>(rc.model, corpus, opt);
  const std::string bytes = SerializeTensorFile(BaseToFile(result.base));
  WriteFileAtomic(out, bytes);
  PrintSummary({{"command", "pretrain"},
                {"out", out},
                {"sha256", HexDigest(Sha256(bytes))},
                {"params_total", result.base.model.registry.CountParams()},
                {"epochs", rc.epochs},
                {"initial_loss",
                 result.epoch_loss.empty() ? 0.0 : result.epoch_loss.front()},
                {"final_loss",
                 result.epoch_loss.empty() ? 0.0 : result.epoch_loss.back()},
                {"wall_ms", result.wall_ms}});
  return 0;
}

struct AdaptArgs {
  std::string base, data, out, report;
  std::string strategy = "adapter";
  int steps = 1500;
  double lr = 2e-4;
  int batch_size = 8;
  int speaker = -1;
  int utts = 0;
  uint64_t seed = 1;
  bool align_loss = false;
};

template <typename Real>
int RunAdapt(const RawBase& raw, const AdaptArgs& a) {
  const BaseCheckpoint<Real> base = BaseFromFile<Real>(raw.file);
  const Corpus corpus = LoadCorpus(a.data);
  const int speaker = a.speaker >= 0 ? a.speaker : FirstHeldOut(corpus);
  std::vector<const CorpusEntry*> utts = corpus.Select(speaker, Split::kAdapt);
  if (utts.empty()) utts = corpus.Select(speaker, Split::kTrain);
  if (a.utts > 0 && static_cast<size_t>(a.utts) < utts.size()) {
    utts.resize(a.utts);
  }
  if (utts.empty()) throw InputError("empty adaptation set");

  AdaptOptions opt;
  opt.peft.strategy = StrategyFromString(a.strategy);
  if (opt.peft.strategy == Strategy::kNone) {
    throw UsageError("strategy must be one of adapter, lora, prefix, bitfit, full");
  }
  opt.steps = a.steps;
  opt.optim.lr = a.lr;
  opt.batch_size = a.batch_size;
  opt.seed = a.seed;
  opt.align_loss = a.align_loss;
  AdaptResult<Real> result = Adapt(base, raw.sha, utts, opt);
  result.delta.meta["speaker"] = speaker;
  const std::string bytes = SerializeTensorFile(DeltaToFile(result.delta));
  WriteFileAtomic(a.out, bytes);

  EvalReport report;
  report.strategy = a.strategy;
  report.params_total = result.model.registry.CountParams();
  report.params_trainable = result.trainable.CountParams(result.model.registry);
  report.steps = a.steps;
  report.wall_ms = result.wall_ms;
  report.loss_curve = result.step_loss;
  std::vector<const CorpusEntry*> test = corpus.Select(speaker, Split::kTest);
  if (!test.empty()) {
    report.speakers.push_back(EvaluateSpeaker(
        result.model, SpeakerSource<Real>::Adapted(), base.pitch, test));
  }
  report.Summarize();
  if (!a.report.empty()) WriteJson(a.report, report.ToJson());
  json summary = report.ToJson();
  summary.erase("loss_curve");
  summary.erase("speakers");
  summary["command"] = "adapt";
  summary["out"] = a.out;
  summary["speaker"] = speaker;
  PrintSummary(summary);
  return 0;
}

template <typename Real>
Model<Real> ModelWithDelta(const RawBase& raw, const BaseCheckpoint<Real>& base,
                           const std::string& delta_path, int* speaker) {
  if (delta_path.empty()) return base.model;
  const DeltaCheckpoint<Real> delta = DeltaFromFile<Real>(
      ParseTensorFile(ReadFileBytes(delta_path)));
  if (*speaker < 0) *speaker = delta.meta.value("speaker", -1);
  return ApplyDelta(base.model, raw.sha, delta);
}

template <typename Real>
int RunSynth(const RawBase& raw, const std::string& delta_path,
             const std::string& text_ids, int speaker, const std::string& out) {
  const BaseCheckpoint<Real> base = BaseFromFile<Real>(raw.file);
  int ignored = 0;
  const Model<Real> model = ModelWithDelta(raw, base, delta_path, &ignored);
  const std::vector<int> tokens = ParseIds(text_ids);
  SpeakerSource<Real> source = SpeakerSource<Real>::Adapted();
  if (delta_path.empty()) {
    if (speaker < 0) throw UsageError("--speaker is required without --delta");
    source = SpeakerSource<Real>::Pretrained(speaker);
  }
  const SynthesisResult<Real> r = Synthesize(model, tokens, source);
  json mel = json::array();
  for (Eigen::Index t = 0; t < r.mel.rows(); ++t) {
    json row = json::array();
    for (Eigen::Index c = 0; c < r.mel.cols(); ++c) {
      row.push_back(static_cast<double>(r.mel(t, c)));
    }
    mel.push_back(std::move(row));
  }
  std::vector<double> pitch;
  for (Eigen::Index i = 0; i < r.pitch.rows(); ++i) {
    pitch.push_back(static_cast<double>(r.pitch(i, 0)) * base.pitch.std +
                    base.pitch.mean);
  }
  WriteJson(out, {{"tokens", tokens},
                  {"durations", r.durations},
                  {"pitch_hz", pitch},
                  {"mel", mel}});
  PrintSummary({{"command", "synth"},
                {"out", out},
                {"frames", r.mel.rows()},
                {"tokens", tokens.size()}});
  return 0;
}

template <typename Real>
int RunEval(const RawBase& raw, const std::string& delta_path,
            const std::string& testset, int speaker, const std::string& out) {
  const BaseCheckpoint<Real> base = BaseFromFile<Real>(raw.file);
  const Corpus corpus = LoadCorpus(testset);
  Model<Real> model = ModelWithDelta(raw, base, delta_path, &speaker);
  EvalReport report;
  report.strategy = StrategyName(model.registry.peft().strategy);
  std::vector<int> speakers;
  if (speaker >= 0) {
    speakers.push_back(speaker);
  } else {
    for (size_t s = 0; s < corpus.held_out.size(); ++s) {
      speakers.push_back(static_cast<int>(s));
    }
  }
  for (int s : speakers) {
    if (s >= static_cast<int>(corpus.held_out.size())) {
      throw UsageError("speaker " + std::to_string(s) + " not in corpus");
    }
    std::vector<const CorpusEntry*> test = corpus.Select(s, Split::kTest);
    if (test.empty()) test = corpus.Select(s, Split::kTrain);
    if (test.empty()) continue;
    if (!delta_path.empty()) {
      report.speakers.push_back(EvaluateSpeaker(
          model, SpeakerSource<Real>::Adapted(), base.pitch, test));
    } else if (!corpus.held_out[s] && s < model.registry.model().n_speakers) {
      report.speakers.push_back(EvaluateSpeaker(
          model, SpeakerSource<Real>::Pretrained(s), base.pitch, test));
    } else {
      // Unseen speaker without a delta: the identity-initialized adapter
      // model, i.e. the mean speaker vector plus the style embedding of the
      // first adaptation utterance.
      std::vector<const CorpusEntry*> ref = corpus.Select(s, Split::kAdapt);
      if (ref.empty()) ref = test;
      PeftConfig peft;
      peft.strategy = Strategy::kAdapter;
      const Model<Real> plain = PrepareAdaptation(base, ref, peft, 0);
      report.speakers.push_back(EvaluateSpeaker(
          plain, SpeakerSource<Real>::Adapted(), base.pitch, test));
    }
  }
  report.params_total = model.registry.CountParams();
  if (model.registry.peft().strategy != Strategy::kNone) {
    report.params_trainable =
        BuildTrainableSet(model.registry).CountParams(model.registry);
  }
  report.Summarize();
  WriteJson(out, report.ToJson());
  json summary = report.ToJson();
  summary.erase("speakers");
  summary.erase("loss_curve");
  summary["command"] = "eval";
  summary["report"] = out;
  PrintSummary(summary);
  return 0;
}

int RunParams(const std::string& base_path, const std::string& strategy) {
  ModelConfig config;
  if (!base_path.empty()) {
    const TensorFile file = ParseTensorFile(ReadFileBytes(base_path));
    try {
      config = file.config.at("model").get<ModelConfig>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("bad base config: ") + e.what());
    }
  }
  std::vector<Strategy> strategies;
  if (strategy == "all") {
    strategies = {Strategy::kAdapter, Strategy::kLora, Strategy::kPrefix,
                  Strategy::kBitFit, Strategy::kFull};
  } else {
    strategies = {StrategyFromString(strategy)};
    if (strategies[0] == Strategy::kNone) {
      throw UsageError("strategy must be adapter, lora, prefix, bitfit, full or all");
    }
  }
  json rows = json::array();
  for (Strategy s : strategies) {
    PeftConfig peft;
    peft.strategy = s;
    rows.push_back(ParamsSummary(config, peft));
  }
  PrintSummary(rows.size() == 1 ? rows[0]
                                : json{{"command", "params"},
                                       {"strategies", rows}});
  return 0;
}

int Main(int argc, char** argv) {
  CLI::App app{"Parameter-efficient speaker adaptation for a multi-speaker "
               "acoustic model"};
  app.require_subcommand(1);

  CorpusOptions corpus_opt;
  std::string corpus_out;
  auto* gen = app.add_subcommand("gen-corpus", "write a synthetic corpus");
  gen->add_option("--speakers", corpus_opt.n_speakers, "pretraining speakers");
  gen->add_option("--utts", corpus_opt.utts_per_speaker,
                  "utterances per pretraining speaker");
  gen->add_option("--seed", corpus_opt.seed, "corpus seed");
  gen->add_option("--heldout", corpus_opt.n_heldout, "unseen speakers");
  gen->add_option("--adapt-utts", corpus_opt.heldout_adapt,
                  "adaptation utterances per unseen speaker");
  gen->add_option("--test-utts", corpus_opt.heldout_test,
                  "test utterances per unseen speaker");
  gen->add_option("--out", corpus_out, "output corpus file")->required();

  std::string config_path, pretrain_corpus, pretrain_out;
  uint64_t pretrain_seed = 1;
  int epochs_override = -1;
  auto* pre = app.add_subcommand("pretrain", "train the base model");
  pre->add_option("--config", config_path, "run config JSON");
  pre->add_option("--corpus", pretrain_corpus, "corpus file")->required();
  pre->add_option("--out", pretrain_out, "base checkpoint")->required();
  pre->add_option("--seed", pretrain_seed, "initialization and batching seed");
  pre->add_option("--epochs", epochs_override,
                  "override the configured epoch count");

  AdaptArgs adapt_args;
  auto* ad = app.add_subcommand("adapt", "adapt the base model to a speaker");
  ad->add_option("--base", adapt_args.base, "base checkpoint")->required();
  ad->add_option("--strategy", adapt_args.strategy,
                 "adapter, lora, prefix, bitfit or full");
  ad->add_option("--data", adapt_args.data, "corpus file")->required();
  ad->add_option("--steps", adapt_args.steps, "optimizer steps");
  ad->add_option("--lr", adapt_args.lr, "learning rate");
  ad->add_option("--batch", adapt_args.batch_size, "batch size");
  ad->add_option("--speaker", adapt_args.speaker,
                 "speaker id (default: first held-out speaker)");
  ad->add_option("--utts", adapt_args.utts,
                 "use only the first N adaptation utterances");
  ad->add_option("--seed", adapt_args.seed, "adaptation seed");
  ad->add_option("--out", adapt_args.out, "delta checkpoint")->required();
  ad->add_option("--report", adapt_args.report, "evaluation report JSON");
  ad->add_flag("--align-loss", adapt_args.align_loss,
               "keep the forward-sum alignment loss during adaptation");

  std::string synth_base, synth_delta, text_ids, synth_out;
  int synth_speaker = -1;
  uint64_t synth_seed = 0;
  auto* sy = app.add_subcommand("synth", "synthesize a mel spectrogram");
  sy->add_option("--base", synth_base, "base checkpoint")->required();
  sy->add_option("--delta", synth_delta, "speaker delta");
  sy->add_option("--text-ids", text_ids, "comma-separated phoneme ids")
      ->required();
  sy->add_option("--speaker", synth_speaker, "pretrained speaker id");
  sy->add_option("--seed", synth_seed, "unused; synthesis is deterministic");
  sy->add_option("--out", synth_out, "output JSON")->required();

  std::string eval_base, eval_delta, testset, eval_report;
  int eval_speaker = -1;
  uint64_t eval_seed = 0;
  auto* ev = app.add_subcommand("eval", "objective evaluation");
  ev->add_option("--base", eval_base, "base checkpoint")->required();
  ev->add_option("--delta", eval_delta, "speaker delta");
  ev->add_option("--testset", testset, "corpus file")->required();
  ev->add_option("--speaker", eval_speaker, "speaker id");
  ev->add_option("--seed", eval_seed, "unused; evaluation is deterministic");
  ev->add_option("--report", eval_report, "report JSON")->required();

  std::string params_base, params_strategy = "all";
  auto* pa = app.add_subcommand("params", "trainable parameter counts");
  pa->add_option("--base", params_base, "base checkpoint (default config if absent)");
  pa->add_option("--strategy", params_strategy,
                 "adapter, lora, prefix, bitfit, full or all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      if (corpus_opt.n_speakers < 1 || corpus_opt.utts_per_speaker < 1 ||
          corpus_opt.n_heldout < 0) {
        throw UsageError("--speakers and --utts must be >= 1");
      }
      const Corpus corpus = MakeCorpus(corpus_opt);
      const std::string bytes = SerializeTensorFile(CorpusToFile(corpus));
      WriteFileAtomic(corpus_out, bytes);
      WriteJson(corpus_out + ".json", CorpusManifest(corpus));
      PrintSummary({{"command", "gen-corpus"},
                    {"out", corpus_out},
                    {"utterances", corpus.entries.size()},
                    {"sha256", HexDigest(Sha256(bytes))}});
      return 0;
    }
    if (pre->parsed()) {
      RunConfig rc = LoadRunConfig(config_path);
      if (epochs_override >= 0) rc.epochs = epochs_override;
      const Corpus corpus = LoadCorpus(pretrain_corpus);
      rc.model.n_speakers = corpus.options.n_speakers;
      rc.model.vocab_size = corpus.options.vocab_size;
      rc.model.mel_dim = corpus.options.mel_dim;
      rc.model.Validate();
      return rc.model.precision == Precision::kFloat64
                 ? RunPretrain<double>(rc, corpus, pretrain_seed, pretrain_out)
                 : RunPretrain<float>(rc, corpus, pretrain_seed, pretrain_out);
    }
    if (ad->parsed()) {
      const RawBase raw = LoadRawBase(adapt_args.base);
      return raw.precision == Precision::kFloat64
                 ? RunAdapt<double>(raw, adapt_args)
                 : RunAdapt<float>(raw, adapt_args);
    }
    if (sy->parsed()) {
      const RawBase raw = LoadRawBase(synth_base);
      return raw.precision == Precision::kFloat64
                 ? RunSynth<double>(raw, synth_delta, text_ids, synth_speaker,
                                    synth_out)
                 : RunSynth<float>(raw, synth_delta, text_ids, synth_speaker,
                                   synth_out);
    }
    if (ev->parsed()) {
      const RawBase raw = LoadRawBase(eval_base);
      return raw.precision == Precision::kFloat64
                 ? RunEval<double>(raw, eval_delta, testset, eval_speaker,
                                   eval_report)
                 : RunEval<float>(raw, eval_delta, testset, eval_speaker,
                                  eval_report);
    }
    if (pa->parsed()) return RunParams(params_base, params_strategy);
  } catch (const IncompatibleDeltaError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 3;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << std::endl;
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 2;
}

}  // namespace
}  // namespace pefttts

int main(int argc, char** argv) {
  google::InitGoogleLogging(argv[0]);
  FLAGS_logtostderr = true;
  return pefttts::Main(argc, argv);
}
