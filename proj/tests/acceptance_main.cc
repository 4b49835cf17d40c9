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


// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "glog/logging.h"
#include "pefttts/acoustic_model.h"
#include "pefttts/align.h"
#include "pefttts/metrics.h"
#include "pefttts/peft.h"
#include "pefttts/train.h"
#include "test_support.h"

namespace pefttts {
namespace {

// Tolerances and budgets.
constexpr double kIdentityBudgetS = 10;
constexpr double kForgettingBudgetS = 120;
constexpr double kGradBudgetS = 180;
constexpr int kGradInstances = 5;
constexpr double kGradRtol = 1e-4;
constexpr double kDpBudgetS = 30;
constexpr double kDpTol = 1e-9;
constexpr int kDpMatrices = 100;
constexpr double kFrechetTol = 1e-8;
constexpr double kFrechetClosedFormTol = 1e-9;
constexpr double kMaxAdapterFraction = 0.10;
constexpr double kQualityBudgetS = 15 * 60;
constexpr double kUnadaptedRatio = 0.5;
constexpr double kFullRatio = 2.0;
constexpr double kSecsRatio = 0.9;
constexpr double kBudgetBudgetS = 20 * 60;
constexpr double kInversionTol = 0.05;

// The fixed-seed experiment.
constexpr int kSpeakers = 8;
constexpr int kUttsPerSpeaker = 50;
constexpr int kHeldOut = 2;
constexpr int kAdaptUtts = 25;
constexpr int kTestUtts = 20;
constexpr uint64_t kCorpusSeed = 7;
constexpr int kSteps = 1500;

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void Report(int id, const std::string& name, bool pass,
            const std::string& detail) {
  std::printf("criterion %d %-18s %s  %s\n", id, name.c_str(),
              pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string Fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string Fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

template <typename Real>
bool SameBits(const Matrix<Real>& a, const Matrix<Real>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(Real) * a.size()) == 0;
}

template <typename Real>
bool SameSynthesis(const SynthesisResult<Real>& a,
                   const SynthesisResult<Real>& b) {
  return a.durations == b.durations && SameBits(a.mel, b.mel) &&
         SameBits(a.pitch, b.pitch) && SameBits(a.log_duration, b.log_duration);
}

std::string TensorHash(const Tensor<float>& t) {
  return HexDigest(Sha256(std::string_view(
      reinterpret_cast<const char*>(t.data.data()), sizeof(float) * t.data.size())));
}

std::vector<int> RandomTokens(std::mt19937_64& rng, int vocab) {
  std::uniform_int_distribution<int> len(3, 15), tok(0, vocab - 1);
  std::vector<int> out(len(rng));
  for (int& t : out) t = tok(rng);
  return out;
}

// 1. Synthesis through freshly injected adapter or LoRA tensors equals the
// base path bit for bit.
template <typename Real>
bool IdentityAtInit(const ModelConfig& config, uint64_t seed, int inputs,
                    int* checked) {
  const Registry reg = Registry::Build(config, PeftConfig{});
  Model<Real> base{reg, InitializeParams<Real>(reg, ParamRole::kBase, seed)};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0, 1);
  for (int s = 0; s < config.n_speakers; ++s) {
    Matrix<Real> ref(30, config.mel_dim);
    for (Eigen::Index i = 0; i < ref.size(); ++i) ref.data()[i] = Real(n(rng));
    base.params.Set(ReferenceBufferName(s), Tensor<Real>::FromMatrix(ref));
  }
  bool ok = true;
  for (Strategy strategy : {Strategy::kAdapter, Strategy::kLora}) {
    PeftConfig peft;
    peft.strategy = strategy;
    const Model<Real> injected = InjectPeft(
        base, peft, base.params.Value(ReferenceBufferName(0)), seed + 1);
    std::mt19937_64 inputs_rng(seed + 2);
    std::uniform_int_distribution<int> spk(0, config.n_speakers - 1);
    for (int i = 0; i < inputs; ++i) {
      const std::vector<int> tokens = RandomTokens(inputs_rng, config.vocab_size);
      const auto src = SpeakerSource<Real>::Pretrained(spk(inputs_rng));
      ok &= SameSynthesis(Synthesize(base, tokens, src),
                          Synthesize(injected, tokens, src));
      ++*checked;
    }
  }
  return ok;
}

void Criterion1() {
  const auto start = Clock::now();
  int checked = 0;
  ModelConfig c32;
  ModelConfig c64;
  c64.precision = Precision::kFloat64;
  const bool ok = IdentityAtInit<float>(c32, 101, 20, &checked) &&
                  IdentityAtInit<double>(c64, 202, 20, &checked);
  const double t = Seconds(start);
  Report(1, "identity-at-init", ok && t < kIdentityBudgetS,
         Fmt("%d syntheses bit-identical=%s, %.1fs (< %.0fs)", checked,
             ok ? "yes" : "no", t, kIdentityBudgetS));
}

struct Experiment {
  Corpus corpus;
  PretrainResult<float> pretrained;
  Sha256Digest sha{};
  double pretrain_s = 0;
  // (speaker, strategy, utterances) -> held-out evaluation
  std::map<std::tuple<int, std::string, int>, SpeakerReport> results;
  std::map<std::tuple<int, std::string, int>, double> seconds;

  std::vector<const CorpusEntry*> AdaptSet(int speaker, int utts) const {
    auto all = corpus.Select(speaker, Split::kAdapt);
    all.resize(std::min<size_t>(all.size(), utts));
    return all;
  }
};

Experiment* exp_ = nullptr;

void BuildExperiment() {
  CorpusOptions o;
  o.n_speakers = kSpeakers;
  o.utts_per_speaker = kUttsPerSpeaker;
  o.n_heldout = kHeldOut;
  o.heldout_adapt = kAdaptUtts;
  o.heldout_test = kTestUtts;
  o.seed = kCorpusSeed;
  exp_ = new Experiment{MakeCorpus(o), {}, {}, 0, {}, {}};
  ModelConfig config;
  config.n_speakers = kSpeakers;
  PretrainOptions p;
  const auto start = Clock::now();
  exp_->pretrained = Pretrain<float>(config, exp_->corpus, p);
  exp_->pretrain_s = Seconds(start);
  exp_->sha = Sha256(SerializeTensorFile(BaseToFile(exp_->pretrained.base)));
  LOG(INFO) << "pretrained in " << exp_->pretrain_s << "s, loss "
            << exp_->pretrained.epoch_loss.front() << " -> "
            << exp_->pretrained.epoch_loss.back();
}

int HeldOutSpeaker(int k) { return kSpeakers + k; }

AdaptResult<float> RunAdapt(int speaker, Strategy strategy, int utts) {
  AdaptOptions o;
  o.peft.strategy = strategy;
  o.steps = kSteps;
  const auto start = Clock::now();
  AdaptResult<float> r = Adapt(exp_->pretrained.base, exp_->sha,
                               exp_->AdaptSet(speaker, utts), o);
  const auto key = std::make_tuple(speaker, StrategyName(strategy), utts);
  exp_->seconds[key] = Seconds(start);
  exp_->results[key] = EvaluateSpeaker(
      r.model, SpeakerSource<float>::Adapted(), exp_->pretrained.base.pitch,
      exp_->corpus.Select(speaker, Split::kTest));
  LOG(INFO) << "adapt speaker " << speaker << " " << StrategyName(strategy)
            << " x" << utts << ": mel_mse " << exp_->results[key].mel_mse
            << " secs " << exp_->results[key].secs << " in "
            << exp_->seconds[key] << "s";
  return r;
}

// 2. A full adaptation run leaves the base untouched.
void Criterion2() {
  const auto& base = exp_->pretrained.base;
  const auto base_bytes = SerializeTensorFile(BaseToFile(base));
  std::map<std::string, std::string> hashes;
  for (const auto& [name, t] : base.model.params.tensors()) {
    hashes[name] = TensorHash(t);
  }
  std::mt19937_64 rng(5);
  std::vector<std::vector<int>> inputs;
  for (int i = 0; i < 3; ++i) inputs.push_back(RandomTokens(rng, 40));
  std::vector<SynthesisResult<float>> before;
  for (int s = 0; s < kSpeakers; ++s) {
    for (const auto& tokens : inputs) {
      before.push_back(
          Synthesize(base.model, tokens, SpeakerSource<float>::Pretrained(s)));
    }
  }

  const AdaptResult<float> r =
      RunAdapt(HeldOutSpeaker(0), Strategy::kAdapter, kAdaptUtts);
  const double t = exp_->seconds[{HeldOutSpeaker(0), "adapter", kAdaptUtts}];

  bool outputs_ok = true;
  size_t k = 0;
  for (int s = 0; s < kSpeakers; ++s) {
    for (const auto& tokens : inputs) {
      outputs_ok &= SameSynthesis(
          before[k++],
          Synthesize(base.model, tokens, SpeakerSource<float>::Pretrained(s)));
    }
  }
  int frozen = 0, frozen_ok = 0;
  for (const auto& [name, hash] : hashes) {
    if (r.trainable.Contains(name)) continue;
    ++frozen;
    frozen_ok += TensorHash(r.model.params.Get(name)) == hash &&
                 TensorHash(base.model.params.Get(name)) == hash;
  }
  const bool file_ok = SerializeTensorFile(BaseToFile(base)) == base_bytes;
  const bool ok = outputs_ok && frozen == frozen_ok && file_ok && frozen > 0;
  Report(2, "no-forgetting", ok && t < kForgettingBudgetS,
         Fmt("%d speakers x %zu inputs identical=%s, frozen hashes %d/%d, "
             "base file identical=%s, adapt %.1fs (< %.0fs)",
             kSpeakers, inputs.size(), outputs_ok ? "yes" : "no", frozen_ok,
             frozen, file_ok ? "yes" : "no", t, kForgettingBudgetS));
}

// 3. Analytic vs central finite-difference gradients, float64.
void Criterion3() {
  const auto start = Clock::now();
  bool ok = true;
  std::string worst_name;
  double worst = 0;
  int components = 0;
  for (const auto& c : testing::ComponentGradCases()) {
    ++components;
    for (int i = 0; i < kGradInstances; ++i) {
      const testing::GradCheckResult r = c.run(1000 + i);
      const bool pass =
          r.rel_error <= kGradRtol && r.grad_norm > 0 && r.entries > 0;
      ok &= pass;
      if (r.rel_error > worst) {
        worst = r.rel_error;
        worst_name = c.component;
      }
      if (!pass) {
        LOG(WARNING) << c.component << " seed " << 1000 + i << " rel error "
                     << r.rel_error << " grad norm " << r.grad_norm;
      }
    }
  }
  const double t = Seconds(start);
  Report(3, "gradient-suite", ok && t < kGradBudgetS,
         Fmt("%d components x %d instances, worst rel err %.2e (%s) <= %.0e, "
             "%.1fs (< %.0fs)",
             components, kGradInstances, worst, worst_name.c_str(), kGradRtol,
             t, kGradBudgetS));
}

// 4. Dynamic programs vs exhaustive path enumeration.
void Criterion4() {
  const auto start = Clock::now();
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<int> td(1, 8);
  double worst = 0;
  bool durations_ok = true, argmax_ok = true;
  for (int i = 0; i < kDpMatrices; ++i) {
    const int t = td(rng);
    std::uniform_int_distribution<int> nd(1, std::min(t, 5));
    const int n = nd(rng);
    const Matrix<double> s = testing::RandomMatrix(rng, t, n, 2.0);
    const auto oracle = testing::EnumerateAlignments(s);
    const auto fs = ForwardSum(s);
    const auto vit = ViterbiDurations(s);
    worst = std::max({worst, std::abs(fs.loss + oracle.log_sum),
                      std::abs(vit.score - oracle.best),
                      (fs.gradient + oracle.posterior).cwiseAbs().maxCoeff()});
    argmax_ok &= vit.durations == oracle.best_durations;
    durations_ok &=
        std::accumulate(vit.durations.begin(), vit.durations.end(), 0) == t &&
        *std::min_element(vit.durations.begin(), vit.durations.end()) >= 1;
  }
  const double t = Seconds(start);
  const bool ok = worst <= kDpTol && durations_ok && argmax_ok;
  Report(4, "dp-oracle", ok && t < kDpBudgetS,
         Fmt("%d matrices, max abs err %.1e (<= %.0e), durations valid=%s, "
             "argmax=%s, %.2fs (< %.0fs)",
             kDpMatrices, worst, kDpTol, durations_ok ? "yes" : "no",
             argmax_ok ? "yes" : "no", t, kDpBudgetS));
}

// 5. Frechet distance properties.
void Criterion5() {
  std::mt19937_64 rng(55);
  double self_worst = 0, sym_worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + trial % 8;
    const Matrix<double> a = testing::RandomMatrix(rng, d, d);
    const Matrix<double> b = testing::RandomMatrix(rng, d, d);
    const Matrix<double> s1 = a * a.transpose() + 0.1 * Matrix<double>::Identity(d, d);
    const Matrix<double> s2 = b * b.transpose();
    const RowVector<double> m1 = testing::RandomMatrix(rng, 1, d);
    const RowVector<double> m2 = testing::RandomMatrix(rng, 1, d);
    self_worst = std::max(self_worst, std::abs(FrechetGaussian(m1, s1, m1, s1)));
    sym_worst = std::max(sym_worst, std::abs(FrechetGaussian(m1, s1, m2, s2) -
                                             FrechetGaussian(m2, s2, m1, s1)));
  }
  const RowVector<double> zero = RowVector<double>::Zero(1);
  const RowVector<double> one = RowVector<double>::Ones(1);
  const Matrix<double> unit = Matrix<double>::Identity(1, 1);
  const double closed = FrechetGaussian(zero, unit, one, unit);
  const bool ok = self_worst <= kFrechetTol && sym_worst <= kFrechetTol &&
                  std::abs(closed - 1.0) <= kFrechetClosedFormTol;
  Report(5, "frechet", ok,
         Fmt("self %.1e, asymmetry %.1e (<= %.0e), N(0,1) vs N(1,1) = %.12f "
             "(1 +- %.0e)",
             self_worst, sym_worst, kFrechetTol, closed,
             kFrechetClosedFormTol));
}

// 6. Trainable-parameter accounting at the default configuration, against
// counts derived by hand from the layer shapes.
void Criterion6() {
  const ModelConfig c;
  const int64_t d = c.d_model, w = c.predictor_width, a = c.align_width;
  const int64_t layers = c.n_enc_layers + c.n_dec_layers;
  const int64_t mix = c.n_speakers;
  auto adapter = [](int64_t width, int64_t b) {
    return 2 * width + width * b + b + b * width + width;
  };
  PeftConfig p;
  const int64_t bneck = p.adapter_bottleneck;
  std::map<std::string, int64_t> expected = {
      {"adapter", layers * adapter(d, bneck) + 4 * adapter(w, bneck) +
                      2 * adapter(a, bneck) + mix},
      {"lora", layers * 2 * (2 * p.lora_rank * d) + mix},
      {"prefix", layers * 2 * p.prefix_len * d + mix},
  };
  std::map<std::string, int64_t> got;
  double adapter_fraction = 0;
  bool exact = true;
  for (Strategy s : {Strategy::kAdapter, Strategy::kLora, Strategy::kPrefix,
                     Strategy::kBitFit}) {
    p.strategy = s;
    const nlohmann::json j = ParamsSummary(c, p);
    got[StrategyName(s)] = j["params_trainable"].get<int64_t>();
    if (s == Strategy::kAdapter) adapter_fraction = j["fraction"].get<double>();
  }
  // BitFit: every bias of the base. Per FFT layer: four attention
  // projections, two CLNs (gain and shift), two convs. Per predictor: input,
  // two convs, two CLNs, head.
  const int64_t fft = 4 * d + 2 * 2 * d + c.d_ff + d;
  const int64_t predictor = d + 2 * w + 2 * 2 * w + 1;
  const int64_t style = 2 * c.ref_channels + 2 * 3 * c.ref_hidden + 4 * c.d_spk;
  expected["bitfit"] = d + layers * fft + 2 * predictor + d + d + c.mel_dim +
                       style + 4 * a + mix;
  for (const auto& [name, n] : expected) exact &= got.at(name) == n;
  bool prefix_smallest = true;
  for (const auto& [name, n] : got) {
    if (name != "prefix") prefix_smallest &= got.at("prefix") < n;
  }
  const bool ok =
      exact && prefix_smallest && adapter_fraction < kMaxAdapterFraction;
  Report(6, "param-accounting", ok,
         Fmt("adapter %lld (%.2f%% < %.0f%%), lora %lld, prefix %lld, bitfit "
             "%lld; exact=%s, prefix smallest=%s",
             static_cast<long long>(got["adapter"]), 100 * adapter_fraction,
             100 * kMaxAdapterFraction, static_cast<long long>(got["lora"]),
             static_cast<long long>(got["prefix"]),
             static_cast<long long>(got["bitfit"]), exact ? "yes" : "no",
             prefix_smallest ? "yes" : "no"));
}

SpeakerReport Unadapted(int speaker) {
  PeftConfig peft;
  peft.strategy = Strategy::kAdapter;
  const Model<float> plain = PrepareAdaptation(
      exp_->pretrained.base, exp_->AdaptSet(speaker, kAdaptUtts), peft, 0);
  return EvaluateSpeaker(plain, SpeakerSource<float>::Adapted(),
                         exp_->pretrained.base.pitch,
                         exp_->corpus.Select(speaker, Split::kTest));
}

// 7. Adapter vs un-adapted base and full fine-tuning on held-out speakers.
void Criterion7() {
  double secs_spent = exp_->pretrain_s;
  double un = 0, ad = 0, full = 0, secs_ad = 0, secs_full = 0;
  for (int k = 0; k < kHeldOut; ++k) {
    const int s = HeldOutSpeaker(k);
    un += Unadapted(s).mel_mse / kHeldOut;
    for (Strategy st : {Strategy::kAdapter, Strategy::kFull}) {
      const auto key = std::make_tuple(s, StrategyName(st), kAdaptUtts);
      if (!exp_->results.count(key)) RunAdapt(s, st, kAdaptUtts);
      secs_spent += exp_->seconds[key];
      const SpeakerReport& r = exp_->results[key];
      (st == Strategy::kAdapter ? ad : full) += r.mel_mse / kHeldOut;
      (st == Strategy::kAdapter ? secs_ad : secs_full) += r.secs / kHeldOut;
    }
  }
  const bool ok = ad < kUnadaptedRatio * un && ad <= kFullRatio * full &&
                  secs_ad >= kSecsRatio * secs_full;
  Report(7, "adaptation-quality", ok && secs_spent < kQualityBudgetS,
         Fmt("mel mse adapter %.5f, un-adapted %.5f (ratio %.3f < %.1f), full "
             "%.5f (ratio %.3f <= %.1f); secs adapter %.4f vs full %.4f "
             "(ratio %.4f >= %.1f); %.0fs (< %.0fs)",
             ad, un, ad / un, kUnadaptedRatio, full, ad / full, kFullRatio,
             secs_ad, secs_full, secs_ad / secs_full, kSecsRatio, secs_spent,
             kQualityBudgetS));
}

// 8. Held-out error vs adaptation data budget.
void Criterion8() {
  const std::vector<int> budgets = {2, 8, 25};
  double secs_spent = 0;
  std::vector<double> mse;
  for (int n : budgets) {
    double m = 0;
    for (int k = 0; k < kHeldOut; ++k) {
      const int s = HeldOutSpeaker(k);
      const auto key = std::make_tuple(s, std::string("adapter"), n);
      if (!exp_->results.count(key)) RunAdapt(s, Strategy::kAdapter, n);
      secs_spent += exp_->seconds[key];
      m += exp_->results[key].mel_mse / kHeldOut;
    }
    mse.push_back(m);
  }
  int inversions = 0;
  bool small = true;
  for (size_t i = 1; i < mse.size(); ++i) {
    if (mse[i] > mse[i - 1]) {
      ++inversions;
      small &= (mse[i] - mse[i - 1]) / mse[i - 1] <= kInversionTol;
    }
  }
  const bool ok = inversions == 0 || (inversions == 1 && small);
  Report(8, "data-budget", ok && secs_spent < kBudgetBudgetS,
         Fmt("mel mse at {2, 8, 25} utts: %.5f, %.5f, %.5f; inversions %d; "
             "%.0fs (< %.0fs)",
             mse[0], mse[1], mse[2], inversions, secs_spent, kBudgetBudgetS));
}

// 9. Determinism and serialization stability on a small configuration.
struct SmallRun {
  std::string corpus, base, delta, report;
};

SmallRun RunSmall() {
  CorpusOptions o;
  o.n_speakers = 3;
  o.utts_per_speaker = 6;
  o.n_heldout = 1;
  o.heldout_adapt = 4;
  o.heldout_test = 3;
  o.seed = 99;
  const Corpus corpus = MakeCorpus(o);
  ModelConfig c;
  c.n_speakers = 3;
  c.d_model = 32;
  c.d_ff = 32;
  c.d_spk = 16;
  PretrainOptions p;
  p.epochs = 2;
  p.batch_size = 4;
  const auto pre = Pretrain<float>(c, corpus, p);
  SmallRun out;
  out.corpus = SerializeTensorFile(CorpusToFile(corpus));
  out.base = SerializeTensorFile(BaseToFile(pre.base));
  AdaptOptions a;
  a.peft.strategy = Strategy::kAdapter;
  a.steps = 20;
  const auto r = Adapt(pre.base, Sha256(out.base), corpus.Select(3, Split::kAdapt), a);
  out.delta = SerializeTensorFile(DeltaToFile(r.delta));
  EvalReport report;
  report.strategy = "adapter";
  report.speakers.push_back(EvaluateSpeaker(r.model, SpeakerSource<float>::Adapted(),
                                            pre.base.pitch,
                                            corpus.Select(3, Split::kTest)));
  report.loss_curve = r.step_loss;
  report.steps = a.steps;
  report.Summarize();
  // Wall time is the one field that legitimately differs between runs.
  report.wall_ms = 0;
  out.report = report.ToJson().dump();
  return out;
}

void Criterion9() {
  const SmallRun a = RunSmall();
  const SmallRun b = RunSmall();
  const bool runs = a.corpus == b.corpus && a.base == b.base &&
                    a.delta == b.delta && a.report == b.report;
  const std::string corpus2 =
      SerializeTensorFile(CorpusToFile(CorpusFromFile(ParseTensorFile(a.corpus))));
  const std::string base2 = SerializeTensorFile(
      BaseToFile(BaseFromFile<float>(ParseTensorFile(a.base))));
  const std::string delta2 = SerializeTensorFile(
      DeltaToFile(DeltaFromFile<float>(ParseTensorFile(a.delta))));
  const bool trip = corpus2 == a.corpus && base2 == a.base && delta2 == a.delta;
  // The large experiment's base as well.
  const std::string big = SerializeTensorFile(BaseToFile(exp_->pretrained.base));
  const bool big_trip =
      SerializeTensorFile(BaseToFile(BaseFromFile<float>(ParseTensorFile(big)))) ==
      big;
  Report(9, "determinism", runs && trip && big_trip,
         Fmt("two runs identical (corpus, base, delta, report)=%s, "
             "write-read-write identical=%s",
             runs ? "yes" : "no", trip && big_trip ? "yes" : "no"));
}

}  // namespace
}  // namespace pefttts

int main(int, char** argv) {
  google::InitGoogleLogging(argv[0]);
  FLAGS_logtostderr = true;
  FLAGS_minloglevel = 1;
  Eigen::setNbThreads(1);
  using namespace pefttts;
  const auto start = Clock::now();
  Criterion1();
  BuildExperiment();
  Criterion2();
  Criterion3();
  Criterion4();
  Criterion5();
  Criterion6();
  Criterion7();
  Criterion8();
  Criterion9();
  std::printf("%d criteria failed, %.0fs total\n", failures, Seconds(start));
  return failures == 0 ? 0 : 1;
}
