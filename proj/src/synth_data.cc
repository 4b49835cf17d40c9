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

#include "pefttts/synth_data.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>

namespace pefttts {

namespace {

uint64_t SplitMix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t Mix(uint64_t a, uint64_t b) { return SplitMix(a ^ SplitMix(b)); }

double Uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int UniformInt(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

std::string UttKey(size_t i, const char* field) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "utt.%06zu.%s", i, field);
  return buf;
}

}  // namespace

SpeakerLatent MakeSpeaker(uint64_t seed, int mel_dim) {
  std::mt19937_64 rng(SplitMix(seed));
  SpeakerLatent s;
  s.seed = seed;
  s.base_pitch = Uniform(rng, 90.0, 240.0);
  s.pitch_range = Uniform(rng, 10.0, 40.0);
  s.rate = std::exp(Uniform(rng, std::log(0.6), std::log(1.7)));
  const double slope = Uniform(rng, -0.8, 0.8);
  const double wave = Uniform(rng, 0.0, 0.4);
  const double phase = Uniform(rng, 0.0, 2.0 * std::numbers::pi);
  s.spectral_tilt.resize(mel_dim);
  for (int c = 0; c < mel_dim; ++c) {
    const double x = double(c) / (mel_dim - 1);
    s.spectral_tilt[c] =
        slope * (2.0 * x - 1.0) +
        wave * std::sin(2.0 * std::numbers::pi * x * 1.5 + phase);
  }
  s.formant_shift = UniformInt(rng, -2, 2);
  return s;
}

PhonemeInventory MakeInventory(int vocab_size, int mel_dim, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  PhonemeInventory inv;
  inv.templates.resize(vocab_size, mel_dim);
  for (int v = 0; v < vocab_size; ++v) {
    std::vector<double> raw(mel_dim);
    for (auto& x : raw) x = normal(rng);
    for (int c = 0; c < mel_dim; ++c) {
      const double left = raw[std::max(c - 1, 0)];
      const double right = raw[std::min(c + 1, mel_dim - 1)];
      inv.templates(v, c) = 0.25 * left + 0.5 * raw[c] + 0.25 * right;
    }
    inv.templates.row(v) *= 1.0 / std::max(1e-6, inv.templates.row(v).cwiseAbs().maxCoeff());
    inv.base_duration.push_back(UniformInt(rng, 1, 4));
    inv.accent.push_back(Uniform(rng, -0.5, 0.5));
  }
  return inv;
}

UtteranceSample RenderUtterance(const PhonemeInventory& inventory,
                                const std::vector<int>& tokens,
                                const SpeakerLatent& speaker, uint64_t utt_seed,
                                double noise_sigma) {
  if (tokens.empty()) throw InputError("empty phoneme sequence");
  const int mel_dim = static_cast<int>(inventory.templates.cols());
  const int n = static_cast<int>(tokens.size());
  std::mt19937_64 rng(SplitMix(utt_seed));
  std::normal_distribution<double> normal(0.0, 1.0);

  UtteranceSample u;
  u.tokens = tokens;
  for (int i = 0; i < n; ++i) {
    const int ph = tokens[i];
    if (ph < 0 || ph >= inventory.templates.rows()) {
      throw InputError("phoneme id out of range");
    }
    const double jitter = Uniform(rng, 0.8, 1.25);
    const double frames =
        std::round(speaker.rate * inventory.base_duration[ph] * jitter);
    u.durations.push_back(
        static_cast<int>(std::clamp(frames, 1.0, double(kMaxTokenFrames))));
    const double contour =
        0.6 * std::cos(std::numbers::pi * double(i) / n) + inventory.accent[ph];
    const double noise = normal(rng) * noise_sigma * speaker.pitch_range;
    u.pitch.push_back(speaker.base_pitch + speaker.pitch_range * contour +
                      noise);
  }

  int frames = 0;
  for (int d : u.durations) frames += d;
  u.mel.resize(frames, mel_dim);
  int t = 0;
  for (int i = 0; i < n; ++i) {
    const int ph = tokens[i];
    const double ripple_phase = (u.pitch[i] - 150.0) / 50.0;
    for (int j = 0; j < u.durations[i]; ++j, ++t) {
      for (int c = 0; c < mel_dim; ++c) {
        const int src = std::clamp(c - speaker.formant_shift, 0, mel_dim - 1);
        const double ripple =
            0.3 * std::sin(2.0 * std::numbers::pi * c / mel_dim + ripple_phase);
        u.mel(t, c) = inventory.templates(ph, src) + speaker.spectral_tilt[c] +
                      ripple + noise_sigma * normal(rng);
      }
    }
  }
  return u;
}

std::string SplitName(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kAdapt:
      return "adapt";
    case Split::kTest:
      return "test";
  }
  return "train";
}

Split SplitFromName(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "adapt") return Split::kAdapt;
  if (s == "test") return Split::kTest;
  throw InputError("unknown split: " + s);
}

std::vector<const CorpusEntry*> Corpus::Select(int speaker,
                                               Split split) const {
  std::vector<const CorpusEntry*> out;
  for (const auto& e : entries) {
    if (e.speaker == speaker && e.split == split) out.push_back(&e);
  }
  return out;
}

namespace {

void ComputePitchStats(Corpus* corpus) {
  double sum = 0, sum_sq = 0;
  int64_t count = 0;
  bool has_train = false;
  for (const auto& e : corpus->entries) has_train |= e.split == Split::kTrain;
  for (const auto& e : corpus->entries) {
    if (has_train && e.split != Split::kTrain) continue;
    for (double p : e.sample.pitch) {
      sum += p;
      sum_sq += p * p;
      ++count;
    }
  }
  if (count == 0) return;
  corpus->pitch_mean = sum / count;
  const double var = std::max(0.0, sum_sq / count - corpus->pitch_mean *
                                                        corpus->pitch_mean);
  corpus->pitch_std = std::sqrt(var) > 1e-9 ? std::sqrt(var) : 1.0;
}

}  // namespace

Corpus MakeCorpus(const CorpusOptions& o) {
  if (o.n_speakers < 1 || o.utts_per_speaker < 1) {
    throw InputError("speaker and utterance counts must be >= 1");
  }
  if (o.n_heldout < 0 || o.heldout_adapt < 0 || o.heldout_test < 0 ||
      o.min_tokens < 1 || o.max_tokens < o.min_tokens) {
    throw InputError("invalid corpus options");
  }
  Corpus corpus;
  corpus.options = o;
  const PhonemeInventory inv = MakeInventory(o.vocab_size, o.mel_dim);
  const int total_speakers = o.n_speakers + o.n_heldout;
  for (int s = 0; s < total_speakers; ++s) {
    corpus.speakers.push_back(MakeSpeaker(Mix(o.seed, 1000 + s), o.mel_dim));
    corpus.held_out.push_back(s >= o.n_speakers);
  }
  for (int s = 0; s < total_speakers; ++s) {
    const bool held = corpus.held_out[s];
    const int count = held ? o.heldout_adapt + o.heldout_test
                           : o.utts_per_speaker;
    for (int u = 0; u < count; ++u) {
      CorpusEntry e;
      e.speaker = s;
      e.split = !held ? Split::kTrain
                      : (u < o.heldout_adapt ? Split::kAdapt : Split::kTest);
      e.seed = Mix(Mix(o.seed, s), u);
      std::mt19937_64 rng(e.seed);
      const int n = UniformInt(rng, o.min_tokens, o.max_tokens);
      std::vector<int> tokens(n);
      for (auto& t : tokens) t = UniformInt(rng, 0, o.vocab_size - 1);
      e.sample = RenderUtterance(inv, tokens, corpus.speakers[s], e.seed);
      corpus.entries.push_back(std::move(e));
    }
  }
  ComputePitchStats(&corpus);
  return corpus;
}

nlohmann::json CorpusManifest(const Corpus& corpus) {
  using nlohmann::json;
  const CorpusOptions& o = corpus.options;
  json speakers = json::array();
  for (size_t s = 0; s < corpus.speakers.size(); ++s) {
    const SpeakerLatent& l = corpus.speakers[s];
    speakers.push_back({{"id", s},
                        {"seed", l.seed},
                        {"held_out", bool(corpus.held_out[s])},
                        {"base_pitch", l.base_pitch},
                        {"pitch_range", l.pitch_range},
                        {"rate", l.rate},
                        {"formant_shift", l.formant_shift},
                        {"spectral_tilt", l.spectral_tilt}});
  }
  json utts = json::array();
  for (size_t i = 0; i < corpus.entries.size(); ++i) {
    const CorpusEntry& e = corpus.entries[i];
    utts.push_back({{"index", i},
                    {"speaker", e.speaker},
                    {"split", SplitName(e.split)},
                    {"seed", e.seed},
                    {"tokens", e.sample.tokens.size()},
                    {"frames", e.sample.mel.rows()}});
  }
  return json{{"seed", o.seed},
              {"n_speakers", o.n_speakers},
              {"utts_per_speaker", o.utts_per_speaker},
              {"n_heldout", o.n_heldout},
              {"heldout_adapt", o.heldout_adapt},
              {"heldout_test", o.heldout_test},
              {"min_tokens", o.min_tokens},
              {"max_tokens", o.max_tokens},
              {"vocab_size", o.vocab_size},
              {"mel_dim", o.mel_dim},
              {"pitch_mean", corpus.pitch_mean},
              {"pitch_std", corpus.pitch_std},
              {"speakers", speakers},
              {"utterances", utts}};
}

TensorFile CorpusToFile(const Corpus& corpus) {
  TensorFile file;
  file.kind = FileKind::kCorpus;
  for (size_t i = 0; i < corpus.entries.size(); ++i) {
    const UtteranceSample& u = corpus.entries[i].sample;
    const int64_t n = static_cast<int64_t>(u.tokens.size());
    Matrix<double> tokens(1, n), durations(1, n), pitch(1, n);
    for (int64_t k = 0; k < n; ++k) {
      tokens(0, k) = u.tokens[k];
      durations(0, k) = u.durations[k];
      pitch(0, k) = u.pitch[k];
    }
    file.tensors.push_back({UttKey(i, "durations"), DType::kFloat64,
                            Tensor<double>({n}, durations)});
    file.tensors.push_back(
        {UttKey(i, "mel"), DType::kFloat64, Tensor<double>::FromMatrix(u.mel)});
    file.tensors.push_back(
        {UttKey(i, "pitch"), DType::kFloat64, Tensor<double>({n}, pitch)});
    file.tensors.push_back(
        {UttKey(i, "tokens"), DType::kFloat64, Tensor<double>({n}, tokens)});
  }
  file.config = CorpusManifest(corpus);
  return file;
}

Corpus CorpusFromFile(const TensorFile& file) {
  if (file.kind != FileKind::kCorpus) throw InputError("not a corpus file");
  Corpus corpus;
  try {
    const auto& m = file.config;
    CorpusOptions& o = corpus.options;
    o.seed = m.at("seed").get<uint64_t>();
    o.n_speakers = m.at("n_speakers").get<int>();
    o.utts_per_speaker = m.at("utts_per_speaker").get<int>();
    o.n_heldout = m.at("n_heldout").get<int>();
    o.heldout_adapt = m.at("heldout_adapt").get<int>();
    o.heldout_test = m.at("heldout_test").get<int>();
    o.min_tokens = m.at("min_tokens").get<int>();
    o.max_tokens = m.at("max_tokens").get<int>();
    o.vocab_size = m.at("vocab_size").get<int>();
    o.mel_dim = m.at("mel_dim").get<int>();
    corpus.pitch_mean = m.at("pitch_mean").get<double>();
    corpus.pitch_std = m.at("pitch_std").get<double>();
    for (const auto& s : m.at("speakers")) {
      SpeakerLatent l;
      l.seed = s.at("seed").get<uint64_t>();
      l.base_pitch = s.at("base_pitch").get<double>();
      l.pitch_range = s.at("pitch_range").get<double>();
      l.rate = s.at("rate").get<double>();
      l.formant_shift = s.at("formant_shift").get<int>();
      l.spectral_tilt = s.at("spectral_tilt").get<std::vector<double>>();
      corpus.speakers.push_back(std::move(l));
      corpus.held_out.push_back(s.at("held_out").get<bool>());
    }
    const auto& utts = m.at("utterances");
    std::map<std::string, const StoredTensor*> index;
    for (const auto& t : file.tensors) index[t.name] = &t;
    for (size_t i = 0; i < utts.size(); ++i) {
      CorpusEntry e;
      e.speaker = utts[i].at("speaker").get<int>();
      e.split = SplitFromName(utts[i].at("split").get<std::string>());
      e.seed = utts[i].at("seed").get<uint64_t>();
      auto get = [&](const char* field) -> const Matrix<double>& {
        auto it = index.find(UttKey(i, field));
        if (it == index.end()) {
          throw InputError("corpus lacks " + UttKey(i, field));
        }
        return it->second->tensor.data;
      };
      const Matrix<double>& tokens = get("tokens");
      const Matrix<double>& durations = get("durations");
      const Matrix<double>& pitch = get("pitch");
      for (Eigen::Index k = 0; k < tokens.size(); ++k) {
        e.sample.tokens.push_back(static_cast<int>(tokens(0, k)));
        e.sample.durations.push_back(static_cast<int>(durations(0, k)));
        e.sample.pitch.push_back(pitch(0, k));
      }
      e.sample.mel = get("mel");
      corpus.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad corpus manifest: ") + e.what());
  }
  return corpus;
}

}  // namespace pefttts
