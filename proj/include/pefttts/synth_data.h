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

// Procedural multi-speaker corpus. Every utterance carries exact per-token
// durations and pitch, so the training targets need no extraction step.

#ifndef PEFTTTS_SYNTH_DATA_H_
#define PEFTTTS_SYNTH_DATA_H_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "pefttts/checkpoint.h"
#include "pefttts/tensor.h"

namespace pefttts {

inline constexpr uint64_t kInventorySeed = 0x5eed0f1a7e5ULL;
inline constexpr int kMaxTokenFrames = 20;

struct SpeakerLatent {
  uint64_t seed = 0;
  double base_pitch = 0;   // Hz
  double pitch_range = 0;  // Hz, > 0
  double rate = 1;         // duration multiplier in [0.5, 2]
  std::vector<double> spectral_tilt;  // mel_dim
  int formant_shift = 0;   // channels, in [-2, 2]
};

SpeakerLatent MakeSpeaker(uint64_t seed, int mel_dim = 20);

// Fixed per-phoneme acoustics shared by every speaker.
struct PhonemeInventory {
  Matrix<double> templates;   // vocab x mel_dim
  std::vector<int> base_duration;
  std::vector<double> accent;  // pitch accent in units of pitch_range
};

PhonemeInventory MakeInventory(int vocab_size, int mel_dim,
                               uint64_t seed = kInventorySeed);

struct UtteranceSample {
  std::vector<int> tokens;
  Matrix<double> mel;          // T x mel_dim
  std::vector<double> pitch;   // per token, Hz
  std::vector<int> durations;  // per token, sum = T
};

UtteranceSample RenderUtterance(const PhonemeInventory& inventory,
                                const std::vector<int>& tokens,
                                const SpeakerLatent& speaker, uint64_t utt_seed,
                                double noise_sigma = 0.05);

enum class Split { kTrain, kAdapt, kTest };
std::string SplitName(Split s);
Split SplitFromName(const std::string& s);

struct CorpusEntry {
  int speaker = 0;
  Split split = Split::kTrain;
  uint64_t seed = 0;
  UtteranceSample sample;
};

struct CorpusOptions {
  int n_speakers = 8;
  int utts_per_speaker = 50;
  uint64_t seed = 7;
  // Unseen speakers, numbered after the training speakers, each with an
  // adaptation split and a test split.
  int n_heldout = 0;
  int heldout_adapt = 25;
  int heldout_test = 20;
  int min_tokens = 6;
  int max_tokens = 14;
  int vocab_size = 40;
  int mel_dim = 20;
};

struct Corpus {
  CorpusOptions options;
  std::vector<SpeakerLatent> speakers;
  std::vector<bool> held_out;
  std::vector<CorpusEntry> entries;
  // z-score statistics of per-token pitch over the train split (over all
  // entries when there is no train split).
  double pitch_mean = 0;
  double pitch_std = 1;

  std::vector<const CorpusEntry*> Select(int speaker, Split split) const;
};

// Throws InputError for non-positive counts.
Corpus MakeCorpus(const CorpusOptions& options);

nlohmann::json CorpusManifest(const Corpus& corpus);
TensorFile CorpusToFile(const Corpus& corpus);
Corpus CorpusFromFile(const TensorFile& file);

}  // namespace pefttts

#endif  // PEFTTTS_SYNTH_DATA_H_
