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

#ifndef PEFTTTS_CONFIG_H_
#define PEFTTTS_CONFIG_H_

#include <cstdint>
#include <string>

#include "json.hpp"

namespace pefttts {

enum class Precision { kFloat32, kFloat64 };

struct ModelConfig {
  int vocab_size = 40;
  int d_model = 64;
  int n_heads = 2;
  int n_enc_layers = 2;
  int n_dec_layers = 2;
  int conv_kernel = 3;
  // Inner width of the convolutional feed-forward inside each FFT layer.
  int d_ff = 128;
  int mel_dim = 20;
  int d_spk = 64;
  int max_frames = 512;
  int n_speakers = 8;
  // Pitch and duration predictor conv width.
  int predictor_width = 64;
  // Reference encoder / style tokens.
  int ref_channels = 32;
  int ref_hidden = 32;
  int n_style_tokens = 8;
  int style_heads = 2;
  // Aligner projection width.
  int align_width = 32;
  double ln_eps = 1e-5;
  Precision precision = Precision::kFloat32;

  // Throws ConfigError.
  void Validate() const;
};

enum class Strategy { kNone, kAdapter, kLora, kPrefix, kBitFit, kFull };

Strategy StrategyFromString(const std::string& s);
std::string StrategyName(Strategy s);

struct PeftConfig {
  Strategy strategy = Strategy::kNone;
  int adapter_bottleneck = 8;
  double adapter_dropout = 0.1;
  bool adapter_layer_norm = true;
  int lora_rank = 4;
  double lora_scale = 8.0;
  bool lora_value = false;  // also adapt value projections
  int prefix_len = 4;
  bool adapt_predictors = true;
  bool adapt_aligner = true;
  bool train_mix_weights = true;
  bool train_cln = false;

  void Validate() const;
};

struct LossWeights {
  double pitch = 0.1;
  double duration = 0.1;
  double align = 0.1;

  void Validate() const;
};

struct OptimizerConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-9;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);
void to_json(nlohmann::json& j, const PeftConfig& c);
void from_json(const nlohmann::json& j, PeftConfig& c);
void to_json(nlohmann::json& j, const LossWeights& c);
void from_json(const nlohmann::json& j, LossWeights& c);
void to_json(nlohmann::json& j, const OptimizerConfig& c);
void from_json(const nlohmann::json& j, OptimizerConfig& c);

}  // namespace pefttts

#endif  // PEFTTTS_CONFIG_H_
