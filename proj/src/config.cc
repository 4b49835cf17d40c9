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

#include "pefttts/config.h"

#include <initializer_list>
#include <set>

#include "pefttts/tensor.h"

namespace pefttts {

namespace {

using nlohmann::json;

void RejectUnknownKeys(const json& j, std::initializer_list<const char*> keys,
                       const char* what) {
  if (!j.is_object()) {
    throw ConfigError(std::string(what) + " must be a JSON object");
  }
  std::set<std::string> known(keys.begin(), keys.end());
  for (const auto& item : j.items()) {
    if (known.count(item.key()) == 0) {
      throw ConfigError(std::string("unknown key in ") + what + ": " +
                        item.key());
    }
  }
}

template <typename T>
void Read(const json& j, const char* key, T* out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    *out = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for ") + key + ": " + e.what());
  }
}

void Require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

void ModelConfig::Validate() const {
  Require(vocab_size >= 1 && d_model >= 1 && n_heads >= 1 &&
              n_enc_layers >= 1 && n_dec_layers >= 1 && d_ff >= 1 &&
              d_spk >= 1 && max_frames >= 1 && n_speakers >= 1 &&
              predictor_width >= 1 && ref_channels >= 1 && ref_hidden >= 1 &&
              n_style_tokens >= 1 && style_heads >= 1 && align_width >= 1,
          "model counts must be >= 1");
  Require(d_model % n_heads == 0, "d_model must be divisible by n_heads");
  Require(d_spk % style_heads == 0, "d_spk must be divisible by style_heads");
  Require(conv_kernel >= 1 && conv_kernel % 2 == 1, "conv_kernel must be odd");
  Require(mel_dim >= 2, "mel_dim must be >= 2");
  Require(ln_eps > 0, "ln_eps must be positive");
}

Strategy StrategyFromString(const std::string& s) {
  if (s == "none") return Strategy::kNone;
  if (s == "adapter") return Strategy::kAdapter;
  if (s == "lora") return Strategy::kLora;
  if (s == "prefix") return Strategy::kPrefix;
  if (s == "bitfit") return Strategy::kBitFit;
  if (s == "full") return Strategy::kFull;
  throw ConfigError("unknown strategy: " + s);
}

std::string StrategyName(Strategy s) {
  switch (s) {
    case Strategy::kNone:
      return "none";
    case Strategy::kAdapter:
      return "adapter";
    case Strategy::kLora:
      return "lora";
    case Strategy::kPrefix:
      return "prefix";
    case Strategy::kBitFit:
      return "bitfit";
    case Strategy::kFull:
      return "full";
  }
  return "none";
}

void PeftConfig::Validate() const {
  if (strategy == Strategy::kAdapter) {
    Require(adapter_bottleneck >= 1, "adapter_bottleneck must be >= 1");
    Require(adapter_dropout >= 0 && adapter_dropout < 1,
            "adapter_dropout must be in [0, 1)");
  }
  if (strategy == Strategy::kLora) {
    Require(lora_rank >= 1, "lora_rank must be >= 1");
  }
  if (strategy == Strategy::kPrefix) {
    Require(prefix_len >= 1, "prefix_len must be >= 1");
  }
}

void LossWeights::Validate() const {
  Require(pitch >= 0 && duration >= 0 && align >= 0,
          "loss weights must be non-negative");
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = json{{"vocab_size", c.vocab_size},
           {"d_model", c.d_model},
           {"n_heads", c.n_heads},
           {"n_enc_layers", c.n_enc_layers},
           {"n_dec_layers", c.n_dec_layers},
           {"conv_kernel", c.conv_kernel},
           {"d_ff", c.d_ff},
           {"mel_dim", c.mel_dim},
           {"d_spk", c.d_spk},
           {"max_frames", c.max_frames},
           {"n_speakers", c.n_speakers},
           {"predictor_width", c.predictor_width},
           {"ref_channels", c.ref_channels},
           {"ref_hidden", c.ref_hidden},
           {"n_style_tokens", c.n_style_tokens},
           {"style_heads", c.style_heads},
           {"align_width", c.align_width},
           {"ln_eps", c.ln_eps},
           {"precision",
            c.precision == Precision::kFloat64 ? "float64" : "float32"}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  RejectUnknownKeys(
      j,
      {"vocab_size", "d_model", "n_heads", "n_enc_layers", "n_dec_layers",
       "conv_kernel", "d_ff", "mel_dim", "d_spk", "max_frames", "n_speakers",
       "predictor_width", "ref_channels", "ref_hidden", "n_style_tokens",
       "style_heads", "align_width", "ln_eps", "precision"},
      "model config");
  Read(j, "vocab_size", &c.vocab_size);
  Read(j, "d_model", &c.d_model);
  Read(j, "n_heads", &c.n_heads);
  Read(j, "n_enc_layers", &c.n_enc_layers);
  Read(j, "n_dec_layers", &c.n_dec_layers);
  Read(j, "conv_kernel", &c.conv_kernel);
  Read(j, "d_ff", &c.d_ff);
  Read(j, "mel_dim", &c.mel_dim);
  Read(j, "d_spk", &c.d_spk);
  Read(j, "max_frames", &c.max_frames);
  Read(j, "n_speakers", &c.n_speakers);
  Read(j, "predictor_width", &c.predictor_width);
  Read(j, "ref_channels", &c.ref_channels);
  Read(j, "ref_hidden", &c.ref_hidden);
  Read(j, "n_style_tokens", &c.n_style_tokens);
  Read(j, "style_heads", &c.style_heads);
  Read(j, "align_width", &c.align_width);
  Read(j, "ln_eps", &c.ln_eps);
  std::string precision = c.precision == Precision::kFloat64 ? "float64"
                                                             : "float32";
  Read(j, "precision", &precision);
  if (precision == "float32") {
    c.precision = Precision::kFloat32;
  } else if (precision == "float64") {
    c.precision = Precision::kFloat64;
  } else {
    throw ConfigError("precision must be float32 or float64");
  }
  c.Validate();
}

void to_json(nlohmann::json& j, const PeftConfig& c) {
  j = json{{"strategy", StrategyName(c.strategy)},
           {"adapter_bottleneck", c.adapter_bottleneck},
           {"adapter_dropout", c.adapter_dropout},
           {"adapter_layer_norm", c.adapter_layer_norm},
           {"lora_rank", c.lora_rank},
           {"lora_scale", c.lora_scale},
           {"lora_value", c.lora_value},
           {"prefix_len", c.prefix_len},
           {"adapt_predictors", c.adapt_predictors},
           {"adapt_aligner", c.adapt_aligner},
           {"train_mix_weights", c.train_mix_weights},
           {"train_cln", c.train_cln}};
}

void from_json(const nlohmann::json& j, PeftConfig& c) {
  RejectUnknownKeys(j,
                    {"strategy", "adapter_bottleneck", "adapter_dropout",
                     "adapter_layer_norm", "lora_rank", "lora_scale",
                     "lora_value", "prefix_len", "adapt_predictors",
                     "adapt_aligner", "train_mix_weights", "train_cln"},
                    "peft config");
  std::string strategy = StrategyName(c.strategy);
  Read(j, "strategy", &strategy);
  c.strategy = StrategyFromString(strategy);
  Read(j, "adapter_bottleneck", &c.adapter_bottleneck);
  Read(j, "adapter_dropout", &c.adapter_dropout);
  Read(j, "adapter_layer_norm", &c.adapter_layer_norm);
  Read(j, "lora_rank", &c.lora_rank);
  Read(j, "lora_scale", &c.lora_scale);
  Read(j, "lora_value", &c.lora_value);
  Read(j, "prefix_len", &c.prefix_len);
  Read(j, "adapt_predictors", &c.adapt_predictors);
  Read(j, "adapt_aligner", &c.adapt_aligner);
  Read(j, "train_mix_weights", &c.train_mix_weights);
  Read(j, "train_cln", &c.train_cln);
  c.Validate();
}

void to_json(nlohmann::json& j, const LossWeights& c) {
  j = json{{"pitch", c.pitch}, {"duration", c.duration}, {"align", c.align}};
}

void from_json(const nlohmann::json& j, LossWeights& c) {
  RejectUnknownKeys(j, {"pitch", "duration", "align"}, "loss weights");
  Read(j, "pitch", &c.pitch);
  Read(j, "duration", &c.duration);
  Read(j, "align", &c.align);
  c.Validate();
}

void to_json(nlohmann::json& j, const OptimizerConfig& c) {
  j = json{{"lr", c.lr},
           {"beta1", c.beta1},
           {"beta2", c.beta2},
           {"eps", c.eps}};
}

void from_json(const nlohmann::json& j, OptimizerConfig& c) {
  RejectUnknownKeys(j, {"lr", "beta1", "beta2", "eps"}, "optimizer config");
  Read(j, "lr", &c.lr);
  Read(j, "beta1", &c.beta1);
  Read(j, "beta2", &c.beta2);
  Read(j, "eps", &c.eps);
  if (c.lr <= 0 || c.beta1 < 0 || c.beta1 >= 1 || c.beta2 < 0 ||
      c.beta2 >= 1 || c.eps <= 0) {
    throw ConfigError("invalid optimizer settings");
  }
}

}  // namespace pefttts
