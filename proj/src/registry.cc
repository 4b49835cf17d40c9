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

#include "pefttts/registry.h"

#include <cmath>
#include <random>
#include <utility>

namespace pefttts {

int64_t ParamSpec::numel() const {
  if (shape.empty()) return 0;
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

std::vector<std::string> EncoderLayerNames(const ModelConfig& c) {
  std::vector<std::string> out;
  for (int i = 0; i < c.n_enc_layers; ++i) {
    out.push_back("encoder.layers." + std::to_string(i));
  }
  return out;
}

std::vector<std::string> DecoderLayerNames(const ModelConfig& c) {
  std::vector<std::string> out;
  for (int i = 0; i < c.n_dec_layers; ++i) {
    out.push_back("decoder.layers." + std::to_string(i));
  }
  return out;
}

std::string ReferenceBufferName(int speaker_id) {
  return "speaker.references." + std::to_string(speaker_id);
}

namespace {

class Builder {
 public:
  explicit Builder(std::vector<ParamSpec>* out) : out_(out) {}

  void set_role(ParamRole r) { role_ = r; }
  void set_style(bool s) { style_ = s; }

  ParamSpec& Tensor(const std::string& name, std::vector<int64_t> shape,
                    InitKind init, double scale = 0) {
    ParamSpec s;
    s.name = name;
    s.shape = std::move(shape);
    s.role = role_;
    s.init = init;
    s.init_scale = scale;
    s.is_bias = name.size() >= 5 && name.compare(name.size() - 5, 5, ".bias") == 0;
    s.is_style = style_;
    out_->push_back(std::move(s));
    return out_->back();
  }

  void Linear(const std::string& p, int in, int out) {
    Tensor(p + ".weight", {in, out}, InitKind::kUniformFanIn, in);
    Tensor(p + ".bias", {out}, InitKind::kZeros);
  }

  void Conv(const std::string& p, int kernel, int in, int out) {
    Tensor(p + ".weight", {int64_t{kernel} * in, out}, InitKind::kUniformFanIn,
           double(kernel) * in);
    Tensor(p + ".bias", {out}, InitKind::kZeros);
  }

  // Scale = gain(spk), shift = shift(spk); zero weights make the layer plain
  // layer normalization.
  void Cln(const std::string& p, int d_spk, int d) {
    Tensor(p + ".gain.weight", {d_spk, d}, InitKind::kZeros).is_cln = true;
    Tensor(p + ".gain.bias", {d}, InitKind::kOnes).is_cln = true;
    Tensor(p + ".shift.weight", {d_spk, d}, InitKind::kZeros).is_cln = true;
    Tensor(p + ".shift.bias", {d}, InitKind::kZeros).is_cln = true;
  }

  void Fft(const std::string& p, const ModelConfig& c) {
    for (const char* proj : {"query", "key", "value", "out"}) {
      Linear(p + ".attn." + proj, c.d_model, c.d_model);
    }
    Cln(p + ".norm1", c.d_spk, c.d_model);
    Conv(p + ".ff.conv1", c.conv_kernel, c.d_model, c.d_ff);
    Conv(p + ".ff.conv2", c.conv_kernel, c.d_ff, c.d_model);
    Cln(p + ".norm2", c.d_spk, c.d_model);
  }

  void Predictor(const std::string& p, const ModelConfig& c) {
    Linear(p + ".input", c.d_model + c.d_spk, c.d_model);
    Conv(p + ".conv1", c.conv_kernel, c.d_model, c.predictor_width);
    Cln(p + ".norm1", c.d_spk, c.predictor_width);
    Conv(p + ".conv2", c.conv_kernel, c.predictor_width, c.predictor_width);
    Cln(p + ".norm2", c.d_spk, c.predictor_width);
    Linear(p + ".head", c.predictor_width, 1);
  }

  void Adapter(const std::string& site, int d, const PeftConfig& pc) {
    const std::string p = site + ".adapter";
    if (pc.adapter_layer_norm) {
      Tensor(p + ".norm.scale", {d}, InitKind::kOnes);
      Tensor(p + ".norm.bias", {d}, InitKind::kZeros);
    }
    Tensor(p + ".down.weight", {d, pc.adapter_bottleneck},
           InitKind::kUniformFanIn, d);
    Tensor(p + ".down.bias", {pc.adapter_bottleneck}, InitKind::kZeros);
    Tensor(p + ".up.weight", {pc.adapter_bottleneck, d}, InitKind::kZeros);
    Tensor(p + ".up.bias", {d}, InitKind::kZeros);
  }

 private:
  std::vector<ParamSpec>* out_;
  ParamRole role_ = ParamRole::kBase;
  bool style_ = false;
};

}  // namespace

Registry Registry::Build(const ModelConfig& c, const PeftConfig& pc) {
  c.Validate();
  pc.Validate();
  Registry r;
  r.model_ = c;
  r.peft_ = pc;
  std::vector<ParamSpec> specs;
  Builder b(&specs);

  // Base model.
  b.Tensor("encoder.embed", {c.vocab_size, c.d_model}, InitKind::kNormal, 1.0);
  b.Linear("encoder.input", c.d_model + c.d_spk, c.d_model);
  for (const auto& layer : EncoderLayerNames(c)) b.Fft(layer, c);
  b.Predictor("pitch_predictor", c);
  b.Predictor("duration_predictor", c);
  b.Linear("pitch_embed", 1, c.d_model);
  b.Linear("decoder.input", c.d_model + c.d_spk, c.d_model);
  for (const auto& layer : DecoderLayerNames(c)) b.Fft(layer, c);
  b.Linear("decoder.out", c.d_model, c.mel_dim);
  b.Tensor(kSpeakerTableName, {c.n_speakers, c.d_spk}, InitKind::kNormal, 0.3)
      .is_table = true;

  b.set_style(true);
  b.Conv("style.ref.conv1", c.conv_kernel, c.mel_dim, c.ref_channels);
  b.Conv("style.ref.conv2", c.conv_kernel, c.ref_channels, c.ref_channels);
  b.Linear("style.ref.gru.input", c.ref_channels, 3 * c.ref_hidden);
  b.Linear("style.ref.gru.hidden", c.ref_hidden, 3 * c.ref_hidden);
  b.Tensor("style.tokens", {c.n_style_tokens, c.d_spk}, InitKind::kNormal,
           0.5);
  b.Linear("style.attn.query", c.ref_hidden, c.d_spk);
  b.Linear("style.attn.key", c.d_spk, c.d_spk);
  b.Linear("style.attn.value", c.d_spk, c.d_spk);
  b.Linear("style.attn.out", c.d_spk, c.d_spk);
  b.set_style(false);

  b.Conv("aligner.text.conv1", c.conv_kernel, c.d_model + c.d_spk,
         c.align_width);
  b.Conv("aligner.text.conv2", c.conv_kernel, c.align_width, c.align_width);
  b.Conv("aligner.mel.conv1", c.conv_kernel, c.mel_dim + c.d_spk,
         c.align_width);
  b.Conv("aligner.mel.conv2", c.conv_kernel, c.align_width, c.align_width);

  b.set_role(ParamRole::kBuffer);
  for (int s = 0; s < c.n_speakers; ++s) b.Tensor(ReferenceBufferName(s), {}, InitKind::kZeros);

  if (pc.strategy != Strategy::kNone) {
    b.set_role(ParamRole::kPeft);
    if (pc.strategy == Strategy::kAdapter) {
      for (const auto& layer : EncoderLayerNames(c)) {
        b.Adapter(layer, c.d_model, pc);
      }
      for (const auto& layer : DecoderLayerNames(c)) {
        b.Adapter(layer, c.d_model, pc);
      }
      if (pc.adapt_predictors) {
        for (const char* p : {"pitch_predictor", "duration_predictor"}) {
          b.Adapter(std::string(p) + ".block1", c.predictor_width, pc);
          b.Adapter(std::string(p) + ".block2", c.predictor_width, pc);
        }
      }
      if (pc.adapt_aligner) {
        b.Adapter("aligner.text", c.align_width, pc);
        b.Adapter("aligner.mel", c.align_width, pc);
      }
    }
    std::vector<std::string> layers = EncoderLayerNames(c);
    for (const auto& l : DecoderLayerNames(c)) layers.push_back(l);
    if (pc.strategy == Strategy::kLora) {
      std::vector<std::string> targets{"query", "key"};
      if (pc.lora_value) targets.push_back("value");
      for (const auto& layer : layers) {
        for (const auto& t : targets) {
          const std::string p = layer + ".attn." + t;
          b.Tensor(p + ".lora_a", {pc.lora_rank, c.d_model}, InitKind::kNormal,
                   1.0 / std::sqrt(double(pc.lora_rank)));
          b.Tensor(p + ".lora_b", {c.d_model, pc.lora_rank}, InitKind::kZeros);
        }
      }
    }
    if (pc.strategy == Strategy::kPrefix) {
      for (const auto& layer : layers) {
        b.Tensor(layer + ".attn.prefix_key", {pc.prefix_len, c.d_model},
                 InitKind::kNormal, 0.01);
        b.Tensor(layer + ".attn.prefix_value", {pc.prefix_len, c.d_model},
                 InitKind::kNormal, 0.01);
      }
    }
    b.set_role(ParamRole::kMix);
    b.Tensor(kMixLogitsName, {c.n_speakers}, InitKind::kZeros);
    b.set_role(ParamRole::kBuffer);
    b.Tensor(kAdaptReferenceName, {}, InitKind::kZeros);
  }

  for (auto& s : specs) r.Add(std::move(s));
  return r;
}

void Registry::Add(ParamSpec spec) {
  if (index_.count(spec.name) != 0) {
    throw ConfigError("duplicate tensor name: " + spec.name);
  }
  index_[spec.name] = specs_.size();
  specs_.push_back(std::move(spec));
}

const ParamSpec* Registry::Find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &specs_[it->second];
}

int64_t Registry::CountParams() const {
  int64_t n = 0;
  for (const auto& s : specs_) {
    if (s.role != ParamRole::kBuffer) n += s.numel();
  }
  return n;
}

int64_t Registry::CountRole(ParamRole role) const {
  int64_t n = 0;
  for (const auto& s : specs_) {
    if (s.role == role) n += s.numel();
  }
  return n;
}

int64_t Registry::CountBiasTensors() const {
  int64_t n = 0;
  for (const auto& s : specs_) {
    if (s.role != ParamRole::kBuffer && s.is_bias) ++n;
  }
  return n;
}

template <typename Real>
ParamStore<Real> InitializeParams(const Registry& registry, ParamRole role,
                                  uint64_t seed) {
  ParamStore<Real> store;
  std::mt19937_64 rng(seed);
  for (const auto& spec : registry.specs()) {
    if (spec.role != role || spec.role == ParamRole::kBuffer) continue;
    auto t = Tensor<Real>::Zeros(spec.shape);
    switch (spec.init) {
      case InitKind::kZeros:
        break;
      case InitKind::kOnes:
        t.data.setOnes();
        break;
      case InitKind::kUniformFanIn: {
        const double bound = std::sqrt(3.0 / spec.init_scale);
        std::uniform_real_distribution<double> u(-bound, bound);
        for (Eigen::Index i = 0; i < t.data.size(); ++i) {
          t.data.data()[i] = static_cast<Real>(u(rng));
        }
        break;
      }
      case InitKind::kNormal: {
        std::normal_distribution<double> n(0.0, spec.init_scale);
        for (Eigen::Index i = 0; i < t.data.size(); ++i) {
          t.data.data()[i] = static_cast<Real>(n(rng));
        }
        break;
      }
    }
    store.Set(spec.name, std::move(t));
  }
  return store;
}

template ParamStore<float> InitializeParams<float>(const Registry&, ParamRole,
                                                   uint64_t);
template ParamStore<double> InitializeParams<double>(const Registry&,
                                                     ParamRole, uint64_t);

}  // namespace pefttts
