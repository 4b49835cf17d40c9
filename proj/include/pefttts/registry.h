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

#ifndef PEFTTTS_REGISTRY_H_
#define PEFTTTS_REGISTRY_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pefttts/config.h"
#include "pefttts/tensor.h"

namespace pefttts {

enum class ParamRole {
  kBase,    // pre-trained acoustic model
  kPeft,    // injected adapter / LoRA / prefix tensors
  kMix,     // new-speaker mixing logits over the speaker table
  kBuffer,  // stored inputs (reference mels), never trained or counted
};

enum class InitKind { kZeros, kOnes, kUniformFanIn, kNormal };

struct ParamSpec {
  std::string name;
  std::vector<int64_t> shape;  // empty for buffers of dynamic shape
  ParamRole role = ParamRole::kBase;
  InitKind init = InitKind::kZeros;
  double init_scale = 0;  // fan-in for kUniformFanIn, sigma for kNormal
  bool is_bias = false;
  bool is_cln = false;      // conditional projection inside a CLN
  bool is_style = false;    // reference encoder and style-token bank
  bool is_table = false;    // speaker lookup table

  int64_t numel() const;
};

// Every tensor of a (base model, PEFT state) pair, in a fixed order.
class Registry {
 public:
  // PEFT tensors, mix logits and the adaptation reference buffer are present
  // whenever peft.strategy != kNone.
  static Registry Build(const ModelConfig& model, const PeftConfig& peft);

  const std::vector<ParamSpec>& specs() const { return specs_; }
  const ParamSpec* Find(const std::string& name) const;
  bool Contains(const std::string& name) const { return Find(name) != nullptr; }

  // Element counts over non-buffer tensors.
  int64_t CountParams() const;
  int64_t CountRole(ParamRole role) const;
  int64_t CountBiasTensors() const;

  const ModelConfig& model() const { return model_; }
  const PeftConfig& peft() const { return peft_; }

 private:
  void Add(ParamSpec spec);

  ModelConfig model_;
  PeftConfig peft_;
  std::vector<ParamSpec> specs_;
  std::map<std::string, size_t> index_;
};

// Insertion sites for adapters; shared by the registry and the forward graph.
std::vector<std::string> EncoderLayerNames(const ModelConfig& c);
std::vector<std::string> DecoderLayerNames(const ModelConfig& c);
std::string ReferenceBufferName(int speaker_id);
inline constexpr const char* kAdaptReferenceName = "speaker.reference";
inline constexpr const char* kMixLogitsName = "speaker.mix_logits";
inline constexpr const char* kSpeakerTableName = "speaker.table";

// Fresh values for every registered tensor with the given role. Buffers are
// skipped.
template <typename Real>
ParamStore<Real> InitializeParams(const Registry& registry, ParamRole role,
                                  uint64_t seed);

extern template ParamStore<float> InitializeParams<float>(const Registry&,
                                                          ParamRole, uint64_t);
extern template ParamStore<double> InitializeParams<double>(const Registry&,
                                                            ParamRole,
                                                            uint64_t);

}  // namespace pefttts

#endif  // PEFTTTS_REGISTRY_H_
