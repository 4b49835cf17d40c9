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

#ifndef PEFTTTS_PEFT_H_
#define PEFTTTS_PEFT_H_

#include <cstdint>
#include <set>
#include <string>

#include "json.hpp"
#include "pefttts/checkpoint.h"
#include "pefttts/graph.h"

namespace pefttts {

// Bottleneck adapter with an internal skip connection:
//   x + up(dropout(relu(down(norm(x)))))
// The up projection starts at zero, so a fresh adapter returns x exactly.
template <typename Real>
Var AdapterForward(ModelGraph<Real>& g, const std::string& site, Var x);

// AdapterForward when the model carries an adapter at `site`, else x.
template <typename Real>
Var MaybeAdapter(ModelGraph<Real>& g, const std::string& site, Var x);

// x W + b + scale * (x A^T) B^T, with A: rank x d_in and B: d_out x rank.
template <typename Real>
Var LoraProject(Tape<Real>& tape, Var x, Var weight, Var bias, Var lora_a,
                Var lora_b, Real scale);

// Multi-head attention whose keys and values are extended with prefix rows.
// Invalid prefix vars mean no prefix.
template <typename Real>
Var PrefixAttend(Tape<Real>& tape, Var q, Var k, Var v, Var prefix_k,
                 Var prefix_v, int n_heads);

// Partition of the registry into trainable names and frozen names.
struct TrainableSet {
  std::set<std::string> names;

  bool Contains(const std::string& n) const { return names.count(n) != 0; }
  int64_t CountParams(const Registry& registry) const;
};

// Throws ConfigError for strategy kNone.
TrainableSet BuildTrainableSet(const Registry& registry);

// {strategy, params_total, params_trainable, params_base, fraction} for the
// registry built from `model` and `peft`.
nlohmann::json ParamsSummary(const ModelConfig& model, const PeftConfig& peft);

// A speaker-specific delta: trainable tensors plus the PEFT state needed to
// run them, keyed to one base file by its SHA-256.
template <typename Real>
struct DeltaCheckpoint {
  Sha256Digest base_sha256{};
  PeftConfig peft;
  ParamStore<Real> tensors;
  nlohmann::json meta = nlohmann::json::object();
};

template <typename Real>
DeltaCheckpoint<Real> ExportDelta(const Model<Real>& adapted,
                                  const Sha256Digest& base_sha256,
                                  const TrainableSet& trainable);

// Composes base and delta. Throws IncompatibleDeltaError on a checksum
// mismatch and ConfigError on tensor names the registry does not know.
template <typename Real>
Model<Real> ApplyDelta(const Model<Real>& base,
                       const Sha256Digest& base_sha256,
                       const DeltaCheckpoint<Real>& delta);

template <typename Real>
TensorFile DeltaToFile(const DeltaCheckpoint<Real>& delta);
template <typename Real>
DeltaCheckpoint<Real> DeltaFromFile(const TensorFile& file);

// Base model at the given registry plus fresh PEFT tensors, mix logits at
// zero and the reference mel used for the new speaker's style embedding.
template <typename Real>
Model<Real> InjectPeft(const Model<Real>& base, const PeftConfig& peft,
                       const Matrix<Real>& reference_mel, uint64_t seed);

}  // namespace pefttts

#endif  // PEFTTTS_PEFT_H_
