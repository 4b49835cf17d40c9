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

#include "pefttts/peft.h"

#include <utility>

namespace pefttts {

template <typename Real>
Var AdapterForward(ModelGraph<Real>& g, const std::string& site, Var x) {
  auto& tape = g.tape();
  const std::string p = site + ".adapter";
  Var h = x;
  if (g.Has(p + ".norm.scale")) {
    h = tape.NormalizeRows(h, static_cast<Real>(g.config().ln_eps));
    h = tape.AddRow(tape.MulRow(h, g.P(p + ".norm.scale")),
                    g.P(p + ".norm.bias"));
  }
  h = tape.Relu(g.Linear(p + ".down", h));
  h = g.Dropout(h, g.peft().adapter_dropout);
  return tape.Add(x, g.Linear(p + ".up", h));
}

template <typename Real>
Var MaybeAdapter(ModelGraph<Real>& g, const std::string& site, Var x) {
  if (!g.Has(site + ".adapter.up.weight")) return x;
  return AdapterForward(g, site, x);
}

template <typename Real>
Var LoraProject(Tape<Real>& tape, Var x, Var weight, Var bias, Var lora_a,
                Var lora_b, Real scale) {
  Var base = tape.AddRow(tape.MatMul(x, weight), bias);
  Var low = tape.MatMulNT(tape.MatMulNT(x, lora_a), lora_b);
  return tape.Add(base, tape.Scale(low, scale));
}

template <typename Real>
Var PrefixAttend(Tape<Real>& tape, Var q, Var k, Var v, Var prefix_k,
                 Var prefix_v, int n_heads) {
  if (prefix_k.valid() != prefix_v.valid()) {
    throw ConfigError("prefix keys and values must come together");
  }
  if (prefix_k.valid() && tape.value(prefix_k).rows() > 0) {
    k = tape.ConcatRows(prefix_k, k);
    v = tape.ConcatRows(prefix_v, v);
  }
  return tape.Attention(q, k, v, n_heads);
}

int64_t TrainableSet::CountParams(const Registry& registry) const {
  int64_t n = 0;
  for (const auto& name : names) {
    const ParamSpec* s = registry.Find(name);
    if (s != nullptr) n += s->numel();
  }
  return n;
}

TrainableSet BuildTrainableSet(const Registry& registry) {
  const PeftConfig& pc = registry.peft();
  if (pc.strategy == Strategy::kNone) {
    throw ConfigError("strategy 'none' has no trainable set");
  }
  TrainableSet set;
  for (const auto& s : registry.specs()) {
    if (s.role == ParamRole::kBuffer) continue;
    bool train = false;
    switch (pc.strategy) {
      case Strategy::kAdapter:
      case Strategy::kLora:
      case Strategy::kPrefix:
        train = s.role == ParamRole::kPeft;
        break;
      case Strategy::kBitFit:
        train = s.role == ParamRole::kBase && s.is_bias;
        break;
      case Strategy::kFull:
        train = true;
        break;
      case Strategy::kNone:
        break;
    }
    if (s.role == ParamRole::kMix && pc.train_mix_weights) train = true;
    if (s.is_cln && pc.train_cln) train = true;
    if (train) set.names.insert(s.name);
  }
  return set;
}

nlohmann::json ParamsSummary(const ModelConfig& model, const PeftConfig& peft) {
  const Registry registry = Registry::Build(model, peft);
  const int64_t total = registry.CountParams();
  const int64_t trainable = BuildTrainableSet(registry).CountParams(registry);
  return {{"strategy", StrategyName(peft.strategy)},
          {"params_total", total},
          {"params_trainable", trainable},
          {"params_base", registry.CountRole(ParamRole::kBase)},
          {"fraction", static_cast<double>(trainable) / total}};
}

template <typename Real>
DeltaCheckpoint<Real> ExportDelta(const Model<Real>& adapted,
                                  const Sha256Digest& base_sha256,
                                  const TrainableSet& trainable) {
  DeltaCheckpoint<Real> delta;
  delta.base_sha256 = base_sha256;
  delta.peft = adapted.registry.peft();
  for (const auto& s : adapted.registry.specs()) {
    const bool adaptation_state =
        s.role == ParamRole::kPeft || s.role == ParamRole::kMix ||
        s.name == kAdaptReferenceName;
    if (!adaptation_state && !trainable.Contains(s.name)) continue;
    if (!adapted.params.Contains(s.name)) {
      if (s.role == ParamRole::kBuffer) continue;
      throw ConfigError("adapted model lacks tensor " + s.name);
    }
    delta.tensors.Set(s.name, adapted.params.Get(s.name));
  }
  return delta;
}

template <typename Real>
Model<Real> ApplyDelta(const Model<Real>& base,
                       const Sha256Digest& base_sha256,
                       const DeltaCheckpoint<Real>& delta) {
  if (delta.base_sha256 != base_sha256) {
    throw IncompatibleDeltaError(
        "incompatible delta: built on base " + HexDigest(delta.base_sha256) +
        ", given base " + HexDigest(base_sha256));
  }
  Model<Real> out{Registry::Build(base.registry.model(), delta.peft),
                  base.params};
  for (const auto& [name, t] : delta.tensors.tensors()) {
    const ParamSpec* spec = out.registry.Find(name);
    if (spec == nullptr) throw ConfigError("unknown tensor in delta: " + name);
    if (spec->role != ParamRole::kBuffer && t.shape != spec->shape) {
      throw ConfigError("shape mismatch for delta tensor " + name);
    }
    out.params.Set(name, t);
  }
  for (const auto& s : out.registry.specs()) {
    if (s.role != ParamRole::kBuffer && !out.params.Contains(s.name)) {
      throw ConfigError("delta lacks tensor " + s.name);
    }
  }
  return out;
}

template <typename Real>
TensorFile DeltaToFile(const DeltaCheckpoint<Real>& delta) {
  TensorFile file;
  file.kind = FileKind::kDelta;
  file.base_sha256 = delta.base_sha256;
  for (const auto& [name, t] : delta.tensors.tensors()) {
    file.tensors.push_back(ToStored(name, t));
  }
  file.config = {{"peft", delta.peft}, {"meta", delta.meta}};
  return file;
}

template <typename Real>
DeltaCheckpoint<Real> DeltaFromFile(const TensorFile& file) {
  if (file.kind != FileKind::kDelta) throw InputError("not a delta file");
  DeltaCheckpoint<Real> delta;
  delta.base_sha256 = file.base_sha256;
  try {
    delta.peft = file.config.at("peft").get<PeftConfig>();
    delta.meta = file.config.value("meta", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad delta config: ") + e.what());
  }
  for (const auto& t : file.tensors) {
    delta.tensors.Set(t.name, FromStored<Real>(t));
  }
  return delta;
}

template <typename Real>
Model<Real> InjectPeft(const Model<Real>& base, const PeftConfig& peft,
                       const Matrix<Real>& reference_mel, uint64_t seed) {
  if (peft.strategy == Strategy::kNone) {
    throw ConfigError("cannot inject strategy 'none'");
  }
  Model<Real> out{Registry::Build(base.registry.model(), peft), base.params};
  for (ParamRole role : {ParamRole::kPeft, ParamRole::kMix}) {
    auto fresh = InitializeParams<Real>(out.registry, role, seed);
    for (auto& [name, t] : fresh.tensors()) out.params.Set(name, t);
  }
  out.params.Set(kAdaptReferenceName, Tensor<Real>::FromMatrix(reference_mel));
  return out;
}

#define PEFTTTS_INSTANTIATE(R)                                               \
  template Var AdapterForward<R>(ModelGraph<R>&, const std::string&, Var);   \
  template Var MaybeAdapter<R>(ModelGraph<R>&, const std::string&, Var);     \
  template Var LoraProject<R>(Tape<R>&, Var, Var, Var, Var, Var, R);         \
  template Var PrefixAttend<R>(Tape<R>&, Var, Var, Var, Var, Var, int);      \
  template DeltaCheckpoint<R> ExportDelta<R>(                                \
      const Model<R>&, const Sha256Digest&, const TrainableSet&);            \
  template Model<R> ApplyDelta<R>(const Model<R>&, const Sha256Digest&,      \
                                  const DeltaCheckpoint<R>&);                \
  template TensorFile DeltaToFile<R>(const DeltaCheckpoint<R>&);             \
  template DeltaCheckpoint<R> DeltaFromFile<R>(const TensorFile&);           \
  template Model<R> InjectPeft<R>(const Model<R>&, const PeftConfig&,        \
                                  const Matrix<R>&, uint64_t);

PEFTTTS_INSTANTIATE(float)
PEFTTTS_INSTANTIATE(double)

#undef PEFTTTS_INSTANTIATE

}  // namespace pefttts
