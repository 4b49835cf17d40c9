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

// Binary tensor-table container shared by base checkpoints, per-speaker
// deltas and corpus files. Layout, all integers little-endian:
//
//   "PEFTTTS1"                      8 bytes
//   kind                            u8   (0 base, 1 delta, 2 corpus)
//   base sha256                     32 bytes, delta files only
//   tensor count                    u32
//   per tensor:
//     name length                   u16, followed by UTF-8 name
//     dtype                         u8   (0 binary32, 1 binary64)
//     rank                          u8, followed by rank x u32 dims
//     data                          row-major IEEE-754
//   config length                   u32, followed by UTF-8 JSON

#ifndef PEFTTTS_CHECKPOINT_H_
#define PEFTTTS_CHECKPOINT_H_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pefttts/tensor.h"

namespace pefttts {

enum class DType : uint8_t { kFloat32 = 0, kFloat64 = 1 };
enum class FileKind : uint8_t { kBase = 0, kDelta = 1, kCorpus = 2 };

using Sha256Digest = std::array<uint8_t, 32>;

struct StoredTensor {
  std::string name;
  DType dtype = DType::kFloat32;
  // Values widened to double; narrowing back to binary32 is exact.
  Tensor<double> tensor;
};

struct TensorFile {
  FileKind kind = FileKind::kBase;
  Sha256Digest base_sha256{};
  std::vector<StoredTensor> tensors;
  nlohmann::json config = nlohmann::json::object();

  const StoredTensor* Find(const std::string& name) const;
};

std::string SerializeTensorFile(const TensorFile& file);
// Throws InputError on malformed input.
TensorFile ParseTensorFile(std::string_view bytes);

Sha256Digest Sha256(std::string_view bytes);
std::string HexDigest(const Sha256Digest& digest);

std::string ReadFileBytes(const std::string& path);
// Writes to a sibling temp file and renames over the target.
void WriteFileAtomic(const std::string& path, std::string_view bytes);

template <typename Real>
constexpr DType DTypeOf() {
  return sizeof(Real) == 4 ? DType::kFloat32 : DType::kFloat64;
}

template <typename Real>
StoredTensor ToStored(const std::string& name, const Tensor<Real>& t) {
  return StoredTensor{name, DTypeOf<Real>(),
                      Tensor<double>(t.shape, t.data.template cast<double>())};
}

template <typename Real>
Tensor<Real> FromStored(const StoredTensor& s) {
  return Tensor<Real>(s.tensor.shape, s.tensor.data.template cast<Real>());
}

}  // namespace pefttts

#endif  // PEFTTTS_CHECKPOINT_H_
