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

#include "pefttts/checkpoint.h"

#include <openssl/evp.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace pefttts {

namespace {

constexpr char kMagic[8] = {'P', 'E', 'F', 'T', 'T', 'T', 'S', '1'};

class Writer {
 public:
  void Bytes(const void* p, size_t n) {
    out_.append(static_cast<const char*>(p), n);
  }
  template <typename T>
  void Le(T v) {
    static_assert(std::is_unsigned_v<T>);
    for (size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
  }
  void F32(float f) {
    uint32_t u;
    std::memcpy(&u, &f, 4);
    Le(u);
  }
  void F64(double d) {
    uint64_t u;
    std::memcpy(&u, &d, 8);
    Le(u);
  }
  std::string Take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  void Bytes(void* p, size_t n) {
    Need(n);
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  template <typename T>
  T Le() {
    Need(sizeof(T));
    T v = 0;
    for (size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<uint8_t>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return v;
  }
  float F32() {
    uint32_t u = Le<uint32_t>();
    float f;
    std::memcpy(&f, &u, 4);
    return f;
  }
  double F64() {
    uint64_t u = Le<uint64_t>();
    double d;
    std::memcpy(&d, &u, 8);
    return d;
  }
  std::string String(size_t n) {
    Need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  bool AtEnd() const { return pos_ == in_.size(); }

 private:
  void Need(size_t n) const {
    if (in_.size() - pos_ < n) throw InputError("truncated tensor file");
  }
  std::string_view in_;
  size_t pos_ = 0;
};

}  // namespace

const StoredTensor* TensorFile::Find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::string SerializeTensorFile(const TensorFile& file) {
  Writer w;
  w.Bytes(kMagic, sizeof(kMagic));
  w.Le(static_cast<uint8_t>(file.kind));
  if (file.kind == FileKind::kDelta) {
    w.Bytes(file.base_sha256.data(), file.base_sha256.size());
  }
  w.Le(static_cast<uint32_t>(file.tensors.size()));
  std::set<std::string> seen;
  for (const auto& t : file.tensors) {
    if (!seen.insert(t.name).second) {
      throw ConfigError("duplicate tensor name: " + t.name);
    }
    if (t.name.size() > 0xffff) throw ConfigError("tensor name too long");
    w.Le(static_cast<uint16_t>(t.name.size()));
    w.Bytes(t.name.data(), t.name.size());
    w.Le(static_cast<uint8_t>(t.dtype));
    const auto& shape = t.tensor.shape;
    if (shape.size() > 0xff) throw ConfigError("tensor rank too large");
    w.Le(static_cast<uint8_t>(shape.size()));
    int64_t numel = 1;
    for (int64_t d : shape) {
      if (d < 0 || d > 0xffffffffLL) throw ConfigError("bad tensor dim");
      w.Le(static_cast<uint32_t>(d));
      numel *= d;
    }
    if (numel != t.tensor.data.size()) {
      throw ConfigError("tensor shape does not match data: " + t.name);
    }
    const double* p = t.tensor.data.data();
    for (int64_t i = 0; i < numel; ++i) {
      if (t.dtype == DType::kFloat32) {
        w.F32(static_cast<float>(p[i]));
      } else {
        w.F64(p[i]);
      }
    }
  }
  const std::string blob = file.config.dump();
  w.Le(static_cast<uint32_t>(blob.size()));
  w.Bytes(blob.data(), blob.size());
  return w.Take();
}

TensorFile ParseTensorFile(std::string_view bytes) {
  Reader r(bytes);
  char magic[8];
  r.Bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw InputError("not a PEFTTTS1 file");
  }
  TensorFile file;
  uint8_t kind = r.Le<uint8_t>();
  if (kind > 2) throw InputError("unknown file kind");
  file.kind = static_cast<FileKind>(kind);
  if (file.kind == FileKind::kDelta) {
    r.Bytes(file.base_sha256.data(), file.base_sha256.size());
  }
  const uint32_t count = r.Le<uint32_t>();
  std::set<std::string> seen;
  for (uint32_t i = 0; i < count; ++i) {
    StoredTensor t;
    t.name = r.String(r.Le<uint16_t>());
    if (!seen.insert(t.name).second) {
      throw InputError("duplicate tensor name: " + t.name);
    }
    uint8_t dtype = r.Le<uint8_t>();
    if (dtype > 1) throw InputError("unknown dtype for " + t.name);
    t.dtype = static_cast<DType>(dtype);
    uint8_t rank = r.Le<uint8_t>();
    std::vector<int64_t> shape(rank);
    for (auto& d : shape) d = r.Le<uint32_t>();
    Tensor<double> tensor = Tensor<double>::Zeros(shape);
    double* p = tensor.data.data();
    for (Eigen::Index k = 0; k < tensor.data.size(); ++k) {
      p[k] = t.dtype == DType::kFloat32 ? static_cast<double>(r.F32())
                                        : r.F64();
    }
    t.tensor = std::move(tensor);
    file.tensors.push_back(std::move(t));
  }
  const std::string blob = r.String(r.Le<uint32_t>());
  if (!r.AtEnd()) throw InputError("trailing bytes after config blob");
  try {
    file.config = nlohmann::json::parse(blob);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad config blob: ") + e.what());
  }
  return file;
}

Sha256Digest Sha256(std::string_view bytes) {
  Sha256Digest out{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(),
                 nullptr) != 1 ||
      len != out.size()) {
    throw Error("sha256 failed");
  }
  return out;
}

std::string HexDigest(const Sha256Digest& digest) {
  static const char* kHex = "0123456789abcdef";
  std::string s;
  for (uint8_t b : digest) {
    s.push_back(kHex[b >> 4]);
    s.push_back(kHex[b & 0xf]);
  }
  return s;
}

std::string ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFileAtomic(const std::string& path, std::string_view bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw InputError("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw InputError("cannot rename onto " + path + ": " + ec.message());
  }
}

}  // namespace pefttts
