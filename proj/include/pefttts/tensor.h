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

#ifndef PEFTTTS_TENSOR_H_
#define PEFTTTS_TENSOR_H_

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "Eigen/Core"

namespace pefttts {

template <typename Real>
using Matrix =
    Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Real>
using RowVector = Eigen::Matrix<Real, 1, Eigen::Dynamic, Eigen::RowMajor>;

// Error hierarchy. The CLI maps these onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration or inconsistent widths.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Invalid data handed to an operation (empty sequence, bad duration, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

// Decoded length exceeds max_frames.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Delta checkpoint trained against a different base.
class IncompatibleDeltaError : public Error {
 public:
  using Error::Error;
};

// A named, shaped parameter. Rank-1 tensors are stored as 1 x n matrices and
// every tensor of rank >= 2 as dims[0] x prod(dims[1:]).
template <typename Real>
struct Tensor {
  std::vector<int64_t> shape;
  Matrix<Real> data;

  Tensor() = default;
  Tensor(std::vector<int64_t> dims, Matrix<Real> values)
      : shape(std::move(dims)), data(std::move(values)) {}

  static Tensor Zeros(const std::vector<int64_t>& dims) {
    Tensor t;
    t.shape = dims;
    t.data = Matrix<Real>::Zero(RowsOf(dims), ColsOf(dims));
    return t;
  }

  static Tensor FromMatrix(Matrix<Real> m) {
    std::vector<int64_t> dims{m.rows(), m.cols()};
    return Tensor(std::move(dims), std::move(m));
  }

  static Tensor FromRow(Matrix<Real> m) {
    std::vector<int64_t> dims{m.size()};
    return Tensor(std::move(dims), std::move(m));
  }

  int64_t size() const { return data.size(); }

  static int64_t RowsOf(const std::vector<int64_t>& dims) {
    return dims.size() <= 1 ? 1 : dims[0];
  }
  static int64_t ColsOf(const std::vector<int64_t>& dims) {
    if (dims.empty()) return 1;
    if (dims.size() == 1) return dims[0];
    int64_t c = 1;
    for (size_t i = 1; i < dims.size(); ++i) c *= dims[i];
    return c;
  }
};

// Name-ordered tensor table. Iteration order is the lexicographic name order,
// which is also the on-disk order of checkpoint files.
template <typename Real>
class ParamStore {
 public:
  using Map = std::map<std::string, Tensor<Real>>;

  bool Contains(const std::string& name) const {
    return tensors_.count(name) != 0;
  }

  const Tensor<Real>& Get(const std::string& name) const {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw ConfigError("unknown tensor: " + name);
    return it->second;
  }

  Tensor<Real>& Mutable(const std::string& name) {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw ConfigError("unknown tensor: " + name);
    return it->second;
  }

  const Matrix<Real>& Value(const std::string& name) const {
    return Get(name).data;
  }

  void Set(const std::string& name, Tensor<Real> t) {
    tensors_[name] = std::move(t);
  }

  void Erase(const std::string& name) { tensors_.erase(name); }

  const Map& tensors() const { return tensors_; }
  size_t size() const { return tensors_.size(); }

  template <typename Other>
  ParamStore<Other> Cast() const {
    ParamStore<Other> out;
    for (const auto& [name, t] : tensors_) {
      out.Set(name, Tensor<Other>(t.shape, t.data.template cast<Other>()));
    }
    return out;
  }

 private:
  Map tensors_;
};

}  // namespace pefttts

#endif  // PEFTTTS_TENSOR_H_
