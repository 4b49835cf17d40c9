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

// Helpers shared by the unit tests and the acceptance binary: small random
// models, finite-difference gradient checks and a brute-force alignment
// oracle.

#ifndef PEFTTTS_TESTS_TEST_SUPPORT_H_
#define PEFTTTS_TESTS_TEST_SUPPORT_H_

#include <cstdint>
#include <functional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "pefttts/graph.h"
#include "pefttts/tensor.h"

namespace pefttts::testing {

// Norm-wise relative error bound for analytic vs. central-difference
// gradients in double precision.
inline constexpr double kGradRtol = 1e-4;
inline constexpr double kFiniteDiffStep = 1e-6;

Matrix<double> RandomMatrix(std::mt19937_64& rng, int rows, int cols,
                            double sigma = 1.0);

// A deliberately tiny configuration so double-precision finite differences
// stay cheap.
ModelConfig TinyConfig();

// Base + PEFT tensors from the registry initializers, random reference
// buffers, and optionally every PEFT and CLN tensor redrawn from N(0, 0.3)
// so that no gradient path is trivially zero.
Model<double> RandomModel(const ModelConfig& config, const PeftConfig& peft,
                          uint64_t seed, bool randomize_peft);

struct GradCheckResult {
  double rel_error = 0;  // ||analytic - numeric|| / max(||analytic||, ||numeric||)
  double grad_norm = 0;
  int entries = 0;
};

using GraphLoss = std::function<Var(ModelGraph<double>&)>;

// Central differences over up to `max_entries` sampled elements of each named
// tensor. The loss graph must be deterministic.
GradCheckResult CheckModelGradients(Model<double>* model,
                                    const std::vector<std::string>& names,
                                    const GraphLoss& loss, int max_entries,
                                    uint64_t seed);

using TapeLoss =
    std::function<Var(Tape<double>&, const std::vector<Var>& inputs)>;

// Central differences over every element of every input.
GradCheckResult CheckTapeGradients(std::vector<Matrix<double>> inputs,
                                   const TapeLoss& loss);

// sum(out * R) for a fixed random R, so every output element matters.
Var RandomProjection(Tape<double>& tape, Var out, uint64_t seed);

struct GradCase {
  std::string component;
  std::function<GradCheckResult(uint64_t seed)> run;
};

// attention, conv_ff, cln, adapter, lora, prefix, pitch_predictor,
// duration_predictor, forward_sum, aligner_forward_sum.
std::vector<GradCase> ComponentGradCases();

inline void PrintTo(const GradCase& c, std::ostream* os) { *os << c.component; }

// All monotonic alignments of T frames to N tokens, by enumeration.
struct BruteForceAlignment {
  double log_sum = 0;   // log sum_paths exp(score)
  double best = 0;      // max path score
  std::vector<int> best_durations;
  Matrix<double> posterior;  // T x N occupancy
};

BruteForceAlignment EnumerateAlignments(const Matrix<double>& scores);

}  // namespace pefttts::testing

#endif  // PEFTTTS_TESTS_TEST_SUPPORT_H_
