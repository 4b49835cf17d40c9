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

#include "pefttts/metrics.h"

#include <algorithm>
#include <cmath>

#include "Eigen/Eigenvalues"
#include "glog/logging.h"

namespace pefttts {

double MeanSquaredError(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw ConfigError("MSE needs two non-empty inputs of equal length");
  }
  double sum = 0;
  for (size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
  return sum / a.size();
}

RowVector<double> UtteranceSignature(const Matrix<double>& mel,
                                     std::span<const double> pitch) {
  if (mel.rows() < 1 || pitch.empty()) {
    throw InputError("signature needs at least one frame and one token");
  }
  const Eigen::Index d = mel.cols();
  RowVector<double> sig(2 * d + 2);
  RowVector<double> mean = mel.colwise().mean();
  RowVector<double> var =
      (mel.rowwise() - mean).array().square().colwise().mean().matrix();
  sig.head(d) = mean;
  sig.segment(d, d) = var.array().sqrt().matrix();
  double pm = 0;
  for (double p : pitch) pm += p;
  pm /= pitch.size();
  double pv = 0;
  for (double p : pitch) pv += (p - pm) * (p - pm);
  pv /= pitch.size();
  sig(2 * d) = pm;
  sig(2 * d + 1) = std::sqrt(pv);
  return sig;
}

double SecsFromSignatures(const std::vector<RowVector<double>>& generated,
                          const std::vector<RowVector<double>>& reference) {
  if (generated.empty() || reference.empty()) {
    throw InputError("SECS needs non-empty sets");
  }
  auto mean_of = [](const std::vector<RowVector<double>>& sigs) {
    RowVector<double> m = RowVector<double>::Zero(sigs[0].size());
    for (const auto& s : sigs) {
      if (s.size() != m.size()) throw ConfigError("signature width mismatch");
      m += s;
    }
    return RowVector<double>(m / double(sigs.size()));
  };
  RowVector<double> a = mean_of(generated);
  RowVector<double> b = mean_of(reference);
  if (a.size() != b.size()) throw ConfigError("signature width mismatch");
  const double denom = a.norm() * b.norm();
  if (denom == 0) return 0;
  return std::clamp(a.dot(b) / denom, -1.0, 1.0);
}

double SecsProxy(const std::vector<Utterance>& generated,
                 const std::vector<Utterance>& reference) {
  std::vector<RowVector<double>> g, r;
  for (const auto& u : generated) g.push_back(UtteranceSignature(u.mel, u.pitch));
  for (const auto& u : reference) r.push_back(UtteranceSignature(u.mel, u.pitch));
  return SecsFromSignatures(g, r);
}

Gaussian FitGaussian(const std::vector<const Matrix<double>*>& mels,
                     bool* diagonal) {
  if (mels.empty()) throw InputError("no frames to fit");
  const Eigen::Index d = mels[0]->cols();
  Eigen::Index frames = 0;
  for (const auto* m : mels) {
    if (m->cols() != d) throw ConfigError("mel width mismatch");
    frames += m->rows();
  }
  if (frames < 1) throw InputError("no frames to fit");
  Matrix<double> stacked(frames, d);
  Eigen::Index row = 0;
  for (const auto* m : mels) {
    stacked.middleRows(row, m->rows()) = *m;
    row += m->rows();
  }
  Gaussian g;
  g.mean = stacked.colwise().mean();
  Matrix<double> centered = stacked.rowwise() - g.mean;
  const double denom = frames > 1 ? double(frames - 1) : 1.0;
  g.cov = (centered.transpose() * centered) / denom;
  const bool diag = frames < d + 1;
  if (diag) {
    LOG(WARNING) << "only " << frames << " frames for a " << d
                 << "-dim covariance; using the diagonal";
    Matrix<double> dc = Matrix<double>::Zero(d, d);
    dc.diagonal() = g.cov.diagonal();
    g.cov = dc;
  }
  if (diagonal != nullptr) *diagonal = diag;
  return g;
}

Matrix<double> SymmetricSqrt(const Matrix<double>& m) {
  Matrix<double> sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix<double>> eig(sym);
  Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() *
         eig.eigenvectors().transpose();
}

double FrechetGaussian(const RowVector<double>& mu1, const Matrix<double>& s1,
                       const RowVector<double>& mu2, const Matrix<double>& s2) {
  const Eigen::Index d = mu1.size();
  if (mu2.size() != d || s1.rows() != d || s1.cols() != d || s2.rows() != d ||
      s2.cols() != d) {
    throw ConfigError("Frechet distance dimension mismatch");
  }
  Matrix<double> a = 0.5 * (s1 + s1.transpose());
  Matrix<double> b = 0.5 * (s2 + s2.transpose());
  Matrix<double> root_a = SymmetricSqrt(a);
  Matrix<double> inner = root_a * b * root_a;
  inner = 0.5 * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix<double>> eig(inner,
                                                    Eigen::EigenvaluesOnly);
  const double cross = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double dist =
      (mu1 - mu2).squaredNorm() + a.trace() + b.trace() - 2.0 * cross;
  return std::max(0.0, dist);
}

double CfsdProxy(
    const std::vector<std::vector<const Matrix<double>*>>& generated,
    const std::vector<std::vector<const Matrix<double>*>>& reference) {
  if (generated.size() != reference.size() || generated.empty()) {
    throw ConfigError("CFSD needs matching, non-empty speaker lists");
  }
  double total = 0;
  for (size_t s = 0; s < generated.size(); ++s) {
    Gaussian g = FitGaussian(generated[s]);
    Gaussian r = FitGaussian(reference[s]);
    total += FrechetGaussian(g.mean, g.cov, r.mean, r.cov);
  }
  return total / generated.size();
}

}  // namespace pefttts
