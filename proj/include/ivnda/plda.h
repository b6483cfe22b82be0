// include/ivnda/plda.h

// Copyright 2026  The ivnda Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef IVNDA_PLDA_H_
#define IVNDA_PLDA_H_

#include <string>
#include <vector>

#include "ivnda/base.h"
#include "ivnda/binary-io.h"
#include "ivnda/discriminant.h"

namespace ivnda {

// Centering and whitening fitted on training vectors, followed by length
// normalization at apply time.
struct Normalizer {
  Vector mean;
  Matrix whitener;  // inverse Cholesky factor of the regularized covariance
};

// Covariance regularization is `reg` times the mean diagonal.
Normalizer FitNormalizer(const Matrix &vectors, double reg = 1e-12);
// Centered and whitened, before length normalization.
Vector Whiten(const Vector &v, const Normalizer &nz);
// Unit-length W (v - m). Throws a degenerate-vector error when it is zero.
Vector Normalize(const Vector &v, const Normalizer &nz);
Matrix NormalizeRows(const Matrix &vectors, const Normalizer &nz);

// Two-covariance PLDA: speaker mean y ~ N(mu, B), session x | y ~ N(y, W).
class PldaModel {
 public:
  PldaModel() = default;
  PldaModel(Vector mu, Matrix b_cov, Matrix w_cov);

  int Dim() const { return static_cast<int>(mu_.size()); }
  const Vector &mu() const { return mu_; }
  const Matrix &b_cov() const { return b_; }
  const Matrix &w_cov() const { return w_; }

  // Same-speaker versus different-speaker log-likelihood ratio.
  double Score(const Vector &enroll, const Vector &test) const;

  // Log-likelihood of one speaker's sessions (rows of `sessions`).
  double SpeakerLogLikelihood(const Matrix &sessions) const;

 private:
  void Finalize();
  Vector mu_;
  Matrix b_, w_;
  // Cached for scoring: llr = 1/2 e'Qe + 1/2 t'Qt + e'Pt + const on
  // centered vectors.
  Matrix q_, p_;
  double const_ = 0.0;
};

// EM for the two-covariance model. `log_likelihoods` receives the total
// data log-likelihood before the first and after every iteration.
PldaModel TrainPlda(const LabeledVectors &data, int num_iters,
                    std::vector<double> *log_likelihoods = nullptr);

double PldaLogLikelihood(const LabeledVectors &data, const PldaModel &model);

// "IVPL" header, u32 M, f64 mu[M], f64 B[M*M], f64 W[M*M].
void WritePlda(const std::string &path, const PldaModel &model,
               const ArtifactHeader &header);
PldaModel ReadPlda(const std::string &path, ArtifactHeader *header = nullptr);

// "IVNZ" header, u32 M, f64 mean[M], f64 whitener[M*M].
void WriteNormalizer(const std::string &path, const Normalizer &nz,
                     const ArtifactHeader &header);
Normalizer ReadNormalizer(const std::string &path,
                          ArtifactHeader *header = nullptr);

}  // namespace ivnda

#endif  // IVNDA_PLDA_H_
