// include/ivnda/tv.h

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

#ifndef IVNDA_TV_H_
#define IVNDA_TV_H_

#include <cstdint>
#include <string>
#include <vector>

#include "ivnda/base.h"
#include "ivnda/binary-io.h"
#include "ivnda/bw-stats.h"
#include "ivnda/gmm.h"

namespace ivnda {

// Total-variability model: centered first-order stats of component g are
// explained as n_g T_g w plus noise with covariance diag(sigma_g) per frame,
// with w ~ N(0, I).
class TvModel {
 public:
  TvModel() = default;
  // t is (G*D) x R with component g occupying rows [g*D, (g+1)*D).
  TvModel(Matrix t, Matrix sigma);

  int NumComponents() const { return static_cast<int>(sigma_.rows()); }
  int Dim() const { return static_cast<int>(sigma_.cols()); }
  int Rank() const { return static_cast<int>(t_.cols()); }
  const Matrix &t() const { return t_; }
  const Matrix &sigma() const { return sigma_; }

  // Posterior precision L = I + sum_g n_g T_g' Sigma_g^-1 T_g.
  Matrix Precision(const Vector &n) const;
  // Linear term T' Sigma^-1 f.
  Vector Projection(const Matrix &f) const;

 private:
  void Precompute();
  Matrix t_;
  Matrix sigma_;
  Matrix t_scaled_;              // Sigma^-1 T, (G*D) x R
  std::vector<Matrix> quad_;     // T_g' Sigma_g^-1 T_g per component
};

// Posterior mean of w: L^-1 T' Sigma^-1 f for centered stats. Throws a
// numeric error if L fails its Cholesky factorization.
Vector ExtractIvector(const BwStats &stats, const TvModel &model);

struct TvTrainOptions {
  int rank = 500;
  int num_iters = 10;
  uint64_t seed = 0;
  int workers = 1;
};

// Marginal log-likelihood of the centered stats up to terms that do not
// depend on T: sum_s -1/2 log|L_s| + 1/2 b_s' L_s^-1 b_s.
double TvObjective(const std::vector<BwStats> &stats, const TvModel &model);

// EM on centered statistics. Sigma stays at the Gaussians' variances.
// `objective` receives the value before the first and after every
// iteration.
TvModel TrainTv(const std::vector<BwStats> &stats,
                const DiagonalGmm &gaussians, const TvTrainOptions &opts,
                std::vector<double> *objective = nullptr);

struct IVector {
  std::string recording_id;
  Vector w;
};

struct IVectorArchive {
  ArtifactHeader header;  // parent = TV model fingerprint
  std::vector<IVector> vectors;

  const IVector *Find(const std::string &id) const;
};

// "IVTV" header, u32 G, u32 D, u32 R, f64 sigma[G*D], f64 T[(G*D)*R].
void WriteTvModel(const std::string &path, const TvModel &model,
                  const ArtifactHeader &header);
TvModel ReadTvModel(const std::string &path, ArtifactHeader *header = nullptr);

// "IVIV" header, u32 count, u32 R; per record: id, f64 w[R].
void WriteIVectorArchive(const std::string &path, const IVectorArchive &archive);
IVectorArchive ReadIVectorArchive(const std::string &path);

}  // namespace ivnda

#endif  // IVNDA_TV_H_
