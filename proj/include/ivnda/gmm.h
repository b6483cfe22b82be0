// include/ivnda/gmm.h

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

#ifndef IVNDA_GMM_H_
#define IVNDA_GMM_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ivnda/base.h"
#include "ivnda/binary-io.h"
#include "ivnda/frontend.h"

namespace ivnda {

// Diagonal-covariance mixture; used both as the UBM and as the Gaussian set
// paired with externally supplied alignments.
struct DiagonalGmm {
  Vector weights;     // G
  Matrix means;       // G x D
  Matrix variances;   // G x D

  int NumComponents() const { return static_cast<int>(weights.size()); }
  int Dim() const { return static_cast<int>(means.cols()); }

  // Throws a contract error if the weights are off the simplex, a variance
  // is non-positive, or shapes disagree.
  void Validate() const;

  // log(w_g) + log N(x; mean_g, diag(var_g)) for every component.
  Vector ComponentLogLikelihoods(const Eigen::Ref<const Vector> &x) const;
  double LogLikelihood(const Eigen::Ref<const Vector> &x) const;
};

// Per frame: (component, posterior) pairs.
using FramePosterior = std::vector<std::pair<int32_t, double>>;
using PosteriorMatrix = std::vector<FramePosterior>;

struct GmmTrainOptions {
  int num_components = 2048;
  int num_iters = 10;
  int iters_per_split = 5;
  double split_perturb = 0.2;     // times the per-dimension std-dev
  double var_floor_factor = 1e-3; // times the global per-dimension variance
  int workers = 1;
};

// Binary-splitting EM on the speech frames of `features`. When
// `log_likelihoods` is given it receives the average per-frame
// log-likelihood before the first and after every final-stage iteration.
DiagonalGmm TrainGmm(const std::vector<FeatureMatrix> &features,
                     const GmmTrainOptions &opts,
                     std::vector<double> *log_likelihoods = nullptr);

// Average per-frame log-likelihood over the rows of `frames`.
double AverageLogLikelihood(const DiagonalGmm &gmm, const Matrix &frames);

// Posteriors of the rows of `frames`, each truncated to the top_n largest
// (ties to the lower index) and renormalized. top_n <= 0 keeps all.
PosteriorMatrix GmmPosteriors(const DiagonalGmm &gmm, const Matrix &frames,
                              int top_n);
// Speech frames only.
PosteriorMatrix GmmPosteriors(const DiagonalGmm &gmm,
                              const FeatureMatrix &features, int top_n);

// Posterior-weighted Gaussians. Components with zero occupancy get the
// global mean/variance and a negligible weight; their indices are reported
// through `empty_components`.
DiagonalGmm TrainSupervisedGaussians(
    const std::vector<FeatureMatrix> &features,
    const std::vector<PosteriorMatrix> &posteriors, int num_components,
    double var_floor_factor = 1e-3,
    std::vector<int> *empty_components = nullptr);

// Posterior archive: one line per frame of "g:p" pairs, a blank line after
// each recording. The companion index lists "recording_id num_frames".
struct PosteriorArchive {
  std::vector<std::string> ids;
  std::vector<PosteriorMatrix> posteriors;
};

std::string FormatPosteriors(const PosteriorArchive &archive);
std::string FormatPosteriorIndex(const PosteriorArchive &archive);
// Validates indices against num_components and renormalizes frames whose
// mass deviates from 1 by more than 1e-4. An empty index means a single
// anonymous recording.
PosteriorArchive ParsePosteriors(const std::string &text,
                                 const std::string &index_text,
                                 int num_components, const std::string &what);
void WritePosteriors(const std::string &path, const PosteriorArchive &archive);
// Reads `path` and, when present, `path`.index.
PosteriorArchive LoadExternalPosteriors(const std::string &path,
                                        int num_components);

// Alignment error unless the frame count equals the speech-frame count.
void CheckAlignment(const PosteriorMatrix &post, const FeatureMatrix &features,
                    const std::string &id);

// "IVGM" header, u32 G, u32 D, f64 weights, means, variances.
void WriteGmm(const std::string &path, const DiagonalGmm &gmm,
              const ArtifactHeader &header);
DiagonalGmm ReadGmm(const std::string &path, ArtifactHeader *header = nullptr);

}  // namespace ivnda

#endif  // IVNDA_GMM_H_
