// include/ivnda/discriminant.h

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

#ifndef IVNDA_DISCRIMINANT_H_
#define IVNDA_DISCRIMINANT_H_

#include <string>
#include <vector>

#include "ivnda/base.h"
#include "ivnda/binary-io.h"

namespace ivnda {

// Rows of `vectors` are samples; labels[i] is the class of row i, in
// [0, NumClasses()).
struct LabeledVectors {
  Matrix vectors;
  std::vector<int> labels;

  int NumSamples() const { return static_cast<int>(vectors.rows()); }
  int Dim() const { return static_cast<int>(vectors.cols()); }
  int NumClasses() const;
  // Row indices per class.
  std::vector<std::vector<int>> Classes() const;
};

// Maps arbitrary string labels to dense class ids in order of appearance.
LabeledVectors MakeLabeledVectors(Matrix vectors,
                                  const std::vector<std::string> &labels);

struct Projection {
  Matrix basis;        // R x M, unit-norm columns
  Vector eigenvalues;  // M, descending
};

enum class DaMethod { kLda = 0, kNda = 1 };

// Sum over classes of the scatter of each sample around its class mean.
Matrix WithinScatter(const LabeledVectors &data);

// Between-class scatter of the class means around the global mean, each
// weighted by its class size.
Matrix LdaBetweenScatter(const LabeledVectors &data);

struct Neighbors {
  std::vector<int> indices;
  std::vector<double> distances;  // 1 - cos, ascending
};

double CosineDistance(const Eigen::Ref<const Vector> &a,
                      const Eigen::Ref<const Vector> &b);

// k rows of `pool` closest to `query` in cosine distance, ties to the lower
// row index.
Neighbors KnnCosine(const Eigen::Ref<const Vector> &query, const Matrix &pool,
                    int k);

// min(a^alpha, b^alpha) / (a^alpha + b^alpha), 0.5 when both are zero.
double NdaWeight(double d_own, double d_rest, double alpha);

enum class NdaPairing {
  kOneVsRest,  // the "other class" is the pooled complement
  kAllPairs,   // every other class separately
};

struct NdaOptions {
  int k = 10;
  double alpha = 2.0;
  NdaPairing pairing = NdaPairing::kOneVsRest;
  // Replaces every weight by 1.
  bool unit_weights = false;
};

// Nearest-neighbor between-class scatter: sum over samples (and other
// classes) of w (x - M)(x - M)', M the mean of the sample's k cosine
// nearest neighbors in the other class. The own-class neighbor rank used
// for the weight is min(k, class size - 1).
Matrix NdaBetweenScatter(const LabeledVectors &data, const NdaOptions &opts);

// Top-M solutions of sb v = lambda sw v, computed through the Cholesky
// factor of sw + reg * trace(sw) / R * I. Columns are unit-normalized with
// their largest-magnitude entry positive.
Projection ComputeProjection(const Matrix &sw, const Matrix &sb, int dim,
                             double reg = 1e-6);

Projection ComputeLda(const LabeledVectors &data, int dim);
Projection ComputeNda(const LabeledVectors &data, const NdaOptions &opts,
                      int dim);

// vectors (N x R) * basis (R x M).
Matrix Project(const Matrix &vectors, const Projection &p);
Vector Project(const Vector &v, const Projection &p);

struct DaModel {
  DaMethod method = DaMethod::kNda;
  int k = 0;
  double alpha = 0.0;
  Projection projection;
};

// "IVDA" header, u32 R, u32 M, u32 method (0 LDA, 1 NDA), u32 k,
// f64 alpha, f64 basis[R*M] row-major, f64 eigenvalues[M].
void WriteDaModel(const std::string &path, const DaModel &model,
                  const ArtifactHeader &header);
DaModel ReadDaModel(const std::string &path, ArtifactHeader *header = nullptr);

}  // namespace ivnda

#endif  // IVNDA_DISCRIMINANT_H_
