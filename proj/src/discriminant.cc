// src/discriminant.cc

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

#include "ivnda/discriminant.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace ivnda {

int LabeledVectors::NumClasses() const {
  int c = 0;
  for (int l : labels) c = std::max(c, l + 1);
  return c;
}

std::vector<std::vector<int>> LabeledVectors::Classes() const {
  if (static_cast<int>(labels.size()) != NumSamples())
    Fail(ErrorKind::kShape, labels.size(), " labels for ", NumSamples(),
         " samples");
  std::vector<std::vector<int>> classes(NumClasses());
  for (int i = 0; i < NumSamples(); i++) {
    if (labels[i] < 0) Fail(ErrorKind::kRange, "negative class label");
    classes[labels[i]].push_back(i);
  }
  return classes;
}

LabeledVectors MakeLabeledVectors(Matrix vectors,
                                  const std::vector<std::string> &labels) {
  LabeledVectors data;
  data.vectors = std::move(vectors);
  std::map<std::string, int> ids;
  for (const auto &l : labels) {
    auto it = ids.emplace(l, static_cast<int>(ids.size())).first;
    data.labels.push_back(it->second);
  }
  return data;
}

namespace {

Vector ClassMean(const Matrix &x, const std::vector<int> &members) {
  Vector mean = Vector::Zero(x.cols());
  for (int i : members) mean += x.row(i).transpose();
  return mean / static_cast<double>(members.size());
}

Matrix NormalizeRows(const Matrix &x) {
  Matrix z = x;
  for (int i = 0; i < x.rows(); i++) {
    double norm = x.row(i).norm();
    if (!(norm > 0.0))
      Fail(ErrorKind::kNumeric, "cannot cosine-normalize zero-norm vector ", i);
    z.row(i) /= norm;
  }
  return z;
}

// Distances from unit vector `q` to the rows `candidates` of the unit-row
// matrix `z`, k smallest first (ties to the lower index).
Neighbors Nearest(const Matrix &z, const Eigen::Ref<const Vector> &q,
                  const std::vector<int> &candidates, int k) {
  std::vector<std::pair<double, int>> d;
  d.reserve(candidates.size());
  for (int i : candidates)
    d.emplace_back(std::max(0.0, 1.0 - z.row(i).dot(q)), i);
  k = std::min<int>(k, static_cast<int>(d.size()));
  std::partial_sort(d.begin(), d.begin() + k, d.end());
  Neighbors nb;
  for (int i = 0; i < k; i++) {
    nb.distances.push_back(d[i].first);
    nb.indices.push_back(d[i].second);
  }
  return nb;
}

void RequireMultiSampleClasses(const std::vector<std::vector<int>> &classes) {
  for (size_t c = 0; c < classes.size(); c++)
    if (classes[c].size() < 2)
      Fail(ErrorKind::kDegenerate, "class ", c, " has ", classes[c].size(),
           " sample(s); at least 2 are needed");
}

}  // namespace

Matrix WithinScatter(const LabeledVectors &data) {
  auto classes = data.Classes();
  RequireMultiSampleClasses(classes);
  Matrix sw = Matrix::Zero(data.Dim(), data.Dim());
  for (const auto &members : classes) {
    Vector mean = ClassMean(data.vectors, members);
    for (int i : members) {
      Vector d = data.vectors.row(i).transpose() - mean;
      sw.noalias() += d * d.transpose();
    }
  }
  return sw;
}

Matrix LdaBetweenScatter(const LabeledVectors &data) {
  auto classes = data.Classes();
  Vector mean = data.vectors.colwise().mean().transpose();
  Matrix sb = Matrix::Zero(data.Dim(), data.Dim());
  for (const auto &members : classes) {
    if (members.empty()) continue;
    Vector d = ClassMean(data.vectors, members) - mean;
    sb.noalias() += static_cast<double>(members.size()) * d * d.transpose();
  }
  return sb;
}

double CosineDistance(const Eigen::Ref<const Vector> &a,
                      const Eigen::Ref<const Vector> &b) {
  double na = a.norm(), nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0))
    Fail(ErrorKind::kNumeric, "cosine distance of a zero-norm vector");
  return 1.0 - a.dot(b) / (na * nb);
}

Neighbors KnnCosine(const Eigen::Ref<const Vector> &query, const Matrix &pool,
                    int k) {
  if (k <= 0 || k > pool.rows())
    Fail(ErrorKind::kContract, "k = ", k, " with a pool of ", pool.rows());
  double qn = query.norm();
  if (!(qn > 0.0)) Fail(ErrorKind::kNumeric, "zero-norm query vector");
  Matrix z = NormalizeRows(pool);
  std::vector<int> all(pool.rows());
  std::iota(all.begin(), all.end(), 0);
  return Nearest(z, query / qn, all, k);
}

double NdaWeight(double d_own, double d_rest, double alpha) {
  double a = std::pow(d_own, alpha), b = std::pow(d_rest, alpha);
  if (a + b == 0.0) return 0.5;
  return std::min(a, b) / (a + b);
}

Matrix NdaBetweenScatter(const LabeledVectors &data, const NdaOptions &opts) {
  if (opts.k <= 0) Fail(ErrorKind::kContract, "k must be positive");
  auto classes = data.Classes();
  RequireMultiSampleClasses(classes);
  const Matrix &x = data.vectors;
  const Matrix z = NormalizeRows(x);
  const int num_c = static_cast<int>(classes.size());
  const int n = data.NumSamples();

  // Each contribution becomes a row sqrt(w) (x - M) of `scaled`, so the
  // scatter is scaled' scaled.
  std::vector<Vector> rows;
  for (int c = 0; c < num_c; c++) {
    const auto &members = classes[c];
    std::vector<std::vector<int>> others;
    if (opts.pairing == NdaPairing::kOneVsRest) {
      std::vector<int> rest;
      for (int i = 0; i < n; i++)
        if (data.labels[i] != c) rest.push_back(i);
      if (static_cast<int>(rest.size()) < opts.k)
        Fail(ErrorKind::kDegenerate, "complement of class ", c, " has ",
             rest.size(), " samples, fewer than k = ", opts.k);
      others.push_back(std::move(rest));
    } else {
      for (int j = 0; j < num_c; j++)
        if (j != c) others.push_back(classes[j]);
    }
    const int k_own = std::min<int>(opts.k, static_cast<int>(members.size()) - 1);
    for (int l : members) {
      std::vector<int> own;
      for (int m : members)
        if (m != l) own.push_back(m);
      Neighbors own_nb = Nearest(z, z.row(l).transpose(), own, k_own);
      double d_own = own_nb.distances.back();
      for (const auto &other : others) {
        int k_other = std::min<int>(opts.k, static_cast<int>(other.size()));
        Neighbors nb = Nearest(z, z.row(l).transpose(), other, k_other);
        Vector local_mean = Vector::Zero(data.Dim());
        for (int i : nb.indices) local_mean += x.row(i).transpose();
        local_mean /= k_other;
        double w = opts.unit_weights
                       ? 1.0
                       : NdaWeight(d_own, nb.distances.back(), opts.alpha);
        rows.push_back(std::sqrt(w) * (x.row(l).transpose() - local_mean));
      }
    }
  }
  Matrix scaled(rows.size(), data.Dim());
  for (size_t i = 0; i < rows.size(); i++) scaled.row(i) = rows[i].transpose();
  Matrix sb = scaled.transpose() * scaled;
  return 0.5 * (sb + sb.transpose());
}

Projection ComputeProjection(const Matrix &sw, const Matrix &sb, int dim,
                             double reg) {
  const int r = static_cast<int>(sw.rows());
  if (sw.cols() != r || sb.rows() != r || sb.cols() != r)
    Fail(ErrorKind::kShape, "scatter matrices must both be ", r, "x", r);
  if (dim <= 0 || dim > r)
    Fail(ErrorKind::kContract, "output dimension ", dim, " outside [1, ", r,
         "]");
  double scale = std::max(sw.cwiseAbs().maxCoeff(), 1e-300);
  if ((sw - sw.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
    Fail(ErrorKind::kNumeric, "within-class scatter is not symmetric");
  if ((sb - sb.transpose()).cwiseAbs().maxCoeff() >
      1e-8 * std::max(sb.cwiseAbs().maxCoeff(), 1e-300))
    Fail(ErrorKind::kNumeric, "between-class scatter is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> sw_eig(sw, Eigen::EigenvaluesOnly);
  if (sw_eig.eigenvalues().minCoeff() < -1e-8 * scale)
    Fail(ErrorKind::kNumeric, "within-class scatter is not positive semi-definite");

  Matrix swr = sw;
  swr.diagonal().array() += reg * sw.trace() / r;
  Eigen::LLT<Matrix> llt(swr);
  if (llt.info() != Eigen::Success)
    Fail(ErrorKind::kNumeric, "regularized within-class scatter is singular");
  Matrix l = llt.matrixL();
  // C = L^-1 sb L^-T
  Matrix c = l.triangularView<Eigen::Lower>().solve(sb);
  c = l.triangularView<Eigen::Lower>().solve(c.transpose()).transpose();
  c = 0.5 * (c + c.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(c);
  if (eig.info() != Eigen::Success)
    Fail(ErrorKind::kNumeric, "eigendecomposition failed");

  Projection p;
  p.basis.resize(r, dim);
  p.eigenvalues.resize(dim);
  for (int m = 0; m < dim; m++) {
    int src = r - 1 - m;  // ascending order from Eigen
    Vector v = l.transpose().triangularView<Eigen::Upper>().solve(
        eig.eigenvectors().col(src));
    v.normalize();
    Eigen::Index arg;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    p.basis.col(m) = v;
    p.eigenvalues(m) = eig.eigenvalues()(src);
  }
  return p;
}

Projection ComputeLda(const LabeledVectors &data, int dim) {
  return ComputeProjection(WithinScatter(data), LdaBetweenScatter(data), dim);
}

Projection ComputeNda(const LabeledVectors &data, const NdaOptions &opts,
                      int dim) {
  return ComputeProjection(WithinScatter(data), NdaBetweenScatter(data, opts),
                           dim);
}

Matrix Project(const Matrix &vectors, const Projection &p) {
  if (vectors.cols() != p.basis.rows())
    Fail(ErrorKind::kShape, "vectors of dimension ", vectors.cols(),
         " vs projection input dimension ", p.basis.rows());
  return vectors * p.basis;
}

Vector Project(const Vector &v, const Projection &p) {
  if (v.size() != p.basis.rows())
    Fail(ErrorKind::kShape, "vector of dimension ", v.size(),
         " vs projection input dimension ", p.basis.rows());
  return p.basis.transpose() * v;
}

void WriteDaModel(const std::string &path, const DaModel &model,
                  const ArtifactHeader &header) {
  BinaryWriter w;
  WriteHeader(&w, "IVDA", header);
  w.U32(static_cast<uint32_t>(model.projection.basis.rows()));
  w.U32(static_cast<uint32_t>(model.projection.basis.cols()));
  w.U32(static_cast<uint32_t>(model.method));
  w.U32(static_cast<uint32_t>(model.k));
  w.F64(model.alpha);
  w.MatrixF64(model.projection.basis);
  w.VectorF64(model.projection.eigenvalues);
  WriteFileAtomic(path, w.buffer());
}

DaModel ReadDaModel(const std::string &path, ArtifactHeader *header) {
  BinaryReader r(ReadFileBytes(path), path);
  ArtifactHeader h = ReadHeader(&r, "IVDA");
  if (header != nullptr) *header = h;
  int in_dim = static_cast<int>(r.U32()), out_dim = static_cast<int>(r.U32());
  uint32_t method = r.U32();
  if (method > 1) Fail(ErrorKind::kFormat, path, ": unknown method tag ", method);
  DaModel model;
  model.method = static_cast<DaMethod>(method);
  model.k = static_cast<int>(r.U32());
  model.alpha = r.F64();
  model.projection.basis = r.MatrixF64(in_dim, out_dim);
  model.projection.eigenvalues = r.VectorF64(out_dim);
  if (!r.AtEnd()) Fail(ErrorKind::kFormat, path, ": trailing bytes");
  return model;
}

}  // namespace ivnda
