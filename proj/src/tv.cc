// src/tv.cc

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

#include "ivnda/tv.h"

#include <cmath>

namespace ivnda {

TvModel::TvModel(Matrix t, Matrix sigma)
    : t_(std::move(t)), sigma_(std::move(sigma)) {
  if (t_.rows() != sigma_.rows() * sigma_.cols())
    Fail(ErrorKind::kShape, "T has ", t_.rows(), " rows, expected ",
         sigma_.rows() * sigma_.cols());
  if (!(sigma_.minCoeff() > 0.0))
    Fail(ErrorKind::kContract, "TV covariances must be positive");
  if (!t_.allFinite()) Fail(ErrorKind::kNumeric, "T has non-finite entries");
  Precompute();
}

void TvModel::Precompute() {
  const int dim = Dim();
  t_scaled_.resize(t_.rows(), t_.cols());
  quad_.resize(NumComponents());
  for (int g = 0; g < NumComponents(); g++) {
    auto block = t_.middleRows(g * dim, dim);
    t_scaled_.middleRows(g * dim, dim) =
        sigma_.row(g).transpose().cwiseInverse().asDiagonal() * block;
    quad_[g] = block.transpose() * t_scaled_.middleRows(g * dim, dim);
  }
}

Matrix TvModel::Precision(const Vector &n) const {
  Matrix l = Matrix::Identity(Rank(), Rank());
  for (int g = 0; g < NumComponents(); g++)
    if (n(g) != 0.0) l.noalias() += n(g) * quad_[g];
  return l;
}

Vector TvModel::Projection(const Matrix &f) const {
  const int dim = Dim();
  Vector b = Vector::Zero(Rank());
  for (int g = 0; g < NumComponents(); g++)
    b.noalias() += t_scaled_.middleRows(g * dim, dim).transpose() *
                   f.row(g).transpose();
  return b;
}

namespace {

void CheckStats(const BwStats &stats, const TvModel &model) {
  if (stats.NumComponents() != model.NumComponents() ||
      stats.Dim() != model.Dim())
    Fail(ErrorKind::kShape, "stats '", stats.recording_id, "' are ",
         stats.NumComponents(), "x", stats.Dim(), " but the TV model is ",
         model.NumComponents(), "x", model.Dim());
}

struct Posterior {
  Vector w;
  Matrix cov;
  double objective = 0.0;
};

Posterior ComputePosterior(const BwStats &stats, const TvModel &model,
                           bool want_cov) {
  CheckStats(stats, model);
  Matrix l = model.Precision(stats.n);
  Eigen::LLT<Matrix> llt(l);
  if (llt.info() != Eigen::Success)
    Fail(ErrorKind::kNumeric, "posterior precision for '", stats.recording_id,
         "' is not positive definite");
  Vector b = model.Projection(stats.f);
  Posterior post;
  post.w = llt.solve(b);
  double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  post.objective = -0.5 * logdet + 0.5 * b.dot(post.w);
  if (want_cov) post.cov = llt.solve(Matrix::Identity(l.rows(), l.cols()));
  return post;
}

}  // namespace

Vector ExtractIvector(const BwStats &stats, const TvModel &model) {
  return ComputePosterior(stats, model, false).w;
}

double TvObjective(const std::vector<BwStats> &stats, const TvModel &model) {
  double total = 0.0;
  for (const auto &s : stats) total += ComputePosterior(s, model, false).objective;
  return total;
}

TvModel TrainTv(const std::vector<BwStats> &stats,
                const DiagonalGmm &gaussians, const TvTrainOptions &opts,
                std::vector<double> *objective) {
  const int num_g = gaussians.NumComponents(), dim = gaussians.Dim(),
            rank = opts.rank;
  if (rank <= 0 || rank > num_g * dim)
    Fail(ErrorKind::kContract, "rank ", rank, " outside [1, ", num_g * dim, "]");
  if (static_cast<int>(stats.size()) < rank)
    Fail(ErrorKind::kInsufficientData, stats.size(),
         " recordings cannot support rank ", rank);
  bool any_signal = false;
  for (const auto &s : stats) {
    if (!s.centered)
      Fail(ErrorKind::kContract, "stats '", s.recording_id,
           "' are not centered");
    if (s.NumComponents() != num_g || s.Dim() != dim)
      Fail(ErrorKind::kShape, "stats '", s.recording_id,
           "' do not match the Gaussians");
    any_signal |= s.f.cwiseAbs().maxCoeff() > 0.0;
  }
  if (!any_signal)
    Fail(ErrorKind::kDegenerate, "all first-order statistics are zero");

  Rng rng(opts.seed);
  const double scale = 0.001 * gaussians.variances.mean();
  Matrix t(num_g * dim, rank);
  for (int r = 0; r < t.rows(); r++)
    for (int c = 0; c < rank; c++) t(r, c) = scale * rng.Normal();
  TvModel model(t, gaussians.variances);
  if (objective != nullptr) objective->clear();

  const int num_s = static_cast<int>(stats.size());
  std::vector<Posterior> posts(num_s);
  for (int iter = 0; iter < opts.num_iters; iter++) {
    ParallelFor(num_s, opts.workers, [&](int s) {
      posts[s] = ComputePosterior(stats[s], model, true);
    });
    std::vector<Matrix> a(num_g, Matrix::Zero(rank, rank));
    Matrix c = Matrix::Zero(num_g * dim, rank);
    double total = 0.0;
    for (int s = 0; s < num_s; s++) {
      const Posterior &p = posts[s];
      total += p.objective;
      Matrix second = p.cov + p.w * p.w.transpose();
      for (int g = 0; g < num_g; g++)
        if (stats[s].n(g) != 0.0) a[g].noalias() += stats[s].n(g) * second;
      for (int g = 0; g < num_g; g++)
        c.middleRows(g * dim, dim).noalias() +=
            stats[s].f.row(g).transpose() * p.w.transpose();
    }
    if (objective != nullptr) objective->push_back(total);
    IVNDA_INFO("TV iteration " << iter << " objective " << total);
    Matrix new_t = model.t();
    for (int g = 0; g < num_g; g++) {
      Eigen::LLT<Matrix> llt(a[g]);
      if (llt.info() != Eigen::Success) {
        IVNDA_WARN("TV component " << g << " has no occupancy; keeping T_g");
        continue;
      }
      new_t.middleRows(g * dim, dim) =
          llt.solve(c.middleRows(g * dim, dim).transpose()).transpose();
    }
    model = TvModel(std::move(new_t), gaussians.variances);
  }
  if (objective != nullptr) objective->push_back(TvObjective(stats, model));
  return model;
}

const IVector *IVectorArchive::Find(const std::string &id) const {
  for (const auto &v : vectors)
    if (v.recording_id == id) return &v;
  return nullptr;
}

void WriteTvModel(const std::string &path, const TvModel &model,
                  const ArtifactHeader &header) {
  BinaryWriter w;
  WriteHeader(&w, "IVTV", header);
  w.U32(static_cast<uint32_t>(model.NumComponents()));
  w.U32(static_cast<uint32_t>(model.Dim()));
  w.U32(static_cast<uint32_t>(model.Rank()));
  w.MatrixF64(model.sigma());
  w.MatrixF64(model.t());
  WriteFileAtomic(path, w.buffer());
}

TvModel ReadTvModel(const std::string &path, ArtifactHeader *header) {
  BinaryReader r(ReadFileBytes(path), path);
  ArtifactHeader h = ReadHeader(&r, "IVTV");
  if (header != nullptr) *header = h;
  int num_g = static_cast<int>(r.U32()), dim = static_cast<int>(r.U32()),
      rank = static_cast<int>(r.U32());
  Matrix sigma = r.MatrixF64(num_g, dim);
  Matrix t = r.MatrixF64(num_g * dim, rank);
  return TvModel(std::move(t), std::move(sigma));
}

void WriteIVectorArchive(const std::string &path,
                         const IVectorArchive &archive) {
  int rank = archive.vectors.empty()
                 ? 0
                 : static_cast<int>(archive.vectors[0].w.size());
  BinaryWriter w;
  WriteHeader(&w, "IVIV", archive.header);
  w.U32(static_cast<uint32_t>(archive.vectors.size()));
  w.U32(static_cast<uint32_t>(rank));
  for (const auto &v : archive.vectors) {
    if (v.w.size() != rank)
      Fail(ErrorKind::kShape, "i-vector '", v.recording_id, "' has dimension ",
           v.w.size(), ", expected ", rank);
    w.String(v.recording_id);
    w.VectorF64(v.w);
  }
  WriteFileAtomic(path, w.buffer());
}

IVectorArchive ReadIVectorArchive(const std::string &path) {
  BinaryReader r(ReadFileBytes(path), path);
  IVectorArchive archive;
  archive.header = ReadHeader(&r, "IVIV");
  uint32_t count = r.U32();
  int rank = static_cast<int>(r.U32());
  for (uint32_t i = 0; i < count; i++) {
    IVector v;
    v.recording_id = r.String();
    v.w = r.VectorF64(rank);
    if (!v.w.allFinite())
      Fail(ErrorKind::kFormat, path, ": non-finite i-vector '",
           v.recording_id, "'");
    archive.vectors.push_back(std::move(v));
  }
  if (!r.AtEnd()) Fail(ErrorKind::kFormat, path, ": trailing bytes");
  return archive;
}

}  // namespace ivnda
