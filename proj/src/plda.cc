// src/plda.cc

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

#include "ivnda/plda.h"

#include <cmath>

namespace ivnda {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

Eigen::LLT<Matrix> Factor(const Matrix &m, const char *what) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success)
    Fail(ErrorKind::kNumeric, what, " is not positive definite");
  return llt;
}

double LogDet(const Eigen::LLT<Matrix> &llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Matrix Inverse(const Eigen::LLT<Matrix> &llt, int dim) {
  Matrix inv = llt.solve(Matrix::Identity(dim, dim));
  return 0.5 * (inv + inv.transpose());
}

double GaussianLogDensity(const Vector &x, const Vector &mean,
                          const Matrix &cov) {
  Eigen::LLT<Matrix> llt = Factor(cov, "covariance");
  Vector d = x - mean;
  return -0.5 * (x.size() * kLog2Pi + LogDet(llt) + d.dot(llt.solve(d)));
}

}  // namespace

// ---------------------------------------------------------------- normalizer

Normalizer FitNormalizer(const Matrix &vectors, double reg) {
  const int n = static_cast<int>(vectors.rows()),
            dim = static_cast<int>(vectors.cols());
  if (n <= dim)
    Fail(ErrorKind::kInsufficientData, n, " vectors cannot whiten dimension ",
         dim);
  Normalizer nz;
  nz.mean = vectors.colwise().mean().transpose();
  Matrix centered = vectors.rowwise() - nz.mean.transpose();
  Matrix cov = centered.transpose() * centered / n;
  cov.diagonal().array() += reg * cov.trace() / dim;
  Eigen::LLT<Matrix> llt = Factor(cov, "i-vector covariance");
  Matrix l = llt.matrixL();
  nz.whitener = l.triangularView<Eigen::Lower>().solve(Matrix::Identity(dim, dim));
  return nz;
}

Vector Whiten(const Vector &v, const Normalizer &nz) {
  if (v.size() != nz.mean.size())
    Fail(ErrorKind::kShape, "vector of dimension ", v.size(),
         " vs normalizer dimension ", nz.mean.size());
  return nz.whitener * (v - nz.mean);
}

Vector Normalize(const Vector &v, const Normalizer &nz) {
  Vector w = Whiten(v, nz);
  double norm = w.norm();
  if (!(norm > 0.0) || !std::isfinite(norm))
    Fail(ErrorKind::kDegenerate, "degenerate vector: zero after whitening");
  return w / norm;
}

Matrix NormalizeRows(const Matrix &vectors, const Normalizer &nz) {
  Matrix out(vectors.rows(), vectors.cols());
  for (int i = 0; i < vectors.rows(); i++)
    out.row(i) = Normalize(vectors.row(i).transpose(), nz).transpose();
  return out;
}

// ---------------------------------------------------------------- PLDA

PldaModel::PldaModel(Vector mu, Matrix b_cov, Matrix w_cov)
    : mu_(std::move(mu)), b_(std::move(b_cov)), w_(std::move(w_cov)) {
  const int m = Dim();
  if (b_.rows() != m || b_.cols() != m || w_.rows() != m || w_.cols() != m)
    Fail(ErrorKind::kShape, "PLDA covariances must be ", m, "x", m);
  Finalize();
}

void PldaModel::Finalize() {
  const int m = Dim();
  Matrix total = b_ + w_;
  Eigen::LLT<Matrix> total_llt = Factor(total, "B + W");
  Matrix total_inv = Inverse(total_llt, m);
  // Schur complement of the joint covariance [[T, B], [B, T]].
  Matrix schur = total - b_ * total_inv * b_;
  schur = 0.5 * (schur + schur.transpose());
  Eigen::LLT<Matrix> schur_llt = Factor(schur, "T - B T^-1 B");
  Matrix schur_inv = Inverse(schur_llt, m);
  q_ = total_inv - schur_inv;
  p_ = total_inv * b_ * schur_inv;
  p_ = 0.5 * (p_ + p_.transpose());
  const_ = 0.5 * LogDet(total_llt) - 0.5 * LogDet(schur_llt);
}

double PldaModel::Score(const Vector &enroll, const Vector &test) const {
  if (enroll.size() != Dim() || test.size() != Dim())
    Fail(ErrorKind::kShape, "PLDA scoring of dimension ", enroll.size(), "/",
         test.size(), " vectors with a ", Dim(), "-dim model");
  if (!enroll.allFinite() || !test.allFinite())
    Fail(ErrorKind::kNumeric, "non-finite vector in PLDA scoring");
  Vector e = enroll - mu_, t = test - mu_;
  return 0.5 * e.dot(q_ * e) + 0.5 * t.dot(q_ * t) + e.dot(p_ * t) + const_;
}

double PldaModel::SpeakerLogLikelihood(const Matrix &sessions) const {
  const int n = static_cast<int>(sessions.rows()), m = Dim();
  Vector mean = sessions.colwise().mean().transpose();
  double ll = GaussianLogDensity(mean, mu_, b_ + w_ / n);
  if (n > 1) {
    Eigen::LLT<Matrix> w_llt = Factor(w_, "W");
    double quad = 0.0;
    for (int i = 0; i < n; i++) {
      Vector d = sessions.row(i).transpose() - mean;
      quad += d.dot(w_llt.solve(d));
    }
    ll += -0.5 * (n - 1) * (m * kLog2Pi + LogDet(w_llt)) - 0.5 * m * std::log(n) -
          0.5 * quad;
  }
  return ll;
}

double PldaLogLikelihood(const LabeledVectors &data, const PldaModel &model) {
  double total = 0.0;
  for (const auto &members : data.Classes()) {
    if (members.empty()) continue;
    Matrix sessions(members.size(), data.Dim());
    for (size_t i = 0; i < members.size(); i++)
      sessions.row(i) = data.vectors.row(members[i]);
    total += model.SpeakerLogLikelihood(sessions);
  }
  return total;
}

PldaModel TrainPlda(const LabeledVectors &data, int num_iters,
                    std::vector<double> *log_likelihoods) {
  const int m = data.Dim();
  const auto classes = data.Classes();
  int multi = 0, num_spk = 0;
  for (const auto &c : classes) {
    if (c.empty()) continue;
    num_spk++;
    multi += c.size() >= 2;
  }
  if (multi == 0)
    Fail(ErrorKind::kInsufficientData,
         "PLDA is unidentifiable: every speaker has a single session");
  if (2 * multi < num_spk)
    IVNDA_WARN("only " << multi << " of " << num_spk
               << " speakers have multiple sessions");
  const Matrix &x = data.vectors;
  const double n_total = static_cast<double>(data.NumSamples());

  Vector mu = x.colwise().mean().transpose();
  Matrix total_cov =
      (x.rowwise() - mu.transpose()).transpose() * (x.rowwise() - mu.transpose()) /
      n_total;
  const double reg = 1e-8 * total_cov.trace() / m;
  Matrix w_cov = Matrix::Zero(m, m), b_cov = Matrix::Zero(m, m);
  std::vector<Vector> spk_sum;
  std::vector<int> spk_n;
  for (const auto &c : classes) {
    if (c.empty()) continue;
    Vector sum = Vector::Zero(m);
    for (int i : c) sum += x.row(i).transpose();
    Vector mean = sum / static_cast<double>(c.size());
    for (int i : c) {
      Vector d = x.row(i).transpose() - mean;
      w_cov.noalias() += d * d.transpose();
    }
    b_cov.noalias() += (mean - mu) * (mean - mu).transpose();
    spk_sum.push_back(sum);
    spk_n.push_back(static_cast<int>(c.size()));
  }
  w_cov /= (n_total - num_spk);
  b_cov /= num_spk;
  w_cov.diagonal().array() += reg;
  b_cov.diagonal().array() += reg;

  PldaModel model(mu, b_cov, w_cov);
  if (log_likelihoods != nullptr) log_likelihoods->clear();
  for (int iter = 0; iter < num_iters; iter++) {
    if (log_likelihoods != nullptr)
      log_likelihoods->push_back(PldaLogLikelihood(data, model));
    Matrix b_inv = Inverse(Factor(b_cov, "B"), m);
    Matrix w_inv = Inverse(Factor(w_cov, "W"), m);
    Vector b_inv_mu = b_inv * mu;
    std::vector<Vector> y_hat(num_spk);
    std::vector<Matrix> y_cov(num_spk);
    for (int s = 0; s < num_spk; s++) {
      Matrix prec = b_inv + spk_n[s] * w_inv;
      Eigen::LLT<Matrix> llt = Factor(prec, "speaker posterior precision");
      y_cov[s] = Inverse(llt, m);
      y_hat[s] = llt.solve(b_inv_mu + w_inv * spk_sum[s]);
    }
    Vector new_mu = Vector::Zero(m);
    for (int s = 0; s < num_spk; s++) new_mu += y_hat[s];
    new_mu /= num_spk;
    Matrix new_b = Matrix::Zero(m, m), new_w = Matrix::Zero(m, m);
    int s = 0;
    for (const auto &c : classes) {
      if (c.empty()) continue;
      Vector dy = y_hat[s] - new_mu;
      new_b.noalias() += y_cov[s] + dy * dy.transpose();
      for (int i : c) {
        Vector d = x.row(i).transpose() - y_hat[s];
        new_w.noalias() += d * d.transpose();
      }
      new_w.noalias() += static_cast<double>(c.size()) * y_cov[s];
      s++;
    }
    mu = new_mu;
    b_cov = new_b / num_spk;
    w_cov = new_w / n_total;
    b_cov = 0.5 * (b_cov + b_cov.transpose());
    w_cov = 0.5 * (w_cov + w_cov.transpose());
    b_cov.diagonal().array() += reg;
    w_cov.diagonal().array() += reg;
    model = PldaModel(mu, b_cov, w_cov);
  }
  if (log_likelihoods != nullptr)
    log_likelihoods->push_back(PldaLogLikelihood(data, model));
  return model;
}

void WritePlda(const std::string &path, const PldaModel &model,
               const ArtifactHeader &header) {
  BinaryWriter w;
  WriteHeader(&w, "IVPL", header);
  w.U32(static_cast<uint32_t>(model.Dim()));
  w.VectorF64(model.mu());
  w.MatrixF64(model.b_cov());
  w.MatrixF64(model.w_cov());
  WriteFileAtomic(path, w.buffer());
}

PldaModel ReadPlda(const std::string &path, ArtifactHeader *header) {
  BinaryReader r(ReadFileBytes(path), path);
  ArtifactHeader h = ReadHeader(&r, "IVPL");
  if (header != nullptr) *header = h;
  int m = static_cast<int>(r.U32());
  Vector mu = r.VectorF64(m);
  Matrix b = r.MatrixF64(m, m);
  Matrix w = r.MatrixF64(m, m);
  if (!r.AtEnd()) Fail(ErrorKind::kFormat, path, ": trailing bytes");
  return PldaModel(std::move(mu), std::move(b), std::move(w));
}

void WriteNormalizer(const std::string &path, const Normalizer &nz,
                     const ArtifactHeader &header) {
  BinaryWriter w;
  WriteHeader(&w, "IVNZ", header);
  w.U32(static_cast<uint32_t>(nz.mean.size()));
  w.VectorF64(nz.mean);
  w.MatrixF64(nz.whitener);
  WriteFileAtomic(path, w.buffer());
}

Normalizer ReadNormalizer(const std::string &path, ArtifactHeader *header) {
  BinaryReader r(ReadFileBytes(path), path);
  ArtifactHeader h = ReadHeader(&r, "IVNZ");
  if (header != nullptr) *header = h;
  int m = static_cast<int>(r.U32());
  Normalizer nz;
  nz.mean = r.VectorF64(m);
  nz.whitener = r.MatrixF64(m, m);
  if (!r.AtEnd()) Fail(ErrorKind::kFormat, path, ": trailing bytes");
  return nz;
}

}  // namespace ivnda
