// src/gmm.cc

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

#include "ivnda/gmm.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ivnda {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr int kChunkRows = 4096;

Matrix PoolSpeechFrames(const std::vector<FeatureMatrix> &features) {
  int total = 0, dim = -1;
  for (const auto &f : features) {
    total += f.NumSpeechFrames();
    if (f.NumFrames() == 0) continue;
    if (dim >= 0 && f.Dim() != dim)
      Fail(ErrorKind::kShape, "feature dimension ", f.Dim(),
           " differs from ", dim);
    dim = f.Dim();
  }
  Matrix pooled(total, std::max(dim, 0));
  int row = 0;
  for (const auto &f : features)
    for (int t = 0; t < f.NumFrames(); t++)
      if (f.speech_mask[t]) pooled.row(row++) = f.frames.row(t);
  return pooled;
}

// log w_g - 0.5 (D log 2pi + sum_d log var_gd)
Vector GConsts(const DiagonalGmm &gmm) {
  Vector c(gmm.NumComponents());
  for (int g = 0; g < gmm.NumComponents(); g++)
    c(g) = std::log(gmm.weights(g)) -
           0.5 * (gmm.Dim() * kLog2Pi + gmm.variances.row(g).array().log().sum());
  return c;
}

double LogSumExp(const Vector &v) {
  double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

struct EmAccumulator {
  Vector occ;
  Matrix sum_x, sum_xx;
  double log_like = 0.0;

  EmAccumulator(int g, int d)
      : occ(Vector::Zero(g)), sum_x(Matrix::Zero(g, d)),
        sum_xx(Matrix::Zero(g, d)) {}
};

// One EM iteration; returns the average log-likelihood of the input model.
double EmStep(const Matrix &x, const Vector &floor, int workers,
              DiagonalGmm *gmm) {
  const int num_g = gmm->NumComponents(), dim = gmm->Dim();
  const int num_rows = static_cast<int>(x.rows());
  const int num_chunks = (num_rows + kChunkRows - 1) / kChunkRows;
  Vector gconst = GConsts(*gmm);
  Matrix inv_var = gmm->variances.cwiseInverse();
  std::vector<EmAccumulator> accs(num_chunks, EmAccumulator(num_g, dim));
  ParallelFor(num_chunks, workers, [&](int c) {
    EmAccumulator &acc = accs[c];
    int end = std::min(num_rows, (c + 1) * kChunkRows);
    Vector ll(num_g);
    for (int t = c * kChunkRows; t < end; t++) {
      for (int g = 0; g < num_g; g++)
        ll(g) = gconst(g) - 0.5 * ((x.row(t) - gmm->means.row(g))
                                       .array().square() *
                                   inv_var.row(g).array()).sum();
      double lse = LogSumExp(ll);
      acc.log_like += lse;
      for (int g = 0; g < num_g; g++) {
        double p = std::exp(ll(g) - lse);
        if (p == 0.0) continue;
        acc.occ(g) += p;
        acc.sum_x.row(g) += p * x.row(t);
        acc.sum_xx.row(g) += p * x.row(t).array().square().matrix();
      }
    }
  });
  EmAccumulator total(num_g, dim);
  for (const auto &a : accs) {
    total.occ += a.occ;
    total.sum_x += a.sum_x;
    total.sum_xx += a.sum_xx;
    total.log_like += a.log_like;
  }
  for (int g = 0; g < num_g; g++) {
    double occ = total.occ(g);
    if (occ < 1e-10) {
      gmm->weights(g) = 1e-10;
      continue;
    }
    Eigen::RowVectorXd mean = total.sum_x.row(g) / occ;
    Eigen::RowVectorXd var =
        total.sum_xx.row(g) / occ - mean.array().square().matrix();
    for (int d = 0; d < dim; d++) var(d) = std::max(var(d), floor(d));
    gmm->means.row(g) = mean;
    gmm->variances.row(g) = var;
    gmm->weights(g) = occ / num_rows;
  }
  gmm->weights /= gmm->weights.sum();
  return total.log_like / num_rows;
}

void Split(double perturb, DiagonalGmm *gmm) {
  const int num_g = gmm->NumComponents(), dim = gmm->Dim();
  DiagonalGmm out;
  out.weights.resize(2 * num_g);
  out.means.resize(2 * num_g, dim);
  out.variances.resize(2 * num_g, dim);
  // Random direction per component; a fixed +sigma direction can sit on a
  // symmetry axis of the data and leave both halves on a saddle.
  Rng rng(0x9e3779b97f4a7c15ULL ^ static_cast<uint64_t>(num_g));
  for (int g = 0; g < num_g; g++) {
    Eigen::RowVectorXd offset(dim);
    for (int d = 0; d < dim; d++)
      offset(d) = perturb * std::sqrt(gmm->variances(g, d)) * rng.Normal();
    out.weights(g) = out.weights(g + num_g) = gmm->weights(g) / 2.0;
    out.means.row(g) = gmm->means.row(g) + offset;
    out.means.row(g + num_g) = gmm->means.row(g) - offset;
    out.variances.row(g) = out.variances.row(g + num_g) = gmm->variances.row(g);
  }
  *gmm = std::move(out);
}

}  // namespace

void DiagonalGmm::Validate() const {
  const int num_g = NumComponents();
  if (num_g == 0) Fail(ErrorKind::kContract, "GMM has no components");
  if (means.rows() != num_g || variances.rows() != num_g ||
      variances.cols() != means.cols())
    Fail(ErrorKind::kContract, "GMM parameter shapes disagree");
  if (std::abs(weights.sum() - 1.0) > 1e-10 || weights.minCoeff() < 0.0)
    Fail(ErrorKind::kContract, "GMM weights are not on the simplex");
  if (!(variances.minCoeff() > 0.0) || !means.allFinite())
    Fail(ErrorKind::kContract, "GMM has non-positive variance or non-finite mean");
}

Vector DiagonalGmm::ComponentLogLikelihoods(
    const Eigen::Ref<const Vector> &x) const {
  if (x.size() != Dim())
    Fail(ErrorKind::kShape, "frame dimension ", x.size(),
         " does not match GMM dimension ", Dim());
  Vector ll(NumComponents());
  for (int g = 0; g < NumComponents(); g++) {
    double quad = 0.0, logdet = 0.0;
    for (int d = 0; d < Dim(); d++) {
      double diff = x(d) - means(g, d);
      quad += diff * diff / variances(g, d);
      logdet += std::log(variances(g, d));
    }
    ll(g) = std::log(weights(g)) - 0.5 * (Dim() * kLog2Pi + logdet + quad);
  }
  return ll;
}

double DiagonalGmm::LogLikelihood(const Eigen::Ref<const Vector> &x) const {
  return LogSumExp(ComponentLogLikelihoods(x));
}

double AverageLogLikelihood(const DiagonalGmm &gmm, const Matrix &frames) {
  double total = 0.0;
  for (int t = 0; t < frames.rows(); t++)
    total += gmm.LogLikelihood(frames.row(t).transpose());
  return total / frames.rows();
}

DiagonalGmm TrainGmm(const std::vector<FeatureMatrix> &features,
                     const GmmTrainOptions &opts,
                     std::vector<double> *log_likelihoods) {
  const int num_g = opts.num_components;
  if (num_g <= 0 || (num_g & (num_g - 1)) != 0)
    Fail(ErrorKind::kContract, "component count ", num_g,
         " must be a power of two");
  Matrix x = PoolSpeechFrames(features);
  const int num_rows = static_cast<int>(x.rows());
  if (num_rows < 50LL * num_g)
    Fail(ErrorKind::kInsufficientData, num_rows, " speech frames for ", num_g,
         " components; need at least ", 50LL * num_g);
  const int dim = static_cast<int>(x.cols());

  DiagonalGmm gmm;
  gmm.weights = Vector::Ones(1);
  gmm.means = x.colwise().mean();
  gmm.variances =
      (x.rowwise() - gmm.means.row(0)).array().square().colwise().mean();
  Vector floor(dim);
  for (int d = 0; d < dim; d++)
    floor(d) = std::max(opts.var_floor_factor * gmm.variances(0, d), 1e-10);
  for (int d = 0; d < dim; d++)
    gmm.variances(0, d) = std::max(gmm.variances(0, d), floor(d));

  while (gmm.NumComponents() < num_g) {
    Split(opts.split_perturb, &gmm);
    for (int i = 0; i < opts.iters_per_split; i++)
      EmStep(x, floor, opts.workers, &gmm);
    IVNDA_INFO("GMM at " << gmm.NumComponents() << " components, avg loglike "
               << AverageLogLikelihood(gmm, x));
  }
  if (log_likelihoods != nullptr) log_likelihoods->clear();
  for (int i = 0; i < opts.num_iters; i++) {
    double ll = EmStep(x, floor, opts.workers, &gmm);
    if (log_likelihoods != nullptr) log_likelihoods->push_back(ll);
    IVNDA_DEBUG("GMM iteration " << i << " avg loglike " << ll);
  }
  if (log_likelihoods != nullptr)
    log_likelihoods->push_back(AverageLogLikelihood(gmm, x));
  return gmm;
}

PosteriorMatrix GmmPosteriors(const DiagonalGmm &gmm, const Matrix &frames,
                              int top_n) {
  if (frames.cols() != gmm.Dim() && frames.rows() > 0)
    Fail(ErrorKind::kShape, "feature dimension ", frames.cols(),
         " does not match GMM dimension ", gmm.Dim());
  const int num_g = gmm.NumComponents();
  const int keep = (top_n <= 0 || top_n > num_g) ? num_g : top_n;
  PosteriorMatrix post(frames.rows());
  std::vector<int> order(num_g);
  for (int t = 0; t < frames.rows(); t++) {
    Vector ll = gmm.ComponentLogLikelihoods(frames.row(t).transpose());
    double lse = LogSumExp(ll);
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + keep, order.end(),
                      [&ll](int a, int b) {
                        return ll(a) > ll(b) || (ll(a) == ll(b) && a < b);
                      });
    double mass = 0.0;
    FramePosterior &fp = post[t];
    fp.reserve(keep);
    for (int i = 0; i < keep; i++) {
      double p = std::exp(ll(order[i]) - lse);
      fp.emplace_back(order[i], p);
      mass += p;
    }
    if (keep < num_g)
      for (auto &e : fp) e.second /= mass;
  }
  return post;
}

PosteriorMatrix GmmPosteriors(const DiagonalGmm &gmm,
                              const FeatureMatrix &features, int top_n) {
  return GmmPosteriors(gmm, features.SpeechFrames(), top_n);
}

void CheckAlignment(const PosteriorMatrix &post, const FeatureMatrix &features,
                    const std::string &id) {
  if (static_cast<int>(post.size()) != features.NumSpeechFrames())
    Fail(ErrorKind::kAlignment, "recording '", id, "': ", post.size(),
         " posterior frames vs ", features.NumSpeechFrames(),
         " retained speech frames");
}

DiagonalGmm TrainSupervisedGaussians(
    const std::vector<FeatureMatrix> &features,
    const std::vector<PosteriorMatrix> &posteriors, int num_components,
    double var_floor_factor, std::vector<int> *empty_components) {
  if (features.size() != posteriors.size())
    Fail(ErrorKind::kAlignment, features.size(), " feature matrices vs ",
         posteriors.size(), " posterior sets");
  Matrix x = PoolSpeechFrames(features);
  if (x.rows() == 0)
    Fail(ErrorKind::kInsufficientData, "no speech frames for supervised Gaussians");
  const int dim = static_cast<int>(x.cols());
  Vector occ = Vector::Zero(num_components);
  Matrix sum_x = Matrix::Zero(num_components, dim),
         sum_xx = Matrix::Zero(num_components, dim);
  int row = 0;
  for (size_t r = 0; r < features.size(); r++) {
    CheckAlignment(posteriors[r], features[r], std::to_string(r));
    for (const FramePosterior &frame : posteriors[r]) {
      for (const auto &[g, p] : frame) {
        if (g < 0 || g >= num_components)
          Fail(ErrorKind::kRange, "component index ", g, " outside [0, ",
               num_components, ")");
        occ(g) += p;
        sum_x.row(g) += p * x.row(row);
        sum_xx.row(g) += p * x.row(row).array().square().matrix();
      }
      row++;
    }
  }
  Eigen::RowVectorXd global_mean = x.colwise().mean();
  Eigen::RowVectorXd global_var =
      (x.rowwise() - global_mean).array().square().colwise().mean();
  Eigen::RowVectorXd floor =
      (var_floor_factor * global_var).cwiseMax(1e-10);

  DiagonalGmm gmm;
  gmm.weights.resize(num_components);
  gmm.means.resize(num_components, dim);
  gmm.variances.resize(num_components, dim);
  if (empty_components != nullptr) empty_components->clear();
  for (int g = 0; g < num_components; g++) {
    if (occ(g) <= 0.0) {
      IVNDA_WARN("component " << g
                 << " has zero occupancy; using global mean/variance");
      if (empty_components != nullptr) empty_components->push_back(g);
      gmm.means.row(g) = global_mean;
      gmm.variances.row(g) = global_var.cwiseMax(floor);
      gmm.weights(g) = 1e-10;
      continue;
    }
    if (occ(g) < 10.0)
      IVNDA_WARN("component " << g << " has low occupancy " << occ(g));
    Eigen::RowVectorXd mean = sum_x.row(g) / occ(g);
    gmm.means.row(g) = mean;
    gmm.variances.row(g) =
        (sum_xx.row(g) / occ(g) - mean.array().square().matrix()).cwiseMax(floor);
    gmm.weights(g) = occ(g);
  }
  gmm.weights /= gmm.weights.sum();
  return gmm;
}

// ---------------------------------------------------------------- files

std::string FormatPosteriors(const PosteriorArchive &archive) {
  std::ostringstream os;
  os.precision(17);
  for (const PosteriorMatrix &post : archive.posteriors) {
    for (const FramePosterior &frame : post) {
      for (size_t i = 0; i < frame.size(); i++)
        os << (i ? " " : "") << frame[i].first << ':'
           << FormatDouble(frame[i].second);
      os << '\n';
    }
    os << '\n';
  }
  return os.str();
}

std::string FormatPosteriorIndex(const PosteriorArchive &archive) {
  std::ostringstream os;
  for (size_t i = 0; i < archive.ids.size(); i++)
    os << archive.ids[i] << ' ' << archive.posteriors[i].size() << '\n';
  return os.str();
}

namespace {

FramePosterior ParseFrame(const std::string &line, int num_components,
                          const std::string &what, int line_no) {
  FramePosterior frame;
  std::istringstream ls(line);
  for (std::string tok; ls >> tok;) {
    size_t colon = tok.find(':');
    int g = 0;
    double p = 0.0;
    try {
      if (colon == std::string::npos) throw std::invalid_argument(tok);
      size_t used = 0;
      g = std::stoi(tok.substr(0, colon), &used);
      if (used != colon) throw std::invalid_argument(tok);
      p = std::stod(tok.substr(colon + 1), &used);
      if (used != tok.size() - colon - 1) throw std::invalid_argument(tok);
    } catch (const std::logic_error &) {
      Fail(ErrorKind::kFormat, what, ":", line_no, ": bad entry '", tok, "'");
    }
    if (g < 0 || g >= num_components)
      Fail(ErrorKind::kRange, what, ":", line_no, ": component ", g,
           " outside [0, ", num_components, ")");
    if (!(p >= 0.0) || !std::isfinite(p))
      Fail(ErrorKind::kFormat, what, ":", line_no, ": negative posterior");
    frame.emplace_back(g, p);
  }
  double mass = 0.0;
  for (const auto &e : frame) mass += e.second;
  if (mass <= 0.0)
    Fail(ErrorKind::kFormat, what, ":", line_no, ": frame has no mass");
  if (std::abs(mass - 1.0) > 1e-4)
    for (auto &e : frame) e.second /= mass;
  return frame;
}

}  // namespace

PosteriorArchive ParsePosteriors(const std::string &text,
                                 const std::string &index_text,
                                 int num_components, const std::string &what) {
  std::vector<PosteriorMatrix> blocks;
  PosteriorMatrix current;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  bool in_block = false;
  while (std::getline(is, line)) {
    line_no++;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      if (in_block) blocks.push_back(std::move(current));
      current.clear();
      in_block = false;
      continue;
    }
    current.push_back(ParseFrame(line, num_components, what, line_no));
    in_block = true;
  }
  if (in_block) blocks.push_back(std::move(current));

  PosteriorArchive archive;
  if (index_text.empty()) {
    if (blocks.size() > 1)
      Fail(ErrorKind::kFormat, what, ": ", blocks.size(),
           " recordings but no index file");
    archive.ids.push_back("");
    archive.posteriors.push_back(blocks.empty() ? PosteriorMatrix()
                                                : std::move(blocks[0]));
    return archive;
  }
  std::istringstream ix(index_text);
  while (std::getline(ix, line)) {
    std::istringstream ls(line);
    std::string id;
    if (!(ls >> id)) continue;
    archive.ids.push_back(id);
    long count;
    if (ls >> count) {
      size_t k = archive.ids.size() - 1;
      if (k < blocks.size() && static_cast<long>(blocks[k].size()) != count)
        Fail(ErrorKind::kAlignment, what, ": recording '", id, "' has ",
             blocks[k].size(), " frames, index says ", count);
    }
  }
  if (archive.ids.size() != blocks.size())
    Fail(ErrorKind::kAlignment, what, ": index lists ", archive.ids.size(),
         " recordings, file has ", blocks.size());
  archive.posteriors = std::move(blocks);
  return archive;
}

void WritePosteriors(const std::string &path, const PosteriorArchive &archive) {
  WriteFileAtomic(path, FormatPosteriors(archive));
  WriteFileAtomic(path + ".index", FormatPosteriorIndex(archive));
}

PosteriorArchive LoadExternalPosteriors(const std::string &path,
                                        int num_components) {
  std::string index;
  try {
    index = ReadFileText(path + ".index");
  } catch (const Error &) {
    index.clear();
  }
  return ParsePosteriors(ReadFileText(path), index, num_components, path);
}

void WriteGmm(const std::string &path, const DiagonalGmm &gmm,
              const ArtifactHeader &header) {
  BinaryWriter w;
  WriteHeader(&w, "IVGM", header);
  w.U32(static_cast<uint32_t>(gmm.NumComponents()));
  w.U32(static_cast<uint32_t>(gmm.Dim()));
  w.VectorF64(gmm.weights);
  w.MatrixF64(gmm.means);
  w.MatrixF64(gmm.variances);
  WriteFileAtomic(path, w.buffer());
}

DiagonalGmm ReadGmm(const std::string &path, ArtifactHeader *header) {
  BinaryReader r(ReadFileBytes(path), path);
  ArtifactHeader h = ReadHeader(&r, "IVGM");
  if (header != nullptr) *header = h;
  int num_g = static_cast<int>(r.U32()), dim = static_cast<int>(r.U32());
  DiagonalGmm gmm;
  gmm.weights = r.VectorF64(num_g);
  gmm.means = r.MatrixF64(num_g, dim);
  gmm.variances = r.MatrixF64(num_g, dim);
  gmm.Validate();
  return gmm;
}

}  // namespace ivnda
