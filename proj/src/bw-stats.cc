// src/bw-stats.cc

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

#include "ivnda/bw-stats.h"

namespace ivnda {

BwStats AccumulateBw(const Matrix &frames, const PosteriorMatrix &posteriors,
                     int num_components) {
  if (static_cast<Eigen::Index>(posteriors.size()) != frames.rows())
    Fail(ErrorKind::kAlignment, frames.rows(), " frames vs ",
         posteriors.size(), " posterior frames");
  BwStats stats;
  stats.n = Vector::Zero(num_components);
  stats.f = Matrix::Zero(num_components, frames.cols());
  for (size_t t = 0; t < posteriors.size(); t++) {
    for (const auto &[g, p] : posteriors[t]) {
      if (g < 0 || g >= num_components)
        Fail(ErrorKind::kRange, "component index ", g, " outside [0, ",
             num_components, ")");
      stats.n(g) += p;
      stats.f.row(g) += p * frames.row(static_cast<Eigen::Index>(t));
    }
  }
  return stats;
}

BwStats AccumulateBw(const FeatureMatrix &features,
                     const PosteriorMatrix &posteriors, int num_components) {
  if (static_cast<int>(posteriors.size()) != features.NumSpeechFrames())
    Fail(ErrorKind::kAlignment, features.NumSpeechFrames(),
         " speech frames vs ", posteriors.size(), " posterior frames");
  return AccumulateBw(features.SpeechFrames(), posteriors, num_components);
}

BwStats CenterStats(const BwStats &stats, const DiagonalGmm &gaussians) {
  if (gaussians.NumComponents() != stats.NumComponents() ||
      gaussians.Dim() != stats.Dim())
    Fail(ErrorKind::kShape, "stats are ", stats.NumComponents(), "x",
         stats.Dim(), " but the Gaussians are ", gaussians.NumComponents(),
         "x", gaussians.Dim());
  BwStats out = stats;
  out.f -= stats.n.asDiagonal() * gaussians.means;
  out.centered = true;
  return out;
}

void WriteStatsArchive(const std::string &path, const StatsArchive &archive) {
  bool centered = !archive.stats.empty() && archive.stats[0].centered;
  for (const auto &s : archive.stats)
    if (s.centered != centered)
      Fail(ErrorKind::kContract, "mixing centered and raw stats in ", path);
  BinaryWriter w;
  WriteHeader(&w, "IVBW", archive.header);
  w.U32(centered ? 1u : 0u);
  w.U32(static_cast<uint32_t>(archive.stats.size()));
  for (const auto &s : archive.stats) {
    w.String(s.recording_id);
    w.U32(static_cast<uint32_t>(s.NumComponents()));
    w.U32(static_cast<uint32_t>(s.Dim()));
    w.VectorF64(s.n);
    w.MatrixF64(s.f);
  }
  WriteFileAtomic(path, w.buffer());
}

StatsArchive ReadStatsArchive(const std::string &path) {
  BinaryReader r(ReadFileBytes(path), path);
  StatsArchive archive;
  archive.header = ReadHeader(&r, "IVBW");
  bool centered = (r.U32() & 1u) != 0;
  uint32_t count = r.U32();
  for (uint32_t i = 0; i < count; i++) {
    BwStats s;
    s.recording_id = r.String();
    int num_g = static_cast<int>(r.U32()), dim = static_cast<int>(r.U32());
    s.n = r.VectorF64(num_g);
    s.f = r.MatrixF64(num_g, dim);
    s.centered = centered;
    if (!s.f.allFinite() || s.n.minCoeff() < 0.0)
      Fail(ErrorKind::kFormat, path, ": invalid stats for '", s.recording_id,
           "'");
    archive.stats.push_back(std::move(s));
  }
  if (!r.AtEnd()) Fail(ErrorKind::kFormat, path, ": trailing bytes");
  return archive;
}

}  // namespace ivnda
