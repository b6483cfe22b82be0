// include/ivnda/bw-stats.h

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

#ifndef IVNDA_BW_STATS_H_
#define IVNDA_BW_STATS_H_

#include <string>
#include <vector>

#include "ivnda/base.h"
#include "ivnda/binary-io.h"
#include "ivnda/frontend.h"
#include "ivnda/gmm.h"

namespace ivnda {

// Zeroth- and first-order Baum-Welch statistics of one recording.
struct BwStats {
  std::string recording_id;
  Vector n;  // G: N_g = sum_t gamma_tg
  Matrix f;  // G x D: F_g = sum_t gamma_tg o_t
  bool centered = false;

  int NumComponents() const { return static_cast<int>(n.size()); }
  int Dim() const { return static_cast<int>(f.cols()); }
};

// `frames` holds only the frames the posteriors refer to, in order.
BwStats AccumulateBw(const Matrix &frames, const PosteriorMatrix &posteriors,
                     int num_components);
// Uses the speech frames of `features`.
BwStats AccumulateBw(const FeatureMatrix &features,
                     const PosteriorMatrix &posteriors, int num_components);

// f_g <- f_g - n_g mean_g. Marks the result centered.
BwStats CenterStats(const BwStats &stats, const DiagonalGmm &gaussians);

struct StatsArchive {
  ArtifactHeader header;  // parent = fingerprint of the Gaussians used
  std::vector<BwStats> stats;
};

// "IVBW" header, u32 flags (bit 0: centered), u32 count; per record:
// id, u32 G, u32 D, f64 n[G], f64 f[G*D] row-major.
void WriteStatsArchive(const std::string &path, const StatsArchive &archive);
StatsArchive ReadStatsArchive(const std::string &path);

}  // namespace ivnda

#endif  // IVNDA_BW_STATS_H_
