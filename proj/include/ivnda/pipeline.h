// include/ivnda/pipeline.h

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

#ifndef IVNDA_PIPELINE_H_
#define IVNDA_PIPELINE_H_

#include <map>
#include <string>
#include <vector>

#include "ivnda/bw-stats.h"
#include "ivnda/config.h"
#include "ivnda/discriminant.h"
#include "ivnda/feature-archive.h"
#include "ivnda/gmm.h"
#include "ivnda/plda.h"
#include "ivnda/tv.h"

namespace ivnda {

// One manifest line: "id audio [speaker [fmllr [sad]]]", "-" for absent.
struct ManifestEntry {
  std::string recording_id;
  std::string audio_path;
  std::string speaker;
  std::string fmllr_path;
  std::string sad_path;
};

std::vector<ManifestEntry> ParseManifest(const std::string &text,
                                         const std::string &what);
std::vector<ManifestEntry> ReadManifest(const std::string &path);

// "id speaker" lines.
std::map<std::string, std::string> ReadUtt2Spk(const std::string &path);

struct RecordError {
  std::string recording_id;
  std::string message;
  ErrorKind kind;
};

// Frontend fingerprint; depends only on the [frontend] section.
uint64_t FrontendFingerprint(const PipelineConfig &cfg);

// MFCC (+deltas) -> SAD or override mask -> CMS over speech frames ->
// optional fMLLR. Non-speech frames stay in the matrix but are masked out.
FeatureRecord ExtractRecord(const ManifestEntry &entry,
                            const PipelineConfig &cfg);

// Failed recordings go to `errors` and are left out of the archive.
FeatureArchive ExtractFeatures(const std::vector<ManifestEntry> &entries,
                               const PipelineConfig &cfg,
                               std::vector<RecordError> *errors);

struct GmmArtifact {
  ArtifactHeader header;
  DiagonalGmm gmm;
};

GmmArtifact TrainUbmStage(const std::vector<FeatureArchive> &archives,
                          const PipelineConfig &cfg);
GmmArtifact TrainSupervisedUbmStage(const std::vector<FeatureArchive> &archives,
                                    const PosteriorArchive &posteriors,
                                    int num_components,
                                    const PipelineConfig &cfg);

// Top-n UBM alignments, or `external` (matched by id) when given. Stats
// come out centered on the UBM means.
StatsArchive AccumulateStatsStage(const FeatureArchive &features,
                                  const GmmArtifact &ubm,
                                  const PosteriorArchive *external,
                                  const PipelineConfig &cfg,
                                  std::vector<RecordError> *errors);

struct TvArtifact {
  ArtifactHeader header;
  TvModel model;
};

TvArtifact TrainTvStage(const StatsArchive &stats, const GmmArtifact &ubm,
                        const PipelineConfig &cfg,
                        std::vector<double> *objective = nullptr);

IVectorArchive ExtractIvectorsStage(const StatsArchive &stats,
                                    const TvArtifact &tv,
                                    const PipelineConfig &cfg);

// Rows of the archive labeled through utt2spk; ids without a label are a
// key-mismatch error. Only labels starting with `label_prefix` are kept.
LabeledVectors LabelIvectors(const IVectorArchive &ivectors,
                             const std::map<std::string, std::string> &utt2spk,
                             const std::string &label_prefix = "");

struct DaArtifact {
  ArtifactHeader header;
  DaModel model;
};

DaArtifact TrainDaStage(const IVectorArchive &ivectors,
                        const LabeledVectors &data, const PipelineConfig &cfg);

struct BackendArtifacts {
  ArtifactHeader normalizer_header;
  Normalizer normalizer;
  ArtifactHeader plda_header;
  PldaModel plda;
};

BackendArtifacts TrainBackendStage(const IVectorArchive &ivectors,
                                   const LabeledVectors &data,
                                   const DaArtifact &da,
                                   const PipelineConfig &cfg);

struct ScoringModels {
  DaArtifact da;
  BackendArtifacts backend;
};

// Throws a contract error unless da -> normalizer -> plda chain up.
void CheckScoringChain(const ScoringModels &models);

// Projected, whitened, length-normalized vector.
Vector PrepareVector(const Vector &ivector, const ScoringModels &models);

struct TrialLine {
  std::string enroll, test;
};
std::vector<TrialLine> ParseTrialList(const std::string &text,
                                      const std::string &what);

struct ScoredTrial {
  std::string enroll, test;
  double score;
};

// Enrollment side looks up `enroll_map` first (model -> recordings; the
// prepared vectors are averaged) and falls back to the recording itself.
std::vector<ScoredTrial> ScoreTrials(
    const std::vector<TrialLine> &trials, const IVectorArchive &enroll,
    const IVectorArchive &test,
    const std::map<std::string, std::vector<std::string>> &enroll_map,
    const ScoringModels &models);

std::string FormatScores(const std::vector<ScoredTrial> &scores);
std::vector<ScoredTrial> ParseScores(const std::string &text,
                                     const std::string &what);

// "enroll test target|nontarget".
std::map<std::pair<std::string, std::string>, bool> ParseKey(
    const std::string &text, const std::string &what);

struct SadReportRow {
  std::string enroll, test;
  double old_score, new_score;
  bool is_target;
};

struct SadReport {
  std::vector<SadReportRow> rows;
  std::vector<ScoredTrial> new_scores;  // every trial, original order
  int targets_improved = 0, targets_total = 0;
  int nontargets_decreased = 0, nontargets_total = 0;
};

// Re-extracts i-vectors for the override entries only and rescores the
// trials that touch them. All other scores are copied from `original`.
SadReport SadOverrideReport(const std::vector<ScoredTrial> &original,
                            const std::vector<ManifestEntry> &overrides,
                            const IVectorArchive &ivectors,
                            const GmmArtifact &ubm, const TvArtifact &tv,
                            const ScoringModels &models,
                            const std::map<std::pair<std::string, std::string>,
                                           bool> &key,
                            const PipelineConfig &cfg);

std::string FormatSadReport(const SadReport &report);

}  // namespace ivnda

#endif  // IVNDA_PIPELINE_H_
