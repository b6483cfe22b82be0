// include/ivnda/config.h

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

#ifndef IVNDA_CONFIG_H_
#define IVNDA_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "ivnda/discriminant.h"
#include "ivnda/frontend.h"
#include "ivnda/gmm.h"

namespace ivnda {

enum class SynthMode { kStats, kIVector, kAudio };

struct SynthOptions {
  SynthMode mode = SynthMode::kStats;
  int train_speakers = 50;
  int train_sessions = 10;
  int eval_speakers = 25;
  int eval_sessions = 4;
  // Stats mode: planted UBM and subspace.
  int num_components = 32;
  int feat_dim = 20;
  int rank = 16;
  int frames_min = 300;
  int frames_max = 700;
  double t_scale = 0.5;
  // Session latent = speaker_scale * y + channel_scale * c (+ domain offset).
  // y is nonzero only in its first speaker_rank coordinates; 0 means all.
  int speaker_rank = 0;
  double speaker_scale = 1.0;
  double channel_scale = 0.2;
  bool bimodal = false;
  double domain_offset = 2.0;
  // Audio mode.
  int sample_rate_hz = 8000;
  double duration_s = 3.0;
  double noise_level = 0.003;
};

struct PipelineConfig {
  MfccOptions mfcc;
  bool use_deltas = true;
  bool use_sad = true;
  SadOptions sad;

  GmmTrainOptions ubm;
  int top_n = 10;

  int tv_rank = 500;
  int tv_iters = 10;

  DaMethod da_method = DaMethod::kNda;
  int da_k = 10;
  double da_alpha = 2.0;
  int da_dim = 250;

  int plda_iters = 10;

  uint64_t seed = 0;
  int workers = 1;

  SynthOptions synth;
};

// Flat "key = value" lines grouped under "[section]" headers; '#' starts a
// comment. Keys are section-qualified, e.g. [ubm] num_components.
void ApplyConfigText(const std::string &text, const std::string &what,
                     PipelineConfig *cfg);
PipelineConfig LoadConfig(const std::string &path);
// Sets one "section.key" entry.
void SetConfigValue(const std::string &qualified_key, const std::string &value,
                    PipelineConfig *cfg);
// Every key with its current value, in config-file syntax.
std::string FormatConfig(const PipelineConfig &cfg);
// Rendered "key=value" lines of one section.
std::string SectionText(const PipelineConfig &cfg, const std::string &section);

const char *DaMethodName(DaMethod m);
DaMethod ParseDaMethod(const std::string &s);

}  // namespace ivnda

#endif  // IVNDA_CONFIG_H_
