// include/ivnda/synth.h

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

#ifndef IVNDA_SYNTH_H_
#define IVNDA_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "ivnda/bw-stats.h"
#include "ivnda/config.h"
#include "ivnda/frontend.h"
#include "ivnda/gmm.h"

namespace ivnda {

// Recording ids and speaker labels of one corpus split.
struct SynthSplit {
  std::vector<std::string> ids;
  std::vector<std::string> speakers;
  // 0 or 1 per session; all 0 unless bimodal.
  std::vector<int> domains;
};

struct StatsCorpus {
  DiagonalGmm ubm;
  Matrix planted_t;  // (G*D) x R
  SynthSplit train, eval;
  std::vector<BwStats> train_stats, eval_stats;  // centered
  // Latent w used to generate each session, train then eval order.
  std::vector<Vector> train_latent, eval_latent;
};

// Centered stats generated from a planted UBM and subspace:
// f_g = n_g (m_g + T_g w) + per-frame noise of variance sigma_g, then
// centered on the planted means.
StatsCorpus GenerateStatsCorpus(const SynthOptions &opts, uint64_t seed);

struct IVectorCorpus {
  SynthSplit train, eval;
  Matrix train_vectors, eval_vectors;  // rows are sessions
  Vector domain_direction;
};

// Session vectors speaker_scale * y + channel_scale * c, plus
// +/- domain_offset along a fixed direction when bimodal.
IVectorCorpus GenerateIVectorCorpus(const SynthOptions &opts, uint64_t seed);

struct AudioSession {
  std::string id;
  std::string speaker;
  AudioSignal signal;
  // Ground-truth [start, end) seconds of the session speaker's voice.
  std::vector<std::pair<double, double>> target_segments;
  // Interfering talker span, empty if clean.
  std::vector<std::pair<double, double>> interferer_segments;
};

struct AudioCorpus {
  std::vector<AudioSession> train, eval;
};

// Harmonic "voices" with speaker-specific pitch and formants. When
// `contaminate_first_eval` is set, the first eval session gets a loud
// second talker in its pauses.
AudioCorpus GenerateAudioCorpus(const SynthOptions &opts, uint64_t seed,
                                bool contaminate_first_eval = true);

struct Trial {
  std::string enroll, test;
  bool is_target;
};

// Every unordered pair of sessions (i < j).
std::vector<Trial> AllPairTrials(const SynthSplit &split);

// Writes the corpus selected by opts.mode under `dir`; see the README for
// the file list.
void WriteSynthCorpus(const SynthOptions &opts, uint64_t seed,
                      const std::string &dir);

std::string FormatTrials(const std::vector<Trial> &trials, bool with_key);

}  // namespace ivnda

#endif  // IVNDA_SYNTH_H_
