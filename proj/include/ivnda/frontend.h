// include/ivnda/frontend.h

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

#ifndef IVNDA_FRONTEND_H_
#define IVNDA_FRONTEND_H_

#include <cstdint>
#include <string>
#include <vector>

#include "ivnda/base.h"

namespace ivnda {

struct AudioSignal {
  std::vector<double> samples;  // in [-1, 1]
  int sample_rate_hz = 8000;
};

struct FeatureMatrix {
  Matrix frames;  // T x D
  double frame_shift_ms = 10.0;
  std::vector<uint8_t> speech_mask;  // length T, 0 or 1

  int NumFrames() const { return static_cast<int>(frames.rows()); }
  int Dim() const { return static_cast<int>(frames.cols()); }
  int NumSpeechFrames() const;
  // Rows whose mask bit is set, in order.
  Matrix SpeechFrames() const;
};

struct FmllrTransform {
  Matrix a;  // D x D
  Vector b;  // D
};

struct MfccOptions {
  int num_ceps = 13;
  int num_mel_bins = 24;
  double frame_length_ms = 25.0;
  double frame_shift_ms = 10.0;
  double preemph = 0.97;
  double low_freq_hz = 0.0;
  double high_freq_hz = 0.0;  // <= 0 means Nyquist
  double log_floor = 1e-10;
  // 0 picks 512 at 8 kHz and 1024 at 16 kHz.
  int fft_size = 0;
};

struct SadOptions {
  double abs_floor_db = -60.0;
  double noise_percentile = 10.0;
  double speech_percentile = 90.0;
  // Threshold sits this far between the noise and speech levels...
  double threshold_fraction = 0.5;
  // ...but never above the speech level minus this margin.
  double speech_margin_db = 3.0;
  // Noise-like (high zero-crossing) frames need extra energy to count.
  double zcr_max = 0.6;
  double zcr_energy_margin_db = 10.0;
  int smoothing_window = 5;
};

AudioSignal ReadWav(const std::string &path);
AudioSignal ParseWav(const std::string &bytes, const std::string &what);
// PCM16 mono; samples are clipped to [-1, 1] and rounded to 1/32768 steps.
std::string EncodeWav(const AudioSignal &signal);
void WriteWav(const std::string &path, const AudioSignal &signal);

// Frame count shared by the MFCC and SAD frame grids.
int NumFrames(int num_samples, int sample_rate_hz, const MfccOptions &opts);

// Returns T x num_ceps cepstra with c0 in column 0 and an all-true mask.
FeatureMatrix ComputeMfcc(const AudioSignal &signal, const MfccOptions &opts);

// Appends delta and double-delta blocks (5-frame regression window, edge
// frames replicated). Output dimension is 3x the input.
FeatureMatrix AppendDeltas(const FeatureMatrix &features);

std::vector<uint8_t> DetectSpeech(const AudioSignal &signal,
                                  const MfccOptions &mfcc_opts,
                                  const SadOptions &sad_opts);

// Subtracts the speech-frame column mean from the speech rows.
FeatureMatrix ApplyCms(const FeatureMatrix &features);

FeatureMatrix ApplyFmllr(const FeatureMatrix &features,
                         const FmllrTransform &xf);

// Text: first line D, then D rows of [A | b].
FmllrTransform ReadFmllr(const std::string &path);
FmllrTransform ParseFmllr(const std::string &text, const std::string &what);
std::string FormatFmllr(const FmllrTransform &xf);

// Either one "0"/"1" per frame or "start_s end_s" segment lines. A frame
// belongs to a segment when its center lies in [start, end).
std::vector<uint8_t> ParseSadMask(const std::string &text, int num_frames,
                                  const MfccOptions &opts,
                                  const std::string &what);
std::vector<uint8_t> ReadSadMask(const std::string &path, int num_frames,
                                 const MfccOptions &opts);

}  // namespace ivnda

#endif  // IVNDA_FRONTEND_H_
