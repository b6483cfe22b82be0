// src/config.cc

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

#include "ivnda/config.h"

#include <charconv>
#include <functional>
#include <sstream>

#include "ivnda/binary-io.h"

namespace ivnda {

const char *DaMethodName(DaMethod m) { return m == DaMethod::kLda ? "lda" : "nda"; }

DaMethod ParseDaMethod(const std::string &s) {
  if (s == "lda") return DaMethod::kLda;
  if (s == "nda") return DaMethod::kNda;
  Fail(ErrorKind::kUsage, "unknown DA method '", s, "' (expected lda or nda)");
}

namespace {

const char *SynthModeName(SynthMode m) {
  switch (m) {
    case SynthMode::kStats: return "stats";
    case SynthMode::kIVector: return "ivector";
    case SynthMode::kAudio: return "audio";
  }
  return "stats";
}

SynthMode ParseSynthMode(const std::string &s) {
  if (s == "stats") return SynthMode::kStats;
  if (s == "ivector") return SynthMode::kIVector;
  if (s == "audio") return SynthMode::kAudio;
  Fail(ErrorKind::kUsage, "unknown synth mode '", s, "'");
}

template <typename T>
T ParseNumber(const std::string &key, const std::string &v) {
  T out{};
  const char *end = v.data() + v.size();
  auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end)
    Fail(ErrorKind::kUsage, "bad value '", v, "' for ", key);
  return out;
}

bool ParseBool(const std::string &key, const std::string &v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  Fail(ErrorKind::kUsage, "bad boolean '", v, "' for ", key);
}

struct Key {
  std::string section, name;
  std::function<std::string(const PipelineConfig &)> get;
  std::function<void(PipelineConfig &, const std::string &)> set;
};

template <typename Access>
Key IntKey(const char *sec, const char *name, Access acc) {
  return {sec, name,
          [acc](const PipelineConfig &c) {
            return std::to_string(acc(const_cast<PipelineConfig &>(c)));
          },
          [acc, name](PipelineConfig &c, const std::string &v) {
            acc(c) = ParseNumber<std::remove_reference_t<decltype(acc(c))>>(
                name, v);
          }};
}

template <typename Access>
Key DoubleKey(const char *sec, const char *name, Access acc) {
  return {sec, name,
          [acc](const PipelineConfig &c) {
            return FormatDouble(acc(const_cast<PipelineConfig &>(c)));
          },
          [acc, name](PipelineConfig &c, const std::string &v) {
            acc(c) = ParseNumber<double>(name, v);
          }};
}

template <typename Access>
Key BoolKey(const char *sec, const char *name, Access acc) {
  return {sec, name,
          [acc](const PipelineConfig &c) {
            return std::string(acc(const_cast<PipelineConfig &>(c)) ? "true"
                                                                     : "false");
          },
          [acc, name](PipelineConfig &c, const std::string &v) {
            acc(c) = ParseBool(name, v);
          }};
}

#define ACC(expr) [](PipelineConfig & c) -> auto & { return c.expr; }

const std::vector<Key> &Keys() {
  static const std::vector<Key> keys = {
      IntKey("frontend", "num_ceps", ACC(mfcc.num_ceps)),
      IntKey("frontend", "num_mel_bins", ACC(mfcc.num_mel_bins)),
      DoubleKey("frontend", "frame_length_ms", ACC(mfcc.frame_length_ms)),
      DoubleKey("frontend", "frame_shift_ms", ACC(mfcc.frame_shift_ms)),
      DoubleKey("frontend", "preemph", ACC(mfcc.preemph)),
      DoubleKey("frontend", "low_freq_hz", ACC(mfcc.low_freq_hz)),
      DoubleKey("frontend", "high_freq_hz", ACC(mfcc.high_freq_hz)),
      DoubleKey("frontend", "log_floor", ACC(mfcc.log_floor)),
      IntKey("frontend", "fft_size", ACC(mfcc.fft_size)),
      BoolKey("frontend", "deltas", ACC(use_deltas)),
      BoolKey("frontend", "sad", ACC(use_sad)),
      DoubleKey("frontend", "sad_abs_floor_db", ACC(sad.abs_floor_db)),
      DoubleKey("frontend", "sad_noise_percentile", ACC(sad.noise_percentile)),
      DoubleKey("frontend", "sad_speech_percentile", ACC(sad.speech_percentile)),
      DoubleKey("frontend", "sad_threshold_fraction", ACC(sad.threshold_fraction)),
      DoubleKey("frontend", "sad_speech_margin_db", ACC(sad.speech_margin_db)),
      DoubleKey("frontend", "sad_zcr_max", ACC(sad.zcr_max)),
      DoubleKey("frontend", "sad_zcr_energy_margin_db",
                ACC(sad.zcr_energy_margin_db)),
      IntKey("frontend", "sad_smoothing_window", ACC(sad.smoothing_window)),
      IntKey("ubm", "num_components", ACC(ubm.num_components)),
      IntKey("ubm", "num_iters", ACC(ubm.num_iters)),
      IntKey("ubm", "iters_per_split", ACC(ubm.iters_per_split)),
      DoubleKey("ubm", "split_perturb", ACC(ubm.split_perturb)),
      DoubleKey("ubm", "var_floor_factor", ACC(ubm.var_floor_factor)),
      IntKey("ubm", "top_n", ACC(top_n)),
      IntKey("tv", "rank", ACC(tv_rank)),
      IntKey("tv", "num_iters", ACC(tv_iters)),
      {"da", "method",
       [](const PipelineConfig &c) { return std::string(DaMethodName(c.da_method)); },
       [](PipelineConfig &c, const std::string &v) { c.da_method = ParseDaMethod(v); }},
      IntKey("da", "k", ACC(da_k)),
      DoubleKey("da", "alpha", ACC(da_alpha)),
      IntKey("da", "dim", ACC(da_dim)),
      IntKey("plda", "num_iters", ACC(plda_iters)),
      IntKey("run", "seed", ACC(seed)),
      IntKey("run", "workers", ACC(workers)),
      {"synth", "mode",
       [](const PipelineConfig &c) { return std::string(SynthModeName(c.synth.mode)); },
       [](PipelineConfig &c, const std::string &v) { c.synth.mode = ParseSynthMode(v); }},
      IntKey("synth", "train_speakers", ACC(synth.train_speakers)),
      IntKey("synth", "train_sessions", ACC(synth.train_sessions)),
      IntKey("synth", "eval_speakers", ACC(synth.eval_speakers)),
      IntKey("synth", "eval_sessions", ACC(synth.eval_sessions)),
      IntKey("synth", "num_components", ACC(synth.num_components)),
      IntKey("synth", "feat_dim", ACC(synth.feat_dim)),
      IntKey("synth", "rank", ACC(synth.rank)),
      IntKey("synth", "frames_min", ACC(synth.frames_min)),
      IntKey("synth", "frames_max", ACC(synth.frames_max)),
      DoubleKey("synth", "t_scale", ACC(synth.t_scale)),
      IntKey("synth", "speaker_rank", ACC(synth.speaker_rank)),
      DoubleKey("synth", "speaker_scale", ACC(synth.speaker_scale)),
      DoubleKey("synth", "channel_scale", ACC(synth.channel_scale)),
      BoolKey("synth", "bimodal", ACC(synth.bimodal)),
      DoubleKey("synth", "domain_offset", ACC(synth.domain_offset)),
      IntKey("synth", "sample_rate_hz", ACC(synth.sample_rate_hz)),
      DoubleKey("synth", "duration_s", ACC(synth.duration_s)),
      DoubleKey("synth", "noise_level", ACC(synth.noise_level)),
  };
  return keys;
}

#undef ACC

std::string Trim(const std::string &s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void SetConfigValue(const std::string &qualified_key, const std::string &value,
                    PipelineConfig *cfg) {
  size_t dot = qualified_key.find('.');
  std::string sec = qualified_key.substr(0, dot),
              name = dot == std::string::npos ? "" : qualified_key.substr(dot + 1);
  for (const Key &k : Keys()) {
    if (k.section == sec && k.name == name) {
      k.set(*cfg, value);
      return;
    }
  }
  Fail(ErrorKind::kUsage, "unknown configuration key '", qualified_key, "'");
}

void ApplyConfigText(const std::string &text, const std::string &what,
                     PipelineConfig *cfg) {
  std::istringstream is(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(is, line)) {
    line_no++;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        Fail(ErrorKind::kUsage, what, ":", line_no, ": bad section header");
      section = Trim(line.substr(1, line.size() - 2));
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      Fail(ErrorKind::kUsage, what, ":", line_no, ": expected key = value");
    std::string key = Trim(line.substr(0, eq)), value = Trim(line.substr(eq + 1));
    SetConfigValue(section + "." + key, value, cfg);
  }
}

PipelineConfig LoadConfig(const std::string &path) {
  PipelineConfig cfg;
  ApplyConfigText(ReadFileText(path), path, &cfg);
  return cfg;
}

std::string SectionText(const PipelineConfig &cfg, const std::string &section) {
  std::ostringstream os;
  for (const Key &k : Keys())
    if (k.section == section) os << k.name << '=' << k.get(cfg) << '\n';
  return os.str();
}

std::string FormatConfig(const PipelineConfig &cfg) {
  std::ostringstream os;
  std::string current;
  for (const Key &k : Keys()) {
    if (k.section != current) {
      if (!current.empty()) os << '\n';
      os << '[' << k.section << "]\n";
      current = k.section;
    }
    os << k.name << " = " << k.get(cfg) << '\n';
  }
  return os.str();
}

}  // namespace ivnda
