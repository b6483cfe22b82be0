// src/synth.cc

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

#include "ivnda/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "ivnda/binary-io.h"
#include "ivnda/tv.h"

namespace ivnda {

namespace {

std::string SessionId(const char *prefix, int spk, int sess) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s-spk%03d-s%02d", prefix, spk, sess);
  return buf;
}

std::string SpeakerId(const char *prefix, int spk) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s-spk%03d", prefix, spk);
  return buf;
}

void FillSplit(const char *prefix, int speakers, int sessions, bool bimodal,
               SynthSplit *split) {
  for (int s = 0; s < speakers; s++)
    for (int k = 0; k < sessions; k++) {
      split->ids.push_back(SessionId(prefix, s, k));
      split->speakers.push_back(SpeakerId(prefix, s));
      // Alternate domains so every speaker spans both.
      split->domains.push_back(bimodal ? k % 2 : 0);
    }
}

Vector SpeakerFactor(const SynthOptions &o, Rng *rng) {
  Vector y = Vector::Zero(o.rank);
  int r = o.speaker_rank > 0 ? std::min(o.speaker_rank, o.rank) : o.rank;
  y.head(r) = o.speaker_scale * rng->NormalVector(r);
  return y;
}

void CheckCounts(const SynthOptions &o) {
  if (o.train_speakers <= 0 || o.train_sessions <= 0 || o.eval_speakers < 0 ||
      o.eval_sessions <= 0)
    Fail(ErrorKind::kUsage, "synthetic corpus sizes must be positive");
}

}  // namespace

StatsCorpus GenerateStatsCorpus(const SynthOptions &opts, uint64_t seed) {
  CheckCounts(opts);
  const int num_g = opts.num_components, dim = opts.feat_dim, rank = opts.rank;
  if (num_g <= 0 || dim <= 0 || rank <= 0 || opts.frames_min <= 0 ||
      opts.frames_max < opts.frames_min)
    Fail(ErrorKind::kUsage, "bad stats-mode synthesis parameters");
  Rng rng(seed);
  StatsCorpus corpus;
  DiagonalGmm &ubm = corpus.ubm;
  ubm.weights.resize(num_g);
  ubm.means.resize(num_g, dim);
  ubm.variances.resize(num_g, dim);
  for (int g = 0; g < num_g; g++) {
    ubm.weights(g) = 0.5 + rng.Uniform();
    for (int d = 0; d < dim; d++) {
      ubm.means(g, d) = 2.0 * rng.Normal();
      ubm.variances(g, d) = 0.5 + rng.Uniform();
    }
  }
  ubm.weights /= ubm.weights.sum();
  corpus.planted_t.resize(num_g * dim, rank);
  for (int r = 0; r < num_g * dim; r++)
    for (int c = 0; c < rank; c++)
      corpus.planted_t(r, c) = opts.t_scale * rng.Normal();
  Vector domain_dir = rng.NormalVector(rank).normalized();

  Vector cumulative(num_g);
  double acc = 0.0;
  for (int g = 0; g < num_g; g++) cumulative(g) = (acc += ubm.weights(g));

  auto generate = [&](const char *prefix, int speakers, int sessions,
                      SynthSplit *split, std::vector<BwStats> *stats,
                      std::vector<Vector> *latent) {
    FillSplit(prefix, speakers, sessions, opts.bimodal, split);
    size_t idx = 0;
    for (int s = 0; s < speakers; s++) {
      Vector y = SpeakerFactor(opts, &rng);
      for (int k = 0; k < sessions; k++, idx++) {
        Vector w = y + opts.channel_scale * rng.NormalVector(rank);
        if (opts.bimodal)
          w += (split->domains[idx] ? 1.0 : -1.0) * opts.domain_offset * domain_dir;
        int frames = opts.frames_min +
                     static_cast<int>(rng.Below(opts.frames_max - opts.frames_min + 1));
        Vector n = Vector::Zero(num_g);
        for (int t = 0; t < frames; t++) {
          double u = rng.Uniform();
          int g = 0;
          while (g < num_g - 1 && u >= cumulative(g)) g++;
          n(g) += 1.0;
        }
        BwStats st;
        st.recording_id = split->ids[idx];
        st.n = n;
        st.f.resize(num_g, dim);
        for (int g = 0; g < num_g; g++) {
          Vector mean = ubm.means.row(g).transpose() +
                        corpus.planted_t.middleRows(g * dim, dim) * w;
          for (int d = 0; d < dim; d++)
            st.f(g, d) = n(g) * mean(d) +
                         std::sqrt(n(g) * ubm.variances(g, d)) * rng.Normal();
        }
        stats->push_back(CenterStats(st, ubm));
        latent->push_back(w);
      }
    }
  };
  generate("tr", opts.train_speakers, opts.train_sessions, &corpus.train,
           &corpus.train_stats, &corpus.train_latent);
  generate("ev", opts.eval_speakers, opts.eval_sessions, &corpus.eval,
           &corpus.eval_stats, &corpus.eval_latent);
  return corpus;
}

IVectorCorpus GenerateIVectorCorpus(const SynthOptions &opts, uint64_t seed) {
  CheckCounts(opts);
  const int rank = opts.rank;
  Rng rng(seed);
  IVectorCorpus corpus;
  corpus.domain_direction = rng.NormalVector(rank).normalized();
  auto generate = [&](const char *prefix, int speakers, int sessions,
                      SynthSplit *split, Matrix *out) {
    FillSplit(prefix, speakers, sessions, opts.bimodal, split);
    out->resize(speakers * sessions, rank);
    int idx = 0;
    for (int s = 0; s < speakers; s++) {
      Vector y = SpeakerFactor(opts, &rng);
      for (int k = 0; k < sessions; k++, idx++) {
        Vector w = y + opts.channel_scale * rng.NormalVector(rank);
        if (opts.bimodal)
          w += (split->domains[idx] ? 1.0 : -1.0) * opts.domain_offset *
               corpus.domain_direction;
        out->row(idx) = w.transpose();
      }
    }
  };
  generate("tr", opts.train_speakers, opts.train_sessions, &corpus.train,
           &corpus.train_vectors);
  generate("ev", opts.eval_speakers, opts.eval_sessions, &corpus.eval,
           &corpus.eval_vectors);
  return corpus;
}

// ---------------------------------------------------------------- audio

namespace {

struct Voice {
  double f0;
  double formants[3];
  double bandwidths[3];
};

Voice RandomVoice(Rng *rng) {
  Voice v;
  v.f0 = 90.0 + 150.0 * rng->Uniform();
  v.formants[0] = 300.0 + 600.0 * rng->Uniform();
  v.formants[1] = 900.0 + 1400.0 * rng->Uniform();
  v.formants[2] = 2300.0 + 1000.0 * rng->Uniform();
  for (double &b : v.bandwidths) b = 80.0 + 120.0 * rng->Uniform();
  return v;
}

// Adds a voiced segment [start, end) samples of `voice` to `out`.
void RenderVoice(const Voice &voice, double gain, size_t start, size_t end,
                 int rate, Rng *rng, std::vector<double> *out) {
  // Small per-syllable formant and pitch variation.
  double shift = 1.0 + 0.06 * (rng->Uniform() - 0.5);
  double f0 = voice.f0 * (1.0 + 0.08 * (rng->Uniform() - 0.5));
  std::vector<std::pair<double, double>> partials;
  for (int h = 1; h * f0 < 0.45 * rate; h++) {
    double freq = h * f0, amp = 0.0;
    for (int k = 0; k < 3; k++) {
      double z = (freq - voice.formants[k] * shift) / voice.bandwidths[k];
      amp += std::exp(-0.5 * z * z) / (k + 1);
    }
    partials.emplace_back(freq, amp + 0.01);
  }
  double norm = 0.0;
  for (const auto &p : partials) norm += p.second * p.second;
  norm = std::sqrt(norm);
  double phase0 = 2.0 * std::numbers::pi * rng->Uniform();
  size_t len = end - start;
  for (size_t i = 0; i < len; i++) {
    double t = static_cast<double>(i) / rate;
    // Raised-cosine syllable envelope.
    double env = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (i + 0.5) / len);
    double s = 0.0;
    for (const auto &[freq, amp] : partials)
      s += amp * std::sin(2.0 * std::numbers::pi * freq * t + phase0 * freq / f0);
    (*out)[start + i] += gain * env * s / norm;
  }
}

AudioSession RenderSession(const Voice &voice, const Voice *interferer,
                           const SynthOptions &opts, Rng *rng) {
  const int rate = opts.sample_rate_hz;
  const size_t total = static_cast<size_t>(opts.duration_s * rate);
  AudioSession sess;
  sess.signal.sample_rate_hz = rate;
  std::vector<double> &x = sess.signal.samples;
  x.assign(total, 0.0);
  double gain = 0.3 + 0.2 * rng->Uniform();
  double t = 0.1 + 0.1 * rng->Uniform();
  bool in_interferer_gap = false;
  while (t < opts.duration_s - 0.2) {
    double seg = 0.2 + 0.3 * rng->Uniform();
    double end = std::min(t + seg, opts.duration_s - 0.05);
    size_t a = static_cast<size_t>(t * rate), b = static_cast<size_t>(end * rate);
    // With an interferer, the middle third of the recording belongs to the
    // second talker.
    bool interfere = interferer != nullptr && t > opts.duration_s / 3.0 &&
                     t < 2.0 * opts.duration_s / 3.0;
    if (interfere) {
      RenderVoice(*interferer, 2.0 * gain, a, b, rate, rng, &x);
      sess.interferer_segments.emplace_back(t, end);
      in_interferer_gap = true;
    } else {
      RenderVoice(voice, gain, a, b, rate, rng, &x);
      sess.target_segments.emplace_back(t, end);
    }
    t = end + 0.08 + 0.15 * rng->Uniform();
  }
  (void)in_interferer_gap;
  // Channel: first-order tilt, then background noise.
  double tilt = 0.6 * (rng->Uniform() - 0.5);
  for (size_t i = total - 1; i > 0; i--) x[i] -= tilt * x[i - 1];
  for (double &v : x) v = std::clamp(v + opts.noise_level * rng->Normal(), -1.0, 1.0);
  return sess;
}

}  // namespace

AudioCorpus GenerateAudioCorpus(const SynthOptions &opts, uint64_t seed,
                                bool contaminate_first_eval) {
  CheckCounts(opts);
  if (opts.sample_rate_hz != 8000 && opts.sample_rate_hz != 16000)
    Fail(ErrorKind::kUsage, "sample rate must be 8000 or 16000");
  Rng rng(seed);
  AudioCorpus corpus;
  auto generate = [&](const char *prefix, int speakers, int sessions,
                      bool contaminate, std::vector<AudioSession> *out) {
    std::vector<Voice> voices;
    for (int s = 0; s < speakers; s++) voices.push_back(RandomVoice(&rng));
    for (int s = 0; s < speakers; s++) {
      for (int k = 0; k < sessions; k++) {
        const Voice *other = nullptr;
        if (contaminate && s == 0 && k == 0 && speakers > 1) other = &voices[1];
        AudioSession sess = RenderSession(voices[s], other, opts, &rng);
        sess.id = SessionId(prefix, s, k);
        sess.speaker = SpeakerId(prefix, s);
        out->push_back(std::move(sess));
      }
    }
  };
  generate("tr", opts.train_speakers, opts.train_sessions, false, &corpus.train);
  generate("ev", opts.eval_speakers, opts.eval_sessions, contaminate_first_eval,
           &corpus.eval);
  return corpus;
}

std::vector<Trial> AllPairTrials(const SynthSplit &split) {
  std::vector<Trial> trials;
  for (size_t i = 0; i < split.ids.size(); i++)
    for (size_t j = i + 1; j < split.ids.size(); j++)
      trials.push_back({split.ids[i], split.ids[j],
                        split.speakers[i] == split.speakers[j]});
  return trials;
}

std::string FormatTrials(const std::vector<Trial> &trials, bool with_key) {
  std::ostringstream os;
  for (const auto &t : trials) {
    os << t.enroll << ' ' << t.test;
    if (with_key) os << ' ' << (t.is_target ? "target" : "nontarget");
    os << '\n';
  }
  return os.str();
}

namespace {

std::string Utt2Spk(const SynthSplit &split) {
  std::ostringstream os;
  for (size_t i = 0; i < split.ids.size(); i++)
    os << split.ids[i] << ' ' << split.speakers[i] << '\n';
  return os.str();
}

std::string StatsManifest(const SynthSplit &split) {
  std::ostringstream os;
  for (size_t i = 0; i < split.ids.size(); i++)
    os << split.ids[i] << " - " << split.speakers[i] << " - -\n";
  return os.str();
}

void WriteSplitLists(const std::string &dir, const SynthSplit &train,
                     const SynthSplit &eval) {
  WriteFileAtomic(dir + "/train.utt2spk", Utt2Spk(train));
  WriteFileAtomic(dir + "/eval.utt2spk", Utt2Spk(eval));
  std::vector<Trial> trials = AllPairTrials(eval);
  WriteFileAtomic(dir + "/trials", FormatTrials(trials, false));
  WriteFileAtomic(dir + "/key", FormatTrials(trials, true));
}

SynthSplit SplitOf(const std::vector<AudioSession> &sessions) {
  SynthSplit split;
  for (const auto &s : sessions) {
    split.ids.push_back(s.id);
    split.speakers.push_back(s.speaker);
    split.domains.push_back(0);
  }
  return split;
}

std::string Segments(const std::vector<std::pair<double, double>> &segs) {
  std::ostringstream os;
  for (const auto &[a, b] : segs) os << FormatDouble(a) << ' ' << FormatDouble(b) << '\n';
  return os.str();
}

uint64_t SynthFingerprint(const SynthOptions &opts, uint64_t seed) {
  PipelineConfig cfg;
  cfg.synth = opts;
  return Fingerprint().Add("synth").Add(SectionText(cfg, "synth")).Add(seed).value();
}

}  // namespace

void WriteSynthCorpus(const SynthOptions &opts, uint64_t seed,
                      const std::string &dir) {
  std::filesystem::create_directories(dir);
  const uint64_t fp = SynthFingerprint(opts, seed);
  switch (opts.mode) {
    case SynthMode::kStats: {
      StatsCorpus c = GenerateStatsCorpus(opts, seed);
      WriteGmm(dir + "/ubm.mdl", c.ubm, {1, fp, 0});
      uint64_t stats_fp = Fingerprint().Add(fp).Add("stats").value();
      WriteStatsArchive(dir + "/train.stats", {{1, stats_fp, fp}, c.train_stats});
      WriteStatsArchive(dir + "/eval.stats",
                        {{1, stats_fp + 1, fp}, c.eval_stats});
      WriteFileAtomic(dir + "/train.manifest", StatsManifest(c.train));
      WriteFileAtomic(dir + "/eval.manifest", StatsManifest(c.eval));
      WriteSplitLists(dir, c.train, c.eval);
      break;
    }
    case SynthMode::kIVector: {
      IVectorCorpus c = GenerateIVectorCorpus(opts, seed);
      auto to_archive = [&](const SynthSplit &split, const Matrix &m,
                            uint64_t own) {
        IVectorArchive a;
        a.header = {1, own, fp};
        for (size_t i = 0; i < split.ids.size(); i++)
          a.vectors.push_back({split.ids[i], m.row(i).transpose()});
        return a;
      };
      WriteIVectorArchive(dir + "/train.ivec",
                          to_archive(c.train, c.train_vectors, fp + 1));
      WriteIVectorArchive(dir + "/eval.ivec",
                          to_archive(c.eval, c.eval_vectors, fp + 2));
      WriteFileAtomic(dir + "/train.manifest", StatsManifest(c.train));
      WriteFileAtomic(dir + "/eval.manifest", StatsManifest(c.eval));
      WriteSplitLists(dir, c.train, c.eval);
      break;
    }
    case SynthMode::kAudio: {
      AudioCorpus c = GenerateAudioCorpus(opts, seed, true);
      std::filesystem::create_directories(dir + "/wav");
      std::filesystem::create_directories(dir + "/sad");
      auto write = [&](const std::vector<AudioSession> &sessions,
                       const std::string &name) {
        std::ostringstream manifest;
        for (const auto &s : sessions) {
          std::string wav = dir + "/wav/" + s.id + ".wav";
          WriteWav(wav, s.signal);
          manifest << s.id << ' ' << wav << ' ' << s.speaker << " - -\n";
        }
        WriteFileAtomic(dir + "/" + name, manifest.str());
      };
      write(c.train, "train.manifest");
      write(c.eval, "eval.manifest");
      std::ostringstream overrides;
      for (const auto &s : c.eval) {
        if (s.interferer_segments.empty()) continue;
        std::string seg = dir + "/sad/" + s.id + ".seg";
        WriteFileAtomic(seg, Segments(s.target_segments));
        overrides << s.id << ' ' << dir << "/wav/" << s.id << ".wav "
                  << s.speaker << " - " << seg << '\n';
      }
      WriteFileAtomic(dir + "/overrides.manifest", overrides.str());
      WriteSplitLists(dir, SplitOf(c.train), SplitOf(c.eval));
      break;
    }
  }
}

}  // namespace ivnda
