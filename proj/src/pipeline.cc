// src/pipeline.cc

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

#include "ivnda/pipeline.h"

#include <algorithm>
#include <optional>
#include <set>
#include <sstream>

#include "ivnda/binary-io.h"

namespace ivnda {

namespace {

std::vector<std::vector<std::string>> Tokenize(const std::string &text) {
  std::vector<std::vector<std::string>> lines;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::vector<std::string> toks;
    for (std::string t; ls >> t;) toks.push_back(t);
    lines.push_back(std::move(toks));
  }
  return lines;
}

std::string Field(const std::vector<std::string> &toks, size_t i) {
  return i < toks.size() && toks[i] != "-" ? toks[i] : "";
}

void RequireParent(const ArtifactHeader &child, uint64_t parent_fp,
                   const char *child_name, const char *parent_name) {
  if (child.parent != parent_fp)
    Fail(ErrorKind::kContract, child_name, " was not produced from this ",
         parent_name, " (fingerprint ", child.parent, " vs ", parent_fp, ")");
}

}  // namespace

std::vector<ManifestEntry> ParseManifest(const std::string &text,
                                         const std::string &what) {
  std::vector<ManifestEntry> out;
  std::set<std::string> seen;
  int line_no = 0;
  for (const auto &toks : Tokenize(text)) {
    line_no++;
    if (toks.empty() || toks[0][0] == '#') continue;
    if (toks.size() < 2 || toks.size() > 5)
      Fail(ErrorKind::kFormat, what, ":", line_no,
           ": expected id audio [speaker [fmllr [sad]]]");
    if (!seen.insert(toks[0]).second)
      Fail(ErrorKind::kFormat, what, ":", line_no, ": duplicate recording id ",
           toks[0]);
    out.push_back({toks[0], Field(toks, 1), Field(toks, 2), Field(toks, 3),
                   Field(toks, 4)});
  }
  return out;
}

std::vector<ManifestEntry> ReadManifest(const std::string &path) {
  return ParseManifest(ReadFileText(path), path);
}

std::map<std::string, std::string> ReadUtt2Spk(const std::string &path) {
  std::map<std::string, std::string> out;
  int line_no = 0;
  for (const auto &toks : Tokenize(ReadFileText(path))) {
    line_no++;
    if (toks.empty()) continue;
    if (toks.size() != 2)
      Fail(ErrorKind::kFormat, path, ":", line_no, ": expected 'id speaker'");
    if (!out.emplace(toks[0], toks[1]).second)
      Fail(ErrorKind::kFormat, path, ":", line_no, ": duplicate id ", toks[0]);
  }
  return out;
}

uint64_t FrontendFingerprint(const PipelineConfig &cfg) {
  return Fingerprint().Add("frontend").Add(SectionText(cfg, "frontend")).value();
}

FeatureRecord ExtractRecord(const ManifestEntry &entry,
                            const PipelineConfig &cfg) {
  if (entry.audio_path.empty())
    Fail(ErrorKind::kIo, entry.recording_id, ": no audio path");
  AudioSignal signal = ReadWav(entry.audio_path);
  FeatureRecord rec;
  rec.id = entry.recording_id;
  rec.features = ComputeMfcc(signal, cfg.mfcc);
  rec.pipeline = "mfcc";
  if (cfg.use_deltas) {
    rec.features = AppendDeltas(rec.features);
    rec.pipeline += "+deltas";
  }
  const int num_frames = rec.features.NumFrames();
  if (!entry.sad_path.empty()) {
    rec.features.speech_mask = ReadSadMask(entry.sad_path, num_frames, cfg.mfcc);
    rec.pipeline += ",sad-override";
  } else if (cfg.use_sad) {
    rec.features.speech_mask = DetectSpeech(signal, cfg.mfcc, cfg.sad);
    rec.pipeline += ",sad";
  }
  if (static_cast<int>(rec.features.speech_mask.size()) != num_frames)
    Fail(ErrorKind::kAlignment, entry.recording_id, ": SAD produced ",
         rec.features.speech_mask.size(), " frames, features have ", num_frames);
  rec.features = ApplyCms(rec.features);
  rec.pipeline += ",drop,cms";
  if (!entry.fmllr_path.empty()) {
    rec.features = ApplyFmllr(rec.features, ReadFmllr(entry.fmllr_path));
    rec.pipeline += ",fmllr";
  }
  return rec;
}

FeatureArchive ExtractFeatures(const std::vector<ManifestEntry> &entries,
                               const PipelineConfig &cfg,
                               std::vector<RecordError> *errors) {
  const int n = static_cast<int>(entries.size());
  std::vector<FeatureRecord> records(n);
  std::vector<std::optional<RecordError>> failed(n);
  ParallelFor(n, cfg.workers, [&](int i) {
    try {
      records[i] = ExtractRecord(entries[i], cfg);
    } catch (const Error &e) {
      failed[i] = RecordError{entries[i].recording_id, e.what(), e.kind()};
    }
  });
  FeatureArchive archive;
  archive.fingerprint = FrontendFingerprint(cfg);
  for (int i = 0; i < n; i++) {
    if (failed[i]) {
      if (errors) errors->push_back(*failed[i]);
    } else {
      archive.records.push_back(std::move(records[i]));
    }
  }
  return archive;
}

namespace {

uint64_t CommonFeatureFingerprint(const std::vector<FeatureArchive> &archives) {
  if (archives.empty()) Fail(ErrorKind::kUsage, "no feature archives given");
  uint64_t fp = archives[0].fingerprint;
  for (const auto &a : archives)
    if (a.fingerprint != fp)
      Fail(ErrorKind::kContract,
           "feature archives come from different frontend configurations");
  return fp;
}

std::vector<FeatureMatrix> AllFeatures(const std::vector<FeatureArchive> &archives) {
  std::vector<FeatureMatrix> out;
  for (const auto &a : archives)
    for (const auto &r : a.records) out.push_back(r.features);
  return out;
}

}  // namespace

GmmArtifact TrainUbmStage(const std::vector<FeatureArchive> &archives,
                          const PipelineConfig &cfg) {
  uint64_t parent = CommonFeatureFingerprint(archives);
  GmmTrainOptions opts = cfg.ubm;
  opts.workers = cfg.workers;
  GmmArtifact out;
  out.gmm = TrainGmm(AllFeatures(archives), opts);
  out.header.parent = parent;
  out.header.fingerprint =
      Fingerprint().Add("ubm").Add(parent).Add(SectionText(cfg, "ubm")).value();
  return out;
}

GmmArtifact TrainSupervisedUbmStage(const std::vector<FeatureArchive> &archives,
                                    const PosteriorArchive &posteriors,
                                    int num_components,
                                    const PipelineConfig &cfg) {
  uint64_t parent = CommonFeatureFingerprint(archives);
  std::map<std::string, const PosteriorMatrix *> by_id;
  for (size_t i = 0; i < posteriors.ids.size(); i++)
    by_id[posteriors.ids[i]] = &posteriors.posteriors[i];
  std::vector<FeatureMatrix> feats;
  std::vector<PosteriorMatrix> posts;
  for (const auto &a : archives)
    for (const auto &r : a.records) {
      auto it = by_id.find(r.id);
      if (it == by_id.end())
        Fail(ErrorKind::kAlignment, "no posteriors for recording ", r.id);
      CheckAlignment(*it->second, r.features, r.id);
      feats.push_back(r.features);
      posts.push_back(*it->second);
    }
  GmmArtifact out;
  out.gmm = TrainSupervisedGaussians(feats, posts, num_components,
                                     cfg.ubm.var_floor_factor);
  out.header.parent = parent;
  out.header.fingerprint = Fingerprint()
                               .Add("supervised-ubm")
                               .Add(parent)
                               .Add(static_cast<uint64_t>(num_components))
                               .Add(cfg.ubm.var_floor_factor)
                               .value();
  return out;
}

StatsArchive AccumulateStatsStage(const FeatureArchive &features,
                                  const GmmArtifact &ubm,
                                  const PosteriorArchive *external,
                                  const PipelineConfig &cfg,
                                  std::vector<RecordError> *errors) {
  RequireParent(ubm.header, features.fingerprint, "UBM", "feature archive");
  std::map<std::string, const PosteriorMatrix *> by_id;
  if (external)
    for (size_t i = 0; i < external->ids.size(); i++)
      by_id[external->ids[i]] = &external->posteriors[i];
  const int n = static_cast<int>(features.records.size());
  const int num_g = ubm.gmm.NumComponents();
  std::vector<BwStats> stats(n);
  std::vector<std::optional<RecordError>> failed(n);
  ParallelFor(n, cfg.workers, [&](int i) {
    const FeatureRecord &r = features.records[i];
    try {
      BwStats raw;
      if (external) {
        auto it = by_id.find(r.id);
        if (it == by_id.end())
          Fail(ErrorKind::kAlignment, "no posteriors for recording ", r.id);
        CheckAlignment(*it->second, r.features, r.id);
        raw = AccumulateBw(r.features, *it->second, num_g);
      } else {
        raw = AccumulateBw(r.features, GmmPosteriors(ubm.gmm, r.features, cfg.top_n),
                           num_g);
      }
      raw.recording_id = r.id;
      stats[i] = CenterStats(raw, ubm.gmm);
    } catch (const Error &e) {
      failed[i] = RecordError{r.id, e.what(), e.kind()};
    }
  });
  StatsArchive out;
  for (int i = 0; i < n; i++) {
    if (failed[i]) {
      if (errors) errors->push_back(*failed[i]);
    } else {
      out.stats.push_back(std::move(stats[i]));
    }
  }
  out.header.parent = ubm.header.fingerprint;
  Fingerprint fp;
  fp.Add("stats").Add(ubm.header.fingerprint).Add(features.fingerprint);
  fp.Add(static_cast<uint64_t>(external ? 0 : cfg.top_n));
  for (const auto &s : out.stats) fp.Add(s.recording_id);
  out.header.fingerprint = fp.value();
  return out;
}

TvArtifact TrainTvStage(const StatsArchive &stats, const GmmArtifact &ubm,
                        const PipelineConfig &cfg, std::vector<double> *objective) {
  RequireParent(stats.header, ubm.header.fingerprint, "statistics archive", "UBM");
  TvTrainOptions opts;
  opts.rank = cfg.tv_rank;
  opts.num_iters = cfg.tv_iters;
  opts.seed = cfg.seed;
  opts.workers = cfg.workers;
  TvArtifact out;
  out.model = TrainTv(stats.stats, ubm.gmm, opts, objective);
  out.header.parent = ubm.header.fingerprint;
  out.header.fingerprint = Fingerprint()
                               .Add("tv")
                               .Add(ubm.header.fingerprint)
                               .Add(stats.header.fingerprint)
                               .Add(SectionText(cfg, "tv"))
                               .Add(cfg.seed)
                               .value();
  return out;
}

IVectorArchive ExtractIvectorsStage(const StatsArchive &stats,
                                    const TvArtifact &tv,
                                    const PipelineConfig &cfg) {
  RequireParent(stats.header, tv.header.parent, "statistics archive",
                "UBM as the TV model");
  const int n = static_cast<int>(stats.stats.size());
  IVectorArchive out;
  out.vectors.resize(n);
  ParallelFor(n, cfg.workers, [&](int i) {
    out.vectors[i] = {stats.stats[i].recording_id,
                      ExtractIvector(stats.stats[i], tv.model)};
  });
  out.header.parent = tv.header.fingerprint;
  out.header.fingerprint = Fingerprint()
                               .Add("ivectors")
                               .Add(tv.header.fingerprint)
                               .Add(stats.header.fingerprint)
                               .value();
  return out;
}

LabeledVectors LabelIvectors(const IVectorArchive &ivectors,
                             const std::map<std::string, std::string> &utt2spk,
                             const std::string &label_prefix) {
  std::vector<const IVector *> kept;
  std::vector<std::string> labels;
  for (const auto &v : ivectors.vectors) {
    auto it = utt2spk.find(v.recording_id);
    if (it == utt2spk.end())
      Fail(ErrorKind::kKeyMismatch, "no speaker label for ", v.recording_id);
    if (it->second.compare(0, label_prefix.size(), label_prefix) != 0) continue;
    kept.push_back(&v);
    labels.push_back(it->second);
  }
  if (kept.empty()) Fail(ErrorKind::kEmptyInput, "no labeled i-vectors");
  Matrix m(kept.size(), kept[0]->w.size());
  for (size_t i = 0; i < kept.size(); i++) m.row(i) = kept[i]->w.transpose();
  return MakeLabeledVectors(std::move(m), labels);
}

DaArtifact TrainDaStage(const IVectorArchive &ivectors,
                        const LabeledVectors &data, const PipelineConfig &cfg) {
  DaArtifact out;
  out.model.method = cfg.da_method;
  if (cfg.da_method == DaMethod::kLda) {
    out.model.projection = ComputeLda(data, cfg.da_dim);
  } else {
    NdaOptions opts;
    opts.k = cfg.da_k;
    opts.alpha = cfg.da_alpha;
    out.model.k = cfg.da_k;
    out.model.alpha = cfg.da_alpha;
    out.model.projection = ComputeNda(data, opts, cfg.da_dim);
  }
  out.header.parent = ivectors.header.parent;
  out.header.fingerprint = Fingerprint()
                               .Add("da")
                               .Add(ivectors.header.fingerprint)
                               .Add(SectionText(cfg, "da"))
                               .value();
  return out;
}

BackendArtifacts TrainBackendStage(const IVectorArchive &ivectors,
                                   const LabeledVectors &data,
                                   const DaArtifact &da,
                                   const PipelineConfig &cfg) {
  RequireParent(ivectors.header, da.header.parent, "i-vector archive",
                "TV model as the DA projection");
  BackendArtifacts out;
  Matrix projected = Project(data.vectors, da.model.projection);
  out.normalizer = FitNormalizer(projected);
  out.normalizer_header.parent = da.header.fingerprint;
  out.normalizer_header.fingerprint = Fingerprint()
                                          .Add("normalizer")
                                          .Add(da.header.fingerprint)
                                          .Add(ivectors.header.fingerprint)
                                          .value();
  LabeledVectors normalized{NormalizeRows(projected, out.normalizer), data.labels};
  out.plda = TrainPlda(normalized, cfg.plda_iters);
  out.plda_header.parent = out.normalizer_header.fingerprint;
  out.plda_header.fingerprint = Fingerprint()
                                    .Add("plda")
                                    .Add(out.normalizer_header.fingerprint)
                                    .Add(SectionText(cfg, "plda"))
                                    .value();
  return out;
}

void CheckScoringChain(const ScoringModels &models) {
  RequireParent(models.backend.normalizer_header, models.da.header.fingerprint,
                "normalizer", "DA projection");
  RequireParent(models.backend.plda_header,
                models.backend.normalizer_header.fingerprint, "PLDA model",
                "normalizer");
}

Vector PrepareVector(const Vector &ivector, const ScoringModels &models) {
  return Normalize(Project(ivector, models.da.model.projection),
                   models.backend.normalizer);
}

std::vector<TrialLine> ParseTrialList(const std::string &text,
                                      const std::string &what) {
  std::vector<TrialLine> out;
  int line_no = 0;
  for (const auto &toks : Tokenize(text)) {
    line_no++;
    if (toks.empty()) continue;
    // A key file also works as a trial list.
    if (toks.size() != 2 && toks.size() != 3)
      Fail(ErrorKind::kFormat, what, ":", line_no, ": expected 'enroll test'");
    out.push_back({toks[0], toks[1]});
  }
  return out;
}

std::vector<ScoredTrial> ScoreTrials(
    const std::vector<TrialLine> &trials, const IVectorArchive &enroll,
    const IVectorArchive &test,
    const std::map<std::string, std::vector<std::string>> &enroll_map,
    const ScoringModels &models) {
  CheckScoringChain(models);
  RequireParent(enroll.header, models.da.header.parent, "enrollment i-vectors",
                "TV model as the DA projection");
  RequireParent(test.header, models.da.header.parent, "test i-vectors",
                "TV model as the DA projection");
  std::map<std::string, Vector> enroll_cache, test_cache;
  std::vector<std::string> unknown;
  auto enroll_vector = [&](const std::string &id) -> const Vector * {
    auto it = enroll_cache.find(id);
    if (it != enroll_cache.end()) return &it->second;
    auto m = enroll_map.find(id);
    if (m == enroll_map.end()) {
      const IVector *v = enroll.Find(id);
      if (!v) return nullptr;
      return &enroll_cache.emplace(id, PrepareVector(v->w, models)).first->second;
    }
    // Average of the length-normalized session vectors, not renormalized.
    Vector sum;
    for (const auto &rec : m->second) {
      const IVector *v = enroll.Find(rec);
      if (!v) return nullptr;
      Vector x = PrepareVector(v->w, models);
      sum = sum.size() ? Vector(sum + x) : x;
    }
    sum /= static_cast<double>(m->second.size());
    return &enroll_cache.emplace(id, std::move(sum)).first->second;
  };
  auto test_vector = [&](const std::string &id) -> const Vector * {
    auto it = test_cache.find(id);
    if (it != test_cache.end()) return &it->second;
    const IVector *v = test.Find(id);
    if (!v) return nullptr;
    return &test_cache.emplace(id, PrepareVector(v->w, models)).first->second;
  };
  std::vector<ScoredTrial> out;
  for (const auto &t : trials) {
    const Vector *e = enroll_vector(t.enroll);
    const Vector *x = test_vector(t.test);
    if (!e) unknown.push_back(t.enroll);
    if (!x) unknown.push_back(t.test);
    if (e && x) out.push_back({t.enroll, t.test, models.backend.plda.Score(*e, *x)});
  }
  if (!unknown.empty()) {
    std::sort(unknown.begin(), unknown.end());
    unknown.erase(std::unique(unknown.begin(), unknown.end()), unknown.end());
    std::ostringstream os;
    os << unknown.size() << " unknown recording id(s) in trial list:";
    for (const auto &u : unknown) os << ' ' << u;
    Fail(ErrorKind::kKeyMismatch, os.str());
  }
  return out;
}

std::string FormatScores(const std::vector<ScoredTrial> &scores) {
  std::ostringstream os;
  for (const auto &s : scores)
    os << s.enroll << ' ' << s.test << ' ' << FormatDouble(s.score) << '\n';
  return os.str();
}

std::vector<ScoredTrial> ParseScores(const std::string &text,
                                     const std::string &what) {
  std::vector<ScoredTrial> out;
  int line_no = 0;
  for (const auto &toks : Tokenize(text)) {
    line_no++;
    if (toks.empty()) continue;
    if (toks.size() != 3)
      Fail(ErrorKind::kFormat, what, ":", line_no, ": expected 'enroll test score'");
    double v = 0.0;
    try {
      size_t used = 0;
      v = std::stod(toks[2], &used);
      if (used != toks[2].size()) throw std::invalid_argument(toks[2]);
    } catch (const std::logic_error &) {
      Fail(ErrorKind::kFormat, what, ":", line_no, ": bad score '", toks[2], "'");
    }
    out.push_back({toks[0], toks[1], v});
  }
  return out;
}

std::map<std::pair<std::string, std::string>, bool> ParseKey(
    const std::string &text, const std::string &what) {
  std::map<std::pair<std::string, std::string>, bool> out;
  int line_no = 0;
  for (const auto &toks : Tokenize(text)) {
    line_no++;
    if (toks.empty()) continue;
    if (toks.size() != 3 || (toks[2] != "target" && toks[2] != "nontarget"))
      Fail(ErrorKind::kFormat, what, ":", line_no,
           ": expected 'enroll test target|nontarget'");
    bool target = toks[2] == "target";
    auto [it, inserted] = out.emplace(std::make_pair(toks[0], toks[1]), target);
    if (!inserted && it->second != target)
      Fail(ErrorKind::kFormat, what, ":", line_no, ": conflicting labels for ",
           toks[0], ' ', toks[1]);
  }
  return out;
}

SadReport SadOverrideReport(
    const std::vector<ScoredTrial> &original,
    const std::vector<ManifestEntry> &overrides, const IVectorArchive &ivectors,
    const GmmArtifact &ubm, const TvArtifact &tv, const ScoringModels &models,
    const std::map<std::pair<std::string, std::string>, bool> &key,
    const PipelineConfig &cfg) {
  CheckScoringChain(models);
  RequireParent(ivectors.header, tv.header.fingerprint, "i-vector archive",
                "TV model");
  RequireParent(tv.header, ubm.header.fingerprint, "TV model", "UBM");
  if (ubm.header.parent != FrontendFingerprint(cfg))
    Fail(ErrorKind::kContract,
         "frontend configuration differs from the one the UBM was trained on");
  RequireParent(models.da.header, tv.header.fingerprint, "DA projection",
                "TV model");

  // New i-vectors for the overridden recordings.
  std::map<std::string, Vector> replaced;
  for (const auto &entry : overrides) {
    if (!ivectors.Find(entry.recording_id))
      Fail(ErrorKind::kKeyMismatch, "override for unknown recording ",
           entry.recording_id);
    if (entry.sad_path.empty())
      Fail(ErrorKind::kUsage, "override entry ", entry.recording_id,
           " has no SAD mask");
    FeatureRecord rec = ExtractRecord(entry, cfg);
    // Same precision as a round trip through the feature archive.
    rec.features.frames = rec.features.frames.cast<float>().cast<double>();
    BwStats st = CenterStats(
        AccumulateBw(rec.features, GmmPosteriors(ubm.gmm, rec.features, cfg.top_n),
                     ubm.gmm.NumComponents()),
        ubm.gmm);
    replaced[entry.recording_id] = ExtractIvector(st, tv.model);
  }
  auto vector_for = [&](const std::string &id) -> Vector {
    auto it = replaced.find(id);
    if (it != replaced.end()) return it->second;
    const IVector *v = ivectors.Find(id);
    if (!v) Fail(ErrorKind::kKeyMismatch, "unknown recording id ", id);
    return v->w;
  };

  SadReport report;
  for (const auto &s : original) {
    bool touched = replaced.count(s.enroll) || replaced.count(s.test);
    if (!touched) {
      report.new_scores.push_back(s);
      continue;
    }
    auto k = key.find({s.enroll, s.test});
    if (k == key.end())
      Fail(ErrorKind::kKeyMismatch, "trial ", s.enroll, ' ', s.test,
           " missing from key");
    double score = models.backend.plda.Score(
        PrepareVector(vector_for(s.enroll), models),
        PrepareVector(vector_for(s.test), models));
    report.new_scores.push_back({s.enroll, s.test, score});
    report.rows.push_back({s.enroll, s.test, s.score, score, k->second});
    if (k->second) {
      report.targets_total++;
      if (score > s.score) report.targets_improved++;
    } else {
      report.nontargets_total++;
      if (score < s.score) report.nontargets_decreased++;
    }
  }
  return report;
}

std::string FormatSadReport(const SadReport &report) {
  std::ostringstream os;
  os << "enroll,test,old_score,new_score,target\n";
  for (const auto &r : report.rows)
    os << r.enroll << ',' << r.test << ',' << FormatDouble(r.old_score) << ','
       << FormatDouble(r.new_score) << ',' << (r.is_target ? 1 : 0) << '\n';
  return os.str();
}

}  // namespace ivnda
