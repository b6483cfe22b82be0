// src/cli.cc

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

#include "ivnda/cli.h"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "ivnda/binary-io.h"
#include "ivnda/metrics.h"
#include "ivnda/pipeline.h"
#include "ivnda/synth.h"

namespace ivnda {

namespace {

struct GlobalOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<uint64_t> seed;
  std::optional<int> workers;
};

PipelineConfig ResolveConfig(const GlobalOptions &g) {
  PipelineConfig cfg;
  if (!g.config_path.empty()) cfg = LoadConfig(g.config_path);
  for (const auto &kv : g.overrides) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos)
      Fail(ErrorKind::kUsage, "--set expects section.key=value, got '", kv, "'");
    SetConfigValue(kv.substr(0, eq), kv.substr(eq + 1), &cfg);
  }
  if (g.seed) cfg.seed = *g.seed;
  if (g.workers) {
    if (*g.workers < 1) Fail(ErrorKind::kUsage, "--workers must be >= 1");
    cfg.workers = *g.workers;
  }
  return cfg;
}

GmmArtifact LoadGmm(const std::string &path) {
  GmmArtifact a;
  a.gmm = ReadGmm(path, &a.header);
  return a;
}

TvArtifact LoadTv(const std::string &path) {
  TvArtifact a;
  a.model = ReadTvModel(path, &a.header);
  return a;
}

ScoringModels LoadScoring(const std::string &da, const std::string &nz,
                          const std::string &plda) {
  ScoringModels m;
  m.da.model = ReadDaModel(da, &m.da.header);
  m.backend.normalizer = ReadNormalizer(nz, &m.backend.normalizer_header);
  m.backend.plda = ReadPlda(plda, &m.backend.plda_header);
  CheckScoringChain(m);
  return m;
}

std::map<std::string, std::vector<std::string>> ReadEnrollMap(
    const std::string &path) {
  std::map<std::string, std::vector<std::string>> out;
  if (path.empty()) return out;
  std::istringstream is(ReadFileText(path));
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    line_no++;
    std::istringstream ls(line);
    std::string model, rec;
    if (!(ls >> model)) continue;
    std::vector<std::string> recs;
    while (ls >> rec) recs.push_back(rec);
    if (recs.empty())
      Fail(ErrorKind::kFormat, path, ":", line_no, ": model without recordings");
    if (!out.emplace(model, recs).second)
      Fail(ErrorKind::kFormat, path, ":", line_no, ": duplicate model ", model);
  }
  return out;
}

TrialSet JoinKey(const std::vector<ScoredTrial> &scores,
                 const std::map<std::pair<std::string, std::string>, bool> &key) {
  TrialSet set;
  std::vector<std::string> missing;
  for (const auto &s : scores) {
    auto it = key.find({s.enroll, s.test});
    if (it == key.end()) {
      missing.push_back(s.enroll + " " + s.test);
      continue;
    }
    set.scores.push_back(s.score);
    set.is_target.push_back(it->second);
  }
  if (!missing.empty()) {
    std::ostringstream os;
    os << missing.size() << " scored trial(s) missing from key, first: "
       << missing.front();
    Fail(ErrorKind::kKeyMismatch, os.str());
  }
  return set;
}

int ReportRecordErrors(const std::vector<RecordError> &errors) {
  for (const auto &e : errors)
    std::cerr << "ivnda: " << e.recording_id << ": " << ErrorKindName(e.kind)
              << ": " << e.message << '\n';
  if (errors.empty()) return 0;
  std::cerr << "ivnda: " << errors.size() << " recording(s) failed\n";
  return ExitCodeFor(errors.front().kind);
}

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

int RunCli(const std::vector<std::string> &args) {
  std::vector<char *> argv;
  std::vector<std::string> copy(args);
  for (auto &a : copy) argv.push_back(a.data());
  argv.push_back(nullptr);
  return RunCli(static_cast<int>(copy.size()), argv.data());
}

int RunCli(int argc, char **argv) {
  CLI::App app{"i-vector speaker verification toolkit", "ivnda"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--config", g.config_path, "Configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--set", g.overrides, "Override one key: section.key=value");
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--workers", g.workers, "Worker threads");

  std::function<int(const PipelineConfig &)> action;
  auto on = [&](CLI::App *sub, std::function<int(const PipelineConfig &)> fn) {
    sub->callback([&action, fn]() { action = fn; });
  };

  // defaults
  {
    auto *sub = app.add_subcommand("defaults", "Print the configuration");
    on(sub, [&](const PipelineConfig &cfg) {
      std::cout << FormatConfig(cfg);
      return 0;
    });
  }

  // synth
  std::string synth_out, synth_mode;
  bool synth_bimodal = false;
  {
    auto *sub = app.add_subcommand("synth", "Generate a synthetic corpus");
    sub->add_option("--out", synth_out, "Output directory")->required();
    sub->add_option("--mode", synth_mode, "stats, ivector or audio");
    sub->add_flag("--bimodal", synth_bimodal, "Two channel clusters");
    on(sub, [&](const PipelineConfig &c) {
      PipelineConfig cfg = c;
      if (!synth_mode.empty()) SetConfigValue("synth.mode", synth_mode, &cfg);
      if (synth_bimodal) cfg.synth.bimodal = true;
      WriteSynthCorpus(cfg.synth, cfg.seed, synth_out);
      return 0;
    });
  }

  // extract-features
  std::string ef_manifest, ef_out;
  {
    auto *sub = app.add_subcommand("extract-features", "Audio to feature archive");
    sub->add_option("--manifest", ef_manifest)->required();
    sub->add_option("--out", ef_out)->required();
    on(sub, [&](const PipelineConfig &cfg) {
      std::vector<RecordError> errors;
      FeatureArchive a = ExtractFeatures(ReadManifest(ef_manifest), cfg, &errors);
      WriteFeatureArchive(ef_out, a);
      return ReportRecordErrors(errors);
    });
  }

  // train-ubm
  std::vector<std::string> ubm_features;
  std::string ubm_out;
  std::optional<int> ubm_components;
  {
    auto *sub = app.add_subcommand("train-ubm", "Train the UBM");
    sub->add_option("--features", ubm_features)->required();
    sub->add_option("--components", ubm_components);
    sub->add_option("--out", ubm_out)->required();
    on(sub, [&](const PipelineConfig &c) {
      PipelineConfig cfg = c;
      if (ubm_components) cfg.ubm.num_components = *ubm_components;
      std::vector<FeatureArchive> archives;
      for (const auto &p : ubm_features) archives.push_back(ReadFeatureArchive(p));
      GmmArtifact a = TrainUbmStage(archives, cfg);
      WriteGmm(ubm_out, a.gmm, a.header);
      return 0;
    });
  }

  // train-supervised-ubm
  std::vector<std::string> sup_features;
  std::string sup_post, sup_out;
  int sup_components = 0;
  {
    auto *sub = app.add_subcommand("train-supervised-ubm",
                                   "Gaussians from external frame posteriors");
    sub->add_option("--features", sup_features)->required();
    sub->add_option("--posteriors", sup_post)->required();
    sub->add_option("--components", sup_components)->required();
    sub->add_option("--out", sup_out)->required();
    on(sub, [&](const PipelineConfig &cfg) {
      std::vector<FeatureArchive> archives;
      for (const auto &p : sup_features) archives.push_back(ReadFeatureArchive(p));
      PosteriorArchive post = LoadExternalPosteriors(sup_post, sup_components);
      GmmArtifact a = TrainSupervisedUbmStage(archives, post, sup_components, cfg);
      WriteGmm(sup_out, a.gmm, a.header);
      return 0;
    });
  }

  // accumulate-stats
  std::string acc_features, acc_ubm, acc_post, acc_out;
  std::optional<int> acc_top_n;
  {
    auto *sub = app.add_subcommand("accumulate-stats", "Baum-Welch statistics");
    sub->add_option("--features", acc_features)->required();
    sub->add_option("--ubm", acc_ubm)->required();
    sub->add_option("--posteriors", acc_post, "External frame posteriors");
    sub->add_option("--top-n", acc_top_n);
    sub->add_option("--out", acc_out)->required();
    on(sub, [&](const PipelineConfig &c) {
      PipelineConfig cfg = c;
      if (acc_top_n) cfg.top_n = *acc_top_n;
      GmmArtifact ubm = LoadGmm(acc_ubm);
      std::optional<PosteriorArchive> post;
      if (!acc_post.empty())
        post = LoadExternalPosteriors(acc_post, ubm.gmm.NumComponents());
      std::vector<RecordError> errors;
      StatsArchive s = AccumulateStatsStage(ReadFeatureArchive(acc_features), ubm,
                                            post ? &*post : nullptr, cfg, &errors);
      WriteStatsArchive(acc_out, s);
      return ReportRecordErrors(errors);
    });
  }

  // train-tv
  std::string tv_stats, tv_ubm, tv_out;
  std::optional<int> tv_rank;
  {
    auto *sub = app.add_subcommand("train-tv", "Train the total variability matrix");
    sub->add_option("--stats", tv_stats)->required();
    sub->add_option("--ubm", tv_ubm)->required();
    sub->add_option("--rank", tv_rank);
    sub->add_option("--out", tv_out)->required();
    on(sub, [&](const PipelineConfig &c) {
      PipelineConfig cfg = c;
      if (tv_rank) cfg.tv_rank = *tv_rank;
      std::vector<double> objective;
      TvArtifact a = TrainTvStage(ReadStatsArchive(tv_stats), LoadGmm(tv_ubm), cfg,
                                  &objective);
      for (size_t i = 0; i < objective.size(); i++)
        IVNDA_INFO("tv iteration " << i << " objective " << objective[i]);
      WriteTvModel(tv_out, a.model, a.header);
      return 0;
    });
  }

  // extract-ivectors
  std::string iv_stats, iv_tv, iv_out;
  {
    auto *sub = app.add_subcommand("extract-ivectors", "Statistics to i-vectors");
    sub->add_option("--stats", iv_stats)->required();
    sub->add_option("--tv", iv_tv)->required();
    sub->add_option("--out", iv_out)->required();
    on(sub, [&](const PipelineConfig &cfg) {
      WriteIVectorArchive(iv_out, ExtractIvectorsStage(ReadStatsArchive(iv_stats),
                                                       LoadTv(iv_tv), cfg));
      return 0;
    });
  }

  // train-da
  std::string da_ivec, da_utt2spk, da_out, da_method;
  std::optional<int> da_k, da_dim;
  std::optional<double> da_alpha;
  {
    auto *sub = app.add_subcommand("train-da", "Train an LDA or NDA projection");
    sub->add_option("--ivectors", da_ivec)->required();
    sub->add_option("--utt2spk", da_utt2spk)->required();
    sub->add_option("--method", da_method)->check(CLI::IsMember({"lda", "nda"}));
    sub->add_option("--k", da_k);
    sub->add_option("--alpha", da_alpha);
    sub->add_option("--dim", da_dim);
    sub->add_option("--out", da_out)->required();
    on(sub, [&](const PipelineConfig &c) {
      PipelineConfig cfg = c;
      if (!da_method.empty()) cfg.da_method = ParseDaMethod(da_method);
      if (da_k) cfg.da_k = *da_k;
      if (da_alpha) cfg.da_alpha = *da_alpha;
      if (da_dim) cfg.da_dim = *da_dim;
      IVectorArchive iv = ReadIVectorArchive(da_ivec);
      DaArtifact a = TrainDaStage(iv, LabelIvectors(iv, ReadUtt2Spk(da_utt2spk)), cfg);
      WriteDaModel(da_out, a.model, a.header);
      return 0;
    });
  }

  // train-plda
  std::string pl_ivec, pl_utt2spk, pl_da, pl_out, pl_nz_out, pl_prefix;
  {
    auto *sub = app.add_subcommand("train-plda",
                                   "Train the normalizer and PLDA backend");
    sub->add_option("--ivectors", pl_ivec)->required();
    sub->add_option("--utt2spk", pl_utt2spk)->required();
    sub->add_option("--da", pl_da)->required();
    sub->add_option("--out", pl_out)->required();
    sub->add_option("--normalizer-out", pl_nz_out, "Default: <out>.nz");
    sub->add_option("--speaker-prefix", pl_prefix,
                    "Train only on speakers whose label starts with this");
    on(sub, [&](const PipelineConfig &cfg) {
      IVectorArchive iv = ReadIVectorArchive(pl_ivec);
      DaArtifact da;
      da.model = ReadDaModel(pl_da, &da.header);
      BackendArtifacts b = TrainBackendStage(
          iv, LabelIvectors(iv, ReadUtt2Spk(pl_utt2spk), pl_prefix), da, cfg);
      WriteNormalizer(pl_nz_out.empty() ? pl_out + ".nz" : pl_nz_out,
                      b.normalizer, b.normalizer_header);
      WritePlda(pl_out, b.plda, b.plda_header);
      return 0;
    });
  }

  // score
  std::string sc_ivec, sc_enroll_ivec, sc_enroll_map, sc_trials, sc_da,
      sc_nz, sc_plda, sc_out;
  {
    auto *sub = app.add_subcommand("score", "PLDA scores for a trial list");
    sub->add_option("--ivectors", sc_ivec, "Test i-vectors")->required();
    sub->add_option("--enroll-ivectors", sc_enroll_ivec, "Default: --ivectors");
    sub->add_option("--enroll-map", sc_enroll_map, "model rec1 rec2 ... lines");
    sub->add_option("--trials", sc_trials)->required();
    sub->add_option("--da", sc_da)->required();
    sub->add_option("--normalizer", sc_nz, "Default: <plda>.nz");
    sub->add_option("--plda", sc_plda)->required();
    sub->add_option("--out", sc_out)->required();
    on(sub, [&](const PipelineConfig &) {
      ScoringModels m =
          LoadScoring(sc_da, sc_nz.empty() ? sc_plda + ".nz" : sc_nz, sc_plda);
      IVectorArchive test = ReadIVectorArchive(sc_ivec);
      IVectorArchive enroll =
          sc_enroll_ivec.empty() ? test : ReadIVectorArchive(sc_enroll_ivec);
      auto scores = ScoreTrials(ParseTrialList(ReadFileText(sc_trials), sc_trials),
                                enroll, test, ReadEnrollMap(sc_enroll_map), m);
      WriteFileAtomic(sc_out, FormatScores(scores));
      return 0;
    });
  }

  // evaluate / det
  std::string ev_scores, ev_key, ev_det_prefix, ev_preset = "sre10";
  double ev_c_miss = 1.0, ev_c_fa = 1.0, ev_p_target = 0.01;
  auto add_eval_inputs = [&](CLI::App *sub) {
    sub->add_option("--scores", ev_scores)->required();
    sub->add_option("--key", ev_key)->required();
  };
  auto load_trials = [&]() {
    return JoinKey(ParseScores(ReadFileText(ev_scores), ev_scores),
                   ParseKey(ReadFileText(ev_key), ev_key));
  };
  {
    auto *sub = app.add_subcommand("evaluate", "EER, minDCF and DET curve");
    add_eval_inputs(sub);
    sub->add_option("--det-prefix", ev_det_prefix, "Write <prefix>.csv/.svg");
    sub->add_option("--dcf-preset", ev_preset)
        ->check(CLI::IsMember({"sre08", "sre10", "custom"}));
    sub->add_option("--c-miss", ev_c_miss);
    sub->add_option("--c-fa", ev_c_fa);
    sub->add_option("--p-target", ev_p_target);
    on(sub, [&](const PipelineConfig &) {
      TrialSet t = load_trials();
      EerResult eer = ComputeEer(t);
      double dcf08 = ComputeMinDcf(t, Sre08Dcf());
      double dcf10 = ComputeMinDcf(t, Sre10Dcf());
      DcfParams chosen = ev_preset == "sre08"   ? Sre08Dcf()
                         : ev_preset == "sre10" ? Sre10Dcf()
                                                : DcfParams{ev_c_miss, ev_c_fa,
                                                            ev_p_target};
      size_t targets = std::count(t.is_target.begin(), t.is_target.end(), true);
      std::cout << "trials " << t.scores.size() << " targets " << targets
                << " nontargets " << t.scores.size() - targets << '\n'
                << "eer_percent " << Fixed(100.0 * eer.eer, 2) << '\n'
                << "eer_threshold " << FormatDouble(eer.threshold) << '\n'
                << "mindcf_sre08 " << Fixed(dcf08, 3) << '\n'
                << "mindcf_sre10 " << Fixed(dcf10, 3) << '\n'
                << "mindcf_" << ev_preset << "_selected "
                << Fixed(ComputeMinDcf(t, chosen), 3) << '\n';
      if (!ev_det_prefix.empty()) {
        auto pts = DetPoints(t);
        WriteFileAtomic(ev_det_prefix + ".csv", FormatDetCsv(pts));
        WriteFileAtomic(ev_det_prefix + ".svg", FormatDetSvg(pts));
      }
      return 0;
    });
  }
  {
    auto *sub = app.add_subcommand("det", "Write the DET curve");
    add_eval_inputs(sub);
    sub->add_option("--out-prefix", ev_det_prefix)->required();
    on(sub, [&](const PipelineConfig &) {
      auto pts = DetPoints(load_trials());
      WriteFileAtomic(ev_det_prefix + ".csv", FormatDetCsv(pts));
      WriteFileAtomic(ev_det_prefix + ".svg", FormatDetSvg(pts));
      return 0;
    });
  }

  // sad-report
  std::string sr_scores, sr_overrides, sr_key, sr_ivec, sr_ubm, sr_tv,
      sr_da, sr_nz, sr_plda, sr_out, sr_new_scores;
  {
    auto *sub = app.add_subcommand("sad-report",
                                   "Rescore trials after SAD mask overrides");
    sub->add_option("--scores", sr_scores, "Original score file")->required();
    sub->add_option("--overrides", sr_overrides, "Manifest with SAD paths")
        ->required();
    sub->add_option("--key", sr_key)->required();
    sub->add_option("--ivectors", sr_ivec, "Original i-vectors")->required();
    sub->add_option("--ubm", sr_ubm)->required();
    sub->add_option("--tv", sr_tv)->required();
    sub->add_option("--da", sr_da)->required();
    sub->add_option("--normalizer", sr_nz, "Default: <plda>.nz");
    sub->add_option("--plda", sr_plda)->required();
    sub->add_option("--out", sr_out, "CSV report")->required();
    sub->add_option("--new-scores", sr_new_scores, "Full rescored score file");
    on(sub, [&](const PipelineConfig &cfg) {
      ScoringModels m =
          LoadScoring(sr_da, sr_nz.empty() ? sr_plda + ".nz" : sr_nz, sr_plda);
      SadReport r = SadOverrideReport(
          ParseScores(ReadFileText(sr_scores), sr_scores),
          ReadManifest(sr_overrides), ReadIVectorArchive(sr_ivec),
          LoadGmm(sr_ubm), LoadTv(sr_tv), m,
          ParseKey(ReadFileText(sr_key), sr_key), cfg);
      WriteFileAtomic(sr_out, FormatSadReport(r));
      if (!sr_new_scores.empty())
        WriteFileAtomic(sr_new_scores, FormatScores(r.new_scores));
      std::cout << "rescored_trials " << r.rows.size() << '\n'
                << "targets_improved " << r.targets_improved << " of "
                << r.targets_total << '\n'
                << "nontargets_decreased " << r.nontargets_decreased << " of "
                << r.nontargets_total << '\n';
      return 0;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 1;
  }
  std::string name = app.get_subcommands().front()->get_name();
  try {
    return action(ResolveConfig(g));
  } catch (const Error &e) {
    std::cerr << "ivnda " << name << ": " << ErrorKindName(e.kind()) << ": "
              << e.what() << '\n';
    return e.ExitCode();
  } catch (const std::filesystem::filesystem_error &e) {
    std::cerr << "ivnda " << name << ": io: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace ivnda
