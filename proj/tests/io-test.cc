// tests/io-test.cc

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

#include <cmath>
#include <limits>

#include "doctest.h"
#include "ivnda/binary-io.h"
#include "ivnda/config.h"
#include "ivnda/pipeline.h"
#include "test-util.h"

using namespace ivnda;

TEST_CASE("binary writer/reader round trip") {
  BinaryWriter w;
  w.Magic("TEST");
  w.U32(0xdeadbeef);
  w.U64(0x0123456789abcdefULL);
  w.F32(1.5f);
  w.F64(-2.25);
  w.String("hello");
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  w.MatrixF64(m);
  // Little-endian on disk.
  CHECK(static_cast<unsigned char>(w.buffer()[4]) == 0xef);

  BinaryReader r(w.buffer(), "buf");
  CHECK(r.NextIs("TEST"));
  r.ExpectMagic("TEST");
  CHECK(r.U32() == 0xdeadbeef);
  CHECK(r.U64() == 0x0123456789abcdefULL);
  CHECK(r.F32() == 1.5f);
  CHECK(r.F64() == -2.25);
  CHECK(r.String() == "hello");
  CHECK(r.MatrixF64(2, 3) == m);
  CHECK(r.AtEnd());
  CHECK_KIND(r.U32(), kFormat);

  BinaryReader bad("NOPE", "bad");
  CHECK_KIND(bad.ExpectMagic("IVGM"), kFormat);
}

TEST_CASE("artifact headers") {
  BinaryWriter w;
  WriteHeader(&w, "IVXX", ArtifactHeader{1, 7, 9});
  BinaryReader r(w.buffer(), "h");
  ArtifactHeader h = ReadHeader(&r, "IVXX");
  CHECK(h.fingerprint == 7);
  CHECK(h.parent == 9);

  BinaryWriter v2;
  WriteHeader(&v2, "IVXX", ArtifactHeader{2, 7, 9});
  BinaryReader r2(v2.buffer(), "h2");
  CHECK_KIND(ReadHeader(&r2, "IVXX"), kFormat);
}

TEST_CASE("file helpers") {
  std::string dir = testutil::TempDir("io");
  WriteFileAtomic(dir + "/a", std::string("x\0y", 3));
  CHECK(ReadFileBytes(dir + "/a") == std::string("x\0y", 3));
  CHECK_KIND(ReadFileBytes(dir + "/missing"), kIo);
  CHECK_KIND(WriteFileAtomic(dir + "/no/such/dir/f", "z"), kIo);
}

TEST_CASE("FormatDouble is shortest round trip") {
  for (double v : {0.0, 1.0, -0.1, 1e-300, 123456.789, 1.0 / 3.0,
                   std::numeric_limits<double>::max()}) {
    std::string s = FormatDouble(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(FormatDouble(0.1) == "0.1");
  CHECK(FormatDouble(2.0) == "2");
}

TEST_CASE("config defaults") {
  PipelineConfig c;
  CHECK(c.mfcc.num_ceps == 13);
  CHECK(c.mfcc.num_mel_bins == 24);
  CHECK(c.mfcc.frame_length_ms == 25.0);
  CHECK(c.mfcc.frame_shift_ms == 10.0);
  CHECK(c.ubm.num_components == 2048);
  CHECK(c.ubm.var_floor_factor == 1e-3);
  CHECK(c.ubm.split_perturb == 0.2);
  CHECK(c.ubm.iters_per_split == 5);
  CHECK(c.top_n == 10);
  CHECK(c.tv_rank == 500);
  CHECK(c.da_method == DaMethod::kNda);
  CHECK(c.da_k == 10);
  CHECK(c.da_alpha == 2.0);
  CHECK(c.da_dim == 250);
}

TEST_CASE("config text parsing") {
  PipelineConfig c;
  ApplyConfigText(
      "# comment\n[ubm]\nnum_components = 64  # trailing\n\n[da]\nmethod = lda\n"
      "dim=12\n[synth]\nbimodal = true\n",
      "t", &c);
  CHECK(c.ubm.num_components == 64);
  CHECK(c.da_method == DaMethod::kLda);
  CHECK(c.da_dim == 12);
  CHECK(c.synth.bimodal);
  SetConfigValue("tv.rank", "32", &c);
  CHECK(c.tv_rank == 32);

  CHECK_KIND(SetConfigValue("tv.nope", "1", &c), kUsage);
  CHECK_KIND(SetConfigValue("tv.rank", "abc", &c), kUsage);
  CHECK_KIND(SetConfigValue("da.method", "pca", &c), kUsage);
  CHECK_KIND(ApplyConfigText("[ubm\n", "t", &c), kUsage);
  CHECK_KIND(ApplyConfigText("[ubm]\nnum_components\n", "t", &c), kUsage);
  CHECK_KIND(LoadConfig("/nonexistent.cfg"), kIo);

  // The rendered config parses back to itself.
  std::string text = FormatConfig(c);
  PipelineConfig d;
  ApplyConfigText(text, "rt", &d);
  CHECK(FormatConfig(d) == text);
  CHECK(SectionText(d, "tv").find("rank=32") != std::string::npos);
  CHECK(SectionText(d, "tv") != SectionText(PipelineConfig(), "tv"));
  CHECK(SectionText(d, "frontend") == SectionText(PipelineConfig(), "frontend"));
}

TEST_CASE("manifest, trial, score and key parsing") {
  auto m = ParseManifest("a /x/a.wav spk1\nb /x/b.wav - /f.txt /s.seg\n\nc /x/c.wav\n", "m");
  REQUIRE(m.size() == 3);
  CHECK(m[0].speaker == "spk1");
  CHECK(m[1].speaker.empty());
  CHECK(m[1].fmllr_path == "/f.txt");
  CHECK(m[1].sad_path == "/s.seg");
  CHECK(m[2].audio_path == "/x/c.wav");
  CHECK(ParseManifest("", "empty").empty());
  CHECK_KIND(ParseManifest("a\n", "m"), kFormat);
  CHECK_KIND(ParseManifest("a p s f s extra\n", "m"), kFormat);
  CHECK_KIND(ParseManifest("a p\na q\n", "m"), kFormat);

  auto trials = ParseTrialList("e1 t1\ne2 t2 target\n", "tr");
  REQUIRE(trials.size() == 2);
  CHECK(trials[1].test == "t2");
  CHECK_KIND(ParseTrialList("only\n", "tr"), kFormat);

  std::vector<ScoredTrial> scores{{"e", "t", 1.0 / 3.0}, {"e", "u", -2.5}};
  auto back = ParseScores(FormatScores(scores), "s");
  REQUIRE(back.size() == 2);
  CHECK(back[0].score == 1.0 / 3.0);
  CHECK(back[1].test == "u");
  CHECK_KIND(ParseScores("e t x\n", "s"), kFormat);
  CHECK_KIND(ParseScores("e t\n", "s"), kFormat);

  auto key = ParseKey("e t target\ne u nontarget\ne t target\n", "k");
  CHECK(key.size() == 2);
  CHECK(key.at({"e", "t"}));
  CHECK_FALSE(key.at({"e", "u"}));
  CHECK_KIND(ParseKey("e t maybe\n", "k"), kFormat);
  CHECK_KIND(ParseKey("e t target\ne t nontarget\n", "k"), kFormat);
}

TEST_CASE("error kinds map to exit codes") {
  CHECK(ExitCodeFor(ErrorKind::kUsage) == 1);
  CHECK(ExitCodeFor(ErrorKind::kIo) == 2);
  CHECK(ExitCodeFor(ErrorKind::kKeyMismatch) == 2);
  CHECK(ExitCodeFor(ErrorKind::kAlignment) == 2);
  CHECK(ExitCodeFor(ErrorKind::kContract) == 3);
  CHECK(ExitCodeFor(ErrorKind::kNumeric) == 3);
  CHECK(std::string(ErrorKindName(ErrorKind::kKeyMismatch)) == "key-mismatch error");
}
