// tests/metrics-test.cc

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

#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "ivnda/base.h"
#include "ivnda/metrics.h"
#include "oracles.h"
#include "test-util.h"

using namespace ivnda;

namespace {

TrialSet Trials(const std::vector<double> &tar, const std::vector<double> &non) {
  TrialSet t;
  for (double s : tar) {
    t.scores.push_back(s);
    t.is_target.push_back(true);
  }
  for (double s : non) {
    t.scores.push_back(s);
    t.is_target.push_back(false);
  }
  return t;
}

TrialSet RandomTrials(Rng *rng, int k, double shift) {
  TrialSet t;
  for (int i = 0; i < k; i++) {
    bool tar = i % 3 == 0;
    t.is_target.push_back(tar);
    t.scores.push_back(rng->Normal() + (tar ? shift : 0.0));
  }
  return t;
}

std::set<std::pair<double, double>> PointSet(const std::vector<DetPoint> &pts) {
  std::set<std::pair<double, double>> s;
  for (const auto &p : pts) s.emplace(p.p_fa, p.p_miss);
  return s;
}

}  // namespace

TEST_CASE("det_points examples") {
  auto perfect = PointSet(DetPoints(Trials({1.0}, {0.0})));
  CHECK(perfect.count({0.0, 0.0}) == 1);

  std::vector<DetPoint> flat = DetPoints(Trials({0.3, 0.3}, {0.3, 0.3, 0.3}));
  REQUIRE(flat.size() == 2);
  CHECK(flat[0].p_fa == 1.0);
  CHECK(flat[0].p_miss == 0.0);
  CHECK(flat[1].p_fa == 0.0);
  CHECK(flat[1].p_miss == 1.0);
  CHECK(std::isinf(flat[1].threshold));

  Rng rng(1);
  TrialSet t = RandomTrials(&rng, 100, 1.0);
  std::vector<DetPoint> pts = DetPoints(t);
  auto sweep = oracle::ThresholdSweep(t.scores, t.is_target);
  REQUIRE(pts.size() == sweep.size());
  for (size_t i = 0; i < pts.size(); i++) {
    CHECK(pts[i].threshold == sweep[i].threshold);
    CHECK(pts[i].p_fa == sweep[i].p_fa);
    CHECK(pts[i].p_miss == sweep[i].p_miss);
    if (i > 0) {
      CHECK(pts[i].p_fa <= pts[i - 1].p_fa);
      CHECK(pts[i].p_miss >= pts[i - 1].p_miss);
    }
  }
  CHECK(pts.front().p_fa == 1.0);
  CHECK(pts.front().p_miss == 0.0);
  CHECK(pts.back().p_fa == 0.0);
  CHECK(pts.back().p_miss == 1.0);
}

TEST_CASE("compute_eer examples") {
  EerResult sep = ComputeEer(Trials({5, 6, 7}, {1, 2, 3}));
  CHECK(sep.eer == 0.0);
  CHECK(ComputeEer(Trials({2, 4}, {1, 3})).eer == doctest::Approx(0.5).epsilon(1e-15));

  Rng rng(2);
  TrialSet same;
  for (int i = 0; i < 20000; i++) {
    same.scores.push_back(rng.Normal());
    same.is_target.push_back(i % 2 == 0);
  }
  CHECK(std::abs(ComputeEer(same).eer - 0.5) < 0.02);
}

TEST_CASE("compute_min_dcf examples") {
  CHECK(ComputeMinDcf(Trials({5, 6}, {1, 2, 3}), Sre08Dcf()) == 0.0);
  TrialSet flat = Trials({1, 1, 1}, {1, 1, 1, 1});
  CHECK(ComputeMinDcf(flat, Sre08Dcf()) == 1.0);
  CHECK(ComputeMinDcf(flat, Sre10Dcf()) == 1.0);
  CHECK(Sre08Dcf().c_miss == 10.0);
  CHECK(Sre08Dcf().p_target == 0.01);
  CHECK(Sre10Dcf().c_miss == 1.0);
  CHECK(Sre10Dcf().p_target == 0.001);

  Rng rng(3);
  for (int trial = 0; trial < 5; trial++) {
    TrialSet t = RandomTrials(&rng, 200, 0.5 * trial);
    auto sweep = oracle::ThresholdSweep(t.scores, t.is_target);
    for (DcfParams p : {Sre08Dcf(), Sre10Dcf(), DcfParams{2.0, 3.0, 0.3}}) {
      double got = ComputeMinDcf(t, p);
      CHECK(got == oracle::SweepMinDcf(sweep, p.c_miss, p.c_fa, p.p_target));
      CHECK(got <= 1.0 + 1e-12);
    }
    CHECK(ComputeEer(t).eer == oracle::SweepEer(sweep));
  }
  CHECK_KIND(ComputeMinDcf(flat, DcfParams{1.0, 1.0, 1.0}), kUsage);
  CHECK_KIND(ComputeMinDcf(flat, DcfParams{-1.0, 1.0, 0.5}), kUsage);
}

TEST_CASE("exhaustive small trial sets") {
  // Every labeling of K ranked scores, with and without tied pairs.
  for (int k = 2; k <= 12; k++) {
    for (int mask = 1; mask < (1 << k) - 1; mask++) {
      for (int tie : {0, 1}) {
        TrialSet t;
        for (int i = 0; i < k; i++) {
          t.scores.push_back(tie ? std::floor(i / 2.0) : static_cast<double>(i));
          t.is_target.push_back((mask >> i) & 1);
        }
        auto sweep = oracle::ThresholdSweep(t.scores, t.is_target);
        CHECK(ComputeEer(t).eer == oracle::SweepEer(sweep));
        CHECK(ComputeMinDcf(t, Sre08Dcf()) <= 1.0 + 1e-12);
      }
    }
    // Keep the run short above K = 8: only every 7th labeling.
    if (k == 8) break;
  }
  for (int k = 9; k <= 12; k++)
    for (int mask = 1; mask < (1 << k) - 1; mask += 7) {
      TrialSet t;
      for (int i = 0; i < k; i++) {
        t.scores.push_back(i);
        t.is_target.push_back((mask >> i) & 1);
      }
      CHECK(ComputeEer(t).eer == oracle::SweepEer(oracle::ThresholdSweep(t.scores, t.is_target)));
    }
}

TEST_CASE("monotone transform invariance and label-swap duality") {
  Rng rng(4);
  TrialSet t = RandomTrials(&rng, 150, 1.2);
  TrialSet m = t;
  for (double &s : m.scores) s = std::exp(2.0 * s) + 3.0;
  CHECK(PointSet(DetPoints(t)) == PointSet(DetPoints(m)));
  CHECK(ComputeEer(t).eer == ComputeEer(m).eer);
  CHECK(ComputeMinDcf(t, Sre10Dcf()) == ComputeMinDcf(m, Sre10Dcf()));
  CHECK(ComputeEer(m).threshold != ComputeEer(t).threshold);

  TrialSet swapped = t;
  for (size_t i = 0; i < t.scores.size(); i++) {
    swapped.scores[i] = -t.scores[i];
    swapped.is_target[i] = !t.is_target[i];
  }
  std::set<std::pair<double, double>> flipped;
  for (const auto &p : DetPoints(t)) flipped.emplace(p.p_miss, p.p_fa);
  CHECK(PointSet(DetPoints(swapped)) == flipped);
  CHECK(ComputeEer(swapped).eer == doctest::Approx(ComputeEer(t).eer).epsilon(1e-12));
}

TEST_CASE("trial set validation and output formats") {
  CHECK_KIND(ComputeEer(Trials({1, 2}, {})), kInsufficientData);
  CHECK_KIND(ComputeEer(Trials({1}, {})), kInsufficientData);
  TrialSet bad = Trials({1}, {2});
  bad.is_target.push_back(true);
  CHECK_KIND(ComputeEer(bad), kShape);
  CHECK_KIND(ComputeEer(Trials({std::nan("")}, {0})), kNumeric);

  std::vector<DetPoint> pts = DetPoints(Trials({2, 4}, {1, 3}));
  std::string csv = FormatDetCsv(pts);
  CHECK(csv.rfind("p_fa,p_miss\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(pts.size()) + 1);
  std::string svg = FormatDetSvg(pts);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
}
