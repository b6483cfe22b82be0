// src/metrics.cc

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

#include "ivnda/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "ivnda/base.h"
#include "ivnda/binary-io.h"

namespace ivnda {

void TrialSet::Validate() const {
  if (scores.size() != is_target.size())
    Fail(ErrorKind::kShape, scores.size(), " scores vs ", is_target.size(),
         " labels");
  if (scores.size() < 2) Fail(ErrorKind::kInsufficientData, "need >= 2 trials");
  size_t targets = std::count(is_target.begin(), is_target.end(), true);
  if (targets == 0 || targets == scores.size())
    Fail(ErrorKind::kInsufficientData,
         "need at least one target and one non-target trial");
  for (double s : scores)
    if (std::isnan(s)) Fail(ErrorKind::kNumeric, "NaN score");
}

DcfParams Sre08Dcf() { return {10.0, 1.0, 0.01}; }
DcfParams Sre10Dcf() { return {1.0, 1.0, 0.001}; }

std::vector<DetPoint> DetPoints(const TrialSet &trials) {
  trials.Validate();
  const size_t k = trials.scores.size();
  std::vector<size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return trials.scores[a] < trials.scores[b];
  });
  const size_t num_tar =
      std::count(trials.is_target.begin(), trials.is_target.end(), true);
  const size_t num_non = k - num_tar;
  // Walk thresholds upward; everything strictly below the threshold is
  // rejected.
  size_t rejected_tar = 0, rejected_non = 0;
  std::vector<DetPoint> points;
  for (size_t i = 0; i < k;) {
    double thr = trials.scores[order[i]];
    points.push_back({thr, static_cast<double>(num_non - rejected_non) / num_non,
                      static_cast<double>(rejected_tar) / num_tar});
    while (i < k && trials.scores[order[i]] == thr) {
      if (trials.is_target[order[i]]) rejected_tar++; else rejected_non++;
      i++;
    }
  }
  points.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0});
  return points;
}

EerResult ComputeEer(const TrialSet &trials) {
  std::vector<DetPoint> pts = DetPoints(trials);
  // p_miss - p_fa is non-decreasing along the list; it starts at -1 and
  // ends at +1.
  for (size_t i = 0; i < pts.size(); i++) {
    double d = pts[i].p_miss - pts[i].p_fa;
    if (d == 0.0) return {pts[i].p_fa, pts[i].threshold};
    if (d > 0.0) {
      const DetPoint &a = pts[i - 1], &b = pts[i];
      double da = a.p_miss - a.p_fa;
      double lambda = -da / (d - da);
      double eer = a.p_fa + lambda * (b.p_fa - a.p_fa);
      double thr = std::isinf(b.threshold)
                       ? a.threshold
                       : a.threshold + lambda * (b.threshold - a.threshold);
      return {eer, thr};
    }
  }
  Fail(ErrorKind::kNumeric, "DET trajectory never crosses the diagonal");
}

double ComputeMinDcf(const TrialSet &trials, const DcfParams &params) {
  if (!(params.p_target > 0.0 && params.p_target < 1.0) ||
      !(params.c_miss > 0.0) || !(params.c_fa > 0.0))
    Fail(ErrorKind::kUsage, "invalid DCF parameters");
  std::vector<DetPoint> pts = DetPoints(trials);
  double best = std::numeric_limits<double>::infinity();
  for (const DetPoint &p : pts)
    best = std::min(best, params.c_miss * p.p_miss * params.p_target +
                              params.c_fa * p.p_fa * (1.0 - params.p_target));
  double norm = std::min(params.c_miss * params.p_target,
                         params.c_fa * (1.0 - params.p_target));
  return best / norm;
}

std::string FormatDetCsv(const std::vector<DetPoint> &points) {
  std::ostringstream os;
  os << "p_fa,p_miss\n";
  for (const auto &p : points)
    os << FormatDouble(p.p_fa) << ',' << FormatDouble(p.p_miss) << '\n';
  return os.str();
}

std::string FormatDetSvg(const std::vector<DetPoint> &points) {
  const int size = 400, margin = 40;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size + 2 * margin
     << "\" height=\"" << size + 2 * margin << "\">\n";
  os << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << size
     << "\" height=\"" << size << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << margin + size / 2 << "\" y=\"" << size + margin + 30
     << "\" text-anchor=\"middle\">P(false alarm)</text>\n";
  os << "<text x=\"12\" y=\"" << margin + size / 2
     << "\" transform=\"rotate(-90 12 " << margin + size / 2
     << ")\" text-anchor=\"middle\">P(miss)</text>\n";
  os << "<polyline fill=\"none\" stroke=\"blue\" points=\"";
  for (const auto &p : points) {
    double x = margin + p.p_fa * size, y = margin + (1.0 - p.p_miss) * size;
    os << x << ',' << y << ' ';
  }
  os << "\"/>\n</svg>\n";
  return os.str();
}

}  // namespace ivnda
