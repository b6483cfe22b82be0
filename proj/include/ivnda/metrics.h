// include/ivnda/metrics.h

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

#ifndef IVNDA_METRICS_H_
#define IVNDA_METRICS_H_

#include <string>
#include <vector>

namespace ivnda {

struct TrialSet {
  std::vector<double> scores;
  std::vector<bool> is_target;

  // Throws unless sizes agree, K >= 2, and both classes are present.
  void Validate() const;
};

struct DcfParams {
  double c_miss = 10.0;
  double c_fa = 1.0;
  double p_target = 0.01;
};

DcfParams Sre08Dcf();  // (10, 1, 0.01)
DcfParams Sre10Dcf();  // (1, 1, 0.001)

// Operating point for "accept when score >= threshold".
struct DetPoint {
  double threshold;  // +inf for the reject-all endpoint
  double p_fa;
  double p_miss;
};

// One point per distinct score used as threshold, in increasing threshold
// order, followed by the reject-all endpoint (0, 1). The lowest score
// gives the accept-all point (1, 0).
std::vector<DetPoint> DetPoints(const TrialSet &trials);

struct EerResult {
  double eer;
  double threshold;
};

// Crossing of P_miss = P_fa on the DET trajectory, linearly interpolated
// between adjacent operating points.
EerResult ComputeEer(const TrialSet &trials);

// min over operating points of c_miss P_miss p_t + c_fa P_fa (1 - p_t),
// divided by min(c_miss p_t, c_fa (1 - p_t)).
double ComputeMinDcf(const TrialSet &trials, const DcfParams &params);

std::string FormatDetCsv(const std::vector<DetPoint> &points);
// Probability-axis polyline; not a normal-deviate plot.
std::string FormatDetSvg(const std::vector<DetPoint> &points);

}  // namespace ivnda

#endif  // IVNDA_METRICS_H_
