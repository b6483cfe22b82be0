// include/ivnda/feature-archive.h

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

#ifndef IVNDA_FEATURE_ARCHIVE_H_
#define IVNDA_FEATURE_ARCHIVE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "ivnda/frontend.h"

namespace ivnda {

struct FeatureRecord {
  std::string id;
  // Processing chain applied, e.g. "mfcc+deltas,sad,drop,cms,fmllr".
  std::string pipeline;
  FeatureMatrix features;
};

struct FeatureArchive {
  uint64_t fingerprint = 0;  // frontend configuration
  std::vector<FeatureRecord> records;

  const FeatureRecord *Find(const std::string &id) const;
};

// Concatenated records, each: "IVFA", u32 version, u64 fingerprint,
// u64 parent, id, pipeline, u32 T, u32 D, f32 frame_shift_ms,
// f32[T*D] row-major frames, u8[T] mask.
std::string EncodeFeatureArchive(const FeatureArchive &archive);
FeatureArchive DecodeFeatureArchive(std::string bytes, const std::string &what);
void WriteFeatureArchive(const std::string &path, const FeatureArchive &archive);
FeatureArchive ReadFeatureArchive(const std::string &path);

}  // namespace ivnda

#endif  // IVNDA_FEATURE_ARCHIVE_H_
