// src/feature-archive.cc

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

#include "ivnda/feature-archive.h"

#include <cmath>

#include "ivnda/binary-io.h"

namespace ivnda {

const FeatureRecord *FeatureArchive::Find(const std::string &id) const {
  for (const auto &r : records)
    if (r.id == id) return &r;
  return nullptr;
}

std::string EncodeFeatureArchive(const FeatureArchive &archive) {
  BinaryWriter w;
  for (const auto &rec : archive.records) {
    const FeatureMatrix &f = rec.features;
    WriteHeader(&w, "IVFA", {1, archive.fingerprint, 0});
    w.String(rec.id);
    w.String(rec.pipeline);
    w.U32(static_cast<uint32_t>(f.NumFrames()));
    w.U32(static_cast<uint32_t>(f.Dim()));
    w.F32(static_cast<float>(f.frame_shift_ms));
    for (int t = 0; t < f.NumFrames(); t++)
      for (int d = 0; d < f.Dim(); d++)
        w.F32(static_cast<float>(f.frames(t, d)));
    std::string mask(f.speech_mask.begin(), f.speech_mask.end());
    w.Bytes(mask);
  }
  return w.buffer();
}

FeatureArchive DecodeFeatureArchive(std::string bytes, const std::string &what) {
  BinaryReader r(std::move(bytes), what);
  FeatureArchive archive;
  while (!r.AtEnd()) {
    ArtifactHeader h = ReadHeader(&r, "IVFA");
    if (!archive.records.empty() && h.fingerprint != archive.fingerprint)
      Fail(ErrorKind::kContract, what,
           ": records written with different frontend configurations");
    archive.fingerprint = h.fingerprint;
    FeatureRecord rec;
    rec.id = r.String();
    rec.pipeline = r.String();
    uint32_t num_frames = r.U32(), dim = r.U32();
    rec.features.frame_shift_ms = r.F32();
    if (static_cast<uint64_t>(num_frames) * dim * 4 > r.Remaining())
      Fail(ErrorKind::kFormat, what, ": record '", rec.id, "' truncated");
    rec.features.frames.resize(num_frames, dim);
    for (uint32_t t = 0; t < num_frames; t++)
      for (uint32_t d = 0; d < dim; d++) {
        float v = r.F32();
        if (!std::isfinite(v))
          Fail(ErrorKind::kFormat, what, ": non-finite value in '", rec.id,
               "'");
        rec.features.frames(t, d) = v;
      }
    std::string mask = r.Bytes(num_frames);
    rec.features.speech_mask.assign(mask.begin(), mask.end());
    for (uint8_t m : rec.features.speech_mask)
      if (m > 1) Fail(ErrorKind::kFormat, what, ": mask byte not 0/1");
    archive.records.push_back(std::move(rec));
  }
  return archive;
}

void WriteFeatureArchive(const std::string &path,
                         const FeatureArchive &archive) {
  WriteFileAtomic(path, EncodeFeatureArchive(archive));
}

FeatureArchive ReadFeatureArchive(const std::string &path) {
  return DecodeFeatureArchive(ReadFileBytes(path), path);
}

}  // namespace ivnda
