// include/ivnda/binary-io.h

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

#ifndef IVNDA_BINARY_IO_H_
#define IVNDA_BINARY_IO_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "ivnda/base.h"

namespace ivnda {

// Little-endian serializer into an in-memory buffer.
class BinaryWriter {
 public:
  void Magic(std::string_view magic);
  void U32(uint32_t v);
  void U64(uint64_t v);
  void F32(float v);
  void F64(double v);
  void Bytes(std::string_view s);
  // u32 length followed by the bytes.
  void String(std::string_view s);
  void F64Array(const double *data, size_t n);
  // Row-major dump of a matrix.
  void MatrixF64(const Matrix &m);
  void VectorF64(const Vector &v);

  const std::string &buffer() const { return buf_; }

 private:
  std::string buf_;
};

class BinaryReader {
 public:
  // `what` names the source in error messages.
  BinaryReader(std::string data, std::string what)
      : data_(std::move(data)), what_(std::move(what)) {}

  void ExpectMagic(std::string_view magic);
  uint32_t U32();
  uint64_t U64();
  float F32();
  double F64();
  std::string Bytes(size_t n);
  std::string String();
  Matrix MatrixF64(int rows, int cols);
  Vector VectorF64(int n);

  bool AtEnd() const { return pos_ == data_.size(); }
  size_t Remaining() const { return data_.size() - pos_; }
  // Peeks whether the next bytes equal `magic`.
  bool NextIs(std::string_view magic) const;
  const std::string &what() const { return what_; }

 private:
  void Need(size_t n);
  std::string data_;
  std::string what_;
  size_t pos_ = 0;
};

std::string ReadFileBytes(const std::string &path);
std::string ReadFileText(const std::string &path);

// Writes to path.tmp then renames over path.
void WriteFileAtomic(const std::string &path, std::string_view contents);

// Header shared by every model and archive file:
// magic, u32 version, u64 fingerprint, u64 parent fingerprint.
struct ArtifactHeader {
  uint32_t version = 1;
  uint64_t fingerprint = 0;
  uint64_t parent = 0;
};

void WriteHeader(BinaryWriter *w, std::string_view magic,
                 const ArtifactHeader &h);
ArtifactHeader ReadHeader(BinaryReader *r, std::string_view magic,
                          uint32_t max_version = 1);

// Shortest decimal form that parses back to the same double.
std::string FormatDouble(double v);

}  // namespace ivnda

#endif  // IVNDA_BINARY_IO_H_
