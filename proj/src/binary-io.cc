// src/binary-io.cc

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

#include "ivnda/binary-io.h"

#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ivnda {

namespace {

template <typename T>
void AppendRaw(std::string *buf, T v) {
  static_assert(std::endian::native == std::endian::little,
                "big-endian hosts are not supported");
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  buf->append(bytes, sizeof(T));
}

}  // namespace

void BinaryWriter::Magic(std::string_view magic) { buf_.append(magic); }
void BinaryWriter::U32(uint32_t v) { AppendRaw(&buf_, v); }
void BinaryWriter::U64(uint64_t v) { AppendRaw(&buf_, v); }
void BinaryWriter::F32(float v) { AppendRaw(&buf_, v); }
void BinaryWriter::F64(double v) { AppendRaw(&buf_, v); }
void BinaryWriter::Bytes(std::string_view s) { buf_.append(s); }

void BinaryWriter::String(std::string_view s) {
  U32(static_cast<uint32_t>(s.size()));
  buf_.append(s);
}

void BinaryWriter::F64Array(const double *data, size_t n) {
  buf_.append(reinterpret_cast<const char *>(data), n * sizeof(double));
}

void BinaryWriter::MatrixF64(const Matrix &m) {
  for (Eigen::Index r = 0; r < m.rows(); r++)
    for (Eigen::Index c = 0; c < m.cols(); c++) F64(m(r, c));
}

void BinaryWriter::VectorF64(const Vector &v) { F64Array(v.data(), v.size()); }

void BinaryReader::Need(size_t n) {
  if (data_.size() - pos_ < n)
    Fail(ErrorKind::kFormat, what_, ": truncated at byte ", pos_,
         " (needed ", n, " more)");
}

bool BinaryReader::NextIs(std::string_view magic) const {
  return data_.size() - pos_ >= magic.size() &&
         std::string_view(data_).substr(pos_, magic.size()) == magic;
}

void BinaryReader::ExpectMagic(std::string_view magic) {
  if (!NextIs(magic))
    Fail(ErrorKind::kFormat, what_, ": expected magic \"", magic,
         "\" at byte ", pos_);
  pos_ += magic.size();
}

uint32_t BinaryReader::U32() {
  Need(4);
  uint32_t v;
  std::memcpy(&v, data_.data() + pos_, 4);
  pos_ += 4;
  return v;
}

uint64_t BinaryReader::U64() {
  Need(8);
  uint64_t v;
  std::memcpy(&v, data_.data() + pos_, 8);
  pos_ += 8;
  return v;
}

float BinaryReader::F32() {
  Need(4);
  float v;
  std::memcpy(&v, data_.data() + pos_, 4);
  pos_ += 4;
  return v;
}

double BinaryReader::F64() {
  Need(8);
  double v;
  std::memcpy(&v, data_.data() + pos_, 8);
  pos_ += 8;
  return v;
}

std::string BinaryReader::Bytes(size_t n) {
  Need(n);
  std::string s = data_.substr(pos_, n);
  pos_ += n;
  return s;
}

std::string BinaryReader::String() { return Bytes(U32()); }

Matrix BinaryReader::MatrixF64(int rows, int cols) {
  Need(static_cast<size_t>(rows) * cols * 8);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; r++)
    for (int c = 0; c < cols; c++) m(r, c) = F64();
  return m;
}

Vector BinaryReader::VectorF64(int n) {
  Need(static_cast<size_t>(n) * 8);
  Vector v(n);
  for (int i = 0; i < n; i++) v(i) = F64();
  return v;
}

std::string ReadFileBytes(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorKind::kIo, "cannot open ", path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::string ReadFileText(const std::string &path) { return ReadFileBytes(path); }

void WriteFileAtomic(const std::string &path, std::string_view contents) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) Fail(ErrorKind::kIo, "cannot write ", tmp);
    os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!os) Fail(ErrorKind::kIo, "write failed for ", tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) Fail(ErrorKind::kIo, "cannot rename ", tmp, " to ", path, ": ",
               ec.message());
}

void WriteHeader(BinaryWriter *w, std::string_view magic,
                 const ArtifactHeader &h) {
  w->Magic(magic);
  w->U32(h.version);
  w->U64(h.fingerprint);
  w->U64(h.parent);
}

ArtifactHeader ReadHeader(BinaryReader *r, std::string_view magic,
                          uint32_t max_version) {
  r->ExpectMagic(magic);
  ArtifactHeader h;
  h.version = r->U32();
  if (h.version == 0 || h.version > max_version)
    Fail(ErrorKind::kFormat, r->what(), ": unsupported version ", h.version);
  h.fingerprint = r->U64();
  h.parent = r->U64();
  return h;
}

std::string FormatDouble(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace ivnda
