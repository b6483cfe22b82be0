// src/base.cc

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

#include "ivnda/base.h"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

namespace ivnda {

const char *ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return "usage error";
    case ErrorKind::kIo: return "io error";
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kUnsupportedFormat: return "unsupported-format error";
    case ErrorKind::kEmptyInput: return "empty-input error";
    case ErrorKind::kInsufficientData: return "insufficient-data error";
    case ErrorKind::kNoSpeech: return "no-speech error";
    case ErrorKind::kAlignment: return "alignment error";
    case ErrorKind::kRange: return "range error";
    case ErrorKind::kKeyMismatch: return "key-mismatch error";
    case ErrorKind::kShape: return "shape error";
    case ErrorKind::kDegenerate: return "degenerate-data error";
    case ErrorKind::kNumeric: return "numeric error";
    case ErrorKind::kContract: return "contract error";
  }
  return "error";
}

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
      return 1;
    case ErrorKind::kShape:
    case ErrorKind::kDegenerate:
    case ErrorKind::kNumeric:
    case ErrorKind::kContract:
      return 3;
    default:
      return 2;
  }
}

namespace {

LogLevel ParseLogLevel(const char *s) {
  if (s == nullptr) return LogLevel::kWarn;
  std::string v(s);
  if (v == "error") return LogLevel::kError;
  if (v == "info") return LogLevel::kInfo;
  if (v == "debug") return LogLevel::kDebug;
  return LogLevel::kWarn;
}

std::atomic<int> &LevelSlot() {
  static std::atomic<int> level(
      static_cast<int>(ParseLogLevel(std::getenv("IVNDA_LOG"))));
  return level;
}

std::mutex log_mutex;

}  // namespace

LogLevel CurrentLogLevel() { return static_cast<LogLevel>(LevelSlot().load()); }

void SetLogLevel(LogLevel level) { LevelSlot() = static_cast<int>(level); }

void LogMessage(LogLevel level, const std::string &msg) {
  static const char *names[] = {"ERROR", "WARN", "INFO", "DEBUG"};
  std::lock_guard<std::mutex> lock(log_mutex);
  std::cerr << names[static_cast<int>(level)] << " (ivnda) " << msg << '\n';
}

uint64_t Rng::NextU64() {
  uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::Uniform() { return (NextU64() >> 11) * 0x1.0p-53; }

double Rng::Normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = Uniform();
  while (u1 <= 0.0) u1 = Uniform();
  double u2 = Uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

uint64_t Rng::Below(uint64_t n) { return n == 0 ? 0 : NextU64() % n; }

Vector Rng::NormalVector(int dim) {
  Vector v(dim);
  for (int i = 0; i < dim; i++) v(i) = Normal();
  return v;
}

void ParallelFor(int n, int workers, const std::function<void(int)> &body) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; i++) body(i);
    return;
  }
  int num_threads = std::min(workers, n);
  std::atomic<int> next(0);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  for (int w = 0; w < num_threads; w++) {
    threads.emplace_back([&]() {
      for (int i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto &t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

void Fingerprint::Mix(const void *data, size_t n) {
  const auto *p = static_cast<const unsigned char *>(data);
  for (size_t i = 0; i < n; i++) {
    h_ ^= p[i];
    h_ *= 1099511628211ULL;
  }
}

Fingerprint &Fingerprint::Add(const std::string &s) {
  uint64_t len = s.size();
  Mix(&len, sizeof(len));
  Mix(s.data(), s.size());
  return *this;
}

Fingerprint &Fingerprint::Add(uint64_t v) {
  Mix(&v, sizeof(v));
  return *this;
}

Fingerprint &Fingerprint::Add(double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  return Add(bits);
}

}  // namespace ivnda
