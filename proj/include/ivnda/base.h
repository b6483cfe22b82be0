// include/ivnda/base.h

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

#ifndef IVNDA_BASE_H_
#define IVNDA_BASE_H_

#include <cstdint>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ivnda {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                Eigen::RowMajor>;

enum class ErrorKind {
  kUsage,
  kIo,
  kFormat,
  kUnsupportedFormat,
  kEmptyInput,
  kInsufficientData,
  kNoSpeech,
  kAlignment,
  kRange,
  kKeyMismatch,
  kShape,
  kDegenerate,
  kNumeric,
  kContract,
};

const char *ErrorKindName(ErrorKind kind);

// Process exit code for an error: 1 usage, 2 data, 3 numeric/contract.
int ExitCodeFor(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }
  int ExitCode() const { return ExitCodeFor(kind_); }

 private:
  ErrorKind kind_;
};

// Builds an error message from stream-able pieces.
template <typename... Args>
[[noreturn]] void Fail(ErrorKind kind, const Args &...args) {
  std::ostringstream os;
  (os << ... << args);
  throw Error(kind, os.str());
}

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

// Current level, read once from IVNDA_LOG (default warn).
LogLevel CurrentLogLevel();
void SetLogLevel(LogLevel level);
void LogMessage(LogLevel level, const std::string &msg);

#define IVNDA_LOG(level, expr)                                         \
  do {                                                                 \
    if (static_cast<int>(level) <=                                     \
        static_cast<int>(::ivnda::CurrentLogLevel())) {                \
      std::ostringstream ivnda_log_os_;                                \
      ivnda_log_os_ << expr;                                           \
      ::ivnda::LogMessage(level, ivnda_log_os_.str());                 \
    }                                                                  \
  } while (0)

#define IVNDA_WARN(expr) IVNDA_LOG(::ivnda::LogLevel::kWarn, expr)
#define IVNDA_INFO(expr) IVNDA_LOG(::ivnda::LogLevel::kInfo, expr)
#define IVNDA_DEBUG(expr) IVNDA_LOG(::ivnda::LogLevel::kDebug, expr)

// Seeded generator whose output is identical on every platform; the
// standard distributions are implementation-defined, so normals come
// from Box-Muller over splitmix64.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}
  uint64_t NextU64();
  // Uniform in [0, 1).
  double Uniform();
  double Normal();
  // Uniform integer in [0, n).
  uint64_t Below(uint64_t n);
  Vector NormalVector(int dim);

 private:
  uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Runs body(i) for i in [0, n) on up to `workers` threads. Callers keep
// results in per-index slots so merges stay in index order.
void ParallelFor(int n, int workers, const std::function<void(int)> &body);

// FNV-1a, used for artifact fingerprints.
class Fingerprint {
 public:
  Fingerprint &Add(const std::string &s);
  Fingerprint &Add(uint64_t v);
  Fingerprint &Add(double v);
  uint64_t value() const { return h_; }

 private:
  uint64_t h_ = 1469598103934665603ULL;
  void Mix(const void *data, size_t n);
};

}  // namespace ivnda

#endif  // IVNDA_BASE_H_
