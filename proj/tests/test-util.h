// tests/test-util.h

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

#ifndef IVNDA_TESTS_TEST_UTIL_H_
#define IVNDA_TESTS_TEST_UTIL_H_

#include <filesystem>
#include <functional>
#include <string>

#include "doctest.h"
#include "ivnda/base.h"

namespace testutil {

// Kind of the ivnda::Error thrown by fn, or "none".
inline std::string ThrownKind(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const ivnda::Error &e) {
    return ivnda::ErrorKindName(e.kind());
  }
  return "none";
}

// Fresh directory under the build tree's temp area.
inline std::string TempDir(const std::string &name) {
  auto dir = std::filesystem::temp_directory_path() / ("ivnda-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace testutil

#define CHECK_KIND(expr, kind)                                             \
  CHECK(testutil::ThrownKind([&] { (void)(expr); }) ==                     \
        std::string(ivnda::ErrorKindName(ivnda::ErrorKind::kind)))

#endif  // IVNDA_TESTS_TEST_UTIL_H_
