// include/ivnda/cli.h

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

#ifndef IVNDA_CLI_H_
#define IVNDA_CLI_H_

#include <string>
#include <vector>

namespace ivnda {

// Entry point of the ivnda tool; returns the process exit code.
int RunCli(int argc, char **argv);
// args[0] is the program name.
int RunCli(const std::vector<std::string> &args);

}  // namespace ivnda

#endif  // IVNDA_CLI_H_
