// Copyright 2026 The Causal Retrieval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CAUSAL_TOOLS_CLI_HPP_
#define CAUSAL_TOOLS_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace causal::cli {

inline constexpr const char* kToolName = "causal-retrieval";
inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 2;
inline constexpr int kDataFormat = 3;
inline constexpr int kNumeric = 4;

// Runs one command line (args exclude the program name). Everything the command
// prints goes to `out` / `err`; files are written as the flags say.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace causal::cli

#endif  // CAUSAL_TOOLS_CLI_HPP_
