// Copyright 2026 The Detkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Entry point for the `detkit` command-line tool, split from main() so tests
// can drive it in-process.
#ifndef DETKIT_TOOLS_CLI_H_
#define DETKIT_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace detkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

// Name of the environment variable holding the default output directory.
inline constexpr char kOutputDirEnv[] = "DETKIT_OUTPUT_DIR";

// Runs one command. `args` excludes the program name.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace detkit::cli

#endif  // DETKIT_TOOLS_CLI_H_
