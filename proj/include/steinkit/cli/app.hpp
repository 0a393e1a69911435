// Copyright 2026 The steinkit Authors.
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

#ifndef STEINKIT_CLI_APP_HPP
#define STEINKIT_CLI_APP_HPP

namespace steinkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Parses flags, runs the experiment and writes outputs. Never throws.
int run_main(int argc, char** argv);

}  // namespace steinkit::cli

#endif  // STEINKIT_CLI_APP_HPP
