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

#ifndef STEINKIT_CLI_CSV_HPP
#define STEINKIT_CLI_CSV_HPP

#include <ostream>
#include <string>
#include <vector>

#include "steinkit/common.hpp"

namespace steinkit::cli {

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

struct MetricRow {
  long index = 0;  // iteration or trial
  std::string metric;
  double value = 0.0;
};

void write_metrics(std::ostream& out, const std::vector<MetricRow>& rows);

/// One row per matrix row; `columns` must match the column count.
void write_table(std::ostream& out, const std::vector<std::string>& columns, const Matrix& values);

}  // namespace steinkit::cli

#endif  // STEINKIT_CLI_CSV_HPP
