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

#include "steinkit/cli/csv.hpp"

#include <array>
#include <charconv>

namespace steinkit::cli {

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), res.ptr};
}

void write_metrics(std::ostream& out, const std::vector<MetricRow>& rows) {
  out << "index,metric,value\n";
  for (const MetricRow& r : rows) {
    out << r.index << ',' << r.metric << ',' << format_double(r.value) << '\n';
  }
}

void write_table(std::ostream& out, const std::vector<std::string>& columns, const Matrix& values) {
  require(static_cast<Eigen::Index>(columns.size()) == values.cols(), "column count mismatch");
  for (std::size_t j = 0; j < columns.size(); ++j) {
    out << (j ? "," : "") << columns[j];
  }
  out << '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      out << (j ? "," : "") << format_double(values(i, j));
    }
    out << '\n';
  }
}

}  // namespace steinkit::cli
