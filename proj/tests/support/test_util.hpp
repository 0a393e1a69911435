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


#ifndef STEINKIT_TESTS_TEST_UTIL_HPP
#define STEINKIT_TESTS_TEST_UTIL_HPP

#include <gtest/gtest.h>

#include "steinkit/common.hpp"

#define EXPECT_STEINKIT_ERROR(stmt, expected_kind)                                 \
  do {                                                                             \
    try {                                                                          \
      stmt;                                                                        \
      ADD_FAILURE() << "expected " << steinkit::to_string(expected_kind);          \
    } catch (const steinkit::Error& e) {                                           \
      EXPECT_EQ(e.kind(), expected_kind) << e.what();                              \
    }                                                                              \
  } while (0)

inline steinkit::Vector vec(std::initializer_list<double> v) {
  steinkit::Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) {
    out[i++] = x;
  }
  return out;
}

#endif  // STEINKIT_TESTS_TEST_UTIL_HPP
