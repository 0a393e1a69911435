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

#ifndef STEINKIT_RNG_HPP
#define STEINKIT_RNG_HPP

#include <cstdint>
#include <random>

#include "steinkit/common.hpp"

namespace steinkit {

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Random stream keyed by (master seed, stream id).
///
/// Streams with different ids are seeded through SplitMix64 so per-trial,
/// per-particle and per-replicate draws do not depend on scheduling order.
class Rng {
 public:
  explicit Rng(std::uint64_t master_seed, std::uint64_t stream_id = 0);

  /// Child stream derived from this stream's key. Does not advance this stream.
  [[nodiscard]] Rng split(std::uint64_t stream_id) const;

  [[nodiscard]] std::uint64_t key() const noexcept { return key_; }

  double uniform();                              // [0, 1)
  double uniform(double lo, double hi);          // [lo, hi)
  double normal();                               // N(0, 1)
  std::size_t uniform_index(std::size_t n);      // {0, ..., n-1}

  Vector normal_vector(Eigen::Index d);
  /// n x d matrix of independent N(0, 1) entries.
  Matrix normal_matrix(Eigen::Index n, Eigen::Index d);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace steinkit

#endif  // STEINKIT_RNG_HPP
